#include "majflow/prob.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "majflow/errors.hpp"

namespace majflow {

double normalization_tolerance(std::size_t d) {
  return 1e-10 * static_cast<double>(d);
}

ProbabilityVector::ProbabilityVector(std::vector<double> entries)
    : p_(std::move(entries)) {
  if (p_.empty()) throw invalid_input("probability vector must be nonempty");
  const double tol = normalization_tolerance(p_.size());
  double sum = 0.0;
  for (double x : p_) {
    if (!std::isfinite(x)) throw invalid_input("probability entry is not finite");
    if (x < -tol)
      throw invalid_input("negative probability entry " + std::to_string(x));
    sum += x;
  }
  if (std::abs(sum - 1.0) > tol)
    throw invalid_input("probability vector sums to " + std::to_string(sum));
}

ProbabilityVector ProbabilityVector::uniform(std::size_t d) {
  if (d == 0) throw invalid_input("dimension must be >= 1");
  return ProbabilityVector(std::vector<double>(d, 1.0 / static_cast<double>(d)));
}

ProbabilityVector ProbabilityVector::pure(std::size_t d) {
  if (d == 0) throw invalid_input("dimension must be >= 1");
  std::vector<double> v(d, 0.0);
  v[0] = 1.0;
  return ProbabilityVector(std::move(v));
}

std::vector<std::size_t> descending_order(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });
  return idx;
}

ProbabilityVector sort_descending(const ProbabilityVector& p) {
  std::vector<double> v = p.entries();
  std::stable_sort(v.begin(), v.end(), std::greater<>());
  return ProbabilityVector(std::move(v));
}

bool is_sorted_descending(const ProbabilityVector& p) {
  return std::is_sorted(p.begin(), p.end(), std::greater<>());
}

namespace {

std::vector<double> top_partial_sums(const ProbabilityVector& p) {
  std::vector<double> v = p.entries();
  std::sort(v.begin(), v.end(), std::greater<>());
  std::partial_sum(v.begin(), v.end(), v.begin());
  return v;
}

void require_common_dim(std::size_t a, std::size_t b) {
  if (a != b)
    throw invalid_input("dimension mismatch: " + std::to_string(a) + " vs " +
                        std::to_string(b));
}

}  // namespace

bool majorizes(const ProbabilityVector& x, const ProbabilityVector& y,
               double tol) {
  require_common_dim(x.size(), y.size());
  const auto sx = top_partial_sums(x);
  const auto sy = top_partial_sums(y);
  const std::size_t d = sx.size();
  for (std::size_t k = 0; k + 1 < d; ++k)
    if (sx[k] < sy[k] - tol) return false;
  return std::abs(sx[d - 1] - sy[d - 1]) <= tol;
}

ProbabilityVector majorization_infimum(const std::vector<ProbabilityVector>& S) {
  if (S.empty()) throw invalid_input("majorization infimum of an empty set");
  const std::size_t d = S.front().size();
  std::vector<double> y(d, 1.0);
  for (const auto& q : S) {
    require_common_dim(d, q.size());
    const auto sq = top_partial_sums(q);
    for (std::size_t k = 0; k < d; ++k) y[k] = std::min(y[k], sq[k]);
  }
  y[d - 1] = 1.0;  // every member sums to one; drop rounding
  std::vector<double> s(d);
  std::adjacent_difference(y.begin(), y.end(), s.begin());
  // y is concave in k, so s is already nonincreasing up to rounding.
  for (auto& v : s) v = std::max(v, 0.0);
  std::stable_sort(s.begin(), s.end(), std::greater<>());
  return ProbabilityVector(std::move(s));
}

std::optional<ProbabilityVector> majorization_minimum(
    const std::vector<ProbabilityVector>& S, double tol) {
  const auto inf = majorization_infimum(S);
  for (const auto& q : S)
    if (majorizes(inf, q, tol)) return q;  // q ≺ inf ≺ q
  return std::nullopt;
}

double l1_distance(const std::vector<double>& a, const std::vector<double>& b) {
  require_common_dim(a.size(), b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

double tv_distance(const ProbabilityVector& p, const ProbabilityVector& q) {
  return 0.5 * l1_distance(p.entries(), q.entries());
}

}  // namespace majflow
