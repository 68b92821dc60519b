#include "majflow/ball.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "majflow/errors.hpp"

namespace majflow {

namespace {

void check_radius(double eps) {
  if (!(eps >= 0.0)) throw invalid_input("ball radius must be >= 0");
}

std::vector<double> permuted(const std::vector<double>& x,
                             const std::vector<std::size_t>& order) {
  std::vector<double> s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[order[i]];
  return s;
}

std::vector<double> unpermuted(const std::vector<double>& s,
                               const std::vector<std::size_t>& order) {
  std::vector<double> x(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) x[order[i]] = s[i];
  return x;
}

BallExtremumDetail uniform_detail(std::size_t d) {
  const double u = 1.0 / static_cast<double>(d);
  return {u, 0, u, 0, ProbabilityVector::uniform(d)};
}

}  // namespace

BallExtremumDetail majorization_minimizer(const ProbabilityVector& r, double eps) {
  check_radius(eps);
  const std::size_t d = r.size();
  if (eps == 0.0) {
    const auto s = sort_descending(r);
    // Block data still describes the extremes of r.
    return {s[0], 0, s[d - 1], 0, r};
  }
  if (tv_distance(r, ProbabilityVector::uniform(d)) <= eps) return uniform_detail(d);

  const auto order = descending_order(r.entries());
  const auto x = permuted(r.entries(), order);
  const double slack = 1e-12 * std::max(x[0], 1e-300);

  // First m with (S_m - eps)/m >= x_{m+1}: everything above the new level is
  // flattened, nothing below it is touched.
  int m_plus = 0;
  double gamma_plus = 0.0, head = 0.0;
  for (std::size_t m = 1; m < d; ++m) {
    head += x[m - 1];
    const double g = (head - eps) / static_cast<double>(m);
    if (g >= x[m] - slack) {
      m_plus = static_cast<int>(m);
      gamma_plus = g;
      break;
    }
  }
  int m_minus = 0;
  double gamma_minus = 0.0, tail = 0.0;
  for (std::size_t m = 1; m < d; ++m) {
    tail += x[d - m];
    const double g = (tail + eps) / static_cast<double>(m);
    if (g <= x[d - m - 1] + slack) {
      m_minus = static_cast<int>(m);
      gamma_minus = g;
      break;
    }
  }
  // Both scans always succeed when TV(r,u) > eps; overlapping blocks can only
  // come from rounding right at the boundary, where u is the answer.
  if (m_plus == 0 || m_minus == 0 ||
      static_cast<std::size_t>(m_plus + m_minus) > d || gamma_plus < gamma_minus)
    return uniform_detail(d);

  std::vector<double> s = x;
  for (int i = 0; i < m_plus; ++i) s[i] = gamma_plus;
  for (int i = 0; i < m_minus; ++i) s[d - 1 - i] = gamma_minus;
  return {gamma_plus, m_plus, gamma_minus, m_minus,
          ProbabilityVector(unpermuted(s, order))};
}

ProbabilityVector majorization_maximizer(const ProbabilityVector& r, double eps) {
  check_radius(eps);
  const std::size_t d = r.size();
  if (eps == 0.0 || d == 1) return r;
  const auto order = descending_order(r.entries());
  std::vector<double> s = permuted(r.entries(), order);

  if (s[d - 1] > eps) {
    s[0] += eps;
    s[d - 1] -= eps;
    return ProbabilityVector(unpermuted(s, order));
  }
  // l = largest count of smallest entries whose total Q_l stays <= eps
  std::size_t l = 0;
  double Q = 0.0;
  while (l < d - 1 && Q + s[d - 1 - l] <= eps) {
    Q += s[d - 1 - l];
    ++l;
  }
  if (l >= d - 1) {
    std::vector<double> e(d, 0.0);
    e[0] = 1.0;
    return ProbabilityVector(unpermuted(e, order));
  }
  s[0] += eps;
  s[d - l - 1] -= eps - Q;
  for (std::size_t i = d - l; i < d; ++i) s[i] = 0.0;
  return ProbabilityVector(unpermuted(s, order));
}

ProbabilityVector sample_ball_point(const ProbabilityVector& r, double eps,
                                    std::mt19937_64& rng) {
  check_radius(eps);
  const std::size_t d = r.size();
  if (d == 1 || eps == 0.0) return r;

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::gamma_distribution<double> expo(1.0, 1.0);  // Dirichlet(1,...,1) weights

  std::vector<std::size_t> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::uniform_int_distribution<std::size_t> split(1, d - 1);
  const std::size_t n_loss = split(rng);
  std::uniform_int_distribution<std::size_t> gains(1, d - n_loss);
  const std::size_t n_gain = gains(rng);

  // Half the draws sit on the sphere TV = eps, where extremes are attained.
  const double t = unif(rng) < 0.5 ? eps : eps * unif(rng);

  std::vector<double> q = r.entries();
  std::vector<double> w(n_loss);
  double wsum = 0.0;
  for (auto& x : w) wsum += (x = expo(rng));
  double removed = 0.0;
  for (std::size_t k = 0; k < n_loss; ++k) {
    const std::size_t i = idx[k];
    const double take = std::min(q[i], t * w[k] / wsum);
    q[i] -= take;
    removed += take;
  }
  std::vector<double> v(n_gain);
  double vsum = 0.0;
  for (auto& x : v) vsum += (x = expo(rng));
  for (std::size_t k = 0; k < n_gain; ++k) q[idx[n_loss + k]] += removed * v[k] / vsum;
  return ProbabilityVector(std::move(q));
}

bool randomized_dominance_oracle(const ProbabilityVector& r, double eps,
                                 int n_samples, std::uint64_t rng_seed,
                                 double tol) {
  if (n_samples < 1) throw invalid_input("n_samples must be >= 1");
  const auto lo = majorization_minimizer(r, eps).result;
  const auto hi = majorization_maximizer(r, eps);
  std::mt19937_64 rng(rng_seed);
  for (int k = 0; k < n_samples; ++k) {
    const auto q = sample_ball_point(r, eps, rng);
    if (!majorizes(q, lo, tol) || !majorizes(hi, q, tol)) return false;
  }
  return true;
}

}  // namespace majflow
