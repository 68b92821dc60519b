#include "majflow/flow.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>

#include "majflow/ball.hpp"
#include "majflow/entropy.hpp"
#include "majflow/errors.hpp"

namespace majflow {

namespace {

constexpr double kClusterTol = 1e-12;

// Distinct values of r (descending) with multiplicities, clustered relatively.
struct Levels {
  std::vector<double> value;
  std::vector<int> count;
};

Levels levels(const std::vector<double>& r, double rel_tol) {
  std::vector<double> s = r;
  std::sort(s.begin(), s.end(), std::greater<>());
  const double tol = rel_tol * std::max(s.front(), 1e-300);
  Levels L;
  for (double x : s) {
    if (!L.value.empty() && L.value.back() - x <= tol) {
      ++L.count.back();
    } else {
      L.value.push_back(x);
      L.count.push_back(1);
    }
  }
  return L;
}

// After a full step to the next degeneracy the newly merged block differs by
// rounding only; give it a single common value (sum preserved).
std::vector<double> snap_blocks(std::vector<double> x) {
  const auto order = descending_order(x);
  const double tol = 1e-11 * std::max(x[order.front()], 1e-300);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && x[order[i]] - x[order[j]] <= tol) ++j;
    if (j - i > 1) {
      double mean = 0.0;
      for (std::size_t k = i; k < j; ++k) mean += x[order[k]];
      mean /= static_cast<double>(j - i);
      for (std::size_t k = i; k < j; ++k) x[order[k]] = mean;
    }
    i = j;
  }
  return x;
}

using GL16 = boost::math::quadrature::gauss<double, 16>;

// Composite 16-point Gauss-Legendre: bisect a panel until halving it changes
// the estimate by less than tol. Integrands blow up like log(s) when a segment
// starts at a near-zero entry, which a single panel cannot resolve.
template <class F>
double composite_gauss(const F& f, double a, double b, double whole, double tol,
                       int depth) {
  const double m = 0.5 * (a + b);
  const double left = GL16::integrate(f, a, m), right = GL16::integrate(f, m, b);
  if (depth == 0 || std::abs(left + right - whole) <= tol) return left + right;
  return composite_gauss(f, a, m, left, 0.5 * tol, depth - 1) +
         composite_gauss(f, m, b, right, 0.5 * tol, depth - 1);
}

}  // namespace

Extremes extremes(const ProbabilityVector& r) {
  const auto L = levels(r.entries(), kClusterTol);
  Extremes e;
  e.r_plus = L.value.front();
  e.r_minus = L.value.back();
  e.k_plus = L.count.front();
  e.k_minus = L.count.back();
  e.uniform = L.value.size() == 1;
  return e;
}

std::vector<double> flow_generator(const ProbabilityVector& r) {
  const std::size_t d = r.size();
  std::vector<double> g(d, 0.0);
  const auto e = extremes(r);
  if (e.uniform) return g;
  const double tol = kClusterTol * e.r_plus;
  for (std::size_t i = 0; i < d; ++i) {
    if (e.r_plus - r[i] <= tol)
      g[i] = -1.0 / e.k_plus;
    else if (r[i] - e.r_minus <= tol)
      g[i] = 1.0 / e.k_minus;
  }
  return g;
}

double degeneracy_horizon(const ProbabilityVector& r) {
  const auto L = levels(r.entries(), kClusterTol);
  const std::size_t l = L.value.size();
  if (l == 1) return 0.0;
  const double kp = L.count.front(), km = L.count.back();
  if (l == 2) return kp * km * (L.value[0] - L.value[1]) / (kp + km);
  return std::min(kp * (L.value[0] - L.value[1]),
                  km * (L.value[l - 2] - L.value[l - 1]));
}

std::vector<FlowBreakpoint> flow_path(const ProbabilityVector& r, double eps) {
  if (!(eps >= 0.0)) throw invalid_input("flow radius must be >= 0");
  std::vector<FlowBreakpoint> path;
  auto push = [&](double s, const ProbabilityVector& p) {
    const auto e = extremes(p);
    path.push_back({s, p, e.k_plus, e.k_minus});
  };
  push(0.0, r);
  double s = 0.0;
  ProbabilityVector cur = r;
  while (s < eps) {
    const double delta = degeneracy_horizon(cur);
    if (delta <= 0.0) break;  // at u
    const bool full = delta <= eps - s;
    const double step = full ? delta : eps - s;
    const auto L = flow_generator(cur);
    std::vector<double> next = cur.entries();
    for (std::size_t i = 0; i < next.size(); ++i) next[i] += step * L[i];
    if (full) next = snap_blocks(std::move(next));
    cur = ProbabilityVector(std::move(next));
    s += step;
    push(s, cur);
    if (!full) break;
  }
  return path;
}

double gamma_H(const EntropyFunctional& F, const ProbabilityVector& r) {
  return flow_derivative(F, r);
}

double delta_eps_H(const EntropyFunctional& F, const ProbabilityVector& r,
                   double eps) {
  if (eps == 0.0) return 0.0;
  return evaluate(F, majorization_minimizer(r, eps).result) - evaluate(F, r);
}

double delta_eps_H_quadrature(const EntropyFunctional& F,
                              const ProbabilityVector& r, double eps) {
  const auto path = flow_path(r, eps);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const auto& a = path[k];
    const double len = path[k + 1].epsilon - a.epsilon;
    const auto L = flow_generator(a.point);
    auto integrand = [&](double t) {
      std::vector<double> p = a.point.entries();
      for (std::size_t i = 0; i < p.size(); ++i) p[i] += t * L[i];
      return flow_derivative(F, ProbabilityVector(std::move(p)));
    };
    total += composite_gauss(integrand, 0.0, len, GL16::integrate(integrand, 0.0, len),
                             1e-13, 40);
  }
  return total;
}

}  // namespace majflow
