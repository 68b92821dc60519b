#include "majflow/entropy.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <numbers>

#include "majflow/ball.hpp"
#include "majflow/errors.hpp"
#include "majflow/flow.hpp"

namespace majflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kGraphMaxDim = 20;

double clamp0(double x) { return x > 0.0 ? x : 0.0; }

double power_sum(const ProbabilityVector& p, double alpha) {
  double s = 0.0;
  for (double x : p)
    if (x > 0.0) s += std::pow(x, alpha);
  return s;
}

// e_0..e_d of the entries, skipping index `skip`.
std::vector<double> elementary_symmetric(const ProbabilityVector& p,
                                         std::size_t skip = SIZE_MAX) {
  std::vector<double> e(p.size() + 1, 0.0);
  e[0] = 1.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i == skip) continue;
    const double x = clamp0(p[i]);
    ++n;
    for (std::size_t k = n; k >= 1; --k) e[k] += x * e[k - 1];
  }
  return e;
}

// sum over nonempty subsets S of (|S|-1)! prod_S p, grouped by |S|
double graph_value(const ProbabilityVector& p) {
  const auto e = elementary_symmetric(p);
  double total = 0.0, fact = 1.0;
  for (std::size_t k = 1; k <= p.size(); ++k) {
    total += fact * e[k];
    fact *= static_cast<double>(k);
  }
  return total;
}

// dE_C/dp_j = sum_k (k-1)! e_{k-1}(p without j)
double graph_partial(const ProbabilityVector& p, std::size_t j) {
  const auto e = elementary_symmetric(p, j);
  double total = 0.0, fact = 1.0;
  for (std::size_t k = 1; k <= p.size(); ++k) {
    total += fact * e[k - 1];
    fact *= static_cast<double>(k);
  }
  return total;
}

void check_dim_for(const EntropyFunctional& F, std::size_t d) {
  if (F.kind == FunctionalKind::guesswork && F.costs.size() != d)
    throw invalid_input("guesswork cost list has length " +
                        std::to_string(F.costs.size()) + ", dimension is " +
                        std::to_string(d));
  if (F.kind == FunctionalKind::distinct_outcomes && F.symbols != 0 &&
      static_cast<std::size_t>(F.symbols) != d)
    throw invalid_input("number of symbols does not match the dimension");
  if (F.kind == FunctionalKind::graph_components && d > kGraphMaxDim)
    throw invalid_input("graph_components is limited to d <= 20");
}

bool concave_type(const EntropyFunctional& F) {
  switch (F.kind) {
    case FunctionalKind::shannon:
    case FunctionalKind::tsallis:
    case FunctionalKind::f_entropy:
    case FunctionalKind::concurrence:
    case FunctionalKind::distinct_outcomes:
      return true;
    case FunctionalKind::renyi: return F.alpha < 1.0;
    case FunctionalKind::unified: return F.alpha < 1.0 && F.s <= 1.0;
    default: return false;
  }
}

void reject_unified_s_gt_1(const EntropyFunctional& F) {
  if (F.kind == FunctionalKind::unified && F.s > 1.0)
    throw invalid_input("unified entropy with s > 1 is neither Concave- nor Convex-Type; no bound available");
}

ProbabilityVector pure_flattened(int d, double eps) {
  std::vector<double> v(d, eps / (d - 1));
  v[0] = 1.0 - eps;
  return ProbabilityVector(std::move(v));
}

}  // namespace

double binary_entropy(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double evaluate(const EntropyFunctional& F, const ProbabilityVector& p) {
  check_dim_for(F, p.size());
  switch (F.kind) {
    case FunctionalKind::shannon: {
      double s = 0.0;
      for (double x : p)
        if (x > 0.0) s -= x * std::log2(x);
      return s;
    }
    case FunctionalKind::renyi:
      return std::log2(power_sum(p, F.alpha)) / (1.0 - F.alpha);
    case FunctionalKind::tsallis:
      return (power_sum(p, F.alpha) - 1.0) / (1.0 - F.alpha);
    case FunctionalKind::unified:
      return (std::pow(power_sum(p, F.alpha), F.s) - 1.0) / ((1.0 - F.alpha) * F.s);
    case FunctionalKind::min_entropy:
      return -std::log2(*std::max_element(p.begin(), p.end()));
    case FunctionalKind::f_entropy: {
      double s = 0.0;
      for (double x : p) s -= F.f(clamp0(x));
      return s;
    }
    case FunctionalKind::concurrence: {
      double sq = 0.0;
      for (double x : p) sq += x * x;
      return std::sqrt(clamp0(2.0 * (1.0 - sq)));
    }
    case FunctionalKind::guesswork: {
      const auto s = sort_descending(p);
      double g = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) g += F.costs[i] * s[i];
      return g;
    }
    case FunctionalKind::distinct_outcomes: {
      double miss = 0.0;
      for (double x : p) miss += std::pow(1.0 - clamp0(x), F.trials);
      return static_cast<double>(p.size()) - miss;
    }
    case FunctionalKind::graph_components:
      return graph_value(p);
  }
  throw invalid_input("unknown functional");
}

double flow_derivative(const EntropyFunctional& F, const ProbabilityVector& p) {
  check_dim_for(F, p.size());
  const auto e = extremes(p);
  if (e.uniform) return 0.0;
  const double rp = e.r_plus, rm = clamp0(e.r_minus);
  switch (F.kind) {
    case FunctionalKind::shannon:
      return rm == 0.0 ? kInf : std::log2(rp / rm);
    case FunctionalKind::renyi: {
      if (rm == 0.0 && F.alpha < 1.0) return kInf;
      const double a = F.alpha;
      const double diff = (rm == 0.0 ? 0.0 : std::pow(rm, a - 1.0)) - std::pow(rp, a - 1.0);
      return a * diff / ((1.0 - a) * std::numbers::ln2 * power_sum(p, a));
    }
    case FunctionalKind::tsallis: {
      if (rm == 0.0 && F.alpha < 1.0) return kInf;
      const double a = F.alpha;
      const double diff = (rm == 0.0 ? 0.0 : std::pow(rm, a - 1.0)) - std::pow(rp, a - 1.0);
      return a / (1.0 - a) * diff;
    }
    case FunctionalKind::unified: {
      if (rm == 0.0 && F.alpha < 1.0) return kInf;
      const double a = F.alpha;
      const double diff = (rm == 0.0 ? 0.0 : std::pow(rm, a - 1.0)) - std::pow(rp, a - 1.0);
      return std::pow(power_sum(p, a), F.s - 1.0) / (1.0 - a) * a * diff;
    }
    case FunctionalKind::min_entropy:
      // max block of size k+ drops at rate 1/k+ each
      return 1.0 / (e.k_plus * std::numbers::ln2 * rp);
    case FunctionalKind::f_entropy:
      return F.fprime(rp) - F.fprime(rm);
    case FunctionalKind::concurrence: {
      double sq = 0.0;
      for (double x : p) sq += x * x;
      const double c = std::sqrt(clamp0(2.0 * (1.0 - sq)));
      return c == 0.0 ? kInf : 2.0 * (rp - rm) / c;
    }
    case FunctionalKind::guesswork: {
      // sorted extension: positions 1..k+ lose, the last k- gain
      const std::size_t d = p.size();
      double top = 0.0, bottom = 0.0;
      for (int i = 0; i < e.k_plus; ++i) top += F.costs[i];
      for (int i = 0; i < e.k_minus; ++i) bottom += F.costs[d - 1 - i];
      return bottom / e.k_minus - top / e.k_plus;
    }
    case FunctionalKind::distinct_outcomes:
      return F.trials * (std::pow(1.0 - rm, F.trials - 1) - std::pow(1.0 - rp, F.trials - 1));
    case FunctionalKind::graph_components: {
      const auto order = descending_order(p.entries());
      return graph_partial(p, order.back()) - graph_partial(p, order.front());
    }
  }
  throw invalid_input("unknown functional");
}

std::string to_string(BoundRegime r) {
  switch (r) {
    case BoundRegime::below_threshold: return "below_threshold";
    case BoundRegime::saturated: return "saturated";
    case BoundRegime::lipschitz_linear: return "lipschitz_linear";
  }
  return "?";
}

LipschitzConstant lipschitz_constant(const EntropyFunctional& F, int d) {
  if (d < 2) throw invalid_input("Lipschitz constants need d >= 2");
  check_dim_for(F, d);
  reject_unified_s_gt_1(F);
  const double ln2 = std::numbers::ln2;
  auto exact = [](double k) { return LipschitzConstant{k, k}; };
  switch (F.kind) {
    case FunctionalKind::shannon:
    case FunctionalKind::concurrence:
      return {};
    case FunctionalKind::renyi: {
      const double a = F.alpha;
      if (a < 1.0) return {};
      if (a == 2.0)
        return exact(d == 2 ? 2.0 / ln2 : (d - 2) / (std::sqrt(d - 1.0) - 1.0) / ln2);
      return {a / (a - 1.0) * std::pow(d - 2.0, 1.0 - 1.0 / a) / (2.0 * ln2),
              d * a / (a - 1.0) / ln2};
    }
    case FunctionalKind::min_entropy:
      return exact(d / ln2);
    case FunctionalKind::tsallis:
      return F.alpha < 1.0 ? LipschitzConstant{} : exact(F.alpha / (F.alpha - 1.0));
    case FunctionalKind::unified: {
      const double a = F.alpha, s = F.s;
      if (a < 1.0) return {};
      const double k = s * a >= 1.0 ? a / (a - 1.0)
                                    : a / (a - 1.0) * std::pow(d, 1.0 - a * s);
      return {0.0, k};
    }
    case FunctionalKind::f_entropy:
      return exact(F.fprime(1.0) - F.fprime(0.0));
    case FunctionalKind::guesswork:
      return exact(F.costs.back() - F.costs.front());
    case FunctionalKind::distinct_outcomes:
      return exact(F.trials);
    case FunctionalKind::graph_components: {
      const auto m = mills_ratio_maximum();
      const double n2 = d - 2.0;
      double lower = 0.0;
      if (d >= 3)
        lower = std::max(0.0, m.mu * std::sqrt(n2) / std::sqrt(2.0) - m.mu * m.x0 / 2.0 -
                                  std::sqrt(2.0 / n2) * m.x0 - m.x0 * m.x0 / n2 -
                                  std::sqrt(n2) * std::exp(-n2) * m.x0 *
                                      std::exp(m.x0 * m.x0 / 2.0) / std::sqrt(2.0));
      return {lower, 3.0 + m.mu * std::sqrt(n2)};
    }
  }
  throw invalid_input("unknown functional");
}

ContinuityBound uniform_continuity_bound(const EntropyFunctional& F, int d,
                                         double eps) {
  if (d < 1) throw invalid_input("dimension must be >= 1");
  if (!(eps >= 0.0 && eps <= 1.0)) throw invalid_input("epsilon must lie in [0,1]");
  check_dim_for(F, d);
  reject_unified_s_gt_1(F);
  const double thr = 1.0 - 1.0 / d;
  if (d == 1 || eps == 0.0) return {0.0, BoundRegime::below_threshold, thr};

  const auto pure = ProbabilityVector::pure(d);
  const auto u = ProbabilityVector::uniform(d);
  const double range = evaluate(F, u) - evaluate(F, pure);

  if (F.kind == FunctionalKind::shannon) {
    if (eps >= thr) return {std::log2(static_cast<double>(d)), BoundRegime::saturated, thr};
    return {eps * std::log2(d - 1.0) + binary_entropy(eps), BoundRegime::below_threshold, thr};
  }
  if (concave_type(F)) {
    if (eps >= thr) return {range, BoundRegime::saturated, thr};
    return {evaluate(F, pure_flattened(d, eps)) - evaluate(F, pure),
            BoundRegime::below_threshold, thr};
  }
  if (F.kind == FunctionalKind::min_entropy) {
    if (eps >= thr) return {std::log2(static_cast<double>(d)), BoundRegime::saturated, thr};
    return {std::log2(1.0 + eps * d), BoundRegime::below_threshold, thr};
  }
  const double k = lipschitz_constant(F, std::max(d, 2)).upper;
  const double lin = eps * k;
  if (lin >= range) return {range, BoundRegime::saturated, thr};
  return {lin, BoundRegime::lipschitz_linear, thr};
}

double smoothed_value(const EntropyFunctional& F, const ProbabilityVector& p,
                      double delta) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw invalid_input("delta must lie in [0,1]");
  return evaluate(F, majorization_minimizer(p, delta).result);
}

double smoothed_shannon_lipschitz(int d, double delta) {
  if (d < 2) throw invalid_input("d must be >= 2");
  if (!(delta > 0.0 && delta < 1.0)) throw invalid_input("delta must lie in (0,1)");
  return std::max(0.0, std::log2(1.0 / delta - 1.0) + std::log2(d - 1.0));
}

double mills_ratio(double x) {
  // (1 - Phi(x)) / phi(x)
  const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return 0.5 * boost::math::erfc(x / std::numbers::sqrt2) / phi;
}

double mills_f(double x) { return x - x * x * mills_ratio(x); }

MillsMaximum mills_ratio_maximum() {
  // f'(x) = 1 + x^2 - (2x + x^3) M(x), using M' = xM - 1; f is concave near
  // its peak, so the sign change of f' on [0.5, 2] pins the maximizer.
  auto fprime = [](double x) { return 1.0 + x * x - (2.0 * x + x * x * x) * mills_ratio(x); };
  std::uintmax_t iters = 200;
  const auto br = boost::math::tools::toms748_solve(
      fprime, 0.5, 2.0, boost::math::tools::eps_tolerance<double>(), iters);
  double x0 = 0.5 * (br.first + br.second);
  // polish: pick the best of the neighbouring doubles
  double best = mills_f(x0);
  for (double c : {br.first, br.second})
    if (mills_f(c) > best) best = mills_f(x0 = c);
  return {x0, best};
}

double pnorm_gamma(int k, double p, int d) {
  if (d < 2 || k < 1 || k > d - 1) throw invalid_input("need 1 <= k <= d-1");
  if (!(p > 1.0) || std::isinf(p)) throw invalid_input("p must lie in (1, inf)");
  const double q = p / (p - 1.0);
  const double beta = std::pow(static_cast<double>(k) / (d - k), p - 1.0);
  const double h = k * std::pow(1.0 / (1.0 + beta), q) +
                   (d - k) * std::pow(1.0 / (1.0 + 1.0 / beta), q);
  return -std::pow(h, 1.0 / q);
}

double locc_delta_star(const ProbabilityVector& p, const ProbabilityVector& q) {
  if (p.size() != q.size()) throw invalid_input("dimension mismatch");
  const auto ps = sort_descending(p), qs = sort_descending(q);
  double run = 0.0, best = 0.0;
  // k = d contributes exactly 0; summing it would only add rounding noise
  for (std::size_t i = 0; i + 1 < ps.size(); ++i) {
    run += qs[i] - ps[i];
    best = std::max(best, run);
  }
  return 2.0 * best;
}

double schmidt_trace_distance(const ProbabilityVector& a,
                              const ProbabilityVector& b) {
  if (a.size() != b.size()) throw invalid_input("dimension mismatch");
  // 1 - F^2 = (1 - F)(1 + F) with 1 - F = sum (sqrt a - sqrt b)^2 / 2, which
  // keeps nearby states from cancelling to noise
  double F = 0.0, gap = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double sa = std::sqrt(clamp0(a[i])), sb = std::sqrt(clamp0(b[i]));
    F += sa * sb;
    gap += (sa - sb) * (sa - sb);
  }
  return std::sqrt(0.5 * gap * (1.0 + std::min(F, 1.0)));
}

double relative_entropy_bound(int d, double eps, double lambda_plus,
                              double lambda_minus) {
  if (d < 2) throw invalid_input("d must be >= 2");
  if (!(eps >= 0.0 && eps <= 1.0 - 1.0 / d)) throw invalid_input("epsilon must lie in [0, 1-1/d]");
  if (!(lambda_minus > 0.0 && lambda_plus >= lambda_minus))
    throw invalid_input("need lambda_plus >= lambda_minus > 0");
  return eps * std::log2(d - 1.0) + binary_entropy(eps) +
         eps * (std::log2(lambda_plus) - std::log2(lambda_minus));
}

}  // namespace majflow
