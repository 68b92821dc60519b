#pragma once

#include <limits>
#include <string>

#include "majflow/functional.hpp"
#include "majflow/prob.hpp"

namespace majflow {

// Entropies use base-2 logarithms; Tsallis and unified entropies carry no log.
double evaluate(const EntropyFunctional& F, const ProbabilityVector& p);

// Derivative of F along the majorization flow at p (see gamma_H).
double flow_derivative(const EntropyFunctional& F, const ProbabilityVector& p);

enum class BoundRegime { below_threshold, saturated, lipschitz_linear };
std::string to_string(BoundRegime r);

struct ContinuityBound {
  double value = 0.0;
  BoundRegime regime = BoundRegime::below_threshold;
  double threshold = 0.0;  // 1 - 1/d
};

// Tight bound on |F(p) - F(q)| over TV(p,q) <= eps in dimension d. Families
// without a closed tight bound get eps * (upper Lipschitz constant), capped at
// the range of F.
ContinuityBound uniform_continuity_bound(const EntropyFunctional& F, int d,
                                         double eps);

// Optimal Lipschitz constant w.r.t. TV. lower == upper when known exactly;
// otherwise [lower, upper] brackets it (lower = 0 when only an upper bound is
// available). +infinity when F is not Lipschitz.
struct LipschitzConstant {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  bool exact() const { return lower == upper; }
  double value() const { return upper; }
};
LipschitzConstant lipschitz_constant(const EntropyFunctional& F, int d);

// max of F over B_delta(p), i.e. F at the majorization-minimizer.
double smoothed_value(const EntropyFunctional& F, const ProbabilityVector& p,
                      double delta);
// Optimal Lipschitz constant of the delta-smoothed Shannon entropy.
double smoothed_shannon_lipschitz(int d, double delta);

double binary_entropy(double x);

// Maximizer x0 and maximum mu of f(x) = x - x^2 M(x), x >= 0, with M the
// Mills ratio of the standard normal.
struct MillsMaximum {
  double x0;
  double mu;
};
double mills_ratio(double x);
double mills_f(double x);
MillsMaximum mills_ratio_maximum();

// gamma_{k,p,d} for 1 <= k <= d-1 and 1 < p < inf.
double pnorm_gamma(int k, double p, int d);

// 2 max_k sum_{i<=k} (q_i - p_i) over sorted vectors, clipped at 0.
double locc_delta_star(const ProbabilityVector& p, const ProbabilityVector& q);

// Trace distance between the pure bipartite states whose Schmidt coefficients
// (in a shared Schmidt basis) are a and b.
double schmidt_trace_distance(const ProbabilityVector& a,
                              const ProbabilityVector& b);

// Bound on |D(rho||w) - D(sigma||w)| over T(rho,sigma) <= eps, for a positive
// w with extreme eigenvalues lambda_plus >= lambda_minus > 0. Base 2.
double relative_entropy_bound(int d, double eps, double lambda_plus,
                              double lambda_minus);

}  // namespace majflow
