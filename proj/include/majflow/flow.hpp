#pragma once

#include <vector>

#include "majflow/functional.hpp"
#include "majflow/prob.hpp"

namespace majflow {

// Extreme-value blocks of r, found with relative tolerance 1e-12.
struct Extremes {
  double r_plus = 0.0, r_minus = 0.0;
  int k_plus = 0, k_minus = 0;
  bool uniform = false;
};
Extremes extremes(const ProbabilityVector& r);

// Direction of the majorization flow at r: -1/k+ on the maximal entries,
// +1/k- on the minimal ones, zero elsewhere (and everywhere at u).
std::vector<double> flow_generator(const ProbabilityVector& r);

// Largest step along flow_generator(r) before a new degeneracy appears.
double degeneracy_horizon(const ProbabilityVector& r);

struct FlowBreakpoint {
  double epsilon;
  ProbabilityVector point;
  int k_plus;
  int k_minus;
};

// Piecewise-linear flow from r out to radius eps (or until u is reached).
// The first breakpoint is r itself at epsilon 0; the last is the endpoint.
std::vector<FlowBreakpoint> flow_path(const ProbabilityVector& r, double eps);

// One-sided derivative of F along the flow at r. Uses the sorted extension for
// non-symmetric (guesswork) functionals. +infinity when it blows up at a
// zero entry.
double gamma_H(const EntropyFunctional& F, const ProbabilityVector& r);

// H(M_eps(r)) - H(r), evaluated directly.
double delta_eps_H(const EntropyFunctional& F, const ProbabilityVector& r,
                   double eps);

// Same quantity as the integral of gamma_H along the flow: composite 16-point
// Gauss-Legendre on each linear segment, panels bisected until converged.
double delta_eps_H_quadrature(const EntropyFunctional& F,
                              const ProbabilityVector& r, double eps);

}  // namespace majflow
