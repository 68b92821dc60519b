#pragma once

// Pairs (p, q) at which |H(p) - H(q)| / TV(p,q) approaches the optimal
// Lipschitz constant: p sits where the flow derivative peaks, q is a short
// step along the flow from p.

#include <cmath>
#include <vector>

#include "majflow/flow.hpp"
#include "majflow/prob.hpp"

namespace extremal {

struct Pair {
  majflow::ProbabilityVector p, q;
};

inline Pair flow_step(const majflow::ProbabilityVector& p, double step) {
  const auto L = majflow::flow_generator(p);
  std::vector<double> q = p.entries();
  for (std::size_t i = 0; i < q.size(); ++i) q[i] += step * L[i];
  return {p, majflow::ProbabilityVector(std::move(q))};
}

// Tsallis (alpha > 1) and E[K]: the derivative peaks at a pure state.
inline Pair pure_state(int d, double step = 1e-7) {
  return flow_step(majflow::ProbabilityVector::pure(d), step);
}

// Renyi-2, d >= 3: (0, z, ..., z, y) with y = 1/sqrt(d-1).
inline Pair renyi2(int d, double step = 1e-7) {
  std::vector<double> r(d);
  const double y = 1.0 / std::sqrt(d - 1.0);
  const double z = (1.0 - y) / (d - 2);
  r[0] = 0.0;
  for (int i = 1; i < d - 1; ++i) r[i] = z;
  r[d - 1] = y;
  return flow_step(majflow::ProbabilityVector(std::move(r)), step);
}

// Min-entropy: just off the uniform distribution, r_+ close to 1/d.
inline Pair min_entropy(int d, double eta = 1e-4, double step = 1e-7) {
  std::vector<double> r(d, 1.0 / d);
  r[0] += eta;
  r[d - 1] -= eta;
  return flow_step(majflow::ProbabilityVector(std::move(r)), step);
}

// Guesswork: any point with a unique max and min; the sorted order survives a
// step shorter than the degeneracy horizon.
inline Pair guesswork(int d) {
  std::vector<double> r(d);
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += (r[i] = d - i + 0.5 * (i == 0));
  for (auto& x : r) x /= s;
  majflow::ProbabilityVector p(std::move(r));
  return flow_step(p, 0.5 * majflow::degeneracy_horizon(p));
}

}  // namespace extremal
