#pragma once

#include <cstdint>
#include <random>

#include "majflow/prob.hpp"

namespace majflow {

// Majorization-minimizer over the TV ball of radius eps, with the block data
// that produced it: the top m_plus sorted entries are flattened to gamma_plus,
// the bottom m_minus to gamma_minus, the middle is untouched.
struct BallExtremumDetail {
  double gamma_plus = 0.0;
  int m_plus = 0;
  double gamma_minus = 0.0;
  int m_minus = 0;
  ProbabilityVector result;
};

// Element of B_eps(r) majorized by the whole ball. Equals u once eps >= TV(r,u)
// (in which case m_plus = m_minus = 0 and both gammas are 1/d).
BallExtremumDetail majorization_minimizer(const ProbabilityVector& r, double eps);

// Element of B_eps(r) majorizing the whole ball.
ProbabilityVector majorization_maximizer(const ProbabilityVector& r, double eps);

// Random point of B_eps(r): mass t <= eps is removed from a random subset of
// entries (Dirichlet split, clipped at zero) and handed to a disjoint subset.
ProbabilityVector sample_ball_point(const ProbabilityVector& r, double eps,
                                    std::mt19937_64& rng);

// Checks minimizer ≺ q ≺ maximizer for n_samples random q in the ball.
bool randomized_dominance_oracle(const ProbabilityVector& r, double eps,
                                 int n_samples, std::uint64_t rng_seed,
                                 double tol = 1e-9);

}  // namespace majflow
