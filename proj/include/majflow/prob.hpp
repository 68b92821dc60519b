#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace majflow {

// Length-d probability vector. Entries may dip to -tol_norm and the sum may
// be off by tol_norm = 1e-10*d; anything worse is rejected, never renormalized.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(std::vector<double> entries);

  static ProbabilityVector uniform(std::size_t d);
  // (1,0,...,0)
  static ProbabilityVector pure(std::size_t d);

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  const std::vector<double>& entries() const { return p_; }

  auto begin() const { return p_.begin(); }
  auto end() const { return p_.end(); }

 private:
  std::vector<double> p_;
};

double normalization_tolerance(std::size_t d);

// Indices ordering x nonincreasingly; ties keep input order.
std::vector<std::size_t> descending_order(const std::vector<double>& x);

// Nonincreasing copy of p (stable). The result is what the rest of the
// library calls a sorted probability vector.
ProbabilityVector sort_descending(const ProbabilityVector& p);
bool is_sorted_descending(const ProbabilityVector& p);

// x majorizes y: every top-k partial sum of x is >= that of y (minus tol).
bool majorizes(const ProbabilityVector& x, const ProbabilityVector& y,
               double tol = 1e-9);

// Greatest lower bound in the majorization order, returned sorted. Over
// unsorted inputs the infimum is only defined up to permutation; the sorted
// representative is the canonical choice.
ProbabilityVector majorization_infimum(const std::vector<ProbabilityVector>& S);

// Element of S that is majorized by every other element, if one exists.
std::optional<ProbabilityVector> majorization_minimum(
    const std::vector<ProbabilityVector>& S, double tol = 1e-9);

double tv_distance(const ProbabilityVector& p, const ProbabilityVector& q);
double l1_distance(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace majflow
