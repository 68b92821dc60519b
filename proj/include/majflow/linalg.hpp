#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "majflow/prob.hpp"

namespace majflow {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Unit-trace positive semidefinite matrix. Construction checks hermiticity
// (1e-10), eigenvalues (>= -1e-9) and trace (1e-10); the stored matrix is
// the hermitized input.
class DensityMatrix {
 public:
  explicit DensityMatrix(const CMatrix& m);

  static DensityMatrix maximally_mixed(int d);
  static DensityMatrix pure(const CVector& psi);
  static DensityMatrix diagonal(const std::vector<double>& p);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  // Nonincreasing eigenvalues.
  std::vector<double> spectrum() const;

 private:
  CMatrix m_;
};

// Linear map on d x d matrices acting on column-stacked vectors:
// vec(X)[j*d + i] = X(i, j).
class Superoperator {
 public:
  Superoperator(int d, CMatrix matrix);

  static Superoperator identity(int d);
  // Tabulates f on the d^2 matrix units.
  static Superoperator from_function(int d,
                                     const std::function<CMatrix(const CMatrix&)>& f);

  int dim() const { return d_; }
  const CMatrix& matrix() const { return m_; }

  CMatrix apply(const CMatrix& X) const;
  // (*this) after `first`.
  Superoperator compose(const Superoperator& first) const;
  Superoperator power(int n) const;
  // Hilbert-Schmidt adjoint.
  Superoperator adjoint() const;

 private:
  int d_;
  CMatrix m_;
};

CVector vec(const CMatrix& X);
CMatrix unvec(const CVector& v, int d);
CMatrix kron(const CMatrix& A, const CMatrix& B);
CMatrix matrix_unit(int d, int i, int j);

struct HermitianEigen {
  std::vector<double> values;  // nonincreasing
  CMatrix vectors;             // columns match values
};

// Symmetrizes first when ||A - A^dagger|| <= tol * max(1, ||A||); throws
// invalid_input otherwise.
HermitianEigen eigdecompose_hermitian(const CMatrix& A, double tol = 1e-10);

// f applied to the spectrum of a Hermitian matrix.
CMatrix hermitian_function(const CMatrix& A, const std::function<double(double)>& f);
// exp(c*A) for Hermitian A and complex c (e.g. c = -i*tau for propagators).
CMatrix hermitian_exp(const CMatrix& A, cplx c);

double trace_norm(const CMatrix& A);
double trace_distance(const CMatrix& rho, const CMatrix& sigma);
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

// Spectrum of a (near-)state as a ProbabilityVector, clipping eigenvalues in
// [-1e-9, 0) to zero.
ProbabilityVector spectrum_as_probability(const DensityMatrix& rho);

bool state_majorizes(const DensityMatrix& rho, const DensityMatrix& sigma,
                     double tol = 1e-9);
DensityMatrix state_ball_minimizer(const DensityMatrix& rho, double eps);
DensityMatrix state_ball_maximizer(const DensityMatrix& rho, double eps);

enum class Subsystem { A, B };

// X acts on A (x) B with dims dA, dB; the named factor is traced out.
CMatrix partial_trace(const CMatrix& X, int dA, int dB, Subsystem traced);
CMatrix partial_transpose(const CMatrix& X, int dA, int dB, Subsystem which);

// J = sum_ij Phi(|i><j|) (x) |i><j|, output factor first.
CMatrix choi(const Superoperator& phi);
Superoperator choi_inverse(const CMatrix& J);
// rank_tol < 0 means 1e-10 * tr J.
std::vector<CMatrix> kraus_from_choi(const CMatrix& J, double rank_tol = -1.0);
Superoperator superop_from_kraus(const std::vector<CMatrix>& kraus);

// Smallest eigenvalue of J with the input factor transposed.
double min_pt_eigenvalue(const CMatrix& J);
bool is_ppt(const CMatrix& J, double tol = 1e-10);

// Sufficient separability test around omega (x) sigma: true when
// ||Delta||_2 <= lambda_min(omega) * lambda_min(sigma).
bool separable_ball_test(const CMatrix& omega, const CMatrix& sigma,
                         const CMatrix& Delta);

// Trace norm of the realigned Choi matrix, R(J)_{(a c),(b d)} = <a b|J|c d>.
// Values above d rule out entanglement breaking.
double reshuffled_trace_norm(const CMatrix& J);

}  // namespace majflow
