#include "majflow/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "majflow/ball.hpp"
#include "majflow/errors.hpp"

namespace majflow {

namespace {

int checked_root(Eigen::Index n, const char* what) {
  int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (d < 1 || static_cast<Eigen::Index>(d) * d != n)
    throw invalid_input(std::string(what) + ": size is not a perfect square");
  return d;
}

void require_square(const CMatrix& A, const char* what) {
  if (A.rows() != A.cols() || A.rows() == 0)
    throw invalid_input(std::string(what) + ": matrix must be square and non-empty");
}

void require_bipartite(const CMatrix& X, int dA, int dB, const char* what) {
  require_square(X, what);
  if (dA < 1 || dB < 1 || X.rows() != static_cast<Eigen::Index>(dA) * dB)
    throw invalid_input(std::string(what) + ": dimension does not factor as dA*dB");
}

CMatrix from_spectrum(const std::vector<double>& p, const CMatrix& V) {
  CMatrix out = CMatrix::Zero(V.rows(), V.rows());
  for (std::size_t i = 0; i < p.size(); ++i)
    out += p[i] * V.col(static_cast<Eigen::Index>(i)) *
           V.col(static_cast<Eigen::Index>(i)).adjoint();
  return out;
}

}  // namespace

// ---- DensityMatrix --------------------------------------------------------

DensityMatrix::DensityMatrix(const CMatrix& m) {
  require_square(m, "DensityMatrix");
  if ((m - m.adjoint()).norm() > 1e-10)
    throw invalid_input("DensityMatrix: not Hermitian");
  m_ = 0.5 * (m + m.adjoint());
  if (std::abs(m_.trace().real() - 1.0) > 1e-10)
    throw invalid_input("DensityMatrix: trace differs from 1");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-9)
    throw invalid_input("DensityMatrix: negative eigenvalue");
}

DensityMatrix DensityMatrix::maximally_mixed(int d) {
  if (d < 1) throw invalid_input("maximally_mixed: d < 1");
  return DensityMatrix(CMatrix::Identity(d, d) / static_cast<double>(d));
}

DensityMatrix DensityMatrix::pure(const CVector& psi) {
  double n = psi.norm();
  if (psi.size() == 0 || n == 0.0) throw invalid_input("pure: zero vector");
  CVector u = psi / n;
  return DensityMatrix(u * u.adjoint());
}

DensityMatrix DensityMatrix::diagonal(const std::vector<double>& p) {
  ProbabilityVector q(p);
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(p.size()),
                            static_cast<Eigen::Index>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) m(i, i) = q[i];
  return DensityMatrix(m);
}

std::vector<double> DensityMatrix::spectrum() const {
  return eigdecompose_hermitian(m_).values;
}

// ---- Superoperator --------------------------------------------------------

Superoperator::Superoperator(int d, CMatrix matrix) : d_(d), m_(std::move(matrix)) {
  if (d < 1) throw invalid_input("Superoperator: d < 1");
  const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  if (m_.rows() != n || m_.cols() != n)
    throw invalid_input("Superoperator: matrix must be d^2 x d^2");
}

Superoperator Superoperator::identity(int d) {
  const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  return Superoperator(d, CMatrix::Identity(n, n));
}

Superoperator Superoperator::from_function(
    int d, const std::function<CMatrix(const CMatrix&)>& f) {
  const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  CMatrix m(n, n);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) {
      CMatrix out = f(matrix_unit(d, i, j));
      if (out.rows() != d || out.cols() != d)
        throw invalid_input("Superoperator::from_function: output has wrong shape");
      m.col(j * d + i) = vec(out);
    }
  return Superoperator(d, std::move(m));
}

CMatrix Superoperator::apply(const CMatrix& X) const {
  if (X.rows() != d_ || X.cols() != d_)
    throw invalid_input("Superoperator::apply: dimension mismatch");
  return unvec(m_ * vec(X), d_);
}

Superoperator Superoperator::compose(const Superoperator& first) const {
  if (first.d_ != d_) throw invalid_input("Superoperator::compose: dimension mismatch");
  return Superoperator(d_, m_ * first.m_);
}

Superoperator Superoperator::power(int n) const {
  if (n < 0) throw invalid_input("Superoperator::power: negative exponent");
  CMatrix result = CMatrix::Identity(m_.rows(), m_.cols());
  CMatrix base = m_;
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return Superoperator(d_, std::move(result));
}

Superoperator Superoperator::adjoint() const { return Superoperator(d_, m_.adjoint()); }

// ---- basic helpers --------------------------------------------------------

CVector vec(const CMatrix& X) {
  return Eigen::Map<const CVector>(X.data(), X.size());
}

CMatrix unvec(const CVector& v, int d) {
  if (v.size() != static_cast<Eigen::Index>(d) * d)
    throw invalid_input("unvec: length is not d^2");
  return Eigen::Map<const CMatrix>(v.data(), d, d);
}

CMatrix kron(const CMatrix& A, const CMatrix& B) {
  CMatrix out(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return out;
}

CMatrix matrix_unit(int d, int i, int j) {
  CMatrix E = CMatrix::Zero(d, d);
  E(i, j) = 1.0;
  return E;
}

HermitianEigen eigdecompose_hermitian(const CMatrix& A, double tol) {
  require_square(A, "eigdecompose_hermitian");
  const double scale = std::max(1.0, A.norm());
  if ((A - A.adjoint()).norm() > tol * scale)
    throw invalid_input("eigdecompose_hermitian: matrix is not Hermitian");
  CMatrix H = 0.5 * (A + A.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
  if (es.info() != Eigen::Success)
    throw numerical_error("eigdecompose_hermitian: solver failed");
  const Eigen::Index n = H.rows();
  HermitianEigen out;
  out.values.resize(static_cast<std::size_t>(n));
  out.vectors.resize(n, n);
  // Eigen returns ascending order.
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[static_cast<std::size_t>(k)] = es.eigenvalues()(n - 1 - k);
    out.vectors.col(k) = es.eigenvectors().col(n - 1 - k);
  }
  return out;
}

CMatrix hermitian_function(const CMatrix& A, const std::function<double(double)>& f) {
  HermitianEigen e = eigdecompose_hermitian(A);
  std::vector<double> fv(e.values.size());
  std::transform(e.values.begin(), e.values.end(), fv.begin(), f);
  return from_spectrum(fv, e.vectors);
}

CMatrix hermitian_exp(const CMatrix& A, cplx c) {
  HermitianEigen e = eigdecompose_hermitian(A);
  CMatrix D = CMatrix::Zero(A.rows(), A.cols());
  for (std::size_t k = 0; k < e.values.size(); ++k)
    D(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = std::exp(c * e.values[k]);
  return e.vectors * D * e.vectors.adjoint();
}

double trace_norm(const CMatrix& A) {
  Eigen::JacobiSVD<CMatrix> svd(A);
  return svd.singularValues().sum();
}

double trace_distance(const CMatrix& rho, const CMatrix& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
    throw invalid_input("trace_distance: dimension mismatch");
  HermitianEigen e = eigdecompose_hermitian(rho - sigma);
  double s = 0.0;
  for (double v : e.values) s += std::abs(v);
  return 0.5 * s;
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return trace_distance(rho.matrix(), sigma.matrix());
}

ProbabilityVector spectrum_as_probability(const DensityMatrix& rho) {
  std::vector<double> p = rho.spectrum();
  for (double& x : p) x = std::max(x, 0.0);
  return ProbabilityVector(std::move(p));
}

// ---- quantum lifts of the ball extrema ------------------------------------

bool state_majorizes(const DensityMatrix& rho, const DensityMatrix& sigma, double tol) {
  if (rho.dim() != sigma.dim()) throw invalid_input("state_majorizes: dimension mismatch");
  return majorizes(spectrum_as_probability(rho), spectrum_as_probability(sigma), tol);
}

namespace {

template <class F>
DensityMatrix lift_spectral(const DensityMatrix& rho, F classical) {
  HermitianEigen e = eigdecompose_hermitian(rho.matrix());
  std::vector<double> p = e.values;
  for (double& x : p) x = std::max(x, 0.0);
  ProbabilityVector q = classical(ProbabilityVector(p));
  CMatrix out = from_spectrum(q.entries(), e.vectors);
  return DensityMatrix(0.5 * (out + out.adjoint()));
}

}  // namespace

DensityMatrix state_ball_minimizer(const DensityMatrix& rho, double eps) {
  return lift_spectral(rho, [eps](const ProbabilityVector& p) {
    return majorization_minimizer(p, eps).result;
  });
}

DensityMatrix state_ball_maximizer(const DensityMatrix& rho, double eps) {
  return lift_spectral(rho, [eps](const ProbabilityVector& p) {
    return majorization_maximizer(p, eps);
  });
}

// ---- bipartite operations -------------------------------------------------

CMatrix partial_trace(const CMatrix& X, int dA, int dB, Subsystem traced) {
  require_bipartite(X, dA, dB, "partial_trace");
  if (traced == Subsystem::B) {
    CMatrix out = CMatrix::Zero(dA, dA);
    for (int a = 0; a < dA; ++a)
      for (int c = 0; c < dA; ++c)
        for (int b = 0; b < dB; ++b) out(a, c) += X(a * dB + b, c * dB + b);
    return out;
  }
  CMatrix out = CMatrix::Zero(dB, dB);
  for (int a = 0; a < dA; ++a) out += X.block(a * dB, a * dB, dB, dB);
  return out;
}

CMatrix partial_transpose(const CMatrix& X, int dA, int dB, Subsystem which) {
  require_bipartite(X, dA, dB, "partial_transpose");
  CMatrix out(X.rows(), X.cols());
  for (int a = 0; a < dA; ++a)
    for (int c = 0; c < dA; ++c) {
      auto blk = X.block(a * dB, c * dB, dB, dB);
      if (which == Subsystem::B)
        out.block(a * dB, c * dB, dB, dB) = blk.transpose();
      else
        out.block(c * dB, a * dB, dB, dB) = blk;
    }
  return out;
}

// ---- Choi-Jamiolkowski ----------------------------------------------------

CMatrix choi(const Superoperator& phi) {
  const int d = phi.dim();
  const CMatrix& M = phi.matrix();
  CMatrix J(M.rows(), M.cols());
  for (int o = 0; o < d; ++o)
    for (int i = 0; i < d; ++i)
      for (int p = 0; p < d; ++p)
        for (int j = 0; j < d; ++j) J(o * d + i, p * d + j) = M(p * d + o, j * d + i);
  return J;
}

Superoperator choi_inverse(const CMatrix& J) {
  require_square(J, "choi_inverse");
  const int d = checked_root(J.rows(), "choi_inverse");
  CMatrix M(J.rows(), J.cols());
  for (int o = 0; o < d; ++o)
    for (int i = 0; i < d; ++i)
      for (int p = 0; p < d; ++p)
        for (int j = 0; j < d; ++j) M(p * d + o, j * d + i) = J(o * d + i, p * d + j);
  return Superoperator(d, std::move(M));
}

std::vector<CMatrix> kraus_from_choi(const CMatrix& J, double rank_tol) {
  require_square(J, "kraus_from_choi");
  const int d = checked_root(J.rows(), "kraus_from_choi");
  if (rank_tol < 0.0) rank_tol = 1e-10 * std::abs(J.trace().real());
  HermitianEigen e = eigdecompose_hermitian(J);
  if (e.values.back() < -rank_tol)
    throw invalid_input("kraus_from_choi: Choi matrix has a negative eigenvalue (map is not CP)");
  std::vector<CMatrix> out;
  for (std::size_t k = 0; k < e.values.size(); ++k) {
    if (e.values[k] <= rank_tol) break;
    const double s = std::sqrt(e.values[k]);
    CMatrix K(d, d);
    for (int o = 0; o < d; ++o)
      for (int i = 0; i < d; ++i) K(o, i) = s * e.vectors(o * d + i, static_cast<Eigen::Index>(k));
    out.push_back(std::move(K));
  }
  return out;
}

Superoperator superop_from_kraus(const std::vector<CMatrix>& kraus) {
  if (kraus.empty()) throw invalid_input("superop_from_kraus: empty Kraus list");
  const Eigen::Index d = kraus.front().rows();
  CMatrix M = CMatrix::Zero(d * d, d * d);
  for (const CMatrix& K : kraus) {
    if (K.rows() != d || K.cols() != d)
      throw invalid_input("superop_from_kraus: Kraus operators must be square of equal size");
    M += kron(K.conjugate(), K);
  }
  return Superoperator(static_cast<int>(d), std::move(M));
}

double min_pt_eigenvalue(const CMatrix& J) {
  require_square(J, "min_pt_eigenvalue");
  const int d = checked_root(J.rows(), "min_pt_eigenvalue");
  return eigdecompose_hermitian(partial_transpose(J, d, d, Subsystem::B)).values.back();
}

bool is_ppt(const CMatrix& J, double tol) { return min_pt_eigenvalue(J) >= -tol; }

bool separable_ball_test(const CMatrix& omega, const CMatrix& sigma, const CMatrix& Delta) {
  require_square(omega, "separable_ball_test");
  require_square(sigma, "separable_ball_test");
  if (Delta.rows() != omega.rows() * sigma.rows() || Delta.cols() != Delta.rows())
    throw invalid_input("separable_ball_test: Delta has the wrong dimension");
  const double lw = eigdecompose_hermitian(omega).values.back();
  const double ls = eigdecompose_hermitian(sigma).values.back();
  if (lw <= 0.0 || ls <= 0.0) return false;
  return Delta.norm() <= lw * ls;
}

double reshuffled_trace_norm(const CMatrix& J) {
  require_square(J, "reshuffled_trace_norm");
  const int d = checked_root(J.rows(), "reshuffled_trace_norm");
  CMatrix R(J.rows(), J.cols());
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) R(a * d + c, b * d + e) = J(a * d + b, c * d + e);
  return trace_norm(R);
}

}  // namespace majflow
