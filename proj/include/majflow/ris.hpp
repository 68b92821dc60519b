#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "majflow/channel.hpp"
#include "majflow/linalg.hpp"

namespace majflow {

// Inverse probe temperature as a function of s in [0, 1].
struct BetaProfile {
  enum class Kind { constant, beta1, beta2, poly };
  Kind kind = Kind::constant;
  // constant: {b}; beta2: {a1..a6}; poly: c0, c1, ... (c0 + c1 s + ...).
  std::vector<double> params{1.0};

  double operator()(double s) const;

  static BetaProfile constant(double b);
  static BetaProfile beta1();
  // Defaults to the coefficient list used for the full-dipole example.
  static BetaProfile beta2(std::vector<double> a = {35.483, 141.929, 42.945, 93.5, 17.808, 1.061});
  static BetaProfile poly(std::vector<double> coeffs);
};

enum class CouplingKind { rwa, full_dipole, custom };

// Repeated interaction protocol. The probe Hamiltonian is h_E(s) = h_E0 + s h_E1;
// the coupling matrix v already includes the coupling constant. Step k of T
// uses s = k/T. Natural logarithms throughout.
struct RISProtocol {
  int d_S = 2;
  int d_E = 2;
  CMatrix h_S;
  CMatrix h_E0;
  CMatrix h_E1;  // zero for a constant probe Hamiltonian
  BetaProfile beta;
  CouplingKind coupling = CouplingKind::custom;
  double lambda = 0.0;  // informational for rwa / full_dipole
  CMatrix v;
  double tau = 1.0;
  int T = 1;
  std::optional<CMatrix> rho_init;

  // Throws invalid_input with a specific message on the first violation.
  void validate() const;

  double beta_at(double s) const { return beta(s); }
  CMatrix h_E(double s) const;
  CMatrix unitary(double s) const;
  CMatrix probe_state(double s) const;

  // Qubit system and probe with h_S = E n, h_E = E0 n and lambda/2 times the
  // rotating-wave or full-dipole coupling.
  static RISProtocol qubit(CouplingKind kind, double E, double E0, double lambda, double tau,
                           BetaProfile beta, int T);
};

Superoperator reduced_map(const RISProtocol& p, double s);
// eta -> tr_E( e^{aY} U (eta (x) xi) e^{-aY} U^dagger ), Y = beta(s) h_E(s).
Superoperator deformed_map(const RISProtocol& p, double s, double alpha);

// Unique invariant state of the reduced map at s; throws when not unique.
DensityMatrix invariant_state(const RISProtocol& p, double s);
// Hilbert-Schmidt norm of U (rho_inv (x) xi) U^dagger - rho_inv (x) xi.
double x_of_s(const RISProtocol& p, double s);

struct EntropyBalance {
  std::vector<double> sigma;  // per-step entropy production
  std::vector<double> dS;     // S(rho_{k-1}) - S(rho_k)
  std::vector<double> dQ;     // probe energy gain
  std::vector<double> beta;
  double total = 0.0;
  double max_residual = 0.0;  // max_k |dS_k + sigma_k - beta_k dQ_k|
};

// Throws numerical_error if any step balance misses by more than 1e-8.
EntropyBalance sigma_tot(const RISProtocol& p, const DensityMatrix& rho_init);

// Natural-log von Neumann entropy and relative entropy. The second argument
// of the relative entropy is regularized by 1e-14 * identity when its
// smallest eigenvalue falls below that.
double von_neumann_entropy(const CMatrix& rho);
double relative_entropy(const CMatrix& rho, const CMatrix& sigma);

// Spectral projectors of a Hermitian matrix, eigenvalues clustered within tol.
struct SpectralProjector {
  double value;
  int rank;
  CMatrix P;
};
std::vector<SpectralProjector> spectral_projectors(const CMatrix& A, double tol = 1e-9);

struct TrajectoryRecord {
  int a_init_index = 0;
  int a_fin_index = 0;
  std::vector<int> probe_in;
  std::vector<int> probe_out;
  double sigma_traj = 0.0;  // entropy production of the trajectory
  double dy_tot = 0.0;      // sum_k beta_k (E_out - E_in)
  double ds_sys = 0.0;      // log r_f(a_fin) - log r_i(a_init)
};

// Precomputes everything needed to sample two-time-measurement trajectories
// and to evaluate exact moment generating functions for one (protocol, rho_i).
class TrajectorySampler {
 public:
  TrajectorySampler(RISProtocol p, const DensityMatrix& rho_init);

  const RISProtocol& protocol() const { return p_; }
  const CMatrix& rho_final() const { return rho_f_; }
  // True when the final state's spectrum was floored at 1e-13.
  bool floored() const { return floored_; }

  TrajectoryRecord sample(std::uint64_t seed, std::uint64_t index) const;
  // Records in index order; the result does not depend on `threads`.
  std::vector<TrajectoryRecord> sample_many(std::uint64_t seed, int n, int threads) const;

  // E[exp(alpha * sigma_traj)].
  double mgf(double alpha) const;
  // E[exp(alpha * dy_tot)].
  double mgf_dy(double alpha) const;

 private:
  struct Step {
    double beta;
    std::vector<double> y;     // probe levels of Y = beta h_E
    std::vector<double> p_in;  // tr(xi Pi_i)
    std::vector<CMatrix> K;    // K[i*n + j]: eta -> tr_E(Pi_j U (eta (x) Pi_i/dim) U^dag Pi_j)
    CMatrix L;                 // reduced map
  };
  RISProtocol p_;
  CMatrix rho_i_;
  CMatrix rho_f_;
  bool floored_ = false;
  std::vector<SpectralProjector> init_proj_;
  std::vector<SpectralProjector> fin_proj_;
  std::vector<double> r_i_, r_f_;  // eigenvalue per projector
  std::vector<Step> steps_;
};

double mgf_exact(const RISProtocol& p, const DensityMatrix& rho_init, double alpha);

// Perron root of the deformed map (real, positive).
double lambda_alpha(const RISProtocol& p, double s, double alpha);
// Integral over s of log lambda_alpha, adaptive composite Gauss-Legendre.
double big_lambda(const RISProtocol& p, double alpha);

struct RateDerivatives {
  double d1;
  double d2;
};
// Central differences with step h and one Richardson extrapolation.
RateDerivatives rate_derivatives(const RISProtocol& p, double h = 1e-3);

struct RateFunction {
  std::vector<double> alpha;
  std::vector<double> values;
  double d1 = 0.0;
  double d2 = 0.0;
  bool convex_on_grid = true;
  // Slopes at the ends of the grid; Legendre transform is +inf outside.
  double slope_min = 0.0;
  double slope_max = 0.0;
  std::function<double(double)> eval;
};

RateFunction sample_rate_function(const RISProtocol& p, double alpha_min, double alpha_max,
                                  int n);
// Build from an arbitrary convex function (used for closed-form checks).
RateFunction rate_function_from(std::function<double(double)> f, double alpha_min,
                                double alpha_max, int n);
// sup_alpha (alpha x - Lambda(alpha)) over the sampled interval.
double legendre(const RateFunction& rate, double x);

// z sum_n tr(p_n(0) rho_i) rho_inv(s) p_{n-k}(s), with the p_n read off the
// peripheral eigenvectors of L0 = L(0) and Ls = L(s). Throws if the periods differ.
DensityMatrix adiabatic_state(const Superoperator& L0, const Superoperator& Ls, int k,
                              const DensityMatrix& rho_init);
DensityMatrix rho_adiab(const RISProtocol& p, int k, int T, const DensityMatrix& rho_init);

struct CltSummary {
  int T = 0;
  int n_traj = 0;
  double lambda1 = 0.0;  // Lambda'(0)
  double lambda2 = 0.0;  // Lambda''(0)
  double mean = 0.0;     // of (dy_tot - T Lambda'(0)) / sqrt(T)
  double variance = 0.0;
  double ks_gap = 0.0;   // sup |F_emp - F_N(0, Lambda'')|
  double mean_rate = 0.0;  // mean dy_tot / T
};

CltSummary clt_diagnostic(const RISProtocol& p, const DensityMatrix& rho_init, int T, int n_traj,
                          std::uint64_t seed, int threads);

}  // namespace majflow
