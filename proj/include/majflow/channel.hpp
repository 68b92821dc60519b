#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "majflow/linalg.hpp"

namespace majflow {

struct AnalyzeOptions {
  double peri_tol = 1e-7;   // relative to the spectral radius
  double faith_tol = 1e-9;  // lambda_min of the invariant state
  double tp_tol = 1e-8;
  double cp_tol = 1e-8;     // relative to max(1, ||J||_2)
  double angle_tol = 1e-6;  // snapping peripheral phases to roots of unity
};

struct ChannelReport {
  std::vector<cplx> spectrum;  // sorted by decreasing modulus
  double spectral_radius = 0.0;
  std::vector<cplx> peripheral;
  int period_z = 0;  // 0 unless irreducible
  std::optional<DensityMatrix> invariant_state;
  bool faithful = false;
  bool primitive = false;
  bool irreducible = false;
  int multiplicity_of_one = 0;
  // Distinct peripheral eigenvalues closer than peri_tol; flagged, not resolved.
  bool peripheral_cluster = false;
  // Irreducible but the peripheral phases are not the z-th roots of unity.
  bool period_mismatch = false;

  nlohmann::json to_json() const;
};

// Throws invalid_input when the map is not trace-preserving or not CP.
ChannelReport analyze(const Superoperator& phi, const AnalyzeOptions& opt = {});

// Phi = sum_n theta^n P_n + Phi_Q with P_n(X) = tr(u^-n X) u^n sigma,
// u = sum_k theta^k p_k. Every precondition is checked with its own message.
Superoperator build_irreducible(int z, const std::vector<CMatrix>& projections,
                                const DensityMatrix& sigma, const Superoperator& phi_q,
                                double tol = 1e-9);
// The peripheral part sum_n theta^n P_n alone.
Superoperator irreducible_peripheral_part(int z, const std::vector<CMatrix>& projections,
                                          const DensityMatrix& sigma);
// z (sigma (x) 1) L_k with L_k = sum_n p_{n-k} (x) p_n.
CMatrix irreducible_choi_power(int z, const std::vector<CMatrix>& projections,
                               const DensityMatrix& sigma, int k);
// ||J(Phi_Q)||_2 <= z lambda_min(sigma): sufficient for J(Phi_Q) >= -J(Phi_P)
// when Phi_Q intertwines with the projections.
bool irreducible_cp_shortcut(int z, const DensityMatrix& sigma, const Superoperator& phi_q);

enum class EEBStatus { EEB, ES_suspected, undetermined };
std::string to_string(EEBStatus s);

struct EEBVerdict {
  std::optional<int> ppt_step;
  std::optional<int> eb_step;
  EEBStatus status = EEBStatus::undetermined;
  int n_max = 0;
  // Largest n <= n_max at which the reshuffling norm exceeds d (Phi^m is then
  // not EB for every m <= n).
  std::optional<int> not_eb_through;

  nlohmann::json to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

struct EEBOptions {
  int n_max = 200;
  double tol = 1e-10;
  // Report ES_suspected instead of undetermined when the reshuffling test
  // still rules out EB at n_max. Off by default: no claim is made.
  bool report_suspected = false;
};

EEBVerdict classify_eeb(const Superoperator& phi, const EEBOptions& opt = {});

// eta -> tr_E( U (eta (x) xi) U^dagger ), system factor first.
Superoperator interaction_channel(const CMatrix& U, const CMatrix& xi, int dS, int dE);

// Gibbs state of h at inverse temperature beta; beta = +inf gives the
// normalized ground-space projector.
CMatrix gibbs_state(const CMatrix& h, double beta);

// Qubit system and probe, rotating-wave dipole coupling lambda/2 (a* b + a b*).
CMatrix rwa_unitary(double E, double E0, double lambda, double tau);
Superoperator rwa_channel(double E, double E0, double lambda, double tau, double beta);
cplx rwa_gamma(double E, double E0, double lambda, double tau);
// Threshold on |gamma|^(2n) for the Choi matrix of Phi^n to be PPT; g = exp(-beta E0).
double rwa_ppt_threshold(double g);
// Smallest n with Phi^n entanglement breaking. nullopt when none exists
// (g = 0 or |gamma| = 1).
std::optional<int> rwa_min_eb_time(double g, double abs_gamma);

}  // namespace majflow
