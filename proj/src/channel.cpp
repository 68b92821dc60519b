#include "majflow/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "majflow/channel_io.hpp"
#include "majflow/errors.hpp"

namespace majflow {

using nlohmann::json;

namespace {

json complex_list(const std::vector<cplx>& v) {
  json out = json::array();
  for (cplx z : v) out.push_back(json::array({z.real(), z.imag()}));
  return out;
}

json optional_int(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }

void require_tp(const Superoperator& phi, double tol) {
  const int d = phi.dim();
  CMatrix id = CMatrix::Identity(d, d);
  if ((phi.adjoint().apply(id) - id).norm() > tol)
    throw invalid_input("channel is not trace-preserving");
}

void require_cp(const CMatrix& J, double tol) {
  const double scale = std::max(1.0, J.norm());
  if ((J - J.adjoint()).norm() > tol * scale)
    throw invalid_input("channel is not Hermitian-preserving (Choi matrix not Hermitian)");
  if (eigdecompose_hermitian(J, tol).values.back() < -tol * scale)
    throw invalid_input("channel is not completely positive (Choi matrix has a negative eigenvalue)");
}

// Spectral projection of v onto the eigenvalue-1 eigenspace of M, with the
// eigenspace dimension k supplied by the caller.
CVector project_onto_fixed_space(const CMatrix& M, int k, const CVector& v) {
  const Eigen::Index n = M.rows();
  CMatrix A = M - CMatrix::Identity(n, n);
  Eigen::JacobiSVD<CMatrix> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  CMatrix R = svd.matrixV().rightCols(k);
  CMatrix L = svd.matrixU().rightCols(k);
  CMatrix G = L.adjoint() * R;
  return R * G.fullPivLu().solve(L.adjoint() * v);
}

}  // namespace

// ---- analyze --------------------------------------------------------------

json ChannelReport::to_json() const {
  json j;
  j["spectrum"] = complex_list(spectrum);
  j["spectral_radius"] = spectral_radius;
  j["peripheral"] = complex_list(peripheral);
  j["period_z"] = period_z;
  j["invariant_state"] = invariant_state ? matrix_to_json(invariant_state->matrix()) : json(nullptr);
  j["faithful"] = faithful;
  j["primitive"] = primitive;
  j["irreducible"] = irreducible;
  j["multiplicity_of_one"] = multiplicity_of_one;
  j["peripheral_cluster"] = peripheral_cluster;
  j["period_mismatch"] = period_mismatch;
  return j;
}

ChannelReport analyze(const Superoperator& phi, const AnalyzeOptions& opt) {
  const int d = phi.dim();
  const CMatrix& M = phi.matrix();
  require_tp(phi, opt.tp_tol);
  require_cp(choi(phi), opt.cp_tol);

  Eigen::ComplexEigenSolver<CMatrix> es(M, false);
  if (es.info() != Eigen::Success) throw numerical_error("analyze: eigensolver failed");
  ChannelReport rep;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) rep.spectrum.push_back(es.eigenvalues()(i));
  std::stable_sort(rep.spectrum.begin(), rep.spectrum.end(),
                   [](cplx a, cplx b) { return std::abs(a) > std::abs(b); });
  rep.spectral_radius = std::abs(rep.spectrum.front());

  const double rho = rep.spectral_radius;
  for (cplx z : rep.spectrum) {
    if (std::abs(z) >= rho * (1.0 - opt.peri_tol)) rep.peripheral.push_back(z);
    if (std::abs(z - 1.0) <= opt.peri_tol * rho) ++rep.multiplicity_of_one;
  }
  for (std::size_t i = 0; i < rep.peripheral.size(); ++i)
    for (std::size_t j = i + 1; j < rep.peripheral.size(); ++j) {
      const double gap = std::abs(rep.peripheral[i] - rep.peripheral[j]);
      if (gap > 1e-10 && gap <= opt.peri_tol * rho) rep.peripheral_cluster = true;
    }
  if (rep.multiplicity_of_one == 0)
    throw numerical_error("analyze: trace-preserving map without eigenvalue 1");

  // Projecting the maximally mixed state gives an invariant state even when
  // the fixed space is degenerate (it is the Cesaro limit of Phi^n(1/d)).
  CVector v = project_onto_fixed_space(M, rep.multiplicity_of_one,
                                       vec(CMatrix::Identity(d, d) / static_cast<double>(d)));
  CMatrix X = unvec(v, d);
  X = 0.5 * (X + X.adjoint());
  const double tr = X.trace().real();
  if (tr > 1e-12) {
    X /= tr;
    try {
      rep.invariant_state = DensityMatrix(X);
    } catch (const invalid_input&) {
      rep.invariant_state.reset();
    }
  }
  if (rep.invariant_state) {
    const double lmin = eigdecompose_hermitian(rep.invariant_state->matrix()).values.back();
    rep.faithful = lmin > opt.faith_tol;
  }
  // TP makes the identity the left eigenvector, so full rank on that side is automatic.
  rep.irreducible = rep.multiplicity_of_one == 1 && rep.faithful;
  rep.primitive = rep.irreducible && rep.peripheral.size() == 1;

  if (rep.irreducible) {
    rep.period_z = static_cast<int>(rep.peripheral.size());
    int snapped = 0;
    for (int z = 1; z <= d && snapped == 0; ++z) {
      bool ok = true;
      for (cplx w : rep.peripheral) {
        const double a = std::arg(w) * z / (2.0 * std::numbers::pi);
        if (std::abs(a - std::round(a)) * 2.0 * std::numbers::pi / z > opt.angle_tol) {
          ok = false;
          break;
        }
      }
      if (ok) snapped = z;
    }
    rep.period_mismatch = snapped != rep.period_z;
  }
  return rep;
}

// ---- irreducible constructor ---------------------------------------------

namespace {

CMatrix phase_operator(int z, const std::vector<CMatrix>& p) {
  const cplx theta = std::polar(1.0, 2.0 * std::numbers::pi / z);
  CMatrix u = CMatrix::Zero(p.front().rows(), p.front().cols());
  for (int k = 0; k < z; ++k) u += std::pow(theta, k) * p[static_cast<std::size_t>(k)];
  return u;
}

void check_projections(int z, const std::vector<CMatrix>& p, const DensityMatrix& sigma,
                       double tol) {
  const int d = sigma.dim();
  if (z < 1 || z > d) throw invalid_input("build_irreducible: z must lie in 1..d");
  if (static_cast<int>(p.size()) != z)
    throw invalid_input("build_irreducible: need exactly z projections");
  CMatrix sum = CMatrix::Zero(d, d);
  for (int n = 0; n < z; ++n) {
    const CMatrix& q = p[static_cast<std::size_t>(n)];
    if (q.rows() != d || q.cols() != d)
      throw invalid_input("build_irreducible: projection has the wrong dimension");
    if ((q - q.adjoint()).norm() > tol || (q * q - q).norm() > tol)
      throw invalid_input("build_irreducible: p_" + std::to_string(n) + " is not an orthogonal projection");
    sum += q;
  }
  if ((sum - CMatrix::Identity(d, d)).norm() > tol)
    throw invalid_input("build_irreducible: projections do not sum to the identity");
  const CMatrix& s = sigma.matrix();
  for (int n = 0; n < z; ++n) {
    const CMatrix& q = p[static_cast<std::size_t>(n)];
    if ((s * q - q * s).norm() > tol)
      throw invalid_input("build_irreducible: sigma does not commute with p_" + std::to_string(n));
    if (std::abs((s * q).trace().real() - 1.0 / z) > tol)
      throw invalid_input("build_irreducible: tr(sigma p_" + std::to_string(n) + ") != 1/z");
  }
  if (eigdecompose_hermitian(s).values.back() <= tol)
    throw invalid_input("build_irreducible: sigma is not faithful");
}

}  // namespace

Superoperator irreducible_peripheral_part(int z, const std::vector<CMatrix>& p,
                                          const DensityMatrix& sigma) {
  check_projections(z, p, sigma, 1e-9);
  const int d = sigma.dim();
  const cplx theta = std::polar(1.0, 2.0 * std::numbers::pi / z);
  const CMatrix u = phase_operator(z, p);
  const Eigen::Index n2 = static_cast<Eigen::Index>(d) * d;
  CMatrix M = CMatrix::Zero(n2, n2);
  CMatrix un = CMatrix::Identity(d, d);
  for (int n = 0; n < z; ++n) {
    // tr(u^-n X) = <vec(u^n), vec(X)> since u is unitary.
    M += std::pow(theta, n) * vec(un * sigma.matrix()) * vec(un).adjoint();
    un = un * u;
  }
  return Superoperator(d, std::move(M));
}

CMatrix irreducible_choi_power(int z, const std::vector<CMatrix>& p, const DensityMatrix& sigma,
                               int k) {
  check_projections(z, p, sigma, 1e-9);
  const int d = sigma.dim();
  CMatrix L = CMatrix::Zero(d * d, d * d);
  for (int n = 0; n < z; ++n) {
    const int m = (((n - k) % z) + z) % z;
    L += kron(p[static_cast<std::size_t>(m)], p[static_cast<std::size_t>(n)]);
  }
  return static_cast<double>(z) * kron(sigma.matrix(), CMatrix::Identity(d, d)) * L;
}

bool irreducible_cp_shortcut(int z, const DensityMatrix& sigma, const Superoperator& phi_q) {
  const double lmin = eigdecompose_hermitian(sigma.matrix()).values.back();
  return choi(phi_q).norm() <= z * lmin;
}

Superoperator build_irreducible(int z, const std::vector<CMatrix>& p, const DensityMatrix& sigma,
                                const Superoperator& phi_q, double tol) {
  check_projections(z, p, sigma, tol);
  const int d = sigma.dim();
  if (phi_q.dim() != d) throw invalid_input("build_irreducible: Phi_Q has the wrong dimension");

  Eigen::ComplexEigenSolver<CMatrix> es(phi_q.matrix(), false);
  if (es.eigenvalues().cwiseAbs().maxCoeff() >= 1.0 - 1e-12)
    throw invalid_input("build_irreducible: spectral radius of Phi_Q is not below 1");

  const Superoperator adj = phi_q.adjoint();
  for (int n = 0; n < z; ++n) {
    const CMatrix& q = p[static_cast<std::size_t>(n)];
    if (phi_q.apply(sigma.matrix() * q).norm() > tol)
      throw invalid_input("build_irreducible: Phi_Q(sigma p_" + std::to_string(n) + ") != 0");
    if (adj.apply(q).norm() > tol)
      throw invalid_input("build_irreducible: Phi_Q^*(p_" + std::to_string(n) + ") != 0");
  }

  const Superoperator phi_p = irreducible_peripheral_part(z, p, sigma);
  const CMatrix Jq = choi(phi_q);
  if ((Jq - Jq.adjoint()).norm() > tol)
    throw invalid_input("build_irreducible: Phi_Q is not Hermitian-preserving");
  // Checked directly even when the norm shortcut holds: the shortcut also
  // presumes Phi_Q respects the block structure.
  if (eigdecompose_hermitian(Jq + choi(phi_p)).values.back() < -tol)
    throw invalid_input("build_irreducible: J(Phi_Q) >= -J(Phi_P) fails");
  return Superoperator(d, phi_p.matrix() + phi_q.matrix());
}

// ---- eventual entanglement breaking --------------------------------------

std::string to_string(EEBStatus s) {
  switch (s) {
    case EEBStatus::EEB: return "EEB";
    case EEBStatus::ES_suspected: return "ES_suspected";
    case EEBStatus::undetermined: return "undetermined";
  }
  return "undetermined";
}

json EEBVerdict::to_json() const {
  return {{"ppt_step", optional_int(ppt_step)},
          {"eb_step", optional_int(eb_step)},
          {"status", to_string(status)},
          {"n_max", n_max},
          {"not_eb_through", optional_int(not_eb_through)}};
}

std::string EEBVerdict::csv_header() { return "ppt_step,eb_step,status,n_max,not_eb_through"; }

std::string EEBVerdict::csv_row() const {
  auto f = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
  std::ostringstream os;
  os << f(ppt_step) << ',' << f(eb_step) << ',' << to_string(status) << ',' << n_max << ','
     << f(not_eb_through);
  return os.str();
}

EEBVerdict classify_eeb(const Superoperator& phi, const EEBOptions& opt) {
  if (opt.n_max < 1) throw invalid_input("classify_eeb: n_max must be >= 1");
  const ChannelReport rep = analyze(phi);
  const int d = phi.dim();
  // PPT equals separability for 2 x 2 (and 2 x 3) bipartitions; the Choi
  // matrix here is d x d, so only qubits qualify.
  const bool ppt_exact = d == 2;
  const CMatrix tau = CMatrix::Identity(d, d) / static_cast<double>(d);
  CMatrix target;
  if (rep.primitive) target = kron(rep.invariant_state->matrix(), tau);

  EEBVerdict v;
  v.n_max = opt.n_max;
  CMatrix P = phi.matrix();
  for (int n = 1; n <= opt.n_max; ++n) {
    if (n > 1) P = phi.matrix() * P;
    const Superoperator pn(d, P);
    const CMatrix J = choi(pn);
    const bool ppt = min_pt_eigenvalue(J) >= -opt.tol;
    if (ppt && !v.ppt_step) v.ppt_step = n;
    bool eb = ppt && ppt_exact;
    if (!eb && rep.primitive)
      eb = separable_ball_test(rep.invariant_state->matrix(), tau, J / static_cast<double>(d) - target);
    if (eb) {
      v.eb_step = n;
      if (!v.ppt_step) v.ppt_step = n;
      break;
    }
    if (trace_norm(P) > d * (1.0 + 1e-9)) v.not_eb_through = n;
  }
  if (v.eb_step)
    v.status = EEBStatus::EEB;
  else if (opt.report_suspected && v.not_eb_through == opt.n_max)
    v.status = EEBStatus::ES_suspected;
  return v;
}

// ---- repeated-interaction channels ---------------------------------------

Superoperator interaction_channel(const CMatrix& U, const CMatrix& xi, int dS, int dE) {
  if (U.rows() != dS * dE || U.cols() != dS * dE || xi.rows() != dE || xi.cols() != dE)
    throw invalid_input("interaction_channel: dimension mismatch");
  const CMatrix Ud = U.adjoint();
  return Superoperator::from_function(dS, [&](const CMatrix& X) {
    return partial_trace(U * kron(X, xi) * Ud, dS, dE, Subsystem::B);
  });
}

CMatrix gibbs_state(const CMatrix& h, double beta) {
  if (std::isnan(beta)) throw invalid_input("gibbs_state: beta is NaN");
  HermitianEigen e = eigdecompose_hermitian(h);
  const double emin = e.values.back();
  std::vector<double> w(e.values.size());
  if (std::isinf(beta)) {
    if (beta < 0) throw invalid_input("gibbs_state: beta = -inf");
    const double scale = std::max(1.0, std::abs(emin));
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = (e.values[i] - emin <= 1e-9 * scale) ? 1.0 : 0.0;
  } else {
    const double eref = beta >= 0 ? emin : e.values.front();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(-beta * (e.values[i] - eref));
  }
  double z = 0.0;
  for (double x : w) z += x;
  if (!(z > 0.0) || !std::isfinite(z)) throw numerical_error("gibbs_state: normalization failed");
  CMatrix out = CMatrix::Zero(h.rows(), h.cols());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out += (w[i] / z) * e.vectors.col(k) * e.vectors.col(k).adjoint();
  }
  return out;
}

namespace {

CMatrix lowering() {
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 1) = 1.0;
  return a;
}

}  // namespace

CMatrix rwa_unitary(double E, double E0, double lambda, double tau) {
  const CMatrix a = lowering();
  const CMatrix ad = a.adjoint();
  const CMatrix num = ad * a;
  const CMatrix I = CMatrix::Identity(2, 2);
  CMatrix H = E * kron(num, I) + E0 * kron(I, num) + lambda * 0.5 * (kron(ad, a) + kron(a, ad));
  return hermitian_exp(H, cplx(0.0, -tau));
}

Superoperator rwa_channel(double E, double E0, double lambda, double tau, double beta) {
  if (!(E > 0) || !(E0 > 0) || !(lambda >= 0) || !(tau > 0) || !(beta >= 0))
    throw invalid_input("rwa_channel: need E, E0, tau > 0, lambda >= 0, beta in [0, inf]");
  const CMatrix num = lowering().adjoint() * lowering();
  return interaction_channel(rwa_unitary(E, E0, lambda, tau), gibbs_state(E0 * num, beta), 2, 2);
}

cplx rwa_gamma(double E, double E0, double lambda, double tau) {
  const double nu = std::sqrt((E0 - E) * (E0 - E) + lambda * lambda);
  const cplx phase = std::exp(cplx(0.0, -0.5 * tau * (E0 + E)));
  if (nu == 0.0) return phase;
  return phase * cplx(std::cos(0.5 * tau * nu), (E0 - E) / nu * std::sin(0.5 * tau * nu));
}

double rwa_ppt_threshold(double g) {
  if (!(g > 0.0) || g > 1.0) throw invalid_input("rwa_ppt_threshold: g must lie in (0, 1]");
  // Rationalized so small g does not cancel.
  const double a = 1.0 + 4.0 * g + g * g;
  const double b = (1.0 + g) * std::sqrt(1.0 + 6.0 * g + g * g);
  return 2.0 * g / (a + b);
}

std::optional<int> rwa_min_eb_time(double g, double abs_gamma) {
  if (!(g >= 0.0 && g <= 1.0) || !(abs_gamma >= 0.0 && abs_gamma <= 1.0))
    throw invalid_input("rwa_min_eb_time: g and |gamma| must lie in [0, 1]");
  if (abs_gamma == 0.0) return 1;
  if (g == 0.0 || abs_gamma == 1.0) return std::nullopt;
  const double n = 0.5 * std::log(rwa_ppt_threshold(g)) / std::log(abs_gamma);
  return std::max(1, static_cast<int>(std::ceil(n)));
}

}  // namespace majflow
