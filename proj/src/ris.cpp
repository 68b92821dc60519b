#include "majflow/ris.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

#include <boost/math/quadrature/gauss.hpp>

#include "majflow/errors.hpp"

namespace majflow {

namespace {

CMatrix lowering() {
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 1) = 1.0;
  return a;
}

bool is_hermitian(const CMatrix& A, double tol = 1e-10) {
  return A.rows() == A.cols() && (A - A.adjoint()).norm() <= tol * std::max(1.0, A.norm());
}

cplx vec_trace(const CVector& v, int d) {
  cplx t = 0.0;
  for (int m = 0; m < d; ++m) t += v(m * d + m);
  return t;
}

double log_floor(double x) { return std::log(std::max(x, 1e-300)); }

}  // namespace

// ---------------------------------------------------------------- beta

double BetaProfile::operator()(double s) const {
  switch (kind) {
    case Kind::constant:
      return params.at(0);
    case Kind::beta1:
      return 2.0 * (3.0 + 4.0 * std::tanh(2.0 * s)) / (3.0 + 2.0 * std::log(std::cosh(2.0)));
    case Kind::beta2: {
      const auto& a = params;
      return a.at(0) * std::tanh(2.0 * s) - a.at(1) * std::tanh(0.5 * s) - a.at(2) * s * s * s +
             a.at(3) * s * s - a.at(4) * s + a.at(5);
    }
    case Kind::poly: {
      double acc = 0.0;
      for (auto it = params.rbegin(); it != params.rend(); ++it) acc = acc * s + *it;
      return acc;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

BetaProfile BetaProfile::constant(double b) { return {Kind::constant, {b}}; }
BetaProfile BetaProfile::beta1() { return {Kind::beta1, {}}; }
BetaProfile BetaProfile::beta2(std::vector<double> a) {
  if (a.size() != 6) throw invalid_input("beta2 needs exactly 6 coefficients");
  return {Kind::beta2, std::move(a)};
}
BetaProfile BetaProfile::poly(std::vector<double> coeffs) {
  if (coeffs.empty()) throw invalid_input("poly beta needs at least one coefficient");
  return {Kind::poly, std::move(coeffs)};
}

// ---------------------------------------------------------------- protocol

void RISProtocol::validate() const {
  if (d_S < 1 || d_E < 1) throw invalid_input("protocol: dimensions must be positive");
  const int D = d_S * d_E;
  if (h_S.rows() != d_S || h_S.cols() != d_S) throw invalid_input("protocol: h_S has wrong shape");
  if (h_E0.rows() != d_E || h_E0.cols() != d_E) throw invalid_input("protocol: h_E has wrong shape");
  if (h_E1.size() != 0 && (h_E1.rows() != d_E || h_E1.cols() != d_E))
    throw invalid_input("protocol: h_E slope has wrong shape");
  if (v.rows() != D || v.cols() != D) throw invalid_input("protocol: coupling has wrong shape");
  if (!is_hermitian(h_S)) throw invalid_input("protocol: h_S is not Hermitian");
  if (!is_hermitian(h_E0)) throw invalid_input("protocol: h_E is not Hermitian");
  if (h_E1.size() != 0 && !is_hermitian(h_E1)) throw invalid_input("protocol: h_E slope is not Hermitian");
  if (!is_hermitian(v)) throw invalid_input("protocol: coupling is not Hermitian");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw invalid_input("protocol: tau must be positive");
  if (T < 1) throw invalid_input("protocol: T must be at least 1");
  for (int i = 0; i <= 100; ++i) {
    const double b = beta(i / 100.0);
    if (!std::isfinite(b) || b < 0.0)
      throw invalid_input("protocol: beta(s) must be finite and nonnegative on [0, 1]");
  }
  if (rho_init) {
    if (rho_init->rows() != d_S || rho_init->cols() != d_S)
      throw invalid_input("protocol: rho_init has wrong shape");
    DensityMatrix check(*rho_init);
    (void)check;
  }
}

CMatrix RISProtocol::h_E(double s) const {
  if (h_E1.size() == 0) return h_E0;
  return h_E0 + s * h_E1;
}

CMatrix RISProtocol::unitary(double s) const {
  const CMatrix IS = CMatrix::Identity(d_S, d_S);
  const CMatrix IE = CMatrix::Identity(d_E, d_E);
  const CMatrix H = kron(h_S, IE) + kron(IS, h_E(s)) + v;
  return hermitian_exp(0.5 * (H + H.adjoint()), cplx(0.0, -tau));
}

CMatrix RISProtocol::probe_state(double s) const { return gibbs_state(h_E(s), beta(s)); }

RISProtocol RISProtocol::qubit(CouplingKind kind, double E, double E0, double lam, double tau,
                               BetaProfile beta, int T) {
  const CMatrix a = lowering();
  const CMatrix ad = a.adjoint();
  RISProtocol p;
  p.d_S = p.d_E = 2;
  p.h_S = E * ad * a;
  p.h_E0 = E0 * ad * a;
  p.h_E1 = CMatrix();
  p.beta = std::move(beta);
  p.coupling = kind;
  p.lambda = lam;
  switch (kind) {
    case CouplingKind::rwa:
      p.v = lam * 0.5 * (kron(ad, a) + kron(a, ad));
      break;
    case CouplingKind::full_dipole:
      p.v = lam * 0.5 * kron(a + ad, a + ad);
      break;
    case CouplingKind::custom:
      throw invalid_input("qubit(): custom coupling needs an explicit matrix");
  }
  p.tau = tau;
  p.T = T;
  p.validate();
  return p;
}

// ---------------------------------------------------------------- maps

Superoperator reduced_map(const RISProtocol& p, double s) {
  return interaction_channel(p.unitary(s), p.probe_state(s), p.d_S, p.d_E);
}

Superoperator deformed_map(const RISProtocol& p, double s, double alpha) {
  const double b = p.beta(s);
  const CMatrix hE = p.h_E(s);
  const CMatrix U = p.unitary(s);
  const CMatrix Ud = U.adjoint();
  // xi e^{-aY} = e^{-(1+a)Y}/Z, with Z from xi itself; shift by the ground
  // energy keeps both exponentials bounded.
  const HermitianEigen e = eigdecompose_hermitian(hE);
  const double emin = e.values.back();
  double Z = 0.0;
  for (double x : e.values) Z += std::exp(-b * (x - emin));
  CMatrix left = CMatrix::Zero(p.d_E, p.d_E), right = CMatrix::Zero(p.d_E, p.d_E);
  for (std::size_t i = 0; i < e.values.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const CMatrix P = e.vectors.col(k) * e.vectors.col(k).adjoint();
    const double y = b * (e.values[i] - emin);
    left += std::exp(0.5 * alpha * y) * P;
    right += std::exp(-(1.0 + alpha) * y) / Z * P;
  }
  const CMatrix L = kron(CMatrix::Identity(p.d_S, p.d_S), left);
  return Superoperator::from_function(p.d_S, [&](const CMatrix& X) {
    return partial_trace(L * U * kron(X, right) * Ud * L, p.d_S, p.d_E, Subsystem::B);
  });
}

DensityMatrix invariant_state(const RISProtocol& p, double s) {
  const ChannelReport r = analyze(reduced_map(p, s));
  if (r.multiplicity_of_one != 1 || !r.invariant_state)
    throw invalid_input("reduced map has no unique invariant state at s = " + std::to_string(s));
  return *r.invariant_state;
}

double x_of_s(const RISProtocol& p, double s) {
  const CMatrix rho = invariant_state(p, s).matrix();
  const CMatrix U = p.unitary(s);
  const CMatrix joint = kron(rho, p.probe_state(s));
  return (U * joint * U.adjoint() - joint).norm();
}

// ---------------------------------------------------------------- entropy

double von_neumann_entropy(const CMatrix& rho) {
  double S = 0.0;
  for (double x : eigdecompose_hermitian(rho, 1e-8).values)
    if (x > 0.0) S -= x * std::log(x);
  return S;
}

double relative_entropy(const CMatrix& rho, const CMatrix& sigma) {
  const HermitianEigen es = eigdecompose_hermitian(sigma, 1e-8);
  const double shift = es.values.back() < 1e-14 ? 1e-14 : 0.0;
  CMatrix logs = CMatrix::Zero(sigma.rows(), sigma.cols());
  for (std::size_t i = 0; i < es.values.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    logs += std::log(std::max(es.values[i], 0.0) + shift) * es.vectors.col(k) *
            es.vectors.col(k).adjoint();
  }
  return -von_neumann_entropy(rho) - (rho * logs).trace().real();
}

EntropyBalance sigma_tot(const RISProtocol& p, const DensityMatrix& rho_init) {
  p.validate();
  if (rho_init.dim() != p.d_S) throw invalid_input("sigma_tot: rho_init has wrong dimension");
  EntropyBalance out;
  CMatrix rho = rho_init.matrix();
  double S_prev = von_neumann_entropy(rho);
  for (int k = 1; k <= p.T; ++k) {
    const double s = static_cast<double>(k) / p.T;
    const CMatrix U = p.unitary(s);
    const CMatrix xi = p.probe_state(s);
    const CMatrix hE = p.h_E(s);
    const double b = p.beta(s);
    const CMatrix joint = U * kron(rho, xi) * U.adjoint();
    CMatrix next = partial_trace(joint, p.d_S, p.d_E, Subsystem::B);
    next = 0.5 * (next + next.adjoint());
    const CMatrix xi_f = partial_trace(joint, p.d_S, p.d_E, Subsystem::A);
    const double sigma = relative_entropy(joint, kron(next, xi));
    const double S_next = von_neumann_entropy(next);
    const double dS = S_prev - S_next;
    const double dQ = (hE * xi_f).trace().real() - (hE * xi).trace().real();
    const double resid = std::abs(dS + sigma - b * dQ);
    out.sigma.push_back(sigma);
    out.dS.push_back(dS);
    out.dQ.push_back(dQ);
    out.beta.push_back(b);
    out.total += sigma;
    out.max_residual = std::max(out.max_residual, resid);
    if (resid > 1e-8)
      throw numerical_error("sigma_tot: entropy balance violated at step " + std::to_string(k) +
                            " (residual " + std::to_string(resid) + ")");
    rho = next;
    S_prev = S_next;
  }
  return out;
}

std::vector<SpectralProjector> spectral_projectors(const CMatrix& A, double tol) {
  const HermitianEigen e = eigdecompose_hermitian(A, 1e-8);
  std::vector<SpectralProjector> out;
  const double scale = std::max(1.0, std::abs(e.values.front()));
  for (std::size_t i = 0; i < e.values.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const CMatrix P = e.vectors.col(k) * e.vectors.col(k).adjoint();
    if (!out.empty() && std::abs(out.back().value - e.values[i]) <= tol * scale) {
      auto& last = out.back();
      last.value = (last.value * last.rank + e.values[i]) / (last.rank + 1);
      last.rank += 1;
      last.P += P;
    } else {
      out.push_back({e.values[i], 1, P});
    }
  }
  return out;
}

// ---------------------------------------------------------------- trajectories

TrajectorySampler::TrajectorySampler(RISProtocol p, const DensityMatrix& rho_init)
    : p_(std::move(p)), rho_i_(rho_init.matrix()) {
  p_.validate();
  if (rho_init.dim() != p_.d_S) throw invalid_input("sampler: rho_init has wrong dimension");
  const int dS = p_.d_S, dE = p_.d_E;

  init_proj_ = spectral_projectors(rho_i_);
  for (const auto& sp : init_proj_) r_i_.push_back(std::max(sp.value, 0.0));

  CMatrix rho = rho_i_;
  steps_.reserve(static_cast<std::size_t>(p_.T));
  for (int k = 1; k <= p_.T; ++k) {
    const double s = static_cast<double>(k) / p_.T;
    Step st;
    st.beta = p_.beta(s);
    const CMatrix U = p_.unitary(s);
    const CMatrix Ud = U.adjoint();
    const CMatrix xi = p_.probe_state(s);
    // Levels of Y: clustering on h_E is the same as on beta h_E for beta > 0,
    // and beta = 0 makes every level y = 0 anyway.
    const auto proj = spectral_projectors(p_.h_E(s));
    const int n = static_cast<int>(proj.size());
    for (const auto& sp : proj) {
      st.y.push_back(st.beta * sp.value);
      st.p_in.push_back((xi * sp.P).trace().real());
    }
    const CMatrix IS = CMatrix::Identity(dS, dS);
    st.K.reserve(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i) {
      const CMatrix in = proj[i].P / static_cast<double>(proj[i].rank);
      for (int j = 0; j < n; ++j) {
        const CMatrix Pj = kron(IS, proj[j].P);
        st.K.push_back(Superoperator::from_function(dS, [&](const CMatrix& X) {
                         return partial_trace(Pj * U * kron(X, in) * Ud * Pj, dS, dE,
                                              Subsystem::B);
                       }).matrix());
      }
    }
    st.L = interaction_channel(U, xi, dS, dE).matrix();
    rho = unvec(st.L * vec(rho), dS);
    rho = 0.5 * (rho + rho.adjoint());
    steps_.push_back(std::move(st));
  }

  // Floor the final spectrum so that A^f = -log rho_f is finite.
  const HermitianEigen ef = eigdecompose_hermitian(rho, 1e-8);
  CMatrix floored = CMatrix::Zero(dS, dS);
  for (std::size_t i = 0; i < ef.values.size(); ++i) {
    double x = ef.values[i];
    if (x < 1e-13) {
      x = 1e-13;
      floored_ = true;
    }
    const auto k = static_cast<Eigen::Index>(i);
    floored += x * ef.vectors.col(k) * ef.vectors.col(k).adjoint();
  }
  rho_f_ = floored;
  fin_proj_ = spectral_projectors(rho_f_);
  for (const auto& sp : fin_proj_) r_f_.push_back(sp.value);
}

namespace {

template <class Rng>
int draw(const std::vector<double>& w, Rng& rng) {
  double total = 0.0;
  for (double x : w) total += std::max(x, 0.0);
  std::uniform_real_distribution<double> u(0.0, total);
  const double t = u(rng);
  double acc = 0.0;
  int last = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0) continue;
    last = static_cast<int>(i);
    acc += w[i];
    if (t < acc) return last;
  }
  return last;
}

}  // namespace

TrajectoryRecord TrajectorySampler::sample(std::uint64_t seed, std::uint64_t index) const {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  const int dS = p_.d_S;
  TrajectoryRecord rec;
  rec.probe_in.reserve(steps_.size());
  rec.probe_out.reserve(steps_.size());

  std::vector<double> w;
  for (const auto& sp : init_proj_) w.push_back((sp.P * rho_i_).trace().real());
  rec.a_init_index = draw(w, rng);
  CVector state = vec(init_proj_[rec.a_init_index].P /
                      static_cast<double>(init_proj_[rec.a_init_index].rank));

  std::vector<CVector> cand;
  for (const Step& st : steps_) {
    const int n = static_cast<int>(st.y.size());
    const int i = draw(st.p_in, rng);
    cand.resize(static_cast<std::size_t>(n));
    w.assign(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
      cand[j].noalias() = st.K[static_cast<std::size_t>(i * n + j)] * state;
      w[j] = vec_trace(cand[j], dS).real();
    }
    const int j = draw(w, rng);
    state = cand[j] / w[j];
    rec.probe_in.push_back(i);
    rec.probe_out.push_back(j);
    rec.dy_tot += st.y[j] - st.y[i];
  }

  const CMatrix last = unvec(state, dS);
  w.clear();
  for (const auto& sp : fin_proj_) w.push_back((sp.P * last).trace().real());
  rec.a_fin_index = draw(w, rng);
  rec.ds_sys = std::log(r_f_[rec.a_fin_index]) - log_floor(r_i_[rec.a_init_index]);
  rec.sigma_traj = rec.dy_tot - rec.ds_sys;
  return rec;
}

std::vector<TrajectoryRecord> TrajectorySampler::sample_many(std::uint64_t seed, int n,
                                                             int threads) const {
  if (n < 0) throw invalid_input("sample_many: negative trajectory count");
  std::vector<TrajectoryRecord> out(static_cast<std::size_t>(n));
  threads = std::clamp(threads, 1, std::max(1, n));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int k; (k = next.fetch_add(1)) < n;)
      out[static_cast<std::size_t>(k)] = sample(seed, static_cast<std::uint64_t>(k));
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  return out;
}

double TrajectorySampler::mgf_dy(double alpha) const {
  CMatrix X = rho_i_;
  for (int k = 1; k <= p_.T; ++k)
    X = deformed_map(p_, static_cast<double>(k) / p_.T, alpha).apply(X);
  return X.trace().real();
}

double TrajectorySampler::mgf(double alpha) const {
  // rho_i^{1+a} through the deformed maps, closed with rho_f^{-a}.
  CMatrix X = CMatrix::Zero(p_.d_S, p_.d_S);
  for (std::size_t a = 0; a < init_proj_.size(); ++a)
    if (r_i_[a] > 0.0) X += std::pow(r_i_[a], 1.0 + alpha) * init_proj_[a].P;
  for (int k = 1; k <= p_.T; ++k)
    X = deformed_map(p_, static_cast<double>(k) / p_.T, alpha).apply(X);
  CMatrix close = CMatrix::Zero(p_.d_S, p_.d_S);
  for (std::size_t a = 0; a < fin_proj_.size(); ++a)
    close += std::pow(r_f_[a], -alpha) * fin_proj_[a].P;
  return (close * X).trace().real();
}

double mgf_exact(const RISProtocol& p, const DensityMatrix& rho_init, double alpha) {
  return TrajectorySampler(p, rho_init).mgf(alpha);
}

// ---------------------------------------------------------------- rate function

double lambda_alpha(const RISProtocol& p, double s, double alpha) {
  const Superoperator L = deformed_map(p, s, alpha);
  Eigen::ComplexEigenSolver<CMatrix> es(L.matrix(), false);
  const auto& ev = es.eigenvalues();
  double radius = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) radius = std::max(radius, std::abs(ev(i)));
  // Among the eigenvalues on the spectral circle take the one nearest the
  // positive axis; for a positive map that is the spectral radius itself.
  Eigen::Index best = -1;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (std::abs(ev(i)) >= (1.0 - 1e-9) * radius && (best < 0 || ev(i).real() > ev(best).real()))
      best = i;
  const cplx r = ev(best);
  if (std::abs(r.imag()) > 1e-8 * std::max(1.0, std::abs(r)) || !(r.real() > 0.0))
    throw numerical_error("lambda_alpha: dominant eigenvalue is not real positive");
  return r.real();
}

double big_lambda(const RISProtocol& p, double alpha) {
  // Composite Gauss-Legendre, doubling the panel count until two successive
  // estimates agree. The target is far below what the finite differences in
  // rate_derivatives can tolerate.
  using GL = boost::math::quadrature::gauss<double, 20>;
  auto f = [&](double s) { return std::log(lambda_alpha(p, s, alpha)); };
  auto composite = [&](int panels) {
    double acc = 0.0;
    for (int i = 0; i < panels; ++i)
      acc += GL::integrate(f, static_cast<double>(i) / panels, static_cast<double>(i + 1) / panels);
    return acc;
  };
  int panels = 2;
  double prev = composite(panels);
  for (;;) {
    panels *= 2;
    const double cur = composite(panels);
    const double diff = std::abs(cur - prev);
    if (diff <= 1e-12) return cur;
    if (panels >= 256) {
      if (diff <= 1e-7) return cur;
      throw numerical_error("big_lambda: quadrature did not converge");
    }
    prev = cur;
  }
}

RateDerivatives rate_derivatives(const RISProtocol& p, double h) {
  const double L0 = big_lambda(p, 0.0);
  auto diffs = [&](double step) {
    const double up = big_lambda(p, step), dn = big_lambda(p, -step);
    return std::pair{(up - dn) / (2.0 * step), (up - 2.0 * L0 + dn) / (step * step)};
  };
  const auto [a1, a2] = diffs(h);
  const auto [b1, b2] = diffs(0.5 * h);
  return {(4.0 * b1 - a1) / 3.0, (4.0 * b2 - a2) / 3.0};
}

RateFunction rate_function_from(std::function<double(double)> f, double alpha_min,
                                double alpha_max, int n) {
  if (!(alpha_max > alpha_min) || n < 3) throw invalid_input("rate function: bad alpha grid");
  RateFunction r;
  r.eval = std::move(f);
  for (int i = 0; i < n; ++i) {
    const double a = alpha_min + (alpha_max - alpha_min) * i / (n - 1);
    r.alpha.push_back(a);
    r.values.push_back(r.eval(a));
  }
  const double h = r.alpha[1] - r.alpha[0];
  for (int i = 1; i + 1 < n; ++i)
    if (r.values[i + 1] - 2.0 * r.values[i] + r.values[i - 1] < -1e-9 * std::max(1.0, h * h))
      r.convex_on_grid = false;
  r.slope_min = (r.values[1] - r.values[0]) / h;
  r.slope_max = (r.values[n - 1] - r.values[n - 2]) / h;
  const double e = 1e-3;
  const double up = r.eval(e), mid = r.eval(0.0), dn = r.eval(-e);
  r.d1 = (up - dn) / (2.0 * e);
  r.d2 = (up - 2.0 * mid + dn) / (e * e);
  return r;
}

RateFunction sample_rate_function(const RISProtocol& p, double alpha_min, double alpha_max,
                                  int n) {
  p.validate();
  RateFunction r =
      rate_function_from([p](double a) { return big_lambda(p, a); }, alpha_min, alpha_max, n);
  const RateDerivatives d = rate_derivatives(p);
  r.d1 = d.d1;
  r.d2 = d.d2;
  return r;
}

double legendre(const RateFunction& rate, double x) {
  const double slack = 1e-9 * std::max(1.0, std::abs(x));
  if (x < rate.slope_min - slack || x > rate.slope_max + slack)
    return std::numeric_limits<double>::infinity();
  const std::size_t n = rate.alpha.size();
  std::size_t best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double v = rate.alpha[i] * x - rate.values[i];
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  // Golden section between the neighbours of the best grid point.
  double lo = rate.alpha[best == 0 ? 0 : best - 1];
  double hi = rate.alpha[std::min(best + 1, n - 1)];
  auto g = [&](double a) { return a * x - rate.eval(a); };
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - phi * (hi - lo), d = lo + phi * (hi - lo);
  double gc = g(c), gd = g(d);
  for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
    if (gc > gd) {
      hi = d;
      d = c;
      gd = gc;
      c = hi - phi * (hi - lo);
      gc = g(c);
    } else {
      lo = c;
      c = d;
      gc = gd;
      d = lo + phi * (hi - lo);
      gd = g(d);
    }
  }
  return std::max({best_v, gc, gd});
}

// ---------------------------------------------------------------- adiabatic state

namespace {

struct PeripheralSplit {
  int z;
  CMatrix rho_inv;
  std::vector<CMatrix> p;  // p_0..p_{z-1}
};

PeripheralSplit split_peripheral(const Superoperator& L) {
  const ChannelReport r = analyze(L);
  if (!r.irreducible || !r.invariant_state)
    throw invalid_input("adiabatic state: reduced map is not irreducible");
  PeripheralSplit out;
  out.z = r.period_z;
  out.rho_inv = r.invariant_state->matrix();
  const int d = L.dim();
  if (out.z == 1) {
    out.p = {CMatrix::Identity(d, d)};
    return out;
  }
  const cplx theta = std::polar(1.0, 2.0 * std::numbers::pi / out.z);
  Eigen::ComplexEigenSolver<CMatrix> es(L.matrix());
  Eigen::Index k = 0;
  for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()(i) - theta) < std::abs(es.eigenvalues()(k) - theta)) k = i;
  // Eigenvector of theta is proportional to u sigma.
  const CMatrix X = unvec(es.eigenvectors().col(k), d);
  const CMatrix Y = X * hermitian_function(out.rho_inv, [](double x) { return 1.0 / x; });
  Eigen::ComplexEigenSolver<CMatrix> ey(Y);
  const cplx mu0 = ey.eigenvalues()(0) / std::abs(ey.eigenvalues()(0));
  // Y is normal; orthonormalize each cluster of eigenvectors before summing.
  std::vector<std::vector<Eigen::Index>> groups(static_cast<std::size_t>(out.z));
  for (Eigen::Index i = 0; i < ey.eigenvalues().size(); ++i) {
    const cplx ph = ey.eigenvalues()(i) / std::abs(ey.eigenvalues()(i)) / mu0;
    int n = static_cast<int>(std::lround(std::arg(ph) / (2.0 * std::numbers::pi) * out.z));
    n = ((n % out.z) + out.z) % out.z;
    groups[static_cast<std::size_t>(n)].push_back(i);
  }
  for (const auto& gidx : groups) {
    CMatrix B(d, static_cast<Eigen::Index>(gidx.size()));
    for (std::size_t c = 0; c < gidx.size(); ++c)
      B.col(static_cast<Eigen::Index>(c)) = ey.eigenvectors().col(gidx[c]);
    if (gidx.empty()) {
      out.p.push_back(CMatrix::Zero(d, d));
      continue;
    }
    Eigen::HouseholderQR<CMatrix> qr(B);
    const CMatrix Q = qr.householderQ() * CMatrix::Identity(d, B.cols());
    out.p.push_back(Q * Q.adjoint());
  }
  return out;
}

}  // namespace

DensityMatrix adiabatic_state(const Superoperator& L0, const Superoperator& Ls, int k,
                              const DensityMatrix& rho_init) {
  if (k < 0) throw invalid_input("adiabatic state: k must be nonnegative");
  const PeripheralSplit a = split_peripheral(L0);
  const PeripheralSplit b = split_peripheral(Ls);
  if (a.z != b.z) throw invalid_input("adiabatic state: period changes along the protocol");
  const int z = a.z;
  // Relabel the p_n(s) by largest overlap with p_n(0).
  std::vector<int> label(static_cast<std::size_t>(z));
  for (int m = 0; m < z; ++m) {
    int best = 0;
    double bv = -1.0;
    for (int n = 0; n < z; ++n) {
      const double ov = (a.p[n] * b.p[m]).trace().real();
      if (ov > bv) {
        bv = ov;
        best = n;
      }
    }
    label[static_cast<std::size_t>(m)] = best;
  }
  std::vector<CMatrix> ps(static_cast<std::size_t>(z));
  for (int m = 0; m < z; ++m) ps[static_cast<std::size_t>(label[m])] = b.p[m];

  CMatrix out = CMatrix::Zero(L0.dim(), L0.dim());
  for (int n = 0; n < z; ++n) {
    const double w = (a.p[n] * rho_init.matrix()).trace().real();
    const int m = (((n - k) % z) + z) % z;
    out += w * b.rho_inv * ps[static_cast<std::size_t>(m)];
  }
  out *= static_cast<double>(z);
  return DensityMatrix(0.5 * (out + out.adjoint()));
}

DensityMatrix rho_adiab(const RISProtocol& p, int k, int T, const DensityMatrix& rho_init) {
  if (T < 1 || k < 0 || k > T) throw invalid_input("rho_adiab: need 0 <= k <= T, T >= 1");
  return adiabatic_state(reduced_map(p, 0.0), reduced_map(p, static_cast<double>(k) / T), k,
                         rho_init);
}

// ---------------------------------------------------------------- CLT

CltSummary clt_diagnostic(const RISProtocol& p, const DensityMatrix& rho_init, int T, int n_traj,
                          std::uint64_t seed, int threads) {
  if (n_traj < 2) throw invalid_input("clt: need at least two trajectories");
  RISProtocol q = p;
  q.T = T;
  const RateDerivatives d = rate_derivatives(q);
  const TrajectorySampler sampler(q, rho_init);
  const auto recs = sampler.sample_many(seed, n_traj, threads);
  CltSummary out;
  out.T = T;
  out.n_traj = n_traj;
  out.lambda1 = d.d1;
  out.lambda2 = d.d2;
  std::vector<double> z;
  z.reserve(recs.size());
  double rate = 0.0;
  for (const auto& r : recs) {
    z.push_back((r.dy_tot - T * d.d1) / std::sqrt(static_cast<double>(T)));
    rate += r.dy_tot / T;
  }
  out.mean_rate = rate / n_traj;
  double m = 0.0;
  for (double x : z) m += x;
  m /= n_traj;
  double v = 0.0;
  for (double x : z) v += (x - m) * (x - m);
  out.mean = m;
  out.variance = v / (n_traj - 1);
  std::sort(z.begin(), z.end());
  const double sd = std::sqrt(std::max(d.d2, 1e-300));
  double gap = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double F = 0.5 * std::erfc(-z[i] / (sd * std::numbers::sqrt2));
    gap = std::max({gap, std::abs(F - static_cast<double>(i) / n_traj),
                    std::abs(F - static_cast<double>(i + 1) / n_traj)});
  }
  out.ks_gap = gap;
  return out;
}

}  // namespace majflow
