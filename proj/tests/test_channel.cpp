#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "majflow/channel.hpp"
#include "majflow/errors.hpp"
#include "quantum_util.hpp"

using namespace majflow;

namespace {

Superoperator depolarizing(int d, double p) {
  return Superoperator::from_function(d, [d, p](const CMatrix& X) {
    return CMatrix((1 - p) * X + p * X.trace() * CMatrix::Identity(d, d) / static_cast<double>(d));
  });
}

CMatrix ket_bra(int d, int i, int j) { return matrix_unit(d, i, j); }

// Period-2 construction: Phi_Q swaps |e0><f0| and |f0><e0| with weight lam.
Superoperator cross_term(int d, int e0, int f0, cplx lam) {
  CMatrix M = lam * vec(ket_bra(d, f0, e0)) * vec(ket_bra(d, e0, f0)).adjoint() +
              std::conj(lam) * vec(ket_bra(d, e0, f0)) * vec(ket_bra(d, f0, e0)).adjoint();
  return Superoperator(d, M);
}

std::vector<CMatrix> diagonal_projections(int d, const std::vector<int>& block_of) {
  int z = *std::max_element(block_of.begin(), block_of.end()) + 1;
  std::vector<CMatrix> p(z, CMatrix::Zero(d, d));
  for (int i = 0; i < d; ++i) p[block_of[i]](i, i) = 1.0;
  return p;
}

bool multiset_close(std::vector<cplx> a, std::vector<cplx> b, double tol) {
  if (a.size() != b.size()) return false;
  for (cplx x : a) {
    auto it = std::min_element(b.begin(), b.end(),
                               [x](cplx u, cplx v) { return std::abs(u - x) < std::abs(v - x); });
    if (std::abs(*it - x) > tol) return false;
    b.erase(it);
  }
  return true;
}

CMatrix sigma_z() {
  CMatrix s = CMatrix::Zero(2, 2);
  s(0, 0) = 1.0;
  s(1, 1) = -1.0;
  return s;
}

CMatrix lowering() {
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 1) = 1.0;
  return a;
}

}  // namespace

TEST(Analyze, CompletelyDepolarizing) {
  auto rep = analyze(depolarizing(3, 1.0));
  EXPECT_TRUE(rep.primitive);
  EXPECT_TRUE(rep.irreducible);
  EXPECT_TRUE(rep.faithful);
  EXPECT_EQ(rep.period_z, 1);
  EXPECT_NEAR(rep.spectral_radius, 1.0, 1e-12);
  EXPECT_LE((rep.invariant_state->matrix() - CMatrix::Identity(3, 3) / 3.0).norm(), 1e-12);
}

TEST(Analyze, UnitaryChannelIsNotPrimitive) {
  std::mt19937_64 rng(1);
  for (int d = 2; d <= 3; ++d) {
    auto rep = analyze(superop_from_kraus({qtest::random_unitary(d, rng)}));
    EXPECT_FALSE(rep.primitive);
    EXPECT_FALSE(rep.irreducible);
    EXPECT_EQ(static_cast<int>(rep.peripheral.size()), d * d);
    EXPECT_EQ(rep.multiplicity_of_one, d);
    EXPECT_TRUE(rep.invariant_state.has_value());
  }
}

TEST(Analyze, RwaChannelPrimitiveWithGibbsInvariant) {
  for (double beta : {0.0, 0.3, 1.7}) {
    const double E = 1.1, E0 = 0.9;
    auto rep = analyze(rwa_channel(E, E0, 0.7, 1.3, beta));
    ASSERT_TRUE(rep.primitive);
    const double g = std::exp(-beta * E0);
    // Gibbs state of h_S at beta* = beta E0 / E: same matrix as the probe state.
    CMatrix expected = CMatrix::Zero(2, 2);
    expected(0, 0) = 1.0 / (1.0 + g);
    expected(1, 1) = g / (1.0 + g);
    EXPECT_LE((rep.invariant_state->matrix() - expected).norm(), 1e-10);
  }
}

TEST(Analyze, ZeroTemperatureRwaHasNonFaithfulFixedPoint) {
  auto rep = analyze(rwa_channel(1.0, 1.0, 1.0, 1.0, INFINITY));
  EXPECT_FALSE(rep.faithful);
  EXPECT_FALSE(rep.irreducible);
  EXPECT_FALSE(rep.primitive);
  EXPECT_EQ(rep.peripheral.size(), 1u);
  EXPECT_NEAR(std::real(rep.invariant_state->matrix()(0, 0)), 1.0, 1e-10);
}

TEST(Analyze, SpectrumOfSquareIsSquareOfSpectrum) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    auto phi = superop_from_kraus(qtest::random_kraus(2 + t % 3, 2, rng));
    auto r1 = analyze(phi);
    auto r2 = analyze(phi.compose(phi));
    std::vector<cplx> sq;
    for (cplx z : r1.spectrum) sq.push_back(z * z);
    EXPECT_TRUE(multiset_close(sq, r2.spectrum, 1e-8));
  }
}

TEST(Analyze, RejectsNonTpAndNonCp) {
  auto half = Superoperator(2, 0.5 * CMatrix::Identity(4, 4));
  EXPECT_THROW(analyze(half), invalid_input);
  auto T = Superoperator::from_function(2, [](const CMatrix& X) { return CMatrix(X.transpose()); });
  EXPECT_THROW(analyze(T), invalid_input);
}

TEST(Analyze, ReportSerializes) {
  auto j = analyze(depolarizing(2, 0.5)).to_json();
  EXPECT_TRUE(j["primitive"].get<bool>());
  EXPECT_EQ(j["spectrum"].size(), 4u);
  EXPECT_EQ(j["period_z"].get<int>(), 1);
}

TEST(Irreducible, TrivialPeriodGivesReplacementChannel) {
  std::mt19937_64 rng(3);
  auto sigma = qtest::random_state(3, rng);
  auto phi = build_irreducible(1, {CMatrix::Identity(3, 3)}, sigma,
                               Superoperator(3, CMatrix::Zero(9, 9)));
  auto rho = qtest::random_state(3, rng).matrix();
  EXPECT_LE((phi.apply(rho) - sigma.matrix()).norm(), 1e-13);
  auto rep = analyze(phi);
  EXPECT_TRUE(rep.primitive);
  EXPECT_EQ(rep.period_z, 1);
}

TEST(Irreducible, PeriodTwoCrossTermExample) {
  struct Case {
    int d;
    std::vector<int> blocks;
    std::vector<double> sig;
    int e0, f0;
    double lam;
  };
  const std::vector<Case> cases = {
      {2, {0, 1}, {0.5, 0.5}, 0, 1, 0.6},
      {4, {0, 0, 1, 1}, {0.45, 0.05, 0.05, 0.45}, 1, 2, 0.07},
      {3, {0, 1, 1}, {0.5, 0.3, 0.2}, 0, 2, 0.25},
  };
  for (const Case& c : cases) {
    auto p = diagonal_projections(c.d, c.blocks);
    auto sigma = DensityMatrix::diagonal(c.sig);
    auto q = cross_term(c.d, c.e0, c.f0, c.lam);
    auto phi = build_irreducible(2, p, sigma, q);
    auto rep = analyze(phi);
    ASSERT_TRUE(rep.irreducible) << "d=" << c.d;
    EXPECT_FALSE(rep.primitive);
    EXPECT_EQ(rep.period_z, 2);
    EXPECT_FALSE(rep.period_mismatch);
    EXPECT_LE((rep.invariant_state->matrix() - sigma.matrix()).norm(), 1e-10);
    for (const CMatrix& pn : p)
      EXPECT_NEAR(std::real((rep.invariant_state->matrix() * pn).trace()), 0.5, 1e-10);

    // Intertwining on matrix units: Phi(p_j X p_k) = p_{j-1} Phi(X) p_{k-1}.
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int a = 0; a < c.d; ++a)
          for (int b = 0; b < c.d; ++b) {
            CMatrix X = matrix_unit(c.d, a, b);
            CMatrix lhs = phi.apply(p[j] * X * p[k]);
            CMatrix rhs = p[(j + 1) % 2] * phi.apply(X) * p[(k + 1) % 2];
            EXPECT_LE((lhs - rhs).norm(), 1e-12);
          }

    // Choi matrices of powers of the peripheral part, against the block sum.
    auto phi_p = irreducible_peripheral_part(2, p, sigma);
    for (int k = 1; k <= 4; ++k) {
      CMatrix expected = CMatrix::Zero(c.d * c.d, c.d * c.d);
      for (int m = 0; m < 2; ++m) {
        const CMatrix& pm = p[m];
        const CMatrix& pmk = p[((m - k) % 2 + 2) % 2];
        double trm = pm.trace().real();
        CMatrix out = pmk * sigma.matrix() * pmk / (pmk * sigma.matrix()).trace().real();
        expected += trm * kron(out, pm / trm);
      }
      EXPECT_LE((choi(phi_p.power(k)) - expected).norm(), 1e-12);
      EXPECT_LE((irreducible_choi_power(2, p, sigma, k) - expected).norm(), 1e-12);
    }

    // Cesaro mean of Phi^n(rho) approaches sigma even though Phi^n oscillates.
    std::mt19937_64 rng(4);
    CMatrix rho = qtest::random_state(c.d, rng).matrix();
    CMatrix acc = CMatrix::Zero(c.d, c.d), x = rho;
    const int M = 4000;
    for (int n = 0; n < M; ++n) {
      acc += x;
      x = phi.apply(x);
    }
    EXPECT_LE((acc / M - sigma.matrix()).norm(), 5e-3);

    // The PT spectrum of J(Phi^n) contains -lam^n; search only while that is
    // resolvable against the 1e-10 PPT tolerance.
    const int n_max = static_cast<int>(std::log(1e-8) / std::log(c.lam));
    auto v = classify_eeb(phi, {.n_max = n_max});
    EXPECT_FALSE(v.ppt_step.has_value());
    EXPECT_FALSE(v.eb_step.has_value());
    EXPECT_EQ(v.status, EEBStatus::undetermined);
  }
}

TEST(Irreducible, NormShortcutAndCpBoundary) {
  auto p = diagonal_projections(4, {0, 0, 1, 1});
  auto sigma = DensityMatrix::diagonal({0.45, 0.05, 0.05, 0.45});
  // lambda_min(sigma) = 0.05: shortcut holds for sqrt2 |lam| <= 0.1.
  EXPECT_TRUE(irreducible_cp_shortcut(2, sigma, cross_term(4, 1, 2, 0.07)));
  EXPECT_NO_THROW(build_irreducible(2, p, sigma, cross_term(4, 1, 2, 0.07)));
  // The exact CP boundary for this block is |lam| <= 0.1.
  EXPECT_FALSE(irreducible_cp_shortcut(2, sigma, cross_term(4, 1, 2, 0.09)));
  EXPECT_NO_THROW(build_irreducible(2, p, sigma, cross_term(4, 1, 2, 0.09)));
  EXPECT_THROW(build_irreducible(2, p, sigma, cross_term(4, 1, 2, 0.2)), invalid_input);
}

TEST(Irreducible, PreconditionDiagnostics) {
  auto p = diagonal_projections(2, {0, 1});
  auto sigma = DensityMatrix::diagonal({0.5, 0.5});
  auto zero = Superoperator(2, CMatrix::Zero(4, 4));
  // Wrong count.
  EXPECT_THROW(build_irreducible(2, {p[0]}, sigma, zero), invalid_input);
  // Not summing to identity.
  EXPECT_THROW(build_irreducible(2, {p[0], p[0]}, sigma, zero), invalid_input);
  // tr(sigma p_n) != 1/z.
  EXPECT_THROW(build_irreducible(2, p, DensityMatrix::diagonal({0.6, 0.4}), zero), invalid_input);
  // sigma not commuting with projections.
  CMatrix s = CMatrix::Identity(2, 2) / 2.0;
  s(0, 1) = s(1, 0) = 0.1;
  EXPECT_THROW(build_irreducible(2, p, DensityMatrix(s), zero), invalid_input);
  // Spectral radius of Phi_Q too large.
  EXPECT_THROW(build_irreducible(2, p, sigma, cross_term(2, 0, 1, 1.0)), invalid_input);
  // Phi_Q not killing sigma p_n.
  auto bad = Superoperator(2, 0.1 * vec(ket_bra(2, 0, 1)) * vec(ket_bra(2, 0, 0)).adjoint());
  EXPECT_THROW(build_irreducible(2, p, sigma, bad), invalid_input);
}

TEST(Rwa, EigenRelations) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  for (int t = 0; t < 20; ++t) {
    double E = u(rng), E0 = u(rng), lam = u(rng), tau = u(rng), beta = u(rng);
    auto phi = rwa_channel(E, E0, lam, tau, beta);
    cplx g = rwa_gamma(E, E0, lam, tau);
    CMatrix a = lowering();
    // With U = exp(-i tau H) the lowering operator picks up conj(gamma).
    EXPECT_LE((phi.apply(a) - std::conj(g) * a).norm(), 1e-10);
    EXPECT_LE((phi.apply(a.adjoint()) - g * a.adjoint()).norm(), 1e-10);
    EXPECT_LE((phi.apply(sigma_z()) - std::norm(g) * sigma_z()).norm(), 1e-10);
    double nu = std::sqrt((E - E0) * (E - E0) + lam * lam);
    double s = std::sin(nu * tau / 2);
    EXPECT_NEAR(std::abs(g), std::sqrt(1 - lam * lam / (nu * nu) * s * s), 1e-12);
    double G = std::exp(-beta * E0);
    CMatrix rho = CMatrix::Zero(2, 2);
    rho(0, 0) = 1 / (1 + G);
    rho(1, 1) = G / (1 + G);
    EXPECT_LE((phi.apply(rho) - rho).norm(), 1e-10);
  }
}

TEST(Rwa, ZeroTemperaturePartialTransposeSpectrum) {
  const double tau = 1.1;
  auto phi = rwa_channel(1.0, 1.0, 1.0, tau, INFINITY);
  double ag = std::abs(rwa_gamma(1.0, 1.0, 1.0, tau));
  for (int n = 1; n <= 5; ++n) {
    CMatrix J = choi(phi.power(n));
    auto e = eigdecompose_hermitian(partial_transpose(J, 2, 2, Subsystem::B)).values;
    double x = std::pow(ag, 2 * n);
    std::vector<double> expected = {1.0, 1.0, x, -x};
    std::sort(expected.begin(), expected.end(), std::greater<>());
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(e[i], expected[i], 1e-10);
  }
}

TEST(Rwa, VanishingGammaIsReplacementChannel) {
  // E = E0 and nu tau = pi.
  const double lam = 0.8, tau = std::numbers::pi / lam;
  EXPECT_NEAR(std::abs(rwa_gamma(1.0, 1.0, lam, tau)), 0.0, 1e-15);
  auto phi = rwa_channel(1.0, 1.0, lam, tau, 0.5);
  auto v = classify_eeb(phi);
  EXPECT_EQ(v.eb_step, 1);
  EXPECT_EQ(rwa_min_eb_time(std::exp(-0.5), 0.0), 1);
}

TEST(Rwa, ThresholdEndpointsAndFormula) {
  EXPECT_NEAR(rwa_ppt_threshold(1.0), 3.0 - 2.0 * std::sqrt(2.0), 1e-15);
  for (double g : {1e-9, 1e-3, 0.2, 0.7, 1.0}) {
    double B = rwa_ppt_threshold(g);
    EXPECT_GT(B, 0.0);
    EXPECT_LE(B, 3.0 - 2.0 * std::sqrt(2.0) + 1e-15);
    // B is the root of g (1-x)^2 = (1+g)^2 x in (0, 1).
    EXPECT_NEAR(g * (1 - B) * (1 - B), (1 + g) * (1 + g) * B, 1e-14);
  }
  EXPECT_FALSE(rwa_min_eb_time(0.0, 0.5).has_value());
  EXPECT_FALSE(rwa_min_eb_time(0.5, 1.0).has_value());
  EXPECT_THROW(rwa_min_eb_time(1.5, 0.5), invalid_input);
}

TEST(Rwa, ClassifyMatchesClosedFormOnSmallGrid) {
  for (double g : {0.15, 0.5, 1.0})
    for (double ag : {0.2, 0.55, 0.85}) {
      auto phi = rwa_channel(1.0, 1.0, 1.0, 2.0 * std::acos(ag), -std::log(g));
      auto v = classify_eeb(phi);
      ASSERT_TRUE(v.eb_step.has_value());
      EXPECT_EQ(*v.eb_step, *rwa_min_eb_time(g, ag)) << g << " " << ag;
      EXPECT_EQ(v.ppt_step, v.eb_step);
    }
}

TEST(Classify, DepolarizingMatchesIsotropicThresholds) {
  // Phi^n has Choi q^n Omega + (1 - q^n) 1/d (x) 1. PPT iff q^n <= 1/(d+1);
  // the ball test passes iff q^n sqrt(1 - 1/d^2) <= 1/d^2.
  for (int d : {2, 3}) {
    for (double p : {0.1, 0.3, 0.6}) {
      const double q = 1.0 - p;
      auto v = classify_eeb(depolarizing(d, p));
      int ppt = static_cast<int>(std::ceil(std::log(1.0 / (d + 1)) / std::log(q) - 1e-12));
      ppt = std::max(ppt, 1);
      ASSERT_TRUE(v.ppt_step.has_value());
      EXPECT_EQ(*v.ppt_step, ppt);
      ASSERT_TRUE(v.eb_step.has_value());
      if (d == 2) {
        EXPECT_EQ(*v.eb_step, ppt);
      } else {
        double target = 1.0 / (d * std::sqrt(d * d - 1.0));
        int ball = std::max(1, static_cast<int>(std::ceil(std::log(target) / std::log(q) - 1e-12)));
        EXPECT_EQ(*v.eb_step, ball);
        EXPECT_GE(*v.eb_step, *v.ppt_step);
      }
      EXPECT_EQ(v.status, EEBStatus::EEB);
    }
  }
}

TEST(Classify, UnitaryStaysUndetermined) {
  std::mt19937_64 rng(6);
  auto phi = superop_from_kraus({qtest::random_unitary(2, rng)});
  auto v = classify_eeb(phi, {.n_max = 40});
  EXPECT_EQ(v.status, EEBStatus::undetermined);
  EXPECT_FALSE(v.ppt_step.has_value());
  EXPECT_EQ(v.not_eb_through, 40);
  auto v2 = classify_eeb(phi, {.n_max = 40, .report_suspected = true});
  EXPECT_EQ(v2.status, EEBStatus::ES_suspected);
  EXPECT_EQ(EEBVerdict::csv_header(), "ppt_step,eb_step,status,n_max,not_eb_through");
  EXPECT_EQ(v.csv_row(), ",,undetermined,40,40");
  EXPECT_TRUE(v.to_json()["eb_step"].is_null());
}
