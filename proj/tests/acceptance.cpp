// One PASS/FAIL line per acceptance criterion; nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "extremal_pairs.hpp"
#include "majflow/ball.hpp"
#include "majflow/channel.hpp"
#include "majflow/entropy.hpp"
#include "majflow/flow.hpp"
#include "majflow/functional.hpp"
#include "majflow/prob.hpp"
#include "majflow/ris.hpp"
#include "majflow/ris_io.hpp"
#include "test_util.hpp"

using namespace majflow;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

char buf[512];

template <class... A>
std::string fmt(const char* f, A... a) {
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

double h2(double x) { return x <= 0 || x >= 1 ? 0.0 : -x * std::log2(x) - (1 - x) * std::log2(1 - x); }

// ---------------------------------------------------------------- 1
Outcome audenaert_fannes() {
  double worst = 0.0;
  int cases = 0;
  for (int d = 2; d <= 8; ++d)
    for (int k = 1; k <= 12; ++k) {
      const double eps = 0.05 * k;
      if (eps >= 1.0 - 1.0 / d) continue;
      const auto pure = ProbabilityVector::pure(d);
      const auto star = majorization_minimizer(pure, eps).result;
      const double gap = std::abs(evaluate(shannon(), star) - evaluate(shannon(), pure));
      worst = std::max(worst, std::abs(gap - (eps * std::log2(d - 1.0) + h2(eps))));
      ++cases;
    }
  return {worst <= 1e-12, fmt("%d cases, max deviation %.3g", cases, worst)};
}

// ---------------------------------------------------------------- 2
Outcome semigroup() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> dim(2, 10);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  double worst = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const auto r = testutil::random_prob(static_cast<std::size_t>(dim(rng)), rng);
    const double e1 = u(rng), e2 = u(rng);
    const auto once = majorization_minimizer(r, e1 + e2).result;
    const auto twice = majorization_minimizer(majorization_minimizer(r, e2).result, e1).result;
    worst = std::max(worst, l1_distance(once.entries(), twice.entries()));
  }
  return {worst <= 1e-10, fmt("10000 triples, max l1 gap %.3g", worst)};
}

// ---------------------------------------------------------------- 3
Outcome dominance() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> dim(2, 10);
  std::uniform_real_distribution<double> u(0.0, 0.6);
  int failures = 0;
  for (int t = 0; t < 200; ++t) {
    const auto r = testutil::random_prob(static_cast<std::size_t>(dim(rng)), rng);
    if (!randomized_dominance_oracle(r, u(rng), 1000, 1000 + t, 1e-9)) ++failures;
  }
  return {failures == 0, fmt("200 balls x 1000 samples, %d failures", failures)};
}

// ---------------------------------------------------------------- 4
Outcome lipschitz_table() {
  std::mt19937_64 rng(4242);
  const double ln2 = std::numbers::ln2;
  struct Row {
    std::string name;
    EntropyFunctional F;
    int d;
    double k;  // closed form
    extremal::Pair pair;
  };
  std::vector<Row> rows;
  for (double a : {1.5, 2.0, 3.0})
    for (int d : {3, 5}) rows.push_back({fmt("tsallis a=%g d=%d", a, d), tsallis(a), d, a / (a - 1), extremal::pure_state(d)});
  for (int d = 3; d <= 6; ++d) {
    rows.push_back({fmt("renyi2 d=%d", d), renyi(2.0), d, (d - 2) / ((std::sqrt(d - 1.0) - 1) * ln2), extremal::renyi2(d)});
    rows.push_back({fmt("renyi_inf d=%d", d), min_entropy(), d, d / ln2, extremal::min_entropy(d)});
    std::vector<double> c(d);
    for (int i = 0; i < d; ++i) c[i] = std::sqrt(i + 1.0) + 0.1 * i;
    rows.push_back({fmt("guesswork d=%d", d), guesswork(c), d, c.back() - c.front(), extremal::guesswork(d)});
    for (int N : {2, 5})
      rows.push_back({fmt("E[K] N=%d d=%d", N, d), distinct_outcomes(N), d, static_cast<double>(N), extremal::pure_state(d)});
  }
  std::string bad;
  double worst_attain = 1.0;
  for (const Row& row : rows) {
    const double lib = lipschitz_constant(row.F, row.d).value();
    if (std::abs(lib - row.k) > 1e-9 * row.k) bad += " " + row.name + "(value)";
    const double ratio = std::abs(evaluate(row.F, row.pair.p) - evaluate(row.F, row.pair.q)) /
                         tv_distance(row.pair.p, row.pair.q);
    worst_attain = std::min(worst_attain, ratio / row.k);
    if (ratio < 0.99 * row.k || ratio > row.k * (1 + 1e-6)) bad += " " + row.name + "(attain)";
    for (int t = 0; t < 10000; ++t) {
      const auto p = testutil::random_prob(row.d, rng);
      const auto q = t % 2 ? testutil::random_prob(row.d, rng) : sample_ball_point(p, 0.02, rng);
      if (std::abs(evaluate(row.F, p) - evaluate(row.F, q)) > row.k * tv_distance(p, q) + 1e-12) {
        bad += " " + row.name + "(violated)";
        break;
      }
    }
  }
  return {bad.empty(), fmt("%zu rows, worst attainment ratio %.5f", rows.size(), worst_attain) + bad};
}

// ---------------------------------------------------------------- 5
Outcome mills() {
  const auto m = mills_ratio_maximum();
  const bool ok = m.x0 >= 1.1615278892744612 && m.x0 <= 1.1615278892744958 &&
                  m.mu >= 0.346813047097384 && m.mu <= 0.346813047097549;
  return {ok, fmt("x0 = %.17g, mu = %.17g", m.x0, m.mu)};
}

// ---------------------------------------------------------------- 6
Outcome rwa_eb_time() {
  int mismatches = 0, points = 0;
  std::string first;
  for (int i = 1; i <= 10; ++i)
    for (int j = 0; j < 10; ++j) {
      const double g = 0.1 * i, ag = 0.05 + 0.1 * j;
      const double a = 1 + 4 * g + g * g, b = (1 + g) * std::sqrt(1 + 6 * g + g * g);
      const double B = 2 * g / (a + b);
      const int expected = std::max(1, static_cast<int>(std::ceil(0.5 * std::log(B) / std::log(ag))));
      // E = E0 = lambda = 1: |gamma| = cos(tau/2), g = exp(-beta).
      const auto phi = rwa_channel(1.0, 1.0, 1.0, 2.0 * std::acos(ag), -std::log(g));
      const auto v = classify_eeb(phi, {.n_max = 200, .tol = 1e-10});
      ++points;
      if (!v.eb_step || *v.eb_step != expected) {
        ++mismatches;
        if (first.empty())
          first = fmt(" first: g=%.2f |gamma|=%.2f expected %d got %d", g, ag, expected, v.eb_step ? *v.eb_step : -1);
      }
    }
  return {mismatches == 0, fmt("%d grid points, %d mismatches", points, mismatches) + first};
}

RISProtocol dipole(BetaProfile b, int T) {
  return RISProtocol::qubit(CouplingKind::full_dipole, 0.9, 0.8, 2.0, 0.5, std::move(b), T);
}

// ---------------------------------------------------------------- 7
Outcome dipole_rate() {
  const auto d1 = rate_derivatives(dipole(BetaProfile::beta1(), 1));
  const auto d2 = rate_derivatives(dipole(BetaProfile::beta2(), 1));
  const bool ok1 = std::abs(d1.d1 - 0.240) <= 0.003 && std::abs(d1.d2 - 0.530) <= 0.01;
  const bool ok2 = std::abs(d2.d1 - 0.275) <= 0.003 && std::abs(d2.d2 - 0.716) <= 0.015;
  return {ok1 && ok2, fmt("beta1: L'=%.5f L''=%.5f [%s]; beta2: L'=%.5f L''=%.5f [%s]", d1.d1, d1.d2,
                          ok1 ? "ok" : "off", d2.d1, d2.d2, ok2 ? "ok" : "off")};
}

// ---------------------------------------------------------------- 8
Outcome gallavotti_cohen() {
  double worst = 0.0;
  for (auto b : {BetaProfile::beta1(), BetaProfile::beta2()}) {
    const auto p = dipole(b, 1);
    for (int i = 0; i <= 20; ++i)
      for (int k = 0; k <= 20; ++k) {
        const double s = i / 20.0, a = -1.5 + 0.1 * k;
        worst = std::max(worst, std::abs(lambda_alpha(p, s, a) - lambda_alpha(p, s, -1.0 - a)));
      }
  }
  return {worst <= 1e-8, fmt("2 x 21 x 21 grid, max asymmetry %.3g", worst)};
}

// ---------------------------------------------------------------- 9
Outcome trajectories() {
  const auto p = dipole(BetaProfile::beta1(), 200);
  const auto rho = DensityMatrix::maximally_mixed(2);
  const TrajectorySampler S(p, rho);
  const auto recs = S.sample_many(9, 50000, 4);
  double m = 0, m2 = 0, e = 0, e2 = 0;
  for (const auto& r : recs) {
    m += r.sigma_traj;
    m2 += r.sigma_traj * r.sigma_traj;
    const double x = std::exp(0.3 * r.sigma_traj);
    e += x;
    e2 += x * x;
  }
  const double n = static_cast<double>(recs.size());
  m /= n;
  e /= n;
  const double se_m = std::sqrt((m2 / n - m * m) / n), se_e = std::sqrt((e2 / n - e * e) / n);
  const double sig = sigma_tot(p, rho).total, mgf = S.mgf(0.3);
  const bool ok = std::abs(m - sig) <= 4 * se_m && std::abs(e - mgf) <= 4 * se_e;
  return {ok, fmt("mean %.5f vs sigma_tot %.5f (%.2f SE); MGF(0.3) %.5g vs %.5g (%.2f SE)", m, sig,
                  std::abs(m - sig) / se_m, e, mgf, std::abs(e - mgf) / se_e)};
}

// ---------------------------------------------------------------- 10
Outcome x_zero_limit() {
  const auto p = read_protocol_file(std::string(MAJFLOW_DATA_DIR) + "/rwa.json");
  if (p.T != 400) return {false, "rwa.json must use T = 400"};
  const auto inv0 = invariant_state(p, 0.0);
  CMatrix g(2, 2);
  g << 0.7, cplx(0.1, 0.2), cplx(0.1, -0.2), 0.3;
  const DensityMatrix rho(g);
  auto mpow = [](const CMatrix& A, double x) {
    return hermitian_function(A, [x](double t) { return std::pow(std::max(t, 0.0), x); });
  };
  double w1 = 0, w2 = 0;
  for (double a : {-0.5, 0.5}) {
    w1 = std::max(w1, std::abs(mgf_exact(p, inv0, a) - 1.0));
    const double Q = (mpow(inv0.matrix(), -a) * mpow(rho.matrix(), 1.0 + a)).trace().real();
    w2 = std::max(w2, std::abs(mgf_exact(p, rho, a) - Q));
  }
  return {w1 <= 1e-3 && w2 <= 5e-3, fmt("invariant start max |M-1| %.3g; generic start max |M-Q| %.3g", w1, w2)};
}

// ---------------------------------------------------------------- 11
Outcome clt() {
  const auto c = clt_diagnostic(dipole(BetaProfile::beta1(), 500), DensityMatrix::maximally_mixed(2),
                                500, 2000, 11, 4);
  const bool ok = std::abs(c.variance - c.lambda2) <= 0.15 * c.lambda2 &&
                  std::abs(c.mean) <= 4 * std::sqrt(c.lambda2 / 2000);
  return {ok, fmt("variance %.4f vs L''(0) %.4f; mean %.4f (bound %.4f); KS gap %.4f", c.variance,
                  c.lambda2, c.mean, 4 * std::sqrt(c.lambda2 / 2000), c.ks_gap)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {1, "Audenaert-Fannes saturation", 1, audenaert_fannes},
      {2, "flow semigroup", 5, semigroup},
      {3, "ball dominance oracle", 10, dominance},
      {4, "Lipschitz table", 30, lipschitz_table},
      {5, "Mills-ratio constants", 0.1, mills},
      {6, "RWA entanglement-breaking time", 60, rwa_eb_time},
      {7, "full-dipole rate function", 120, dipole_rate},
      {8, "Gallavotti-Cohen symmetry", 60, gallavotti_cohen},
      {9, "trajectory/expectation consistency", 120, trajectories},
      {10, "X = 0 limit", 30, x_zero_limit},
      {11, "CLT convergence", 180, clt},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = dt < c.limit_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("criterion %2d %-36s %s  (%.2f s of %g s%s) %s\n", c.id, c.name, pass ? "PASS" : "FAIL",
                dt, c.limit_s, in_time ? "" : ", too slow", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
