#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "majflow/ball.hpp"
#include "majflow/channel.hpp"
#include "majflow/channel_io.hpp"
#include "majflow/entropy.hpp"
#include "majflow/errors.hpp"
#include "majflow/flow.hpp"
#include "majflow/functional.hpp"
#include "majflow/ris.hpp"
#include "majflow/ris_io.hpp"

using namespace majflow;
using nlohmann::json;

namespace {

enum Exit { ok = 0, usage = 1, bad_input = 2, numeric = 3 };

struct Global {
  std::uint64_t seed = 0;
  int threads = 0;
  std::optional<double> tol;
  std::string out;
  std::string format = "csv";
};

int default_threads() {
  if (const char* env = std::getenv("MAJFLOW_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw invalid_input("MAJFLOW_THREADS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// RFC 4180 quoting when needed.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

std::vector<double> parse_numbers(std::istream& in) {
  std::vector<double> v;
  std::string tok;
  while (in >> tok) {
    std::replace(tok.begin(), tok.end(), ',', ' ');
    std::istringstream parts(tok);
    std::string t;
    while (parts >> t) {
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(t, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != t.size()) throw invalid_input("not a number: '" + t + "'");
      v.push_back(x);
    }
  }
  return v;
}

void emit(const Global& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw invalid_input("cannot write '" + g.out + "'");
  f << text;
}

std::string vector_row(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

std::string vector_header(std::size_t d) {
  std::string s;
  for (std::size_t i = 0; i < d; ++i) s += (i ? ",p" : "p") + std::to_string(i + 1);
  return s;
}

// ---------------------------------------------------------------- bound

struct BoundArgs {
  std::string functional;
  int d = 0;
  std::optional<double> eps;
  bool lipschitz = false;
};

std::string cmd_bound(const BoundArgs& a, const Global& g) {
  const EntropyFunctional F = parse_functional(a.functional);
  if (a.d < 2) throw invalid_input("dimension must be at least 2");
  std::ostringstream os;
  if (a.lipschitz) {
    const LipschitzConstant L = lipschitz_constant(F, a.d);
    if (g.format == "json") {
      os << json{{"functional", a.functional}, {"d", a.d}, {"lipschitz_lower", L.lower},
                 {"lipschitz_upper", L.upper}, {"exact", L.exact()}}
                .dump(2)
         << '\n';
    } else {
      os << "functional,d,lipschitz_lower,lipschitz_upper\n"
         << csv_field(a.functional) << ',' << a.d << ',' << format_double(L.lower) << ','
         << format_double(L.upper) << '\n';
    }
    return os.str();
  }
  if (!a.eps) throw invalid_input("bound needs an epsilon (or --lipschitz)");
  const ContinuityBound b = uniform_continuity_bound(F, a.d, *a.eps);
  if (g.format == "json") {
    os << json{{"functional", a.functional}, {"d", a.d}, {"epsilon", *a.eps},
               {"bound", b.value}, {"regime", to_string(b.regime)}}
              .dump(2)
       << '\n';
  } else {
    os << "functional,d,epsilon,bound,regime\n"
       << csv_field(a.functional) << ',' << a.d << ',' << format_double(*a.eps) << ','
       << format_double(b.value) << ',' << to_string(b.regime) << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------- mmm

struct MmmArgs {
  std::vector<std::string> values;
  std::string file;
  double eps = 0.0;
  bool max = false;
  bool path = false;
};

std::string cmd_mmm(const MmmArgs& a, const Global& g) {
  std::vector<double> raw;
  if (!a.values.empty()) {
    std::string joined;
    for (const auto& v : a.values) joined += v + ' ';
    std::istringstream in(joined);
    raw = parse_numbers(in);
  } else if (!a.file.empty()) {
    std::ifstream in(a.file);
    if (!in) throw invalid_input("cannot open '" + a.file + "'");
    raw = parse_numbers(in);
  } else {
    raw = parse_numbers(std::cin);
  }
  const ProbabilityVector r(raw);
  if (!(a.eps >= 0.0)) throw invalid_input("epsilon must be nonnegative");
  std::ostringstream os;
  if (a.path) {
    const auto bps = flow_path(r, a.eps);
    if (g.format == "json") {
      json arr = json::array();
      for (const auto& b : bps)
        arr.push_back({{"epsilon", b.epsilon}, {"k_plus", b.k_plus}, {"k_minus", b.k_minus},
                       {"point", b.point.entries()}});
      os << arr.dump(2) << '\n';
    } else {
      os << "epsilon,k_plus,k_minus," << vector_header(r.size()) << '\n';
      for (const auto& b : bps)
        os << format_double(b.epsilon) << ',' << b.k_plus << ',' << b.k_minus << ','
           << vector_row(b.point.entries()) << '\n';
    }
    return os.str();
  }
  const ProbabilityVector out =
      a.max ? majorization_maximizer(r, a.eps) : majorization_minimizer(r, a.eps).result;
  if (g.format == "json")
    os << json{{"epsilon", a.eps}, {"kind", a.max ? "max" : "min"}, {"result", out.entries()}}.dump(2)
       << '\n';
  else
    os << vector_header(out.size()) << '\n' << vector_row(out.entries()) << '\n';
  return os.str();
}

// ---------------------------------------------------------------- classify

struct ClassifyArgs {
  std::string file;
  int n_max = 200;
  bool suspected = false;
};

std::string cmd_classify(const ClassifyArgs& a, const Global& g) {
  const Superoperator phi = read_channel_file(a.file);
  const ChannelReport rep = analyze(phi);
  EEBOptions opt;
  opt.n_max = a.n_max;
  opt.report_suspected = a.suspected;
  if (g.tol) opt.tol = *g.tol;
  const EEBVerdict v = classify_eeb(phi, opt);
  std::ostringstream os;
  if (g.format == "csv")
    os << EEBVerdict::csv_header() << '\n' << v.csv_row() << '\n';
  else
    os << json{{"report", rep.to_json()}, {"verdict", v.to_json()}}.dump(2) << '\n';
  return os.str();
}

// ---------------------------------------------------------------- ris

struct RisArgs {
  std::string file;
  std::optional<int> T;
  double alpha_min = -1.5, alpha_max = 0.5;
  int points = 41;
  int n_traj = 1000;
  bool probes = false;
};

DensityMatrix initial_state(const RISProtocol& p) {
  return p.rho_init ? DensityMatrix(*p.rho_init) : DensityMatrix::maximally_mixed(p.d_S);
}

RISProtocol load_protocol(const RisArgs& a) {
  RISProtocol p = read_protocol_file(a.file);
  if (a.T) {
    if (*a.T < 1) throw invalid_input("--T must be at least 1");
    p.T = *a.T;
  }
  return p;
}

std::string ris_lambda(const RisArgs& a, const Global& g) {
  const RISProtocol p = load_protocol(a);
  if (a.points < 3) throw invalid_input("--points must be at least 3");
  const RateFunction r = sample_rate_function(p, a.alpha_min, a.alpha_max, a.points);
  // Slope of Lambda at each grid point; Lambda* at that slope is
  // alpha * slope - Lambda(alpha) by tangency.
  std::vector<double> slope(r.alpha.size());
  const double h = 1e-4;
  for (std::size_t i = 0; i < r.alpha.size(); ++i)
    slope[i] = (big_lambda(p, r.alpha[i] + h) - big_lambda(p, r.alpha[i] - h)) / (2 * h);
  std::ostringstream os;
  if (g.format == "json") {
    json rows = json::array();
    for (std::size_t i = 0; i < r.alpha.size(); ++i)
      rows.push_back({{"alpha", r.alpha[i]}, {"Lambda", r.values[i]}, {"slope", slope[i]},
                      {"rate", r.alpha[i] * slope[i] - r.values[i]}});
    os << json{{"Lambda_prime_0", r.d1}, {"Lambda_second_0", r.d2}, {"convex", r.convex_on_grid},
               {"grid", rows}}
              .dump(2)
       << '\n';
  } else {
    os << "alpha,Lambda,slope,rate\n";
    for (std::size_t i = 0; i < r.alpha.size(); ++i)
      os << format_double(r.alpha[i]) << ',' << format_double(r.values[i]) << ','
         << format_double(slope[i]) << ',' << format_double(r.alpha[i] * slope[i] - r.values[i])
         << '\n';
  }
  return os.str();
}

std::string ris_sigma(const RisArgs& a, const Global& g) {
  const RISProtocol p = load_protocol(a);
  const EntropyBalance b = sigma_tot(p, initial_state(p));
  std::ostringstream os;
  if (g.format == "json") {
    os << json{{"total", b.total}, {"max_residual", b.max_residual}, {"sigma", b.sigma},
               {"dS", b.dS}, {"dQ", b.dQ}, {"beta", b.beta}}
              .dump(2)
       << '\n';
  } else {
    os << "k,beta,sigma,dS,dQ,cumulative\n";
    double acc = 0.0;
    for (std::size_t k = 0; k < b.sigma.size(); ++k) {
      acc += b.sigma[k];
      os << k + 1 << ',' << format_double(b.beta[k]) << ',' << format_double(b.sigma[k]) << ','
         << format_double(b.dS[k]) << ',' << format_double(b.dQ[k]) << ',' << format_double(acc)
         << '\n';
    }
  }
  return os.str();
}

std::string ris_sample(const RisArgs& a, const Global& g) {
  const RISProtocol p = load_protocol(a);
  if (a.n_traj < 1) throw invalid_input("--n must be at least 1");
  const TrajectorySampler S(p, initial_state(p));
  if (S.floored())
    std::cerr << "warning: final state spectrum floored at 1e-13 before taking its logarithm\n";
  const auto recs = S.sample_many(g.seed, a.n_traj, g.threads);
  std::ostringstream os;
  if (g.format == "json") {
    json arr = json::array();
    for (const auto& r : recs) {
      json j{{"a_init", r.a_init_index}, {"a_fin", r.a_fin_index}, {"sigma", r.sigma_traj},
             {"dy_tot", r.dy_tot}, {"ds_sys", r.ds_sys}};
      if (a.probes) {
        j["probe_in"] = r.probe_in;
        j["probe_out"] = r.probe_out;
      }
      arr.push_back(j);
    }
    os << arr.dump(2) << '\n';
  } else {
    write_trajectories_csv(os, recs, a.probes);
  }
  return os.str();
}

std::string ris_clt(const RisArgs& a, const Global& g) {
  const RISProtocol p = load_protocol(a);
  if (a.n_traj < 2) throw invalid_input("--n must be at least 2");
  const CltSummary c = clt_diagnostic(p, initial_state(p), p.T, a.n_traj, g.seed, g.threads);
  std::ostringstream os;
  if (g.format == "json") {
    os << json{{"T", c.T},           {"n_traj", c.n_traj},     {"lambda1", c.lambda1},
               {"lambda2", c.lambda2}, {"mean", c.mean},         {"variance", c.variance},
               {"ks_gap", c.ks_gap},   {"mean_rate", c.mean_rate}}
              .dump(2)
       << '\n';
  } else {
    os << "T,n_traj,lambda1,lambda2,mean,variance,ks_gap,mean_rate\n"
       << c.T << ',' << c.n_traj << ',' << format_double(c.lambda1) << ','
       << format_double(c.lambda2) << ',' << format_double(c.mean) << ','
       << format_double(c.variance) << ',' << format_double(c.ks_gap) << ','
       << format_double(c.mean_rate) << '\n';
  }
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Majorization bounds, channel classification and repeated-interaction statistics"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  std::optional<int> threads;
  app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
  app.add_option("--threads", threads, "worker threads (fallback: MAJFLOW_THREADS)")
      ->check(CLI::PositiveNumber);
  app.add_option("--tol", g.tol, "tolerance override (PPT/eigenvalue tolerance for classify)")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "output file (default stdout)");
  app.add_option("--format", g.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  BoundArgs bound;
  auto* b = app.add_subcommand("bound", "uniform continuity bound of an entropy functional");
  b->add_option("functional", bound.functional, "e.g. shannon, renyi:alpha=2, tsallis:alpha=2")
      ->required();
  b->add_option("d", bound.d, "dimension")->required();
  b->add_option("epsilon", bound.eps, "total variation radius");
  b->add_flag("--lipschitz", bound.lipschitz, "print the Lipschitz constant instead");

  MmmArgs mmm;
  auto* m = app.add_subcommand("mmm", "majorization extrema of a total-variation ball");
  m->add_option("p", mmm.values, "probability vector (default: read stdin)");
  m->add_option("--file", mmm.file, "read the vector from a file");
  m->add_option("--eps", mmm.eps, "radius")->required();
  auto* fmax = m->add_flag("--max", mmm.max, "majorization maximizer");
  auto* fmin = m->add_flag("--min", "majorization minimizer (default)");
  auto* fpath = m->add_flag("--path", mmm.path, "breakpoints of the flow up to eps");
  fmax->excludes(fmin)->excludes(fpath);
  fmin->excludes(fpath);

  ClassifyArgs cls;
  auto* c = app.add_subcommand("classify", "spectral report and entanglement-breaking verdict");
  c->add_option("channel", cls.file, "channel JSON")->required();
  c->add_option("--n-max", cls.n_max, "largest power examined")->check(CLI::PositiveNumber);
  c->add_flag("--report-suspected", cls.suspected, "report ES_suspected instead of undetermined");

  RisArgs ris;
  auto* r = app.add_subcommand("ris", "repeated interaction system statistics");
  r->require_subcommand(1);
  r->fallthrough();
  r->add_option("protocol", ris.file, "protocol JSON")->required();
  r->add_option("--T", ris.T, "override the number of probes");
  auto* rl = r->add_subcommand("lambda", "Lambda(alpha) on a grid with its Legendre transform");
  rl->add_option("--alpha-min", ris.alpha_min)->capture_default_str();
  rl->add_option("--alpha-max", ris.alpha_max)->capture_default_str();
  rl->add_option("--points", ris.points)->capture_default_str();
  auto* rs = r->add_subcommand("sigma", "entropy production per step");
  auto* rt = r->add_subcommand("sample", "two-time-measurement trajectories");
  rt->add_option("--n", ris.n_traj, "trajectory count")->capture_default_str();
  rt->add_flag("--probes", ris.probes, "include the probe outcome lists");
  auto* rc = r->add_subcommand("clt", "central limit diagnostic");
  rc->add_option("--n", ris.n_traj, "trajectory count")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return usage;
  }

  // Classify defaults to JSON unless --format was given explicitly.
  if (c->parsed() && app.count("--format") == 0) g.format = "json";

  try {
    g.threads = threads ? *threads : default_threads();
    std::string text;
    if (b->parsed())
      text = cmd_bound(bound, g);
    else if (m->parsed())
      text = cmd_mmm(mmm, g);
    else if (c->parsed())
      text = cmd_classify(cls, g);
    else if (rl->parsed())
      text = ris_lambda(ris, g);
    else if (rs->parsed())
      text = ris_sigma(ris, g);
    else if (rt->parsed())
      text = ris_sample(ris, g);
    else if (rc->parsed())
      text = ris_clt(ris, g);
    emit(g, text);
    return ok;
  } catch (const invalid_input& e) {
    std::cerr << "error: " << e.what() << '\n';
    return bad_input;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return bad_input;
  } catch (const numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return numeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return numeric;
  }
}
