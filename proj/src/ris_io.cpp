#include "majflow/ris_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "majflow/channel_io.hpp"
#include "majflow/errors.hpp"

namespace majflow {

using nlohmann::json;

namespace {

const json& field(const json& j, const char* key) {
  if (!j.contains(key)) throw invalid_input(std::string("protocol: missing field '") + key + "'");
  return j.at(key);
}

double number(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number()) throw invalid_input(std::string("protocol: '") + key + "' must be a number");
  return v.get<double>();
}

std::vector<double> numbers(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_array()) throw invalid_input(std::string("protocol: '") + key + "' must be an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw invalid_input(std::string("protocol: '") + key + "' must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

CMatrix ladder() {
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 1) = 1.0;
  return a;
}

BetaProfile beta_from_json(const json& j) {
  if (j.is_number()) return BetaProfile::constant(j.get<double>());
  const std::string kind = field(j, "kind").get<std::string>();
  if (kind == "constant") return BetaProfile::constant(number(j, "value"));
  if (kind == "beta1") return BetaProfile::beta1();
  if (kind == "beta2") return j.contains("a") ? BetaProfile::beta2(numbers(j, "a")) : BetaProfile::beta2();
  if (kind == "poly") return BetaProfile::poly(numbers(j, "coeffs"));
  throw invalid_input("protocol: unknown beta kind '" + kind + "'");
}

json beta_to_json(const BetaProfile& b) {
  switch (b.kind) {
    case BetaProfile::Kind::constant: return {{"kind", "constant"}, {"value", b.params.at(0)}};
    case BetaProfile::Kind::beta1: return {{"kind", "beta1"}};
    case BetaProfile::Kind::beta2: return {{"kind", "beta2"}, {"a", b.params}};
    case BetaProfile::Kind::poly: return {{"kind", "poly"}, {"coeffs", b.params}};
  }
  return {};
}

RISProtocol parse_protocol(const json& j) {
  if (!j.is_object()) throw invalid_input("protocol: top level must be an object");
  RISProtocol p;
  p.d_S = field(j, "d_S").get<int>();
  p.d_E = field(j, "d_E").get<int>();
  p.h_S = matrix_from_json(field(j, "h_S"));
  const json& hE = field(j, "h_E");
  if (hE.is_object()) {
    if (field(hE, "kind").get<std::string>() != "linear")
      throw invalid_input("protocol: h_E generator kind must be 'linear'");
    p.h_E0 = matrix_from_json(field(hE, "h0"));
    p.h_E1 = matrix_from_json(field(hE, "h1"));
  } else {
    p.h_E0 = matrix_from_json(hE);
  }
  p.tau = number(j, "tau");
  p.T = field(j, "T").get<int>();
  p.beta = beta_from_json(field(j, "beta"));

  const json& c = field(j, "coupling");
  const std::string kind = field(c, "kind").get<std::string>();
  if (kind == "rwa" || kind == "full_dipole") {
    if (p.d_S != 2 || p.d_E != 2) throw invalid_input("protocol: " + kind + " coupling needs qubits");
    p.lambda = number(c, "lambda");
    const CMatrix a = ladder(), ad = a.adjoint();
    if (kind == "rwa") {
      p.coupling = CouplingKind::rwa;
      p.v = p.lambda * 0.5 * (kron(ad, a) + kron(a, ad));
    } else {
      p.coupling = CouplingKind::full_dipole;
      p.v = p.lambda * 0.5 * kron(a + ad, a + ad);
    }
  } else if (kind == "custom") {
    p.coupling = CouplingKind::custom;
    p.v = matrix_from_json(field(c, "matrix"));
  } else {
    throw invalid_input("protocol: unknown coupling kind '" + kind + "'");
  }
  if (j.contains("rho_init") && !j.at("rho_init").is_null()) p.rho_init = matrix_from_json(j.at("rho_init"));
  p.validate();
  return p;
}

}  // namespace

RISProtocol protocol_from_json(const json& j) {
  try {
    return parse_protocol(j);
  } catch (const json::exception& e) {
    throw invalid_input(std::string("protocol: ") + e.what());
  }
}

json protocol_to_json(const RISProtocol& p) {
  json j;
  j["d_S"] = p.d_S;
  j["d_E"] = p.d_E;
  j["h_S"] = matrix_to_json(p.h_S);
  if (p.h_E1.size() == 0)
    j["h_E"] = matrix_to_json(p.h_E0);
  else
    j["h_E"] = {{"kind", "linear"}, {"h0", matrix_to_json(p.h_E0)}, {"h1", matrix_to_json(p.h_E1)}};
  j["tau"] = p.tau;
  j["T"] = p.T;
  j["beta"] = beta_to_json(p.beta);
  switch (p.coupling) {
    case CouplingKind::rwa: j["coupling"] = {{"kind", "rwa"}, {"lambda", p.lambda}}; break;
    case CouplingKind::full_dipole: j["coupling"] = {{"kind", "full_dipole"}, {"lambda", p.lambda}}; break;
    case CouplingKind::custom: j["coupling"] = {{"kind", "custom"}, {"matrix", matrix_to_json(p.v)}}; break;
  }
  if (p.rho_init) j["rho_init"] = matrix_to_json(*p.rho_init);
  return j;
}

RISProtocol read_protocol_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot open protocol file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw invalid_input("protocol file '" + path + "': " + e.what());
  }
  return protocol_from_json(j);
}

std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_trajectories_csv(std::ostream& os, const std::vector<TrajectoryRecord>& recs,
                            bool with_probes) {
  os << "index,a_init,a_fin,sigma,dy_tot,ds_sys";
  if (with_probes) os << ",probe_in,probe_out";
  os << '\n';
  auto joined = [](const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ';';
      s += std::to_string(v[i]);
    }
    return s;
  };
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    os << i << ',' << r.a_init_index << ',' << r.a_fin_index << ',' << format_double(r.sigma_traj)
       << ',' << format_double(r.dy_tot) << ',' << format_double(r.ds_sys);
    if (with_probes) os << ',' << joined(r.probe_in) << ',' << joined(r.probe_out);
    os << '\n';
  }
}

void write_entropy_csv(std::ostream& os, const EntropyBalance& b) {
  os << "k,beta,sigma,dS,dQ\n";
  for (std::size_t k = 0; k < b.sigma.size(); ++k)
    os << k + 1 << ',' << format_double(b.beta[k]) << ',' << format_double(b.sigma[k]) << ','
       << format_double(b.dS[k]) << ',' << format_double(b.dQ[k]) << '\n';
}

}  // namespace majflow
