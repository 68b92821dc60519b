#include "majflow/channel_io.hpp"

#include <fstream>

#include "majflow/errors.hpp"

namespace majflow {

using nlohmann::json;

json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

cplx entry_from_json(const json& e) {
  if (e.is_number()) return {e.get<double>(), 0.0};
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
    return {e[0].get<double>(), e[1].get<double>()};
  throw invalid_input("matrix entry must be a number or a [re, im] pair");
}

}  // namespace

CMatrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw invalid_input("matrix must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) throw invalid_input("matrix rows must be non-empty arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  CMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw invalid_input("matrix rows have unequal lengths");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = entry_from_json(row[static_cast<std::size_t>(c)]);
  }
  return m;
}

std::string to_string(ChannelFormat f) {
  switch (f) {
    case ChannelFormat::kraus: return "kraus";
    case ChannelFormat::choi: return "choi";
    case ChannelFormat::superoperator: return "superoperator";
  }
  return "superoperator";
}

ChannelFormat parse_channel_format(const std::string& s) {
  if (s == "kraus") return ChannelFormat::kraus;
  if (s == "choi") return ChannelFormat::choi;
  if (s == "superoperator") return ChannelFormat::superoperator;
  throw invalid_input("unknown channel kind '" + s + "'");
}

json kraus_to_json(const std::vector<CMatrix>& kraus) {
  if (kraus.empty()) throw invalid_input("kraus_to_json: empty list");
  json data = json::array();
  for (const CMatrix& K : kraus) data.push_back(matrix_to_json(K));
  return {{"dim", kraus.front().rows()}, {"kind", "kraus"}, {"data", data}};
}

json channel_to_json(const Superoperator& phi, ChannelFormat kind) {
  switch (kind) {
    case ChannelFormat::kraus: return kraus_to_json(kraus_from_choi(choi(phi)));
    case ChannelFormat::choi:
      return {{"dim", phi.dim()}, {"kind", "choi"}, {"data", matrix_to_json(choi(phi))}};
    case ChannelFormat::superoperator:
      return {{"dim", phi.dim()}, {"kind", "superoperator"}, {"data", matrix_to_json(phi.matrix())}};
  }
  throw invalid_input("channel_to_json: bad kind");
}

Superoperator channel_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("kind") || !j.contains("data"))
    throw invalid_input("channel JSON needs \"dim\", \"kind\" and \"data\"");
  if (!j["dim"].is_number_integer() || j["dim"].get<int>() < 1)
    throw invalid_input("channel \"dim\" must be a positive integer");
  if (!j["kind"].is_string()) throw invalid_input("channel \"kind\" must be a string");
  const int d = j["dim"].get<int>();
  const ChannelFormat kind = parse_channel_format(j["kind"].get<std::string>());
  const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  if (kind == ChannelFormat::kraus) {
    if (!j["data"].is_array() || j["data"].empty())
      throw invalid_input("kraus data must be a non-empty list of matrices");
    std::vector<CMatrix> ks;
    for (const json& k : j["data"]) {
      CMatrix K = matrix_from_json(k);
      if (K.rows() != d || K.cols() != d) throw invalid_input("Kraus operator is not dim x dim");
      ks.push_back(std::move(K));
    }
    return superop_from_kraus(ks);
  }
  CMatrix m = matrix_from_json(j["data"]);
  if (m.rows() != n || m.cols() != n) throw invalid_input("channel matrix is not dim^2 x dim^2");
  if (kind == ChannelFormat::choi) return choi_inverse(m);
  return Superoperator(d, std::move(m));
}

Superoperator read_channel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot open channel file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw invalid_input(std::string("channel file is not valid JSON: ") + e.what());
  }
  return channel_from_json(j);
}

void write_channel_file(const std::string& path, const Superoperator& phi, ChannelFormat kind) {
  std::ofstream out(path);
  if (!out) throw invalid_input("cannot write '" + path + "'");
  out << channel_to_json(phi, kind).dump(2) << '\n';
}

}  // namespace majflow
