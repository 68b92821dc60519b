#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "majflow/ris.hpp"

namespace majflow {

// {"d_S", "d_E", "h_S", "h_E", "tau", "T", "beta", "coupling", "rho_init"?}
// h_E is a matrix or {"kind": "linear", "h0": M, "h1": M}.
// beta: {"kind": "constant", "value": b} | {"kind": "beta1"} |
//       {"kind": "beta2", "a": [6 numbers]} | {"kind": "poly", "coeffs": [...]}.
// coupling: {"kind": "rwa" | "full_dipole", "lambda": l} (qubits only) |
//           {"kind": "custom", "matrix": M}.
RISProtocol protocol_from_json(const nlohmann::json& j);
nlohmann::json protocol_to_json(const RISProtocol& p);
RISProtocol read_protocol_file(const std::string& path);

// 17 significant digits.
std::string format_double(double x);

void write_trajectories_csv(std::ostream& os, const std::vector<TrajectoryRecord>& recs,
                            bool with_probes);
void write_entropy_csv(std::ostream& os, const EntropyBalance& b);

}  // namespace majflow
