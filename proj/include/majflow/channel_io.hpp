#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "majflow/linalg.hpp"

namespace majflow {

// Complex entries are [re, im] pairs; a bare number is read as a real entry.
nlohmann::json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const nlohmann::json& j);

enum class ChannelFormat { kraus, choi, superoperator };

std::string to_string(ChannelFormat f);
ChannelFormat parse_channel_format(const std::string& s);

// {"dim": d, "kind": ..., "data": ...}; "data" is a list of matrices for
// kraus and a single matrix otherwise.
nlohmann::json channel_to_json(const Superoperator& phi, ChannelFormat kind);
nlohmann::json kraus_to_json(const std::vector<CMatrix>& kraus);
Superoperator channel_from_json(const nlohmann::json& j);

Superoperator read_channel_file(const std::string& path);
void write_channel_file(const std::string& path, const Superoperator& phi,
                        ChannelFormat kind);

}  // namespace majflow
