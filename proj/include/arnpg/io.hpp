#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "arnpg/mdp.hpp"
#include "arnpg/policy.hpp"

namespace arnpg {

/// Keys: num_states, num_actions, num_objectives, gamma, rho,
/// transitions[s][a][s'], rewards[i][s][a]. Doubles are written in
/// shortest round-trip decimal form, so files re-read bit-exact.
nlohmann::json mdp_to_json(const TabularMdp& mdp);
/// Throws DocumentError naming the offending key path on schema errors and
/// ParameterError if the parsed tensors violate MDP invariants.
TabularMdp mdp_from_json(const nlohmann::json& doc);

nlohmann::json policy_to_json(const SoftmaxPolicy& policy);
SoftmaxPolicy policy_from_json(const nlohmann::json& doc);

/// Parse errors carry the file name and the byte offset reported by the parser.
nlohmann::json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Typed accessors used by every document reader. `where` is the dotted key
/// path of `doc`, used in messages such as "config.hyperparameters.alpha:
/// expected a number".
const nlohmann::json& require_key(const nlohmann::json& doc, const std::string& key, const std::string& where);
double as_double(const nlohmann::json& value, const std::string& where);
long long as_integer(const nlohmann::json& value, const std::string& where);
std::uint64_t as_unsigned(const nlohmann::json& value, const std::string& where);
std::string as_string(const nlohmann::json& value, const std::string& where);
bool as_bool(const nlohmann::json& value, const std::string& where);
Eigen::VectorXd as_vector(const nlohmann::json& value, const std::string& where);
Eigen::MatrixXd as_matrix(const nlohmann::json& value, const std::string& where);
/// Rejects any key of `doc` outside `allowed`.
void reject_unknown_keys(const nlohmann::json& doc, const std::vector<std::string>& allowed, const std::string& where);

/// "%.17g": the fixed decimal form used in CSV output.
std::string format_double(double value);

}  // namespace arnpg
