#include "arnpg/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "arnpg/error.hpp"

namespace arnpg {

using nlohmann::json;

const json& require_key(const json& doc, const std::string& key, const std::string& where) {
    if (!doc.is_object()) throw DocumentError(where + ": expected an object");
    const auto it = doc.find(key);
    if (it == doc.end()) throw DocumentError(where + "." + key + ": missing required key");
    return *it;
}

double as_double(const json& value, const std::string& where) {
    if (!value.is_number()) throw DocumentError(where + ": expected a number");
    const double x = value.get<double>();
    if (!std::isfinite(x)) throw DocumentError(where + ": expected a finite number");
    return x;
}

long long as_integer(const json& value, const std::string& where) {
    if (!value.is_number_integer()) throw DocumentError(where + ": expected an integer");
    return value.get<long long>();
}

std::uint64_t as_unsigned(const json& value, const std::string& where) {
    if (value.is_number_unsigned()) return value.get<std::uint64_t>();
    if (value.is_number_integer() && value.get<long long>() >= 0) return static_cast<std::uint64_t>(value.get<long long>());
    throw DocumentError(where + ": expected a nonnegative integer");
}

std::string as_string(const json& value, const std::string& where) {
    if (!value.is_string()) throw DocumentError(where + ": expected a string");
    return value.get<std::string>();
}

bool as_bool(const json& value, const std::string& where) {
    if (!value.is_boolean()) throw DocumentError(where + ": expected true or false");
    return value.get<bool>();
}

Eigen::VectorXd as_vector(const json& value, const std::string& where) {
    if (!value.is_array()) throw DocumentError(where + ": expected an array of numbers");
    Eigen::VectorXd out(static_cast<Eigen::Index>(value.size()));
    for (std::size_t i = 0; i < value.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = as_double(value[i], where + "[" + std::to_string(i) + "]");
    }
    return out;
}

Eigen::MatrixXd as_matrix(const json& value, const std::string& where) {
    if (!value.is_array() || value.empty()) throw DocumentError(where + ": expected a non-empty nested array");
    const std::size_t rows = value.size();
    std::size_t cols = 0;
    Eigen::MatrixXd out;
    for (std::size_t i = 0; i < rows; ++i) {
        const std::string row_where = where + "[" + std::to_string(i) + "]";
        const Eigen::VectorXd row = as_vector(value[i], row_where);
        if (i == 0) {
            cols = static_cast<std::size_t>(row.size());
            out.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        } else if (static_cast<std::size_t>(row.size()) != cols) {
            throw DocumentError(row_where + ": expected " + std::to_string(cols) + " entries");
        }
        out.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return out;
}

void reject_unknown_keys(const json& doc, const std::vector<std::string>& allowed, const std::string& where) {
    if (!doc.is_object()) throw DocumentError(where + ": expected an object");
    for (const auto& item : doc.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            throw DocumentError(where + ": unknown key '" + item.key() + "'");
        }
    }
}

std::string format_double(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

int positive_count(const json& doc, const char* key) {
    const std::string where = std::string("mdp.") + key;
    const long long n = as_integer(require_key(doc, key, "mdp"), where);
    if (n < 1 || n > 1000000) throw DocumentError(where + ": expected a positive count");
    return static_cast<int>(n);
}

void expect_size(const json& value, std::size_t size, const std::string& where) {
    if (!value.is_array()) throw DocumentError(where + ": expected an array");
    if (value.size() != size) {
        throw DocumentError(where + ": expected " + std::to_string(size) + " entries, found " +
                            std::to_string(value.size()));
    }
}

}  // namespace

json mdp_to_json(const TabularMdp& mdp) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    json transitions = json::array();
    for (int s = 0; s < S; ++s) {
        json per_action = json::array();
        for (int a = 0; a < A; ++a) {
            json row = json::array();
            for (int t = 0; t < S; ++t) row.push_back(mdp.transition(s, a, t));
            per_action.push_back(std::move(row));
        }
        transitions.push_back(std::move(per_action));
    }
    json rewards = json::array();
    for (const Eigen::MatrixXd& r : mdp.rewards()) rewards.push_back(matrix_to_json(r));
    json rho = json::array();
    for (Eigen::Index s = 0; s < mdp.rho().size(); ++s) rho.push_back(mdp.rho()(s));
    return json{{"num_states", S},
                {"num_actions", A},
                {"num_objectives", mdp.num_objectives()},
                {"gamma", mdp.gamma()},
                {"rho", std::move(rho)},
                {"transitions", std::move(transitions)},
                {"rewards", std::move(rewards)}};
}

TabularMdp mdp_from_json(const json& doc) {
    reject_unknown_keys(doc, {"num_states", "num_actions", "num_objectives", "gamma", "rho", "transitions", "rewards"},
                        "mdp");
    const int S = positive_count(doc, "num_states");
    const int A = positive_count(doc, "num_actions");
    const int m = positive_count(doc, "num_objectives");
    const double gamma = as_double(require_key(doc, "gamma", "mdp"), "mdp.gamma");

    const json& rho_doc = require_key(doc, "rho", "mdp");
    expect_size(rho_doc, static_cast<std::size_t>(S), "mdp.rho");
    const Eigen::VectorXd rho = as_vector(rho_doc, "mdp.rho");

    const json& p_doc = require_key(doc, "transitions", "mdp");
    expect_size(p_doc, static_cast<std::size_t>(S), "mdp.transitions");
    Eigen::MatrixXd transitions(S * A, S);
    for (int s = 0; s < S; ++s) {
        const std::string where = "mdp.transitions[" + std::to_string(s) + "]";
        expect_size(p_doc[static_cast<std::size_t>(s)], static_cast<std::size_t>(A), where);
        const Eigen::MatrixXd block = as_matrix(p_doc[static_cast<std::size_t>(s)], where);
        if (block.cols() != S) throw DocumentError(where + ": expected rows of " + std::to_string(S) + " entries");
        transitions.middleRows(s * A, A) = block;
    }

    const json& r_doc = require_key(doc, "rewards", "mdp");
    expect_size(r_doc, static_cast<std::size_t>(m), "mdp.rewards");
    std::vector<Eigen::MatrixXd> rewards;
    for (int i = 0; i < m; ++i) {
        const std::string where = "mdp.rewards[" + std::to_string(i) + "]";
        expect_size(r_doc[static_cast<std::size_t>(i)], static_cast<std::size_t>(S), where);
        Eigen::MatrixXd r = as_matrix(r_doc[static_cast<std::size_t>(i)], where);
        if (r.cols() != A) throw DocumentError(where + ": expected rows of " + std::to_string(A) + " entries");
        rewards.push_back(std::move(r));
    }
    return TabularMdp(std::move(transitions), std::move(rewards), rho, gamma);
}

json policy_to_json(const SoftmaxPolicy& policy) { return json{{"logits", matrix_to_json(policy.logits())}}; }

SoftmaxPolicy policy_from_json(const json& doc) {
    reject_unknown_keys(doc, {"logits"}, "policy");
    return SoftmaxPolicy(as_matrix(require_key(doc, "logits", "policy"), "policy.logits"));
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DocumentError(path.string() + ": cannot open for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

json read_json_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw DocumentError(path.string() + ": malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DocumentError(path.string() + ": cannot open for writing");
    out << text;
    if (!out) throw DocumentError(path.string() + ": write failed");
}

}  // namespace arnpg
