#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "arnpg/history.hpp"
#include "arnpg/mdp.hpp"
#include "arnpg/run.hpp"
#include "arnpg/sampling.hpp"

namespace arnpg {

struct MdpGenerator {
    int states = 20;
    int actions = 10;
    int objectives = 2;
    double gamma = 0.8;
    std::optional<std::uint64_t> seed;  // falls back to the run seed
};

struct MdpSource {
    enum class Kind { generator, file, inline_document };
    Kind kind = Kind::generator;
    MdpGenerator generator;
    std::filesystem::path file;
    nlohmann::json document;
};

/// Fully validated run description. Parsed from JSON with unknown keys
/// rejected at every level.
struct RunConfig {
    MdpSource mdp;
    AlgorithmId algorithm = AlgorithmId::epd;
    CriterionSpec criterion;
    Hyperparameters hyper;
    bool sampled = false;
    EstimatorConfig estimator;
    bool sample_seed_given = false;
    std::optional<double> oracle_value;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> seeds;  // optional seed list; overrides `seed`
    std::string output;
    bool record_timing = false;
};

/// Relative "file" paths resolve against `base_dir`.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

TabularMdp resolve_mdp(const RunConfig& config, std::uint64_t seed);

struct OracleReport {
    double value = 0.0;                    // V_1* (cmdp), F* (maxmin, smooth)
    std::optional<Eigen::VectorXd> duals;  // lambda* (cmdp) or optimal weights (maxmin)
    nlohmann::json details;
};

/// Solves the criterion with the matching oracle (cmdp_lp, maxmin_lp, smooth_fw).
/// Throws NumericalError if the LP is infeasible or unbounded.
OracleReport run_oracle(const TabularMdp& mdp, const CriterionSpec& criterion);

struct SeedRun {
    std::uint64_t seed = 0;
    RunHistory history;
};

struct ExperimentOutput {
    std::vector<SeedRun> runs;
    nlohmann::json metadata;
    bool record_timing = false;
};

ExperimentOutput run_experiment(const RunConfig& config);

/// Column order: k, T, t_k, V_1..V_m, F, lambda_*, avg_gap,
/// avg_violation_2..m, avg_signed_violation_2..m, last_violation_2..m, step_target, [wall_ms].
/// Missing quantities are empty fields. A seed list adds a leading `seed`
/// column and closing rows with seed "mean" that average every column over
/// seeds for each k.
std::string experiment_csv(const ExperimentOutput& output);
std::vector<std::string> csv_columns(const RunHistory& history, bool timing);

/// Writes CSV to `path` and metadata to `path` + ".meta.json".
void write_experiment(const ExperimentOutput& output, const std::filesystem::path& path);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    /// Index of `name`; throws DocumentError listing the available columns.
    std::size_t column(const std::string& name) const;
};

/// RFC-4180 reader (quoted fields, doubled quotes, CRLF or LF).
CsvTable parse_csv(const std::string& text);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    int used = 0;
    int excluded = 0;  // points in the window with y <= 0 or missing
};

/// Least squares of ln y on ln x over points with from <= x <= to.
/// Throws ParameterError with fewer than two usable points.
SlopeFit fit_loglog_slope(const std::vector<double>& x, const std::vector<std::optional<double>>& y, double from,
                          double to);

/// Fits `column` against T, using rows whose seed is `seed_filter` when the
/// table has a seed column ("mean" by default). `absolute` fits |y|, for
/// signed columns such as avg_signed_violation_i.
SlopeFit fit_csv_slope(const CsvTable& table, const std::string& column, double from, double to,
                       const std::string& seed_filter = "mean", bool absolute = false);

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Randomized property and lemma checks on seeded instances.
std::vector<CheckResult> run_property_checks(std::uint64_t seed);

}  // namespace arnpg
