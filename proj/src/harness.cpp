#include "arnpg/harness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "arnpg/error.hpp"
#include "arnpg/inner_loop.hpp"
#include "arnpg/io.hpp"
#include "arnpg/oracle.hpp"
#include "arnpg/rng.hpp"

namespace arnpg {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config parsing

namespace {

int as_count(const json& value, const std::string& where, int min_value) {
    const long long n = as_integer(value, where);
    if (n < min_value || n > 100000000) {
        throw DocumentError(where + ": expected an integer >= " + std::to_string(min_value));
    }
    return static_cast<int>(n);
}

MdpSource parse_mdp_source(const json& doc, const std::filesystem::path& base_dir) {
    reject_unknown_keys(doc, {"generator", "file", "inline"}, "config.mdp");
    if (doc.size() != 1) throw DocumentError("config.mdp: expected exactly one of 'generator', 'file', 'inline'");
    MdpSource source;
    if (doc.contains("generator")) {
        const json& g = doc["generator"];
        const std::string where = "config.mdp.generator";
        reject_unknown_keys(g, {"states", "actions", "objectives", "gamma", "seed"}, where);
        source.kind = MdpSource::Kind::generator;
        source.generator.states = as_count(require_key(g, "states", where), where + ".states", 1);
        source.generator.actions = as_count(require_key(g, "actions", where), where + ".actions", 1);
        source.generator.objectives = as_count(require_key(g, "objectives", where), where + ".objectives", 1);
        source.generator.gamma = as_double(require_key(g, "gamma", where), where + ".gamma");
        if (g.contains("seed")) source.generator.seed = as_unsigned(g["seed"], where + ".seed");
    } else if (doc.contains("file")) {
        source.kind = MdpSource::Kind::file;
        source.file = as_string(doc["file"], "config.mdp.file");
        if (source.file.is_relative() && !base_dir.empty()) source.file = base_dir / source.file;
    } else {
        source.kind = MdpSource::Kind::inline_document;
        source.document = doc["inline"];
        mdp_from_json(source.document);  // validate early
    }
    return source;
}

CriterionSpec parse_criterion(const json& doc) {
    const std::string where = "config.criterion";
    CriterionSpec spec;
    spec.kind = criterion_from_string(as_string(require_key(doc, "kind", where), where + ".kind"));
    switch (spec.kind) {
        case CriterionKind::cmdp:
            reject_unknown_keys(doc, {"kind", "b"}, where);
            spec.thresholds = as_vector(require_key(doc, "b", where), where + ".b");
            break;
        case CriterionKind::maxmin:
            reject_unknown_keys(doc, {"kind", "c"}, where);
            if (doc.contains("c")) spec.scales = as_vector(doc["c"], where + ".c");
            break;
        case CriterionKind::smooth: {
            reject_unknown_keys(doc, {"kind", "scalarizer", "weights", "delta"}, where);
            const std::string name = doc.contains("scalarizer") ? as_string(doc["scalarizer"], where + ".scalarizer")
                                                                : std::string("sum_log");
            if (name == "sum_log") {
                spec.scalarizer.kind = ScalarizerKind::sum_log;
            } else if (name == "linear") {
                spec.scalarizer.kind = ScalarizerKind::weighted_linear;
                spec.scalarizer.delta = 0.0;
            } else {
                throw DocumentError(where + ".scalarizer: expected 'sum_log' or 'linear'");
            }
            if (doc.contains("weights")) spec.scalarizer.weights = as_vector(doc["weights"], where + ".weights");
            if (doc.contains("delta")) {
                if (spec.scalarizer.kind != ScalarizerKind::sum_log) {
                    throw DocumentError(where + ".delta: only meaningful for the sum_log scalarizer");
                }
                spec.scalarizer.delta = as_double(doc["delta"], where + ".delta");
            }
            break;
        }
    }
    return spec;
}

/// eta < 0 marks "not given"; resolved to (1-gamma)/alpha once gamma is known.
constexpr double kEtaUnset = -1.0;

Hyperparameters parse_hyperparameters(const json& doc, AlgorithmId algorithm) {
    const std::string where = "config.hyperparameters";
    reject_unknown_keys(doc, {"alpha", "eta", "eta_prime", "K", "schedule", "tolerance", "lambda_max"}, where);
    Hyperparameters h = default_hyperparameters(algorithm);
    const bool regularized =
        algorithm == AlgorithmId::imd || algorithm == AlgorithmId::epd || algorithm == AlgorithmId::omda;
    if (regularized) h.eta = kEtaUnset;
    if (doc.contains("alpha")) h.alpha = as_double(doc["alpha"], where + ".alpha");
    if (doc.contains("eta")) h.eta = as_double(doc["eta"], where + ".eta");
    if (doc.contains("eta_prime")) h.eta_prime = as_double(doc["eta_prime"], where + ".eta_prime");
    if (doc.contains("K")) h.macro_steps = as_count(doc["K"], where + ".K", 0);
    if (doc.contains("tolerance")) h.tolerance = as_double(doc["tolerance"], where + ".tolerance");
    if (doc.contains("lambda_max")) h.lambda_max = as_double(doc["lambda_max"], where + ".lambda_max");
    if (doc.contains("schedule")) {
        const json& s = doc["schedule"];
        const std::string sw = where + ".schedule";
        reject_unknown_keys(s, {"mode", "t"}, sw);
        const std::string mode = as_string(require_key(s, "mode", sw), sw + ".mode");
        if (mode == "fixed") {
            h.schedule.mode = ScheduleMode::fixed;
            if (s.contains("t")) h.schedule.fixed_steps = as_count(s["t"], sw + ".t", 1);
        } else if (mode == "theorem") {
            if (s.contains("t")) throw DocumentError(sw + ".t: not allowed in theorem mode");
            h.schedule.mode = ScheduleMode::theorem;
        } else {
            throw DocumentError(sw + ".mode: expected 'fixed' or 'theorem'");
        }
    }
    return h;
}

}  // namespace

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
    reject_unknown_keys(doc,
                        {"mdp", "algorithm", "criterion", "hyperparameters", "mode", "estimator", "oracle_value",
                         "seed", "seeds", "output", "record_timing"},
                        "config");
    RunConfig config;
    config.mdp = parse_mdp_source(require_key(doc, "mdp", "config"), base_dir);
    try {
        config.algorithm = algorithm_from_string(as_string(require_key(doc, "algorithm", "config"), "config.algorithm"));
        config.criterion = parse_criterion(require_key(doc, "criterion", "config"));
    } catch (const ParameterError& e) {
        throw DocumentError(std::string("config: ") + e.what());
    }
    if (config.criterion.kind != criterion_of(config.algorithm)) {
        throw DocumentError("config.criterion.kind: algorithm '" + to_string(config.algorithm) + "' needs '" +
                            to_string(criterion_of(config.algorithm)) + "'");
    }
    config.hyper = parse_hyperparameters(doc.value("hyperparameters", json::object()), config.algorithm);

    if (doc.contains("mode")) {
        const std::string mode = as_string(doc["mode"], "config.mode");
        if (mode != "exact" && mode != "sampled") throw DocumentError("config.mode: expected 'exact' or 'sampled'");
        config.sampled = mode == "sampled";
    }
    config.estimator.horizon = 0;  // 0: derived from gamma for bias 0.01
    if (doc.contains("estimator")) {
        const json& e = doc["estimator"];
        const std::string where = "config.estimator";
        reject_unknown_keys(e, {"horizon", "batch", "sample_seed"}, where);
        if (e.contains("horizon")) config.estimator.horizon = as_count(e["horizon"], where + ".horizon", 1);
        if (e.contains("batch")) config.estimator.batch = as_count(e["batch"], where + ".batch", 1);
        if (e.contains("sample_seed")) {
            config.estimator.seed = as_unsigned(e["sample_seed"], where + ".sample_seed");
            config.sample_seed_given = true;
        }
    }
    if (doc.contains("oracle_value")) config.oracle_value = as_double(doc["oracle_value"], "config.oracle_value");
    if (doc.contains("seed")) config.seed = as_unsigned(doc["seed"], "config.seed");
    if (doc.contains("seeds")) {
        const json& list = doc["seeds"];
        if (!list.is_array() || list.empty()) throw DocumentError("config.seeds: expected a non-empty array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            config.seeds.push_back(as_unsigned(list[i], "config.seeds[" + std::to_string(i) + "]"));
        }
    }
    if (doc.contains("output")) config.output = as_string(doc["output"], "config.output");
    if (doc.contains("record_timing")) config.record_timing = as_bool(doc["record_timing"], "config.record_timing");
    return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    return parse_run_config(read_json_file(path), path.parent_path());
}

TabularMdp resolve_mdp(const RunConfig& config, std::uint64_t seed) {
    switch (config.mdp.kind) {
        case MdpSource::Kind::generator: {
            const MdpGenerator& g = config.mdp.generator;
            return random_mdp(g.seed.value_or(seed), g.states, g.actions, g.objectives, g.gamma);
        }
        case MdpSource::Kind::file: return mdp_from_json(read_json_file(config.mdp.file));
        case MdpSource::Kind::inline_document: return mdp_from_json(config.mdp.document);
    }
    throw ParameterError("resolve_mdp: unknown source");
}

// ---------------------------------------------------------------------------
// Oracle and experiment

OracleReport run_oracle(const TabularMdp& mdp, const CriterionSpec& criterion) {
    OracleReport report;
    switch (criterion.kind) {
        case CriterionKind::cmdp: {
            const LpSolution lp = cmdp_lp(mdp, criterion.thresholds);
            if (lp.status != LpStatus::optimal) {
                throw NumericalError(std::string("cmdp_lp: ") + to_string(lp.status) + " for the given thresholds");
            }
            report.value = lp.value;
            report.duals = lp.duals;
            report.details = {{"oracle", "cmdp_lp"},
                              {"value", lp.value},
                              {"duals", std::vector<double>(lp.duals.data(), lp.duals.data() + lp.duals.size())},
                              {"primal_residual", lp.primal_residual},
                              {"complementary_residual", lp.complementary_residual}};
            break;
        }
        case CriterionKind::maxmin: {
            const LpSolution lp = maxmin_lp(mdp, criterion.scales);
            if (lp.status != LpStatus::optimal) throw NumericalError(std::string("maxmin_lp: ") + to_string(lp.status));
            report.value = lp.value;
            report.duals = lp.duals;
            report.details = {{"oracle", "maxmin_lp"},
                              {"value", lp.value},
                              {"weights", std::vector<double>(lp.duals.data(), lp.duals.data() + lp.duals.size())},
                              {"primal_residual", lp.primal_residual},
                              {"complementary_residual", lp.complementary_residual}};
            break;
        }
        case CriterionKind::smooth: {
            const FrankWolfeResult fw = smooth_fw(mdp, criterion.scalarizer);
            report.value = fw.value;
            report.details = {{"oracle", "smooth_fw"},
                              {"value", fw.value},
                              {"certified_gap", fw.gap},
                              {"iterations", fw.iterations},
                              {"converged", fw.converged}};
            break;
        }
    }
    return report;
}

namespace {

/// Fills criterion vectors left to their defaults (all-ones weights/scales).
CriterionSpec complete_criterion(CriterionSpec spec, const TabularMdp& mdp, json& defaults) {
    const int m = mdp.num_objectives();
    if (spec.kind == CriterionKind::maxmin && spec.scales.size() == 0) {
        spec.scales = Eigen::VectorXd::Ones(m);
        defaults["criterion.c"] = "all ones";
    }
    if (spec.kind == CriterionKind::smooth && spec.scalarizer.weights.size() == 0) {
        spec.scalarizer.weights = Eigen::VectorXd::Ones(m);
        defaults["criterion.weights"] = "all ones";
    }
    if (spec.kind == CriterionKind::cmdp && spec.thresholds.size() != m - 1) {
        throw DocumentError("config.criterion.b: expected " + std::to_string(m - 1) + " thresholds for this MDP");
    }
    if (spec.kind == CriterionKind::maxmin && spec.scales.size() != m) {
        throw DocumentError("config.criterion.c: expected " + std::to_string(m) + " scales for this MDP");
    }
    if (spec.kind == CriterionKind::smooth) {
        if (spec.scalarizer.weights.size() != m) {
            throw DocumentError("config.criterion.weights: expected " + std::to_string(m) + " weights for this MDP");
        }
        spec.scalarizer = spec.scalarizer.kind == ScalarizerKind::sum_log
                              ? sum_log_scalarizer(spec.scalarizer.weights, spec.scalarizer.delta)
                              : linear_scalarizer(spec.scalarizer.weights);
    }
    return spec;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json describe_hyperparameters(AlgorithmId id, const Hyperparameters& h) {
    json out = {{"K", h.macro_steps}};
    switch (id) {
        case AlgorithmId::imd:
        case AlgorithmId::epd:
        case AlgorithmId::omda:
            out["alpha"] = h.alpha;
            out["eta"] = h.eta;
            if (id != AlgorithmId::imd) out["eta_prime"] = h.eta_prime;
            out["schedule"] = h.schedule.mode == ScheduleMode::fixed
                                  ? json{{"mode", "fixed"}, {"t", h.schedule.fixed_steps}}
                                  : json{{"mode", "theorem"}};
            break;
        case AlgorithmId::npg_pd:
            out["eta"] = h.eta;
            out["eta_prime"] = h.eta_prime;
            out["lambda_max"] = h.lambda_max;
            break;
        case AlgorithmId::crpo:
            out["eta"] = h.eta;
            out["tolerance"] = h.tolerance;
            break;
        case AlgorithmId::mo_npg: out["eta"] = h.eta; break;
    }
    return out;
}

}  // namespace

ExperimentOutput run_experiment(const RunConfig& config) {
    ExperimentOutput output;
    output.record_timing = config.record_timing;
    const std::vector<std::uint64_t> seeds = config.seeds.empty() ? std::vector<std::uint64_t>{config.seed} : config.seeds;

    json& meta = output.metadata;
    meta["algorithm"] = to_string(config.algorithm);
    meta["criterion"] = to_string(config.criterion.kind);
    meta["mode"] = config.sampled ? "sampled" : "exact";
    meta["seeds"] = seeds;
    meta["csv_columns"] = "k,T,t_k,V_1..V_m,F,lambda_*,avg_gap,avg_violation_*,avg_signed_violation_*,last_violation_*,step_target[,wall_ms]";
    json defaults = json::object();
    json per_seed = json::array();

    for (std::uint64_t seed : seeds) {
        const TabularMdp mdp = resolve_mdp(config, seed);
        const CriterionSpec criterion = complete_criterion(config.criterion, mdp, defaults);

        Hyperparameters hyper = config.hyper;
        hyper.seed = seed;
        if (hyper.eta == kEtaUnset) {
            hyper.eta = default_inner_eta(hyper.alpha, mdp.gamma());
            defaults["hyperparameters.eta"] = "(1-gamma)/alpha";
        }

        json seed_meta = {{"seed", seed},
                          {"mdp",
                           {{"num_states", mdp.num_states()},
                            {"num_actions", mdp.num_actions()},
                            {"num_objectives", mdp.num_objectives()},
                            {"gamma", mdp.gamma()}}}};
        if (config.mdp.kind == MdpSource::Kind::generator) {
            seed_meta["mdp"]["generator_seed"] = config.mdp.generator.seed.value_or(seed);
        }

        const bool theorem_cmdp =
            hyper.schedule.mode == ScheduleMode::theorem && criterion.kind == CriterionKind::cmdp;
        if (config.oracle_value) {
            hyper.optimum = config.oracle_value;
            seed_meta["oracle"] = {{"source", "config"}, {"value", *config.oracle_value}};
        }
        if (!config.oracle_value || theorem_cmdp) {
            const OracleReport report = run_oracle(mdp, criterion);
            if (!config.oracle_value) {
                hyper.optimum = report.value;
                seed_meta["oracle"] = report.details;
                seed_meta["oracle"]["source"] = "automatic";
            }
            if (theorem_cmdp && report.duals) {
                hyper.optimal_duals = report.duals;
                seed_meta["optimal_duals"] = vector_json(*report.duals);
            }
        }
        if (criterion.kind == CriterionKind::smooth) {
            seed_meta["scalarizer"] = {{"kind", criterion.scalarizer.kind == ScalarizerKind::sum_log ? "sum_log" : "linear"},
                                       {"weights", vector_json(criterion.scalarizer.weights)},
                                       {"delta", criterion.scalarizer.delta}};
        }
        seed_meta["hyperparameters"] = describe_hyperparameters(config.algorithm, hyper);

        RunHistory history;
        if (config.sampled) {
            EstimatorConfig cfg = config.estimator;
            if (cfg.horizon == 0) {
                cfg.horizon = horizon_for_bias(mdp.gamma(), 0.01);
                defaults["estimator.horizon"] = "smallest H with gamma^H/(1-gamma) <= 0.01";
            }
            if (!config.sample_seed_given) defaults["estimator.sample_seed"] = 0;
            cfg.seed = split_seed(config.estimator.seed, seed);
            history = sampled_run(config.algorithm, mdp, criterion, hyper, cfg);
        } else {
            history = run_algorithm(config.algorithm, mdp, criterion, hyper);
        }
        seed_meta["run"] = history.metadata;
        seed_meta["returned_index"] = history.returned_index;
        seed_meta["average_values"] = vector_json(history.average_values);
        per_seed.push_back(std::move(seed_meta));
        output.runs.push_back({seed, std::move(history)});
    }
    meta["defaults_applied"] = defaults;
    meta["runs"] = per_seed;
    return output;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

int lambda_count(const RunHistory& history) {
    switch (history.algorithm) {
        case AlgorithmId::epd:
        case AlgorithmId::npg_pd: return history.num_objectives - 1;
        case AlgorithmId::omda: return history.num_objectives;
        default: return 0;
    }
}

int lambda_first(const RunHistory& history) { return history.algorithm == AlgorithmId::omda ? 1 : 2; }

/// One row of fields, numeric values as optional doubles for averaging.
std::vector<std::optional<double>> record_fields(const RunHistory& history, const RunRecord& r, bool timing) {
    std::vector<std::optional<double>> f;
    f.emplace_back(r.k);
    f.emplace_back(static_cast<double>(r.cumulative_iterations));
    f.emplace_back(r.inner_steps);
    for (int i = 0; i < history.num_objectives; ++i) f.emplace_back(r.values(i));
    f.push_back(r.scalarized);
    for (int i = 0; i < lambda_count(history); ++i) {
        f.push_back(i < r.duals.size() ? std::optional<double>(r.duals(i)) : std::nullopt);
    }
    f.push_back(r.avg_gap);
    for (int i = 0; i < history.num_constraints; ++i) {
        f.push_back(i < r.avg_violation.size() ? std::optional<double>(r.avg_violation(i)) : std::nullopt);
    }
    for (int i = 0; i < history.num_constraints; ++i) {
        f.push_back(i < r.avg_signed_violation.size() ? std::optional<double>(r.avg_signed_violation(i)) : std::nullopt);
    }
    for (int i = 0; i < history.num_constraints; ++i) {
        f.push_back(i < r.last_violation.size() ? std::optional<double>(r.last_violation(i)) : std::nullopt);
    }
    f.push_back(r.step_target ? std::optional<double>(*r.step_target) : std::nullopt);
    if (timing) f.emplace_back(r.wall_ms);
    return f;
}

/// Columns k, T, t_k and step_target are integers in per-seed rows.
bool integer_column(std::size_t index, std::size_t step_target_index) {
    return index <= 2 || index == step_target_index;
}

void append_row(std::ostringstream& os, const std::string& prefix, const std::vector<std::optional<double>>& fields,
                std::size_t step_target_index, bool integers) {
    os << prefix;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0 || !prefix.empty()) os << ',';
        if (!fields[i]) continue;
        if (integers && integer_column(i, step_target_index)) {
            os << static_cast<long long>(std::llround(*fields[i]));
        } else {
            os << format_double(*fields[i]);
        }
    }
    os << "\r\n";
}

}  // namespace

std::vector<std::string> csv_columns(const RunHistory& history, bool timing) {
    std::vector<std::string> cols = {"k", "T", "t_k"};
    for (int i = 1; i <= history.num_objectives; ++i) cols.push_back("V_" + std::to_string(i));
    cols.push_back("F");
    for (int i = 0; i < lambda_count(history); ++i) cols.push_back("lambda_" + std::to_string(lambda_first(history) + i));
    cols.push_back("avg_gap");
    for (int i = 0; i < history.num_constraints; ++i) cols.push_back("avg_violation_" + std::to_string(i + 2));
    for (int i = 0; i < history.num_constraints; ++i) cols.push_back("avg_signed_violation_" + std::to_string(i + 2));
    for (int i = 0; i < history.num_constraints; ++i) cols.push_back("last_violation_" + std::to_string(i + 2));
    cols.push_back("step_target");
    if (timing) cols.push_back("wall_ms");
    return cols;
}

std::string experiment_csv(const ExperimentOutput& output) {
    if (output.runs.empty()) throw ParameterError("experiment_csv: no runs");
    const RunHistory& first = output.runs.front().history;
    const std::vector<std::string> cols = csv_columns(first, output.record_timing);
    const std::size_t step_target_index = cols.size() - (output.record_timing ? 2 : 1);
    const bool multi = output.runs.size() > 1;

    std::ostringstream os;
    if (multi) os << "seed,";
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << "\r\n";

    std::size_t max_k = 0;
    for (const SeedRun& run : output.runs) {
        if (csv_columns(run.history, output.record_timing) != cols) {
            throw ParameterError("experiment_csv: seeds produced different column layouts");
        }
        max_k = std::max(max_k, run.history.records.size());
        for (const RunRecord& r : run.history.records) {
            append_row(os, multi ? std::to_string(run.seed) : std::string(), record_fields(run.history, r, output.record_timing),
                       step_target_index, true);
        }
    }
    if (!multi) return os.str();

    for (std::size_t k = 0; k < max_k; ++k) {
        std::vector<std::optional<double>> mean(cols.size(), 0.0);
        for (const SeedRun& run : output.runs) {
            const auto& records = run.history.records;
            if (k >= records.size()) {
                std::fill(mean.begin(), mean.end(), std::nullopt);
                break;
            }
            const auto fields = record_fields(run.history, records[k], output.record_timing);
            for (std::size_t i = 0; i < fields.size(); ++i) {
                if (!mean[i] || !fields[i]) {
                    mean[i] = std::nullopt;
                } else {
                    *mean[i] += *fields[i];
                }
            }
        }
        for (auto& x : mean) {
            if (x) *x /= static_cast<double>(output.runs.size());
        }
        append_row(os, "mean", mean, step_target_index, false);
    }
    return os.str();
}

void write_experiment(const ExperimentOutput& output, const std::filesystem::path& path) {
    write_text_file(path, experiment_csv(output));
    write_text_file(path.string() + ".meta.json", output.metadata.dump(2) + "\n");
}

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        std::string available;
        for (const auto& h : header) available += (available.empty() ? "" : ", ") + h;
        throw DocumentError("csv: no column '" + name + "' (available: " + available + ")");
    }
    return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool row_has_content = false;
    std::size_t line = 1;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n') ++line;
                field += ch;
            }
            continue;
        }
        switch (ch) {
            case '"':
                if (!field.empty()) throw DocumentError("csv line " + std::to_string(line) + ": stray quote");
                quoted = true;
                row_has_content = true;
                break;
            case ',':
                row.push_back(std::move(field));
                field.clear();
                row_has_content = true;
                break;
            case '\r': break;
            case '\n':
                if (row_has_content || !field.empty()) {
                    row.push_back(std::move(field));
                    rows.push_back(std::move(row));
                }
                field.clear();
                row.clear();
                row_has_content = false;
                ++line;
                break;
            default:
                field += ch;
                row_has_content = true;
        }
    }
    if (quoted) throw DocumentError("csv: unterminated quoted field");
    if (row_has_content || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DocumentError("csv: missing header row");
    CsvTable table;
    table.header = std::move(rows.front());
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != table.header.size()) {
            throw DocumentError("csv row " + std::to_string(r + 1) + ": expected " +
                                std::to_string(table.header.size()) + " fields, found " +
                                std::to_string(rows[r].size()));
        }
        table.rows.push_back(std::move(rows[r]));
    }
    return table;
}

// ---------------------------------------------------------------------------
// Slopes

SlopeFit fit_loglog_slope(const std::vector<double>& x, const std::vector<std::optional<double>>& y, double from,
                          double to) {
    if (x.size() != y.size()) throw ParameterError("fit_loglog_slope: x and y differ in length");
    std::vector<double> lx;
    std::vector<double> ly;
    SlopeFit fit;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] >= from && x[i] <= to)) continue;
        if (!y[i] || !(*y[i] > 0.0) || !(x[i] > 0.0)) {
            ++fit.excluded;
            continue;
        }
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(*y[i]));
    }
    fit.used = static_cast<int>(lx.size());
    if (fit.used < 2) {
        throw ParameterError("fit_loglog_slope: fewer than two positive points in the window (" +
                             std::to_string(fit.excluded) + " excluded)");
    }
    const double n = fit.used;
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw ParameterError("fit_loglog_slope: all x values in the window coincide");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double e = ly[i] - (fit.intercept + fit.slope * lx[i]);
        ss_res += e * e;
    }
    fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res == 0.0 ? 1.0 : 0.0);
    return fit;
}

SlopeFit fit_csv_slope(const CsvTable& table, const std::string& column, double from, double to,
                       const std::string& seed_filter, bool absolute) {
    const std::size_t t_col = table.column("T");
    const std::size_t y_col = table.column(column);
    const auto seed_it = std::find(table.header.begin(), table.header.end(), "seed");
    std::vector<double> x;
    std::vector<std::optional<double>> y;
    for (const auto& row : table.rows) {
        if (seed_it != table.header.end() &&
            row[static_cast<std::size_t>(seed_it - table.header.begin())] != seed_filter) {
            continue;
        }
        try {
            x.push_back(std::stod(row[t_col]));
            if (row[y_col].empty()) {
                y.emplace_back();
            } else {
                const double value = std::stod(row[y_col]);
                y.emplace_back(absolute ? std::abs(value) : value);
            }
        } catch (const std::logic_error&) {
            throw DocumentError("csv: non-numeric entry in column '" + column + "' or 'T'");
        }
    }
    return fit_loglog_slope(x, y, from, to);
}

// ---------------------------------------------------------------------------
// Property checks

namespace {

SoftmaxPolicy random_policy(Rng& rng, int S, int A, double scale) {
    Eigen::MatrixXd logits(S, A);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) logits(s, a) = scale * (2.0 * rng.uniform() - 1.0);
    }
    return SoftmaxPolicy(logits);
}

Eigen::MatrixXd random_reward(Rng& rng, int S, int A, double lo, double hi) {
    Eigen::MatrixXd r(S, A);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) r(s, a) = lo + (hi - lo) * rng.uniform();
    }
    return r;
}

class CheckCollector {
public:
    void add(const std::string& name, bool passed, double measured, const std::string& relation, double reference) {
        std::ostringstream os;
        os.precision(6);
        os << "worst " << measured << ' ' << relation << ' ' << reference;
        results_.push_back({name, passed, os.str()});
    }
    template <typename Fn>
    void guard(const std::string& name, Fn&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            results_.push_back({name, false, std::string("exception: ") + e.what()});
        }
    }
    std::vector<CheckResult> take() { return std::move(results_); }

private:
    std::vector<CheckResult> results_;
};

}  // namespace

std::vector<CheckResult> run_property_checks(std::uint64_t seed) {
    CheckCollector out;
    Rng rng(seed);

    out.guard("occupancy/value duality", [&] {
        double worst = 0.0;
        double worst_flow = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            const TabularMdp mdp = random_mdp(rng.next_u64(), 6, 3, 2, 0.9);
            const SoftmaxPolicy pi = random_policy(rng, 6, 3, 3.0);
            const OccupancyMeasure occ = occupancy(mdp, pi);
            const ValueVector v = value_vector(mdp, pi);
            for (int i = 0; i < 2; ++i) {
                worst = std::max(worst, std::abs(v(i) - occ.d.cwiseProduct(mdp.reward(i)).sum() / (1.0 - mdp.gamma())));
            }
            worst_flow = std::max(worst_flow, flow_residual(mdp, occ));
        }
        out.add("occupancy/value duality", worst <= 1e-9, worst, "<=", 1e-9);
        out.add("occupancy flow residual", worst_flow <= 1e-9, worst_flow, "<=", 1e-9);
    });

    out.guard("softmax shift invariance", [&] {
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            const SoftmaxPolicy pi = random_policy(rng, 5, 4, 10.0);
            Eigen::MatrixXd shifted = pi.logits();
            for (int s = 0; s < 5; ++s) shifted.row(s).array() += 100.0 * (2.0 * rng.uniform() - 1.0);
            worst = std::max(worst, (SoftmaxPolicy(shifted).probs() - pi.probs()).cwiseAbs().maxCoeff());
        }
        out.add("softmax shift invariance", worst <= 1e-12, worst, "<=", 1e-12);
    });

    out.guard("KL lemmas", [&] {
        double pseudo = 0.0;
        double distance_slack = -1e300;
        double value_slack = -1e300;
        for (int trial = 0; trial < 100; ++trial) {
            const TabularMdp mdp = random_mdp(rng.next_u64(), 5, 3, 2, 0.8);
            const SoftmaxPolicy p = random_policy(rng, 5, 3, 2.0);
            const SoftmaxPolicy q = random_policy(rng, 5, 3, 2.0);
            const PolicyEvaluator ep(mdp, p);
            const PolicyEvaluator eq(mdp, q);
            const OccupancyMeasure dp = ep.occupancy();
            const OccupancyMeasure dq = eq.occupancy();
            pseudo = std::max(pseudo, std::abs(pseudo_kl(dp, dq) - weighted_kl(ep.state_visitation(), p, q)));
            const double kl_min = std::min({weighted_kl(ep.state_visitation(), p, q), weighted_kl(ep.state_visitation(), q, p),
                                            weighted_kl(eq.state_visitation(), p, q), weighted_kl(eq.state_visitation(), q, p)});
            const double g = mdp.gamma();
            distance_slack = std::max(distance_slack, (dp.d - dq.d).cwiseAbs().sum() -
                                                          g * std::sqrt(2.0) / (1.0 - g) * std::sqrt(kl_min));
            const double lhs = 0.5 * std::pow((ep.value_vector() - eq.value_vector()).lpNorm<Eigen::Infinity>(), 2);
            value_slack = std::max(value_slack,
                                   lhs - g * g / std::pow(1.0 - g, 4) * weighted_kl(eq.state_visitation(), q, p));
        }
        out.add("pseudo-KL equals weighted KL", pseudo <= 1e-10, pseudo, "<=", 1e-10);
        out.add("visitation distance lemma", distance_slack <= 0.0, distance_slack, "<=", 0.0);
        out.add("value difference bound", value_slack <= 0.0, value_slack, "<=", 0.0);
    });

    out.guard("inner loop", [&] {
        const TabularMdp mdp = random_mdp(rng.next_u64(), 6, 3, 1, 0.8);
        const SoftmaxPolicy anchor = random_policy(rng, 6, 3, 2.0);
        InnerLoopSpec spec{Eigen::MatrixXd::Zero(6, 3), anchor, 0.5, default_inner_eta(0.5, 0.8), 5};
        const double drift = (inner_loop(mdp, spec).probs() - anchor.probs()).cwiseAbs().maxCoeff();
        out.add("inner loop fixed point at zero reward", drift <= 1e-12, drift, "<=", 1e-12);

        spec.direction_reward = random_reward(rng, 6, 3, -1.0, 2.0);
        const SoftViResult star = soft_vi(mdp, spec.direction_reward, anchor, spec.alpha);
        const Evaluation at_star = regularized_q(mdp, spec, star.policy);
        const double identity_gap = (at_star.v - star.v).cwiseAbs().maxCoeff();
        out.add("soft value iteration fixed point", star.residual <= 1e-12 && identity_gap <= 1e-9, std::max(star.residual, identity_gap),
                "<=", 1e-9);

        const double epsilon = 1e-3;
        spec.steps = inner_steps_for_accuracy(mdp.gamma(), spec.direction_reward.cwiseAbs().maxCoeff(), epsilon);
        double worst = 1e300;
        for (int trial = 0; trial < 20; ++trial) {
            worst = std::min(worst, fundamental_inequality_check(mdp, spec, random_policy(rng, 6, 3, 3.0), epsilon).slack);
        }
        out.add("fundamental inequality", worst >= -1e-9, worst, ">=", -1e-9);
    });

    out.guard("EPD dual properties", [&] {
        const TabularMdp mdp = random_mdp(rng.next_u64(), 8, 4, 2, 0.8);
        EpdOptions options;
        options.thresholds = Eigen::VectorXd::Constant(1, 3.0);
        options.macro_steps = 200;
        arnpg_epd(mdp, options);  // throws on any violated property
        out.add("EPD dual properties over 200 steps", true, 0.0, "violations =", 0.0);
    });

    out.guard("LP versus value iteration", [&] {
        double worst = 0.0;
        for (int trial = 0; trial < 5; ++trial) {
            const TabularMdp mdp = random_mdp(rng.next_u64(), 6, 3, 2, 0.8);
            const LpSolution lp = cmdp_lp(mdp, Eigen::VectorXd::Zero(1));
            const double vi = value_iteration(mdp, mdp.reward(0)).value_at_rho;
            worst = std::max(worst, lp.status == LpStatus::optimal ? std::abs(lp.value - vi) : 1e300);
        }
        out.add("cmdp_lp with b = 0 matches value iteration", worst <= 1e-8, worst, "<=", 1e-8);
    });

    return out.take();
}

}  // namespace arnpg
