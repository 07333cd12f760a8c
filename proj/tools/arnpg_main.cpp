// Command-line front end: gen-mdp, run, oracle, slope, check.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "arnpg/error.hpp"
#include "arnpg/harness.hpp"
#include "arnpg/io.hpp"

namespace {

using namespace arnpg;

Eigen::VectorXd to_vector(const std::vector<double>& x) {
    return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

int cmd_oracle(const std::string& mdp_path, const std::string& kind, const std::vector<double>& b,
               const std::vector<double>& c, const std::vector<double>& weights, double delta) {
    const TabularMdp mdp = mdp_from_json(read_json_file(mdp_path));
    CriterionSpec spec;
    spec.kind = criterion_from_string(kind);
    const int m = mdp.num_objectives();
    switch (spec.kind) {
        case CriterionKind::cmdp:
            if (static_cast<int>(b.size()) != m - 1) {
                throw ParameterError("--b: expected " + std::to_string(m - 1) + " thresholds");
            }
            spec.thresholds = to_vector(b);
            break;
        case CriterionKind::maxmin:
            spec.scales = c.empty() ? Eigen::VectorXd::Ones(m) : to_vector(c);
            break;
        case CriterionKind::smooth:
            spec.scalarizer = sum_log_scalarizer(weights.empty() ? Eigen::VectorXd::Ones(m) : to_vector(weights), delta);
            break;
    }
    std::cout << run_oracle(mdp, spec).details.dump(2) << '\n';
    return 0;
}

int cmd_check(std::uint64_t seed) {
    int failures = 0;
    for (const CheckResult& r : run_property_checks(seed)) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
        failures += r.passed ? 0 : 1;
    }
    std::cout << (failures == 0 ? "all checks passed" : std::to_string(failures) + " check(s) failed") << '\n';
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tabular multi-objective policy optimization lab"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen-mdp", "Write a seeded random MDP as JSON");
    int states = 20, actions = 10, objectives = 2;
    double gamma = 0.8;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    gen->add_option("--states", states, "Number of states")->required();
    gen->add_option("--actions", actions, "Number of actions")->required();
    gen->add_option("--objectives", objectives, "Number of reward functions")->required();
    gen->add_option("--gamma", gamma, "Discount factor")->required();
    gen->add_option("--seed", gen_seed, "Generator seed")->required();
    gen->add_option("-o,--output", gen_out, "Output JSON file")->required();

    auto* run = app.add_subcommand("run", "Run an experiment config and write CSV + metadata");
    std::string config_path, run_out;
    run->add_option("--config", config_path, "Run config JSON")->required()->check(CLI::ExistingFile);
    run->add_option("-o,--output", run_out, "Output CSV (defaults to the config's output key)");

    auto* oracle = app.add_subcommand("oracle", "Solve a criterion exactly");
    std::string oracle_mdp, oracle_kind;
    std::vector<double> oracle_b, oracle_c, oracle_weights;
    double oracle_delta = 0.1;
    oracle->add_option("--mdp", oracle_mdp, "MDP JSON")->required()->check(CLI::ExistingFile);
    oracle->add_option("--criterion", oracle_kind, "cmdp, maxmin or smooth")
        ->required()
        ->check(CLI::IsMember({"cmdp", "maxmin", "smooth"}));
    oracle->add_option("--b", oracle_b, "Constraint thresholds b_2..b_m");
    oracle->add_option("--c", oracle_c, "Max-min scales c_1..c_m (default ones)");
    oracle->add_option("--weights", oracle_weights, "Sum-log weights (default ones)");
    oracle->add_option("--delta", oracle_delta, "Sum-log offset");

    auto* slope = app.add_subcommand("slope", "Fit a log-log slope of a CSV column against T");
    std::string slope_in, slope_column, slope_seed = "mean";
    double slope_from = 0.0, slope_to = 0.0;
    slope->add_option("--input", slope_in, "Metrics CSV")->required()->check(CLI::ExistingFile);
    slope->add_option("--column", slope_column, "Column name")->required();
    slope->add_option("--from", slope_from, "Window start T0")->required();
    slope->add_option("--to", slope_to, "Window end T1")->required();
    slope->add_option("--seed", slope_seed, "Seed rows to use in multi-seed files");
    bool slope_abs = false;
    slope->add_flag("--abs", slope_abs, "Fit the absolute value of the column");

    auto* check = app.add_subcommand("check", "Run the randomized property and lemma checks");
    std::uint64_t check_seed = 2022;
    check->add_option("--seed", check_seed, "Seed for the random instances");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            write_text_file(gen_out, mdp_to_json(random_mdp(gen_seed, states, actions, objectives, gamma)).dump() + "\n");
            return 0;
        }
        if (run->parsed()) {
            const RunConfig config = load_run_config(config_path);
            const std::string out = run_out.empty() ? config.output : run_out;
            if (out.empty()) throw ParameterError("run: no output path (use -o or the config's output key)");
            write_experiment(run_experiment(config), out);
            return 0;
        }
        if (oracle->parsed()) return cmd_oracle(oracle_mdp, oracle_kind, oracle_b, oracle_c, oracle_weights, oracle_delta);
        if (slope->parsed()) {
            const SlopeFit fit =
                fit_csv_slope(parse_csv(read_text_file(slope_in)), slope_column, slope_from, slope_to, slope_seed, slope_abs);
            std::printf("slope=%.6f intercept=%.6f r2=%.6f used=%d excluded=%d\n", fit.slope, fit.intercept, fit.r2,
                        fit.used, fit.excluded);
            return 0;
        }
        if (check->parsed()) return cmd_check(check_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
