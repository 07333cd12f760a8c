#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "arnpg/algorithms.hpp"
#include "arnpg/error.hpp"
#include "arnpg/harness.hpp"
#include "arnpg/inner_loop.hpp"
#include "arnpg/io.hpp"
#include "arnpg/oracle.hpp"

namespace py = pybind11;
using namespace arnpg;

namespace {

py::dict history_dict(const RunHistory& h) {
    py::list records;
    for (const RunRecord& r : h.records) {
        py::dict row;
        row["k"] = r.k;
        row["T"] = r.cumulative_iterations;
        row["t_k"] = r.inner_steps;
        row["values"] = r.values;
        row["F"] = r.scalarized ? py::cast(*r.scalarized) : py::none();
        row["duals"] = r.duals;
        row["avg_gap"] = r.avg_gap ? py::cast(*r.avg_gap) : py::none();
        row["avg_violation"] = r.avg_violation;
        row["last_violation"] = r.last_violation;
        records.append(row);
    }
    py::dict out;
    out["algorithm"] = to_string(h.algorithm);
    out["records"] = records;
    out["final_policy"] = h.final_policy.logits();
    out["returned_policy"] = h.returned_policy.logits();
    out["average_values"] = h.average_values;
    return out;
}

}  // namespace

PYBIND11_MODULE(_arnpg, m) {
    m.doc() = "Tabular multi-objective NPG lab";

    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<DocumentError>(m, "DocumentError", PyExc_ValueError);

    py::class_<TabularMdp>(m, "TabularMdp")
        .def(py::init<Eigen::MatrixXd, std::vector<Eigen::MatrixXd>, Eigen::VectorXd, double>(),
             py::arg("transitions"), py::arg("rewards"), py::arg("rho"), py::arg("gamma"),
             "transitions has shape (S*A, S); row s*A + a is P(.|s,a)")
        .def_property_readonly("num_states", &TabularMdp::num_states)
        .def_property_readonly("num_actions", &TabularMdp::num_actions)
        .def_property_readonly("num_objectives", &TabularMdp::num_objectives)
        .def_property_readonly("gamma", &TabularMdp::gamma)
        .def_property_readonly("rho", &TabularMdp::rho)
        .def_property_readonly("transitions", &TabularMdp::transitions)
        .def_property_readonly("rewards", &TabularMdp::rewards)
        .def("to_json", [](const TabularMdp& mdp) { return mdp_to_json(mdp).dump(); })
        .def_static("from_json", [](const std::string& text) { return mdp_from_json(nlohmann::json::parse(text)); })
        .def(py::self == py::self);

    py::class_<SoftmaxPolicy>(m, "SoftmaxPolicy")
        .def(py::init<Eigen::MatrixXd>(), py::arg("logits"))
        .def_property_readonly("logits", &SoftmaxPolicy::logits)
        .def("probs", &SoftmaxPolicy::probs)
        .def("log_probs", &SoftmaxPolicy::log_probs);

    m.def("random_mdp", &random_mdp, py::arg("seed"), py::arg("states"), py::arg("actions"), py::arg("objectives"),
          py::arg("gamma"));
    m.def("uniform_policy", &uniform_policy);
    m.def(
        "policy_eval",
        [](const TabularMdp& mdp, const SoftmaxPolicy& pi, const Eigen::MatrixXd& r) {
            const Evaluation ev = policy_eval(mdp, pi, r);
            return py::make_tuple(ev.v, ev.q);
        },
        "Returns (V per state, Q per state-action)");
    m.def("value_vector", &value_vector);
    m.def("occupancy", [](const TabularMdp& mdp, const SoftmaxPolicy& pi) { return occupancy(mdp, pi).d; });
    m.def("weighted_kl", &weighted_kl);

    m.def(
        "inner_loop",
        [](const TabularMdp& mdp, const Eigen::MatrixXd& reward, const SoftmaxPolicy& anchor, double alpha,
           std::optional<double> eta, int steps) {
            return inner_loop(mdp, {reward, anchor, alpha, eta.value_or(default_inner_eta(alpha, mdp.gamma())), steps});
        },
        py::arg("mdp"), py::arg("reward"), py::arg("anchor"), py::arg("alpha"), py::arg("eta") = py::none(),
        py::arg("steps") = 1);

    m.def(
        "value_iteration",
        [](const TabularMdp& mdp, const Eigen::MatrixXd& reward) {
            const ValueIterationResult r = value_iteration(mdp, reward);
            return py::make_tuple(r.value_at_rho, r.v, r.greedy);
        },
        "Returns (V*(rho), V* per state, greedy actions)");
    m.def(
        "cmdp_lp",
        [](const TabularMdp& mdp, const Eigen::VectorXd& b) {
            const LpSolution lp = cmdp_lp(mdp, b);
            py::dict out;
            out["status"] = to_string(lp.status);
            out["value"] = lp.value;
            out["duals"] = lp.duals;
            out["values"] = lp.values;
            out["occupancy"] = lp.occupancy.d;
            return out;
        },
        py::arg("mdp"), py::arg("b"));
    m.def(
        "maxmin_lp",
        [](const TabularMdp& mdp, const Eigen::VectorXd& c) {
            const LpSolution lp = maxmin_lp(mdp, c);
            py::dict out;
            out["status"] = to_string(lp.status);
            out["value"] = lp.value;
            out["weights"] = lp.duals;
            out["values"] = lp.values;
            return out;
        },
        py::arg("mdp"), py::arg("c"));
    m.def(
        "smooth_fw",
        [](const TabularMdp& mdp, const Eigen::VectorXd& weights, double delta) {
            const FrankWolfeResult fw = smooth_fw(mdp, sum_log_scalarizer(weights, delta));
            py::dict out;
            out["value"] = fw.value;
            out["values"] = fw.values;
            out["gap"] = fw.gap;
            out["iterations"] = fw.iterations;
            return out;
        },
        py::arg("mdp"), py::arg("weights"), py::arg("delta") = 0.1);

    m.def(
        "run_config",
        [](const std::string& config_json) {
            const ExperimentOutput out = run_experiment(parse_run_config(nlohmann::json::parse(config_json)));
            py::list histories;
            for (const SeedRun& run : out.runs) histories.append(history_dict(run.history));
            return py::make_tuple(experiment_csv(out), out.metadata.dump(), histories);
        },
        "Runs a JSON config; returns (csv text, metadata JSON, list of histories)");
    m.def(
        "fit_loglog_slope",
        [](const std::vector<double>& x, const std::vector<std::optional<double>>& y, double from, double to) {
            const SlopeFit fit = fit_loglog_slope(x, y, from, to);
            py::dict out;
            out["slope"] = fit.slope;
            out["intercept"] = fit.intercept;
            out["r2"] = fit.r2;
            out["used"] = fit.used;
            out["excluded"] = fit.excluded;
            return out;
        });
}
