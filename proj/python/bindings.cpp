#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "regpg/analytics.hpp"
#include "regpg/bandit.hpp"
#include "regpg/errors.hpp"
#include "regpg/experiment.hpp"
#include "regpg/io.hpp"
#include "regpg/schedules.hpp"
#include "regpg/verification.hpp"

namespace py = pybind11;
using namespace regpg;

namespace {

void bind_core(py::module_& m) {
    py::enum_<RewardKind>(m, "RewardKind")
        .value("Gaussian", RewardKind::Gaussian)
        .value("Bernoulli", RewardKind::Bernoulli)
        .value("Uniform", RewardKind::Uniform);

    py::class_<RewardModel>(m, "RewardModel")
        .def(py::init<>())
        .def_static("gaussian", &RewardModel::gaussian)
        .def_static("bernoulli", &RewardModel::bernoulli, py::arg("shift"), py::arg("scale"))
        .def_static("uniform", &RewardModel::uniform, py::arg("width"))
        .def_readonly("kind", &RewardModel::kind)
        .def("second_moment", &RewardModel::second_moment)
        .def("sample", &RewardModel::sample, py::arg("mean"), py::arg("noise"));

    py::class_<BanditInstance>(m, "BanditInstance")
        .def(py::init<std::vector<double>, RewardModel>(), py::arg("q_star"),
             py::arg("reward") = RewardModel::gaussian())
        .def_readonly("q_star", &BanditInstance::q_star)
        .def_readonly("reward", &BanditInstance::reward)
        .def_property_readonly("arms", &BanditInstance::arms);

    py::class_<AgentState>(m, "AgentState")
        .def(py::init<std::vector<double>, double>(), py::arg("h"), py::arg("alpha") = 1.0)
        .def_readwrite("h", &AgentState::h)
        .def_readwrite("t", &AgentState::t)
        .def_readwrite("reward_sum", &AgentState::reward_sum)
        .def_readwrite("alpha", &AgentState::alpha)
        .def_property_readonly("baseline", &AgentState::baseline);

    py::class_<StepOutcome>(m, "StepOutcome")
        .def_readonly("arm", &StepOutcome::arm)
        .def_readonly("reward", &StepOutcome::reward)
        .def_readonly("baseline", &StepOutcome::baseline)
        .def_readonly("gradient", &StepOutcome::gradient)
        .def_property_readonly("policy", [](const StepOutcome& o) { return o.policy.probs; });

    m.def("softmax_policy",
          [](const std::vector<double>& h, double alpha) { return softmax_policy(h, alpha).probs; },
          py::arg("h"), py::arg("alpha") = 1.0);
    m.def("sample_arm",
          [](std::vector<double> probs, double u) { return sample_arm({std::move(probs)}, u); },
          py::arg("probs"), py::arg("u"));
    m.def("sample_reward", &sample_reward, py::arg("instance"), py::arg("arm"), py::arg("noise"));
    m.def("gradient_estimate",
          py::overload_cast<const AgentState&, std::size_t, double, double>(&gradient_estimate),
          py::arg("state"), py::arg("arm"), py::arg("reward"), py::arg("gamma"));
    m.def(
        "policy_gradient_step",
        [](const AgentState& state, const BanditInstance& instance, double rho, double gamma,
           double u, double noise) {
            return policy_gradient_step(state, instance, rho, gamma, Draws{u, noise});
        },
        py::arg("state"), py::arg("instance"), py::arg("rho"), py::arg("gamma"), py::arg("u"),
        py::arg("noise"));
}

void bind_schedules(py::module_& m) {
    py::class_<LearningRateSchedule>(m, "LearningRateSchedule")
        .def_static("constant", &LearningRateSchedule::constant, py::arg("rho"))
        .def_static("linear_decay", &LearningRateSchedule::linear_decay, py::arg("beta1"),
                    py::arg("beta2"))
        .def("rate_at", &LearningRateSchedule::rate_at, py::arg("t"))
        .def("__repr__", &LearningRateSchedule::describe);
    py::class_<RegularizationSchedule>(m, "RegularizationSchedule")
        .def_static("constant", &RegularizationSchedule::constant, py::arg("gamma"))
        .def_static("linear_decay", &RegularizationSchedule::linear_decay, py::arg("gamma0"),
                    py::arg("eta"))
        .def("gamma_at", &RegularizationSchedule::gamma_at, py::arg("t"))
        .def("__repr__", &RegularizationSchedule::describe);
}

void bind_analytics(py::module_& m) {
    py::class_<ExactModel>(m, "ExactModel")
        .def(py::init<std::vector<double>, double, double>(), py::arg("q_star"), py::arg("gamma"),
             py::arg("alpha") = 1.0)
        .def_readonly("q_star", &ExactModel::q_star)
        .def_readonly("gamma", &ExactModel::gamma)
        .def_readonly("alpha", &ExactModel::alpha)
        .def_property_readonly("c_star", &ExactModel::c_star)
        .def_property_readonly("mu", &ExactModel::mu);

    py::class_<OptimumResult>(m, "OptimumResult")
        .def_readonly("h_star", &OptimumResult::h_star)
        .def_readonly("value", &OptimumResult::value)
        .def_readonly("grad_norm", &OptimumResult::grad_norm)
        .def_readonly("unique_certified", &OptimumResult::unique_certified)
        .def_readonly("iterations", &OptimumResult::iterations);

    py::class_<TheoryConstants>(m, "TheoryConstants")
        .def_readonly("c_star", &TheoryConstants::c_star)
        .def_readonly("mu", &TheoryConstants::mu)
        .def_readonly("c_m", &TheoryConstants::c_m)
        .def_readonly("reward_coeff", &TheoryConstants::reward_coeff)
        .def_readonly("h_coeff", &TheoryConstants::h_coeff);

    py::class_<CriticalMapReport>(m, "CriticalMapReport")
        .def_readonly("h_scaled", &CriticalMapReport::h_scaled)
        .def_readonly("h_original", &CriticalMapReport::h_original)
        .def_readonly("difference", &CriticalMapReport::difference)
        .def_readonly("passed", &CriticalMapReport::pass);

    m.def("objective", [](const ExactModel& md, const std::vector<double>& h) { return objective(md, h); });
    m.def("exact_gradient",
          [](const ExactModel& md, const std::vector<double>& h) { return exact_gradient(md, h); });
    m.def("hessian_quadratic_form",
          [](const ExactModel& md, const std::vector<double>& h, const std::vector<double>& dh) {
              return hessian_quadratic_form(md, h, dh);
          });
    m.def(
        "theory_constants",
        [](const std::vector<double>& q, double gamma, const RewardModel& reward, double alpha) {
            return theory_constants(q, gamma, reward, alpha);
        },
        py::arg("q_star"), py::arg("gamma"), py::arg("reward") = RewardModel::gaussian(),
        py::arg("alpha") = 1.0);
    m.def("solve_optimum",
          py::overload_cast<const ExactModel&, double, std::size_t, std::size_t>(&solve_optimum),
          py::arg("model"), py::arg("tol") = 1e-10, py::arg("max_iter") = 500000,
          py::arg("multistart") = 8);
    m.def(
        "optimal_value",
        [](const std::vector<double>& q, double gamma) { return optimal_value(q, gamma); },
        py::arg("q_star"), py::arg("gamma"));
    m.def(
        "alpha_critical_map_check",
        [](const std::vector<double>& q, double gamma, double alpha, double tol) {
            return alpha_critical_map_check(q, gamma, alpha, tol);
        },
        py::arg("q_star"), py::arg("gamma"), py::arg("alpha"), py::arg("tol") = 1e-6);
}

void bind_experiment(py::module_& m) {
    py::class_<ZeroPreferences>(m, "ZeroPreferences").def(py::init<>());
    py::class_<BiasedFirstPreferences>(m, "BiasedFirstPreferences")
        .def(py::init<double>(), py::arg("value"))
        .def_readonly("value", &BiasedFirstPreferences::value);
    py::class_<ExplicitPreferences>(m, "ExplicitPreferences")
        .def(py::init<std::vector<double>>(), py::arg("values"))
        .def_readonly("values", &ExplicitPreferences::values);
    py::class_<GaussianMeans>(m, "GaussianMeans")
        .def(py::init<double, double>(), py::arg("mean") = 4.0, py::arg("std") = 1.0)
        .def_readonly("mean", &GaussianMeans::mean)
        .def_readonly("std", &GaussianMeans::std);
    py::class_<ExplicitMeans>(m, "ExplicitMeans")
        .def(py::init<std::vector<double>>(), py::arg("values"))
        .def_readonly("values", &ExplicitMeans::values);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("label", &ExperimentConfig::label)
        .def_readwrite("k", &ExperimentConfig::k)
        .def_readwrite("steps", &ExperimentConfig::steps)
        .def_readwrite("runs", &ExperimentConfig::runs)
        .def_readwrite("master_seed", &ExperimentConfig::master_seed)
        .def_readwrite("h0", &ExperimentConfig::h0)
        .def_readwrite("rate", &ExperimentConfig::rate)
        .def_readwrite("gamma", &ExperimentConfig::gamma)
        .def_readwrite("alpha", &ExperimentConfig::alpha)
        .def_readwrite("reward", &ExperimentConfig::reward)
        .def_readwrite("q_sampling", &ExperimentConfig::q_sampling)
        .def_readwrite("record_distance", &ExperimentConfig::record_distance)
        .def_readwrite("common_noise", &ExperimentConfig::common_noise)
        .def("validate", &ExperimentConfig::validate);

    py::class_<RunResult>(m, "RunResult")
        .def_readonly("q_star", &RunResult::q_star)
        .def_readonly("arms", &RunResult::arms)
        .def_readonly("rewards", &RunResult::rewards)
        .def_readonly("rel_observed", &RunResult::rel_observed)
        .def_readonly("rel_expected", &RunResult::rel_expected)
        .def_readonly("distance", &RunResult::distance)
        .def_readonly("h_final", &RunResult::h_final);

    py::class_<MetricSeries>(m, "MetricSeries")
        .def_readonly("mean", &MetricSeries::mean)
        .def_readonly("std_error", &MetricSeries::std_error);

    py::class_<AggregateSeries>(m, "AggregateSeries")
        .def_readonly("label", &AggregateSeries::label)
        .def_readonly("runs", &AggregateSeries::runs)
        .def_readonly("rel_observed", &AggregateSeries::rel_observed)
        .def_readonly("rel_expected", &AggregateSeries::rel_expected)
        .def_readonly("reward", &AggregateSeries::reward)
        .def_readonly("distance", &AggregateSeries::distance);

    py::class_<DistanceSeries>(m, "DistanceSeries")
        .def_readonly("t", &DistanceSeries::t)
        .def_readonly("d", &DistanceSeries::d)
        .def_readonly("std_error", &DistanceSeries::std_error)
        .def_readonly("t_times_d", &DistanceSeries::t_times_d)
        .def_readonly("diff_std_error", &DistanceSeries::diff_std_error)
        .def_readonly("runs", &DistanceSeries::runs);

    py::class_<ExperimentSet>(m, "ExperimentSet")
        .def_readonly("name", &ExperimentSet::name)
        .def_readwrite("variants", &ExperimentSet::variants);

    m.def(
        "shared_instance",
        [](std::uint64_t seed, std::size_t run, const MeanSampling& sampling, std::size_t k) {
            return shared_instance(seed, run, sampling, k);
        },
        py::arg("master_seed"), py::arg("run_index"), py::arg("q_sampling"), py::arg("k"));
    m.def("run_single", &run_single, py::arg("config"), py::arg("run_index"));
    m.def(
        "run_experiment",
        [](const ExperimentConfig& c, unsigned threads) {
            py::gil_scoped_release release;
            return run_experiment(c, ExecutionOptions{threads});
        },
        py::arg("config"), py::arg("threads") = 0);
    m.def(
        "estimate_distance_series",
        [](const ExperimentConfig& c, unsigned threads) {
            py::gil_scoped_release release;
            return estimate_distance_series(c, ExecutionOptions{threads});
        },
        py::arg("config"), py::arg("threads") = 0);
    m.def(
        "rate_study",
        [](const ExperimentConfig& c, std::vector<std::size_t> checkpoints, unsigned threads) {
            py::gil_scoped_release release;
            return rate_study(c, std::move(checkpoints), ExecutionOptions{threads});
        },
        py::arg("config"), py::arg("checkpoints"), py::arg("threads") = 0);
    m.def("figure_preset", &figure_preset, py::arg("name"));
    m.def("figure_preset_names", &figure_preset_names);
    m.def("parse_config_text", &parse_config_text, py::arg("text"));
    m.def("format_config", &format_config, py::arg("set"));
}

void bind_verification(py::module_& m) {
    py::class_<CheckReport>(m, "CheckReport")
        .def_readonly("name", &CheckReport::name)
        .def_readonly("passed", &CheckReport::pass)
        .def_readonly("statistic", &CheckReport::statistic)
        .def_readonly("threshold", &CheckReport::threshold)
        .def_readonly("detail", &CheckReport::detail)
        .def("__repr__", &format_report_line);

    m.def(
        "check_unbiasedness",
        [](const ExactModel& md, const std::vector<double>& h, double baseline, std::size_t n,
           std::uint64_t seed, double se) { return check_unbiasedness(md, h, baseline, n, seed, se); },
        py::arg("model"), py::arg("h"), py::arg("baseline"), py::arg("n_samples"), py::arg("seed"),
        py::arg("se_multiplier") = 4.0);
    m.def(
        "check_gradient_second_moment",
        [](const ExactModel& md, const std::vector<double>& h, std::size_t n, std::uint64_t seed) {
            return check_gradient_second_moment(md, h, n, seed);
        },
        py::arg("model"), py::arg("h"), py::arg("n_samples"), py::arg("seed"));
    m.def("check_mean_range_bound", &check_mean_range_bound, py::arg("n_cases"), py::arg("seed"));
    m.def("check_product_lemma", &check_product_lemma, py::arg("beta1"), py::arg("beta2"),
          py::arg("xi"), py::arg("t_start"), py::arg("horizon"));
    m.def("estimate_c_star_avg", &estimate_c_star_avg, py::arg("k"), py::arg("n_samples"),
          py::arg("seed"), py::arg("target") = 3.08, py::arg("tolerance") = 0.03);
    m.def("run_verify_suite", &run_verify_suite, py::arg("suite"), py::arg("seed") = 1);
    m.def("verify_suite_names", &verify_suite_names);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Regularized softmax policy gradient for the multi-armed bandit";

    auto validation = py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<PreconditionError>(m, "PreconditionError", validation.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);
    py::register_exception<RunError>(m, "RunError", PyExc_RuntimeError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

    bind_core(m);
    bind_schedules(m);
    bind_analytics(m);
    bind_experiment(m);
    bind_verification(m);
}
