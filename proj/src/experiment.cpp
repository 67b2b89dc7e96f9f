#include "regpg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <optional>
#include <sstream>
#include <thread>

#include "regpg/errors.hpp"
#include "regpg/rng.hpp"

namespace regpg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

unsigned resolve_threads(ExecutionOptions exec) {
    if (exec.threads != 0) return exec.threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Produces results for runs [0, runs) on a pool of threads and hands them to `consume`
/// strictly in run order. A failing run aborts the sweep; the lowest failing index wins.
template <class Result, class Produce, class Consume>
void ordered_runs(std::size_t runs, ExecutionOptions exec, Produce produce, Consume consume) {
    const unsigned threads = resolve_threads(exec);
    const std::size_t batch = std::max<std::size_t>(1, std::size_t{threads} * 8);

    std::vector<std::optional<Result>> slots;
    std::vector<std::exception_ptr> errors;
    for (std::size_t begin = 0; begin < runs; begin += batch) {
        const std::size_t end = std::min(runs, begin + batch);
        slots.assign(end - begin, std::nullopt);
        errors.assign(end - begin, nullptr);

        auto work = [&](std::atomic<std::size_t>& next) {
            for (std::size_t i = next++; i < end; i = next++) {
                try {
                    slots[i - begin].emplace(produce(i));
                } catch (...) {
                    errors[i - begin] = std::current_exception();
                }
            }
        };
        std::atomic<std::size_t> next{begin};
        const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, end - begin));
        if (workers <= 1) {
            work(next);
        } else {
            std::vector<std::jthread> pool;
            pool.reserve(workers);
            for (unsigned w = 0; w < workers; ++w) pool.emplace_back([&] { work(next); });
        }

        for (std::size_t i = begin; i < end; ++i) {
            if (errors[i - begin]) {
                try {
                    std::rethrow_exception(errors[i - begin]);
                } catch (const DivergenceError& e) {
                    throw RunError(i, e.step(),
                                   "run " + std::to_string(i) + " diverged: " + e.what());
                }
            }
            consume(i, std::move(*slots[i - begin]));
        }
    }
}

struct Welford {
    std::vector<double> mean;
    std::vector<double> m2;
    std::size_t n = 0;

    explicit Welford(std::size_t size = 0) : mean(size, 0.0), m2(size, 0.0) {}

    void add(const std::vector<double>& x) {
        ++n;
        const double inv = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < mean.size(); ++i) {
            if (!std::isfinite(x[i]) || !std::isfinite(mean[i])) {
                // An overflowed sample makes the mean infinite instead of NaN.
                mean[i] += x[i];
                m2[i] = INFINITY;
                continue;
            }
            const double delta = x[i] - mean[i];
            mean[i] += delta * inv;
            m2[i] += delta * (x[i] - mean[i]);
        }
    }

    MetricSeries finish() const {
        MetricSeries s;
        s.mean = mean;
        s.std_error.assign(mean.size(), 0.0);
        if (n > 1) {
            const double denom = static_cast<double>(n - 1) * static_cast<double>(n);
            for (std::size_t i = 0; i < mean.size(); ++i) {
                s.std_error[i] = std::sqrt(std::max(0.0, m2[i]) / denom);
            }
        }
        return s;
    }
};

std::uint64_t noise_salt(const ExperimentConfig& config) {
    return config.common_noise ? 0 : fnv1a(config.label);
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Throws unless the run's instance has a unique optimum under the config's constant gamma.
ExactModel certified_model(const ExperimentConfig& config, const BanditInstance& inst,
                           std::size_t run_index) {
    if (!config.gamma.is_constant()) {
        throw PreconditionError("distance to the optimum needs a constant gamma schedule");
    }
    ExactModel model(inst.q_star, config.gamma.gamma_at(0), config.alpha);
    if (!(model.mu() > 0.0)) {
        std::ostringstream os;
        os << "run " << run_index << ": mu = gamma - alpha^2 (max q* - min q*) = " << model.mu()
           << " is not positive, so the optimum is not certified unique";
        throw PreconditionError(os.str());
    }
    return model;
}

std::vector<double> certified_optimum(const ExperimentConfig& config, const BanditInstance& inst,
                                      std::size_t run_index) {
    SolverOptions opts;
    opts.tol = 1e-12;
    return solve_optimum(certified_model(config, inst, run_index), opts).h_star;
}

/// Steps the agent `steps` times, calling observe(t, state_after, outcome) after update t.
template <class Observe>
void simulate(const ExperimentConfig& config, std::size_t run_index, const BanditInstance& inst,
              std::size_t steps, Observe observe) {
    const std::uint64_t salt = noise_salt(config);
    StreamRng actions(stream_key(config.master_seed, run_index, StreamId::ActionUniforms, salt));
    StreamRng noise(stream_key(config.master_seed, run_index, StreamId::RewardNoise, salt));
    const bool normal_noise = inst.reward.uses_normal_noise();

    AgentState state(config.initial_preferences(), config.alpha);
    for (std::size_t t = 0; t < steps; ++t) {
        Draws draws;
        draws.uniform = actions.uniform();
        draws.noise = normal_noise ? noise.normal() : noise.uniform();
        auto [next, outcome] = policy_gradient_step(std::move(state), inst, config.rate.rate_at(t),
                                                    config.gamma.gamma_at(t), draws);
        state = std::move(next);
        observe(t, state, outcome);
    }
}

struct RunDistances {
    std::vector<double> at_checkpoints;
};

}  // namespace

void ExperimentConfig::validate() const {
    if (k < 1) throw ValidationError("k must be >= 1");
    if (steps < 1) throw ValidationError("steps must be >= 1");
    if (runs < 1) throw ValidationError("runs must be >= 1");
    if (!std::isfinite(alpha) || alpha <= 0.0) throw ValidationError("alpha must be > 0");
    std::visit(overloaded{
                   [](const ZeroPreferences&) {},
                   [](const BiasedFirstPreferences& b) {
                       if (!std::isfinite(b.value)) throw ValidationError("h0 must be finite");
                   },
                   [this](const ExplicitPreferences& e) {
                       if (e.values.size() != k) {
                           throw ValidationError("explicit h0 has " +
                                                 std::to_string(e.values.size()) +
                                                 " entries, expected k = " + std::to_string(k));
                       }
                       for (double v : e.values) {
                           if (!std::isfinite(v)) throw ValidationError("h0 must be finite");
                       }
                   },
               },
               h0);
    std::visit(overloaded{
                   [](const GaussianMeans& g) {
                       if (!std::isfinite(g.mean) || !std::isfinite(g.std) || g.std < 0.0) {
                           throw ValidationError("mean sampling needs finite mean and std >= 0");
                       }
                   },
                   [this](const ExplicitMeans& e) {
                       if (e.values.size() != k) {
                           throw ValidationError("explicit q has " +
                                                 std::to_string(e.values.size()) +
                                                 " entries, expected k = " + std::to_string(k));
                       }
                       for (double q : e.values) reward.check_mean(q);
                   },
               },
               q_sampling);
}

std::vector<double> ExperimentConfig::initial_preferences() const {
    return std::visit(overloaded{
                          [this](const ZeroPreferences&) { return std::vector<double>(k, 0.0); },
                          [this](const BiasedFirstPreferences& b) {
                              std::vector<double> h(k, 0.0);
                              h[0] = b.value;
                              return h;
                          },
                          [](const ExplicitPreferences& e) { return e.values; },
                      },
                      h0);
}

BanditInstance shared_instance(std::uint64_t master_seed, std::size_t run_index,
                               const MeanSampling& q_sampling, std::size_t k,
                               const RewardModel& reward) {
    std::vector<double> q = std::visit(
        overloaded{
            [&](const GaussianMeans& g) {
                StreamRng rng(stream_key(master_seed, run_index, StreamId::MeanSampling));
                std::vector<double> out(k);
                for (double& x : out) x = g.mean + g.std * rng.normal();
                return out;
            },
            [](const ExplicitMeans& e) { return e.values; },
        },
        q_sampling);
    return BanditInstance(std::move(q), reward);
}

std::uint64_t instance_digest(const ExperimentConfig& config, std::size_t run_index) {
    const auto inst =
        shared_instance(config.master_seed, run_index, config.q_sampling, config.k, config.reward);
    std::uint64_t h = mix64(inst.arms());
    for (double q : inst.q_star) h = mix64(h ^ std::bit_cast<std::uint64_t>(q));
    return h;
}

RunResult run_single(const ExperimentConfig& config, std::size_t run_index) {
    config.validate();
    const auto inst =
        shared_instance(config.master_seed, run_index, config.q_sampling, config.k, config.reward);
    const double best = inst.best_mean();
    if (best <= 1e-9) {
        throw ValidationError("run " + std::to_string(run_index) +
                              ": relative reward undefined, best arm mean is not positive");
    }

    std::vector<double> h_star;
    if (config.record_distance) h_star = certified_optimum(config, inst, run_index);

    RunResult r;
    r.q_star = inst.q_star;
    r.arms.reserve(config.steps);
    r.rewards.reserve(config.steps);
    r.rel_observed.reserve(config.steps);
    r.rel_expected.reserve(config.steps);
    if (config.record_distance) r.distance.reserve(config.steps);

    try {
        simulate(config, run_index, inst, config.steps,
                 [&](std::size_t, const AgentState& state, const StepOutcome& out) {
                     r.arms.push_back(out.arm);
                     r.rewards.push_back(out.reward);
                     r.rel_observed.push_back(out.reward / best);
                     r.rel_expected.push_back(inst.q_star[out.arm] / best);
                     if (config.record_distance) {
                         r.distance.push_back(squared_distance(state.h, h_star));
                     }
                     if (r.arms.size() == config.steps) r.h_final = state.h;
                 });
    } catch (const DivergenceError& e) {
        throw RunError(run_index, e.step(),
                       "run " + std::to_string(run_index) + " diverged: " + e.what());
    }
    return r;
}

AggregateSeries run_experiment(const ExperimentConfig& config, ExecutionOptions exec) {
    config.validate();
    const std::size_t T = config.steps;
    Welford observed(T), expected(T), reward(T), distance(config.record_distance ? T : 0);

    ordered_runs<RunResult>(
        config.runs, exec, [&](std::size_t i) { return run_single(config, i); },
        [&](std::size_t, RunResult r) {
            observed.add(r.rel_observed);
            expected.add(r.rel_expected);
            reward.add(r.rewards);
            if (config.record_distance) distance.add(r.distance);
        });

    AggregateSeries out;
    out.label = config.label;
    out.runs = config.runs;
    out.rel_observed = observed.finish();
    out.rel_expected = expected.finish();
    out.reward = reward.finish();
    if (config.record_distance) out.distance = distance.finish();
    return out;
}

DistanceSeries distance_at(const ExperimentConfig& config, std::vector<std::size_t> checkpoints,
                           ExecutionOptions exec) {
    config.validate();
    std::sort(checkpoints.begin(), checkpoints.end());
    checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
    if (checkpoints.empty()) throw ValidationError("need at least one checkpoint");
    if (checkpoints.back() > config.steps) {
        throw ValidationError("checkpoint " + std::to_string(checkpoints.back()) +
                              " beyond the horizon of " + std::to_string(config.steps) + " steps");
    }

    // Fail fast on uncertified instances before spending time on any run.
    for (std::size_t i = 0; i < config.runs; ++i) {
        (void)certified_model(
            config, shared_instance(config.master_seed, i, config.q_sampling, config.k, config.reward),
            i);
    }

    const std::size_t n = checkpoints.size();
    const std::size_t horizon = checkpoints.back();
    auto produce = [&](std::size_t run) {
        const auto inst =
            shared_instance(config.master_seed, run, config.q_sampling, config.k, config.reward);
        const auto h_star = certified_optimum(config, inst, run);
        RunDistances rd;
        rd.at_checkpoints.reserve(n);
        std::size_t next = 0;
        const auto h0 = config.initial_preferences();
        while (next < n && checkpoints[next] == 0) {
            rd.at_checkpoints.push_back(squared_distance(h0, h_star));
            ++next;
        }
        simulate(config, run, inst, horizon,
                 [&](std::size_t t, const AgentState& state, const StepOutcome&) {
                     if (next < n && checkpoints[next] == t + 1) {
                         rd.at_checkpoints.push_back(squared_distance(state.h, h_star));
                         ++next;
                     }
                 });
        return rd;
    };

    Welford level(n);
    Welford steps(n);
    std::vector<double> diffs(n, 0.0);
    ordered_runs<RunDistances>(config.runs, exec, produce, [&](std::size_t, RunDistances rd) {
        level.add(rd.at_checkpoints);
        for (std::size_t i = 1; i < n; ++i) {
            diffs[i] = rd.at_checkpoints[i] - rd.at_checkpoints[i - 1];
        }
        steps.add(diffs);
    });

    const auto lv = level.finish();
    const auto df = steps.finish();
    DistanceSeries out;
    out.runs = config.runs;
    out.t = checkpoints;
    out.d = lv.mean;
    out.std_error = lv.std_error;
    out.diff_std_error = df.std_error;
    out.diff_std_error[0] = 0.0;
    out.t_times_d.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.t_times_d[i] = static_cast<double>(out.t[i]) * out.d[i];
    return out;
}

std::vector<std::size_t> geometric_grid(std::size_t horizon, std::size_t points) {
    std::vector<std::size_t> grid;
    if (horizon == 0) return grid;
    points = std::max<std::size_t>(points, 2);
    const double log_h = std::log(static_cast<double>(horizon));
    for (std::size_t i = 0; i < points; ++i) {
        const double x = std::exp(log_h * static_cast<double>(i) / static_cast<double>(points - 1));
        grid.push_back(std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(x)), 1, horizon));
    }
    grid.back() = horizon;
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

DistanceSeries estimate_distance_series(const ExperimentConfig& config, ExecutionOptions exec) {
    auto grid = geometric_grid(config.steps);
    grid.insert(grid.begin(), 0);
    return distance_at(config, std::move(grid), exec);
}

DistanceSeries rate_study(const ExperimentConfig& config, std::vector<std::size_t> checkpoints,
                          ExecutionOptions exec) {
    if (config.rate.is_constant()) {
        throw PreconditionError("rate study needs a linear-decay learning rate");
    }
    return distance_at(config, std::move(checkpoints), exec);
}

const std::vector<std::string>& figure_preset_names() {
    static const std::vector<std::string> names{"fig1-left", "fig1-right", "fig2",
                                                "fig3-baseline", "fig3-decay", "fig3"};
    return names;
}

namespace {

ExperimentConfig testbed_base() {
    ExperimentConfig c;
    c.k = 10;
    c.steps = 2000;
    c.runs = 1000;
    c.master_seed = 42;
    c.q_sampling = GaussianMeans{4.0, 1.0};
    return c;
}

std::vector<ExperimentConfig> gamma_variants(const ExperimentConfig& base) {
    std::vector<ExperimentConfig> out;
    for (auto [label, gamma] : {std::pair{"gamma=0", 0.0}, std::pair{"gamma=0.01", 0.01},
                                std::pair{"gamma=10", 10.0}}) {
        ExperimentConfig c = base;
        c.label = label;
        c.gamma = RegularizationSchedule::constant(gamma);
        out.push_back(std::move(c));
    }
    return out;
}

ExperimentConfig fig3_variant(bool decaying) {
    ExperimentConfig c = testbed_base();
    c.h0 = BiasedFirstPreferences{5.0};
    c.rate = LearningRateSchedule::linear_decay(1.0, 0.05);
    if (decaying) {
        c.label = "gamma0=10";
        c.gamma = RegularizationSchedule::linear_decay(10.0, 0.2);
    } else {
        c.label = "gamma0=0";
        c.gamma = RegularizationSchedule::constant(0.0);
    }
    return c;
}

}  // namespace

ExperimentSet figure_preset(const std::string& name) {
    ExperimentSet set;
    set.name = name;
    if (name == "fig1-left" || name == "fig1-right") {
        ExperimentConfig base = testbed_base();
        base.rate = LearningRateSchedule::constant(0.05);
        if (name == "fig1-right") base.h0 = BiasedFirstPreferences{5.0};
        set.variants = gamma_variants(base);
    } else if (name == "fig2") {
        ExperimentConfig base = testbed_base();
        base.h0 = BiasedFirstPreferences{5.0};
        base.rate = LearningRateSchedule::linear_decay(1.0, 0.05);
        set.variants = gamma_variants(base);
    } else if (name == "fig3-baseline") {
        set.variants = {fig3_variant(false)};
    } else if (name == "fig3-decay") {
        set.variants = {fig3_variant(true)};
    } else if (name == "fig3") {
        set.variants = {fig3_variant(false), fig3_variant(true)};
    } else {
        std::string known;
        for (const auto& n : figure_preset_names()) known += (known.empty() ? "" : ", ") + n;
        throw ValidationError("unknown preset '" + name + "'; valid presets: " + known);
    }
    return set;
}

}  // namespace regpg
