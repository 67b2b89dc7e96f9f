#pragma once

// Seeded Monte Carlo experiments over independent bandit runs.
//
// Every run draws from three substreams keyed by (master_seed, run_index, stream): arm
// means, arm-selection uniforms and reward noise. Arm means never depend on anything
// else, so configurations sharing a master seed see the same instance in run r. The
// other two streams are salted with the label unless common_noise is set.
//
// Runs may execute on several threads; results are always reduced in run order, so the
// output does not depend on the thread count.

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "regpg/analytics.hpp"
#include "regpg/bandit.hpp"
#include "regpg/schedules.hpp"

namespace regpg {

struct ZeroPreferences {};
// H0 = (value, 0, ..., 0)
struct BiasedFirstPreferences {
    double value = 5.0;
};
struct ExplicitPreferences {
    std::vector<double> values;
};
using InitialPreferences =
    std::variant<ZeroPreferences, BiasedFirstPreferences, ExplicitPreferences>;

// q*(a) ~ N(mean, std^2) i.i.d.
struct GaussianMeans {
    double mean = 4.0;
    double std = 1.0;
};
struct ExplicitMeans {
    std::vector<double> values;
};
using MeanSampling = std::variant<GaussianMeans, ExplicitMeans>;

struct ExperimentConfig {
    std::string label = "default";
    std::size_t k = 10;
    std::size_t steps = 2000;
    std::size_t runs = 1000;
    std::uint64_t master_seed = 1;
    InitialPreferences h0 = ZeroPreferences{};
    LearningRateSchedule rate = LearningRateSchedule::constant(0.05);
    RegularizationSchedule gamma = RegularizationSchedule::constant(0.0);
    double alpha = 1.0;
    RewardModel reward = RewardModel::gaussian();
    MeanSampling q_sampling = GaussianMeans{};
    bool record_distance = false;
    bool common_noise = false;

    // Throws ValidationError on any violated invariant.
    void validate() const;

    std::vector<double> initial_preferences() const;
};

struct RunResult {
    std::vector<double> q_star;
    std::vector<std::size_t> arms;
    std::vector<double> rewards;
    std::vector<double> rel_observed;  // R_t / max q*
    std::vector<double> rel_expected;  // q*(A_t) / max q*
    std::vector<double> distance;      // |H_{t+1} - H*|^2, empty unless recorded
    std::vector<double> h_final;
};

struct MetricSeries {
    std::vector<double> mean;
    std::vector<double> std_error;
};

/// Per-step aggregates over runs. Entry i describes the (i+1)-th update: the reward
/// drawn at step i and the distance of the preferences after that update.
struct AggregateSeries {
    std::string label;
    std::size_t runs = 0;
    MetricSeries rel_observed;
    MetricSeries rel_expected;
    MetricSeries reward;
    MetricSeries distance;  // empty unless record_distance

    bool has_distance() const noexcept { return !distance.mean.empty(); }
    std::size_t steps() const noexcept { return rel_observed.mean.size(); }
};

struct DistanceSeries {
    std::vector<std::size_t> t;
    std::vector<double> d;          // mean over runs of |H_t - H*|^2
    std::vector<double> std_error;
    std::vector<double> t_times_d;
    // Standard error of the paired per-run difference d(t_i) - d(t_{i-1}); 0 for i = 0.
    std::vector<double> diff_std_error;
    std::size_t runs = 0;
};

struct ExperimentSet {
    std::string name;
    std::vector<ExperimentConfig> variants;
};

// 0 selects the hardware concurrency.
struct ExecutionOptions {
    unsigned threads = 0;
};

BanditInstance shared_instance(std::uint64_t master_seed, std::size_t run_index,
                               const MeanSampling& q_sampling, std::size_t k,
                               const RewardModel& reward = RewardModel::gaussian());

// 64-bit digest of the run's arm means, for pairing checks between configurations.
std::uint64_t instance_digest(const ExperimentConfig& config, std::size_t run_index);

RunResult run_single(const ExperimentConfig& config, std::size_t run_index);

AggregateSeries run_experiment(const ExperimentConfig& config, ExecutionOptions exec = {});

// Distances at the given update counts (0 meaning H_0). Needs constant gamma and mu > 0
// on every run's instance.
DistanceSeries distance_at(const ExperimentConfig& config, std::vector<std::size_t> checkpoints,
                           ExecutionOptions exec = {});

// distance_at on a geometric grid of about 100 points in [1, steps], plus t = 0.
DistanceSeries estimate_distance_series(const ExperimentConfig& config,
                                        ExecutionOptions exec = {});

std::vector<std::size_t> geometric_grid(std::size_t horizon, std::size_t points = 100);

// distance_at for a linear-decay learning rate; checkpoints are sorted and deduplicated.
DistanceSeries rate_study(const ExperimentConfig& config, std::vector<std::size_t> checkpoints,
                          ExecutionOptions exec = {});

const std::vector<std::string>& figure_preset_names();

// Throws ValidationError listing the known presets for an unknown name.
ExperimentSet figure_preset(const std::string& name);

}  // namespace regpg
