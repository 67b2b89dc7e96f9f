#pragma once

// Softmax policy, arm and reward sampling, and the regularized policy-gradient update.
//
// All functions are pure: random draws are passed in by the caller, so a step is a
// deterministic function of (state, instance, step sizes, draws). Arms are 0-based.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace regpg {

struct PolicyDistribution {
    std::vector<double> probs;

    std::size_t size() const noexcept { return probs.size(); }
    double operator[](std::size_t a) const { return probs[a]; }
};

enum class RewardKind { Gaussian, Bernoulli, Uniform };

/// Per-arm reward law with a prescribed mean. Every kind has a finite second moment.
///
/// - Gaussian: mean + z with z ~ N(0, 1). The noise draw is a standard normal.
/// - Bernoulli: shift + scale * [u < p] with p = (mean - shift) / scale. The noise draw is
///   uniform in [0, 1); means must satisfy shift <= mean <= shift + scale.
/// - Uniform: mean + width * (u - 1/2). The noise draw is uniform in [0, 1).
struct RewardModel {
    RewardKind kind = RewardKind::Gaussian;
    double shift = 0.0;
    double scale = 1.0;
    double width = 1.0;

    static RewardModel gaussian() { return {}; }
    static RewardModel bernoulli(double shift, double scale);
    static RewardModel uniform(double width);

    bool uses_normal_noise() const noexcept { return kind == RewardKind::Gaussian; }

    // E[R^2] for an arm with the given mean.
    double second_moment(double mean) const;

    double sample(double mean, double noise) const;

    // Throws ValidationError if `mean` is not admissible for this law.
    void check_mean(double mean) const;
};

struct BanditInstance {
    std::vector<double> q_star;
    RewardModel reward;

    BanditInstance() = default;
    BanditInstance(std::vector<double> means, RewardModel model = RewardModel::gaussian());

    std::size_t arms() const noexcept { return q_star.size(); }
    double best_mean() const;
    double worst_mean() const;
};

/// Iterate of the stochastic algorithm. The baseline is the mean of the rewards seen
/// strictly before the current step; it is 0 before the first reward.
struct AgentState {
    std::vector<double> h;
    std::size_t t = 0;
    double reward_sum = 0.0;
    double alpha = 1.0;

    AgentState() = default;
    explicit AgentState(std::vector<double> preferences, double alpha = 1.0);

    double baseline() const noexcept {
        return t == 0 ? 0.0 : reward_sum / static_cast<double>(t);
    }
};

struct Draws {
    double uniform = 0.0;  // arm selection, in [0, 1)
    double noise = 0.0;    // reward noise, law given by RewardModel
};

struct StepOutcome {
    std::size_t arm = 0;
    double reward = 0.0;
    double baseline = 0.0;
    std::vector<double> gradient;
    PolicyDistribution policy;
};

/// probs(a) = exp(alpha h(a)) / sum_b exp(alpha h(b)), evaluated after subtracting the
/// maximum so that |alpha h| up to ~700 does not overflow.
PolicyDistribution softmax_policy(std::span<const double> h, double alpha = 1.0);

/// Inverse CDF lookup: the arm a with u in [P(<a), P(<=a)). Rounding in the final
/// cumulative sum is absorbed by the last arm.
std::size_t sample_arm(const PolicyDistribution& policy, double u);

double sample_reward(const BanditInstance& instance, std::size_t arm, double noise);

/// g(a) = alpha (R - Rbar) ([a == arm] - Pi^alpha_H(a)) - gamma H(a), with Rbar the
/// state's baseline.
std::vector<double> gradient_estimate(const AgentState& state, std::size_t arm, double reward,
                                      double gamma);

// Same, reusing an already evaluated policy for state.h.
std::vector<double> gradient_estimate(const AgentState& state, const PolicyDistribution& policy,
                                      std::size_t arm, double reward, double gamma);

/// One step H_{t+1} = H_t + rho g_t. Throws DivergenceError (carrying state.t) when the
/// new preferences are not finite.
std::pair<AgentState, StepOutcome> policy_gradient_step(AgentState state,
                                                        const BanditInstance& instance,
                                                        double rho, double gamma, Draws draws);

}  // namespace regpg
