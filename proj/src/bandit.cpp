#include "regpg/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "regpg/errors.hpp"

namespace regpg {

namespace {

void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw ValidationError(std::string(what) + " contains a non-finite entry");
        }
    }
}

}  // namespace

RewardModel RewardModel::bernoulli(double shift, double scale) {
    if (!std::isfinite(shift) || !std::isfinite(scale) || scale <= 0.0) {
        throw ValidationError("bernoulli reward needs a finite shift and a positive scale");
    }
    RewardModel m;
    m.kind = RewardKind::Bernoulli;
    m.shift = shift;
    m.scale = scale;
    return m;
}

RewardModel RewardModel::uniform(double width) {
    if (!std::isfinite(width) || width <= 0.0) {
        throw ValidationError("uniform reward needs a positive width");
    }
    RewardModel m;
    m.kind = RewardKind::Uniform;
    m.width = width;
    return m;
}

double RewardModel::second_moment(double mean) const {
    switch (kind) {
        case RewardKind::Gaussian:
            return 1.0 + mean * mean;
        case RewardKind::Bernoulli: {
            const double p = (mean - shift) / scale;
            const double hi = shift + scale;
            return (1.0 - p) * shift * shift + p * hi * hi;
        }
        case RewardKind::Uniform:
            return mean * mean + width * width / 12.0;
    }
    return 0.0;
}

void RewardModel::check_mean(double mean) const {
    if (!std::isfinite(mean)) {
        throw ValidationError("arm mean must be finite");
    }
    if (kind == RewardKind::Bernoulli) {
        const double p = (mean - shift) / scale;
        if (p < 0.0 || p > 1.0) {
            throw ValidationError("arm mean " + std::to_string(mean) +
                                  " outside the support of the bernoulli reward");
        }
    }
}

double RewardModel::sample(double mean, double noise) const {
    switch (kind) {
        case RewardKind::Gaussian:
            return mean + noise;
        case RewardKind::Bernoulli:
            return noise < (mean - shift) / scale ? shift + scale : shift;
        case RewardKind::Uniform:
            return mean + width * (noise - 0.5);
    }
    return mean;
}

BanditInstance::BanditInstance(std::vector<double> means, RewardModel model)
    : q_star(std::move(means)), reward(model) {
    if (q_star.empty()) {
        throw ValidationError("a bandit needs at least one arm");
    }
    for (double q : q_star) reward.check_mean(q);
}

double BanditInstance::best_mean() const {
    return *std::max_element(q_star.begin(), q_star.end());
}

double BanditInstance::worst_mean() const {
    return *std::min_element(q_star.begin(), q_star.end());
}

AgentState::AgentState(std::vector<double> preferences, double alpha_scale)
    : h(std::move(preferences)), alpha(alpha_scale) {
    if (h.empty()) throw ValidationError("preference vector must not be empty");
    require_finite(h, "preference vector");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw ValidationError("alpha must be positive and finite");
    }
}

PolicyDistribution softmax_policy(std::span<const double> h, double alpha) {
    if (h.empty()) throw ValidationError("preference vector must not be empty");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw ValidationError("alpha must be positive and finite");
    }
    require_finite(h, "preference vector");

    PolicyDistribution out;
    out.probs.resize(h.size());
    const double top = alpha * *std::max_element(h.begin(), h.end());
    double total = 0.0;
    for (std::size_t a = 0; a < h.size(); ++a) {
        out.probs[a] = std::exp(alpha * h[a] - top);
        total += out.probs[a];
    }
    for (double& p : out.probs) p /= total;
    return out;
}

std::size_t sample_arm(const PolicyDistribution& policy, double u) {
    if (!(u >= 0.0 && u < 1.0)) {
        throw ValidationError("arm selection draw must lie in [0, 1)");
    }
    double upper = 0.0;
    const std::size_t last = policy.size() - 1;
    for (std::size_t a = 0; a < last; ++a) {
        upper += policy.probs[a];
        if (u < upper) return a;
    }
    return last;
}

double sample_reward(const BanditInstance& instance, std::size_t arm, double noise) {
    if (arm >= instance.arms()) {
        throw std::out_of_range("arm index " + std::to_string(arm) + " out of range for " +
                                std::to_string(instance.arms()) + " arms");
    }
    return instance.reward.sample(instance.q_star[arm], noise);
}

std::vector<double> gradient_estimate(const AgentState& state, const PolicyDistribution& policy,
                                      std::size_t arm, double reward, double gamma) {
    const std::size_t k = state.h.size();
    if (policy.size() != k) throw ValidationError("policy and preference sizes differ");
    if (arm >= k) throw std::out_of_range("arm index out of range");

    const double advantage = state.alpha * (reward - state.baseline());
    std::vector<double> g(k);
    for (std::size_t a = 0; a < k; ++a) {
        const double indicator = a == arm ? 1.0 : 0.0;
        g[a] = advantage * (indicator - policy.probs[a]) - gamma * state.h[a];
    }
    return g;
}

std::vector<double> gradient_estimate(const AgentState& state, std::size_t arm, double reward,
                                      double gamma) {
    return gradient_estimate(state, softmax_policy(state.h, state.alpha), arm, reward, gamma);
}

std::pair<AgentState, StepOutcome> policy_gradient_step(AgentState state,
                                                        const BanditInstance& instance,
                                                        double rho, double gamma, Draws draws) {
    if (!(rho > 0.0)) throw ValidationError("learning rate must be positive");
    if (!(gamma >= 0.0)) throw ValidationError("regularization must be nonnegative");
    if (state.h.size() != instance.arms()) {
        throw ValidationError("preference vector length differs from the arm count");
    }

    StepOutcome out;
    out.policy = softmax_policy(state.h, state.alpha);
    out.arm = sample_arm(out.policy, draws.uniform);
    out.reward = sample_reward(instance, out.arm, draws.noise);
    out.baseline = state.baseline();
    out.gradient = gradient_estimate(state, out.policy, out.arm, out.reward, gamma);

    for (std::size_t a = 0; a < state.h.size(); ++a) {
        state.h[a] = state.h[a] + rho * out.gradient[a];
        if (!std::isfinite(state.h[a])) {
            throw DivergenceError(state.t, "preferences became non-finite at step " +
                                               std::to_string(state.t));
        }
    }
    state.reward_sum += out.reward;
    ++state.t;
    return {std::move(state), std::move(out)};
}

}  // namespace regpg
