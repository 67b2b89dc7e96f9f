#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "regpg/bandit.hpp"
#include "regpg/errors.hpp"
#include "regpg/rng.hpp"

using namespace regpg;

namespace {

std::vector<double> probs(std::vector<double> h, double alpha = 1.0) {
    return softmax_policy(h, alpha).probs;
}

}  // namespace

TEST(Softmax, UniformForEqualPreferences) {
    const auto p = probs({0.0, 0.0});
    EXPECT_DOUBLE_EQ(p[0], 0.5);
    EXPECT_DOUBLE_EQ(p[1], 0.5);
}

TEST(Softmax, LogThreeGivesThreeQuarters) {
    const auto p = probs({std::log(3.0), 0.0});
    EXPECT_NEAR(p[0], 0.75, 1e-15);
    EXPECT_NEAR(p[1], 0.25, 1e-15);
}

TEST(Softmax, AlphaScalesPreferences) {
    const auto a = probs({1.0, 0.0}, 2.0);
    const auto b = probs({2.0, 0.0}, 1.0);
    EXPECT_NEAR(a[0], b[0], 1e-14);
    EXPECT_NEAR(a[1], b[1], 1e-14);
}

TEST(Softmax, NoOverflowForLargePreferences) {
    const auto p = probs({700.0, 0.0, -700.0});
    EXPECT_NEAR(p[0], 1.0, 1e-15);
    EXPECT_GE(p[2], 0.0);
}

TEST(Softmax, RejectsNonFiniteAndBadAlpha) {
    EXPECT_THROW(probs({0.0, NAN}), ValidationError);
    EXPECT_THROW(probs({0.0, INFINITY}), ValidationError);
    EXPECT_THROW(probs({0.0, 1.0}, 0.0), ValidationError);
    EXPECT_THROW(probs({0.0, 1.0}, -1.0), ValidationError);
}

TEST(SoftmaxProperty, NormalizedPositiveShiftInvariantAlphaConsistent) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> entry(-50.0, 50.0);
    std::uniform_real_distribution<double> shift(-20.0, 20.0);
    std::uniform_real_distribution<double> alpha_dist(0.25, 3.0);
    std::uniform_int_distribution<int> arms(1, 12);
    for (int trial = 0; trial < 10000; ++trial) {
        std::vector<double> h(arms(gen));
        for (auto& x : h) x = entry(gen);
        const auto p = probs(h);
        EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
        for (double v : p) ASSERT_GT(v, 0.0);

        const double c = shift(gen);
        auto shifted = h;
        for (auto& x : shifted) x += c;
        const auto ps = probs(shifted);
        for (std::size_t a = 0; a < h.size(); ++a) ASSERT_NEAR(ps[a], p[a], 1e-14);

        const double alpha = alpha_dist(gen);
        auto scaled = h;
        for (auto& x : scaled) x *= alpha;
        const auto pa = probs(h, alpha);
        const auto pb = probs(scaled);
        for (std::size_t a = 0; a < h.size(); ++a) ASSERT_NEAR(pa[a], pb[a], 1e-14);
    }
}

TEST(SampleArm, InverseCdfPartition) {
    EXPECT_EQ(sample_arm({{0.5, 0.5}}, 0.25), 0u);
    EXPECT_EQ(sample_arm({{0.5, 0.5}}, 0.75), 1u);
    EXPECT_EQ(sample_arm({{0.2, 0.3, 0.5}}, 0.49), 1u);
    EXPECT_EQ(sample_arm({{0.2, 0.3, 0.5}}, 0.0), 0u);
    EXPECT_EQ(sample_arm({{0.2, 0.3, 0.5}}, 0.2), 1u);
    EXPECT_EQ(sample_arm({{0.2, 0.3, 0.5}}, std::nextafter(1.0, 0.0)), 2u);
}

TEST(SampleArm, RejectsOutOfRangeUniform) {
    EXPECT_THROW(sample_arm({{0.5, 0.5}}, 1.0), ValidationError);
    EXPECT_THROW(sample_arm({{0.5, 0.5}}, -0.1), ValidationError);
}

TEST(SampleArm, IndicatorResidualHasZeroMean) {
    const std::vector<double> h{1.0, -0.5, 0.3, 2.0};
    const auto policy = softmax_policy(h);
    StreamRng rng(stream_key(9, 0, StreamId::ActionUniforms));
    const int n = 100000;
    std::vector<double> count(h.size(), 0.0);
    for (int i = 0; i < n; ++i) count[sample_arm(policy, rng.uniform())] += 1.0;
    for (std::size_t a = 0; a < h.size(); ++a) {
        const double p = policy[a];
        const double se = std::sqrt(p * (1.0 - p) / n);
        EXPECT_LE(std::abs(count[a] / n - p), 4.0 * se) << "arm " << a;
    }
}

TEST(SampleReward, GaussianIsMeanPlusNoise) {
    const BanditInstance inst({4.0, 1.0});
    EXPECT_DOUBLE_EQ(sample_reward(inst, 0, 0.0), 4.0);
    EXPECT_DOUBLE_EQ(sample_reward(inst, 0, 1.5), 5.5);
    EXPECT_THROW(sample_reward(inst, 2, 0.0), std::out_of_range);
}

TEST(SampleReward, EmpiricalMeanMatchesArmMean) {
    const BanditInstance inst({2.0});
    StreamRng rng(stream_key(5, 0, StreamId::RewardNoise));
    double sum = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) sum += sample_reward(inst, 0, rng.normal());
    EXPECT_NEAR(sum / n, 2.0, 0.005);
}

TEST(SampleReward, OtherKindsHaveArmMean) {
    StreamRng rng(stream_key(6, 0, StreamId::RewardNoise));
    const int n = 400000;
    {
        // shift + scale * Bernoulli(p): mean 1.5 with shift 1, scale 2 means p = 0.25
        const BanditInstance inst({1.5}, RewardModel::bernoulli(1.0, 2.0));
        double sum = 0.0, sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = sample_reward(inst, 0, rng.uniform());
            EXPECT_TRUE(r == 1.0 || r == 3.0);
            sum += r;
            sq += r * r;
        }
        EXPECT_NEAR(sum / n, 1.5, 0.01);
        EXPECT_NEAR(sq / n, inst.reward.second_moment(1.5), 0.03);
    }
    {
        const BanditInstance inst({-2.0}, RewardModel::uniform(3.0));
        double sum = 0.0, sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = sample_reward(inst, 0, rng.uniform());
            EXPECT_GE(r, -3.5);
            EXPECT_LE(r, -0.5);
            sum += r;
            sq += r * r;
        }
        EXPECT_NEAR(sum / n, -2.0, 0.01);
        EXPECT_NEAR(sq / n, 4.0 + 9.0 / 12.0, 0.03);
    }
}

TEST(RewardModel, SecondMomentClosedForms) {
    EXPECT_DOUBLE_EQ(RewardModel::gaussian().second_moment(2.0), 5.0);
    EXPECT_DOUBLE_EQ(RewardModel::uniform(2.0).second_moment(1.0), 1.0 + 4.0 / 12.0);
    // p = 0.5: 0.5 * 0 + 0.5 * 4
    EXPECT_DOUBLE_EQ(RewardModel::bernoulli(0.0, 2.0).second_moment(1.0), 2.0);
}

TEST(RewardModel, RejectsInvalidParameters) {
    EXPECT_THROW(RewardModel::uniform(0.0), ValidationError);
    EXPECT_THROW(RewardModel::bernoulli(0.0, 0.0), ValidationError);
    // Bernoulli means must lie in [shift, shift + scale]
    EXPECT_THROW(BanditInstance({5.0}, RewardModel::bernoulli(0.0, 1.0)), ValidationError);
    EXPECT_THROW(BanditInstance({NAN}), ValidationError);
    EXPECT_THROW(BanditInstance(std::vector<double>{}), ValidationError);
}

TEST(GradientEstimate, HandEvaluatedExamples) {
    AgentState s({0.0, 0.0});
    auto g = gradient_estimate(s, 0, 1.0, 0.0);
    EXPECT_DOUBLE_EQ(g[0], 0.5);
    EXPECT_DOUBLE_EQ(g[1], -0.5);

    AgentState b({1.0, 0.0});
    b.t = 2;
    b.reward_sum = 6.0;  // baseline 3
    g = gradient_estimate(b, 1, 3.0, 0.0);
    EXPECT_DOUBLE_EQ(g[0], 0.0);
    EXPECT_DOUBLE_EQ(g[1], 0.0);
    g = gradient_estimate(b, 1, 3.0, 10.0);
    EXPECT_DOUBLE_EQ(g[0], -10.0);
    EXPECT_DOUBLE_EQ(g[1], 0.0);
}

TEST(GradientEstimate, AlphaFormula) {
    AgentState s({0.3, -0.2, 0.5}, 1.7);
    s.t = 4;
    s.reward_sum = 8.0;
    const double gamma = 0.4, reward = 3.1;
    const auto g = gradient_estimate(s, 2, reward, gamma);
    const auto p = softmax_policy(s.h, 1.7);
    for (std::size_t a = 0; a < 3; ++a) {
        const double ind = a == 2 ? 1.0 : 0.0;
        EXPECT_NEAR(g[a], 1.7 * (reward - 2.0) * (ind - p[a]) - gamma * s.h[a], 1e-15);
    }
}

TEST(Step, ForcedFirstArmHandEvaluated) {
    const BanditInstance inst({1.0, 0.0});
    // u = 0.1 selects arm 0 under the uniform policy, noise 0 gives R = 1
    const auto [next, out] = policy_gradient_step(AgentState({0.0, 0.0}), inst, 0.1, 0.0, {0.1, 0.0});
    EXPECT_EQ(out.arm, 0u);
    EXPECT_DOUBLE_EQ(out.reward, 1.0);
    EXPECT_DOUBLE_EQ(out.baseline, 0.0);
    EXPECT_NEAR(next.h[0], 0.05, 1e-16);
    EXPECT_NEAR(next.h[1], -0.05, 1e-16);
    EXPECT_EQ(next.t, 1u);
    EXPECT_DOUBLE_EQ(next.baseline(), 1.0);
}

TEST(Step, PureDecayWhenRewardEqualsBaseline) {
    const BanditInstance inst({2.0, 2.0});
    AgentState s({1.0, 0.0});
    s.t = 1;
    s.reward_sum = 2.0;
    const auto [next, out] = policy_gradient_step(s, inst, 0.05, 10.0, {0.3, 0.0});
    EXPECT_DOUBLE_EQ(out.reward, out.baseline);
    EXPECT_DOUBLE_EQ(next.h[0], 0.5);
    EXPECT_DOUBLE_EQ(next.h[1], 0.0);

    const auto [same, _] = policy_gradient_step(s, inst, 0.05, 0.0, {0.9, 0.0});
    EXPECT_EQ(same.h, s.h);
}

TEST(Step, UpdateAndBaselineIdentities) {
    const BanditInstance inst({1.0, 3.0, 2.5, -1.0});
    StreamRng u(stream_key(1, 0, StreamId::ActionUniforms));
    StreamRng z(stream_key(1, 0, StreamId::RewardNoise));
    AgentState s({0.2, -0.1, 0.0, 0.4}, 1.3);
    double sum = 0.0;
    for (int n = 0; n < 500; ++n) {
        EXPECT_NEAR(s.baseline(), n == 0 ? 0.0 : sum / n, 1e-12);
        const double rho = 0.02, gamma = 0.3;
        const auto [next, out] = policy_gradient_step(s, inst, rho, gamma, {u.uniform(), z.normal()});
        const auto g = gradient_estimate(s, out.arm, out.reward, gamma);
        ASSERT_EQ(g, out.gradient);
        for (std::size_t a = 0; a < s.h.size(); ++a) ASSERT_EQ(next.h[a], s.h[a] + rho * g[a]);
        sum += out.reward;
        s = next;
    }
}

TEST(Step, DivergenceCarriesStepIndex) {
    const BanditInstance inst({1.0, 2.0});
    AgentState s({1e308, -1e308});
    s.t = 17;
    try {
        policy_gradient_step(s, inst, 1.0, 10.0, {0.5, 0.0});
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        EXPECT_EQ(e.step(), 17u);
    }
}

TEST(Step, RejectsNonPositiveRate) {
    const BanditInstance inst({1.0, 2.0});
    EXPECT_THROW(policy_gradient_step(AgentState({0.0, 0.0}), inst, 0.0, 0.0, {0.5, 0.0}),
                 ValidationError);
    EXPECT_THROW(policy_gradient_step(AgentState({0.0, 0.0}), inst, 0.1, -1.0, {0.5, 0.0}),
                 ValidationError);
}
