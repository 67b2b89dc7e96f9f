#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "regpg/analytics.hpp"
#include "regpg/errors.hpp"

using namespace regpg;

namespace {

// Objective written out independently of the library, for the grid oracle.
double reference_objective(const std::vector<double>& q, double gamma, const std::array<double, 3>& h) {
    const double m = std::max({h[0], h[1], h[2]});
    double z = 0.0, num = 0.0, norm = 0.0;
    for (int a = 0; a < 3; ++a) {
        const double e = std::exp(h[a] - m);
        z += e;
        num += q[a] * e;
        norm += h[a] * h[a];
    }
    return num / z - 0.5 * gamma * norm;
}

// Dense grid over [-3, 3]^3, then two refinements around the incumbent.
std::array<double, 3> grid_argmax(const std::vector<double>& q, double gamma) {
    std::array<double, 3> center{0.0, 0.0, 0.0};
    double half = 3.0;
    int points = 121;
    for (int level = 0; level < 3; ++level) {
        const double step = 2.0 * half / (points - 1);
        std::array<double, 3> best = center;
        double best_value = -INFINITY;
        std::array<double, 3> h{};
        for (int i = 0; i < points; ++i) {
            h[0] = center[0] - half + i * step;
            for (int j = 0; j < points; ++j) {
                h[1] = center[1] - half + j * step;
                for (int l = 0; l < points; ++l) {
                    h[2] = center[2] - half + l * step;
                    const double v = reference_objective(q, gamma, h);
                    if (v > best_value) {
                        best_value = v;
                        best = h;
                    }
                }
            }
        }
        center = best;
        half = step;
        points = 81;
    }
    return center;
}

double norm2(const std::vector<double>& v) {
    return std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
}

}  // namespace

TEST(Objective, ClosedFormValues) {
    EXPECT_DOUBLE_EQ(objective(ExactModel({3.5}, 0.0), std::vector<double>{12.0}), 3.5);
    EXPECT_NEAR(objective(ExactModel({1.0, 2.0, 6.0}, 7.0), std::vector<double>{0, 0, 0}), 3.0, 1e-15);
    const double ln3 = std::log(3.0);
    EXPECT_NEAR(objective(ExactModel({1.0, 2.0}, 2.0), std::vector<double>{0.0, ln3}),
                1.75 - ln3 * ln3, 1e-14);
}

TEST(Objective, ScalarProductIdentity) {
    std::mt19937_64 gen(21);
    std::normal_distribution<double> n(0.0, 2.0);
    for (int trial = 0; trial < 500; ++trial) {
        const double alpha = 0.5 + (trial % 4) * 0.5;
        const ExactModel m({n(gen), n(gen), n(gen), n(gen)}, std::abs(n(gen)), alpha);
        std::vector<double> h{n(gen), n(gen), n(gen), n(gen)};
        const auto p = softmax_policy(h, alpha);
        const double expected =
            std::inner_product(m.q_star.begin(), m.q_star.end(), p.probs.begin(), 0.0) -
            0.5 * m.gamma * norm2(h);
        EXPECT_NEAR(objective(m, h), expected, 1e-14 * (1.0 + std::abs(expected)));
    }
}

TEST(Objective, DimensionMismatch) {
    const ExactModel m({1.0, 2.0}, 1.0);
    EXPECT_THROW(objective(m, std::vector<double>{0.0}), ValidationError);
    EXPECT_THROW(exact_gradient(m, std::vector<double>{0.0, 0.0, 0.0}), ValidationError);
    EXPECT_THROW(hessian_quadratic_form(m, std::vector<double>{0.0, 0.0}, std::vector<double>{1.0}),
                 ValidationError);
}

TEST(ExactModel, RejectsInvalid) {
    EXPECT_THROW(ExactModel({}, 1.0), ValidationError);
    EXPECT_THROW(ExactModel({1.0, NAN}, 1.0), ValidationError);
    EXPECT_THROW(ExactModel({1.0}, -1.0), ValidationError);
    EXPECT_THROW(ExactModel({1.0}, 1.0, 0.0), ValidationError);
}

TEST(Gradient, ZeroForEqualMeansAtOrigin) {
    for (double g : exact_gradient(ExactModel({2.0, 2.0, 2.0}, 3.0), std::vector<double>(3, 0.0))) {
        EXPECT_EQ(g, 0.0);
    }
}

TEST(Gradient, UniformPointClosedForm) {
    const std::vector<double> q{1.0, 2.0, 4.0, -3.0};
    const double mean = 1.0;
    const auto g = exact_gradient(ExactModel(q, 0.7), std::vector<double>(4, 0.0));
    for (std::size_t b = 0; b < q.size(); ++b) EXPECT_NEAR(g[b], (q[b] - mean) / 4.0, 1e-15);
}

TEST(Gradient, MatchesCentralDifferences) {
    std::mt19937_64 gen(31);
    std::normal_distribution<double> n(0.0, 1.5);
    std::uniform_real_distribution<double> gamma(0.0, 10.0);
    const double step = 1e-5;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 2 + trial % 7;
        std::vector<double> q(k), h(k);
        for (auto& x : q) x = 4.0 + n(gen);
        for (auto& x : h) x = n(gen);
        const ExactModel m(q, gamma(gen), 0.5 + 0.25 * (trial % 7));
        const auto exact = exact_gradient(m, h);
        double err = 0.0, scale = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            auto hp = h, hm = h;
            hp[a] += step;
            hm[a] -= step;
            const double fd = (objective(m, hp) - objective(m, hm)) / (2.0 * step);
            err = std::max(err, std::abs(fd - exact[a]));
            scale = std::max(scale, std::abs(exact[a]));
        }
        EXPECT_LE(err / (1.0 + scale), 1e-6) << "trial " << trial;
    }
}

TEST(Hessian, PenaltyOnlyForEqualMeans) {
    const ExactModel m({3.0, 3.0, 3.0}, 1.0, 1.4);
    const std::vector<double> h{0.5, -2.0, 1.0}, dh{1.0, 2.0, -0.5};
    EXPECT_NEAR(hessian_quadratic_form(m, h, dh), -norm2(dh), 1e-13);
}

TEST(Hessian, MatchesSecondDifferences) {
    std::mt19937_64 gen(41);
    std::normal_distribution<double> n(0.0, 1.0);
    const double step = 1e-4;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 2 + trial % 5;
        std::vector<double> q(k), h(k), dh(k);
        for (auto& x : q) x = 4.0 + n(gen);
        for (auto& x : h) x = n(gen);
        for (auto& x : dh) x = n(gen);
        const ExactModel m(q, 0.1 * (trial % 20), 1.0 + 0.1 * (trial % 5));
        auto hp = h, hm = h;
        for (std::size_t a = 0; a < k; ++a) {
            hp[a] += step * dh[a];
            hm[a] -= step * dh[a];
        }
        const double fd = (objective(m, hp) - 2.0 * objective(m, h) + objective(m, hm)) / (step * step);
        const double exact = hessian_quadratic_form(m, h, dh);
        EXPECT_LE(std::abs(fd - exact) / (1.0 + std::abs(exact)), 1e-4) << "trial " << trial;
    }
}

TEST(Hessian, ConcaveWhenMuPositive) {
    std::mt19937_64 gen(43);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> q(5), h(5), dh(5);
        for (auto& x : q) x = n(gen);
        for (auto& x : h) x = 3.0 * n(gen);
        for (auto& x : dh) x = n(gen);
        const double c = *std::max_element(q.begin(), q.end()) - *std::min_element(q.begin(), q.end());
        const ExactModel m(q, c + 0.01 + 0.1 * (trial % 10));
        ASSERT_GT(m.mu(), 0.0);
        const double v = hessian_quadratic_form(m, h, dh);
        ASSERT_LT(v, 0.0);
        ASSERT_LE(v, (m.c_star() - m.gamma) * norm2(dh) + 1e-9);
    }
}

TEST(TheoryConstants, Definitions) {
    const std::vector<double> q{1.0, 4.0};
    const auto t = theory_constants(q, 5.0);
    EXPECT_DOUBLE_EQ(t.c_star, 3.0);
    EXPECT_DOUBLE_EQ(t.mu, 2.0);
    EXPECT_DOUBLE_EQ(t.c_m, 17.0);
    EXPECT_DOUBLE_EQ(t.reward_coeff, 8.0 * 2.0 * 17.0);
    EXPECT_DOUBLE_EQ(t.h_coeff, 2.0 * 25.0);

    const std::vector<double> flat{2.0, 2.0, 2.0};
    const auto f = theory_constants(flat, 0.3);
    EXPECT_DOUBLE_EQ(f.c_star, 0.0);
    EXPECT_DOUBLE_EQ(f.mu, 0.3);

    const std::vector<double> q02{0.0, 2.0};
    EXPECT_DOUBLE_EQ(theory_constants(q02, 1.0).c_m, 5.0);
    EXPECT_DOUBLE_EQ(theory_constants(q02, 1.0, RewardModel::uniform(6.0)).c_m, 4.0 + 3.0);
}

TEST(Solver, SingleArmAndEqualMeans) {
    const auto one = solve_optimum(ExactModel({2.5}, 0.8));
    EXPECT_NEAR(one.h_star[0], 0.0, 1e-10);
    EXPECT_NEAR(one.value, 2.5, 1e-12);
    EXPECT_TRUE(one.unique_certified);

    const auto eq = solve_optimum(ExactModel({1.0, 1.0, 1.0, 1.0}, 0.1));
    for (double h : eq.h_star) EXPECT_NEAR(h, 0.0, 1e-10);
}

TEST(Solver, MatchesGridRefinementOracle) {
    const std::vector<double> q{1.0, 2.0, 4.0};
    const ExactModel m(q, 5.0);
    ASSERT_DOUBLE_EQ(m.mu(), 2.0);
    const auto r = solve_optimum(m, 1e-12, 500000, 8);
    EXPECT_TRUE(r.unique_certified);
    EXPECT_LE(r.grad_norm, 1e-12);
    const auto oracle = grid_argmax(q, 5.0);
    for (int a = 0; a < 3; ++a) EXPECT_NEAR(r.h_star[a], oracle[a], 1e-4) << "arm " << a;
    EXPECT_NEAR(r.value, objective(m, r.h_star), 1e-15);
}

TEST(Solver, UncertifiedRegimeUsesMultistart) {
    const std::vector<double> q{1.0, 2.0, 4.0};
    const ExactModel m(q, 0.05);
    const auto r = solve_optimum(m, 1e-9, 2000000, 8);
    EXPECT_FALSE(r.unique_certified);
    EXPECT_LE(r.grad_norm, 1e-9);
    // Best arm receives the largest preference and the value is close to max q.
    EXPECT_GT(r.h_star[2], r.h_star[1]);
    EXPECT_GT(r.value, 3.5);
    EXPECT_LT(r.value, 4.0);
}

TEST(Solver, ReportsExhaustedBudget) {
    try {
        solve_optimum(ExactModel({1.0, 2.0, 4.0}, 5.0), 1e-14, 2, 1);
        FAIL() << "expected a convergence failure";
    } catch (const ConvergenceError& e) {
        EXPECT_EQ(e.last_iterate().size(), 3u);
        EXPECT_GT(e.grad_norm(), 1e-14);
    }
    EXPECT_THROW(solve_optimum(ExactModel({1.0}, 1.0), 0.0, 10, 1), ValidationError);
}

TEST(OptimalValue, ZeroGammaIsSupremum) {
    const std::vector<double> q{1.0, 2.0};
    EXPECT_DOUBLE_EQ(optimal_value(q, 0.0), 2.0);
}

TEST(OptimalValue, MonotoneAndBoundedBelowByMean) {
    const std::vector<double> q{1.0, 2.0, 4.0, 0.5};
    const double mean = 1.875;
    double previous = INFINITY;
    for (double g : {0.0, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0}) {
        const double v = optimal_value(q, g);
        EXPECT_LE(v, previous + 1e-12) << "gamma " << g;
        EXPECT_GE(v, mean - 1e-12);
        previous = v;
    }
}

TEST(AlphaMap, IdentityAndSymmetricCases) {
    const std::vector<double> q{1.0, 2.0, 4.0};
    const auto same = alpha_critical_map_check(q, 5.0, 1.0, 1e-9);
    EXPECT_TRUE(same.pass);
    EXPECT_LE(same.difference, 1e-12);

    const std::vector<double> flat{3.0, 3.0};
    const auto f = alpha_critical_map_check(flat, 1.0, 3.0, 1e-9);
    EXPECT_TRUE(f.pass);
    EXPECT_LE(f.difference, 1e-12);
}

TEST(AlphaMap, RescaledCriticalPoint) {
    const std::vector<double> q{1.0, 2.0, 4.0};
    const auto r = alpha_critical_map_check(q, 16.0, 2.0, 1e-6);
    EXPECT_TRUE(r.pass);
    EXPECT_LE(r.difference, 1e-6);
    // Stationarity of the alpha model at h_scaled, checked directly.
    const auto g = exact_gradient(ExactModel(q, 16.0, 2.0), r.h_scaled);
    for (double x : g) EXPECT_LE(std::abs(x), 1e-10);
}

TEST(AlphaMap, RequiresCertifiedOptima) {
    const std::vector<double> q{1.0, 2.0, 4.0};
    EXPECT_THROW(alpha_critical_map_check(q, 8.0, 2.0, 1e-6), PreconditionError);
}
