#pragma once

// Closed-form analysis of the regularized objective
//
//     L(H) = <q*, Pi^alpha_H> - (gamma / 2) |H|^2
//
// with its gradient, Hessian quadratic form, the curvature constants that certify a
// unique maximizer, and a deterministic ascent solver for that maximizer.

#include <cstddef>
#include <span>
#include <vector>

#include "regpg/bandit.hpp"

namespace regpg {

struct ExactModel {
    std::vector<double> q_star;
    double gamma = 0.0;
    double alpha = 1.0;

    ExactModel() = default;
    ExactModel(std::vector<double> means, double gamma, double alpha = 1.0);

    std::size_t arms() const noexcept { return q_star.size(); }

    // max q* - min q*
    double c_star() const;

    // gamma - alpha^2 c_star. Positive values certify strict concavity.
    double mu() const;
};

struct OptimumResult {
    std::vector<double> h_star;
    double value = 0.0;
    double grad_norm = 0.0;  // sup-norm of the exact gradient at h_star
    bool unique_certified = false;
    std::size_t iterations = 0;
};

struct TheoryConstants {
    double c_star = 0.0;
    double mu = 0.0;
    double c_m = 0.0;
    // E|g|^2 <= reward_coeff + h_coeff * |H|^2 with reward_coeff = 8 k C_m, h_coeff = 2 gamma^2
    double reward_coeff = 0.0;
    double h_coeff = 0.0;

    double second_moment_bound(double h_norm_squared) const {
        return reward_coeff + h_coeff * h_norm_squared;
    }
};

struct SolverOptions {
    double tol = 1e-10;
    std::size_t max_iter = 500000;
    // Extra low-discrepancy starting points used when uniqueness is not certified.
    std::size_t multistart = 8;
};

double objective(const ExactModel& model, std::span<const double> h);

// grad(b) = alpha Pi(b) (q(b) - <q, Pi>) - gamma h(b)
std::vector<double> exact_gradient(const ExactModel& model, std::span<const double> h);

/// Second derivative of L at h in direction dh, built from the second derivatives of
/// the softmax:
///   d2 Pi(A) / dH(a) dH(b) = alpha^2 Pi(A) [(1{a=A} - Pi(a)) (1{b=A} - Pi(b))
///                                          - Pi(a) (1{a=b} - Pi(b))]
/// contracted with q* and dh, minus gamma |dh|^2.
double hessian_quadratic_form(const ExactModel& model, std::span<const double> h,
                              std::span<const double> dh);

TheoryConstants theory_constants(std::span<const double> q_star, double gamma,
                                 const RewardModel& reward = RewardModel::gaussian(),
                                 double alpha = 1.0);

/// Gradient ascent with Armijo backtracking on the exact gradient, stopping when the
/// sup-norm of the gradient drops below options.tol.
///
/// With mu > 0 one ascent from H = 0 is run and the result is certified unique. Otherwise
/// ascents start from 0, from +-5 e_a for every arm, and from options.multistart Halton
/// points in [-5, 5]^k; the best converged point is returned uncertified.
///
/// Throws ConvergenceError when no ascent meets the tolerance within max_iter.
OptimumResult solve_optimum(const ExactModel& model, const SolverOptions& options = {});

OptimumResult solve_optimum(const ExactModel& model, double tol, std::size_t max_iter,
                            std::size_t multistart);

/// V(gamma) = max_H L_gamma(H). For gamma = 0 the supremum max q* is returned; it is
/// approached but never attained.
double optimal_value(std::span<const double> q_star, double gamma,
                     const SolverOptions& options = {});

struct CriticalMapReport {
    std::vector<double> h_scaled;    // optimum of the alpha model at gamma
    std::vector<double> h_original;  // optimum of the alpha = 1 model at gamma / alpha^2
    double difference = 0.0;         // |alpha h_scaled - h_original|_2
    double tol = 0.0;
    bool pass = false;
};

/// Both models share stationarity equations under G = alpha H, so their unique optima
/// satisfy alpha H_scaled = H_original. Requires gamma / alpha^2 > c_star.
CriticalMapReport alpha_critical_map_check(std::span<const double> q_star, double gamma,
                                           double alpha, double tol);

}  // namespace regpg
