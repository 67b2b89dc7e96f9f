#pragma once

// Executable checks of the statistical and analytic properties of the algorithm.
// Every check is deterministic given its seed and returns a CheckReport.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "regpg/analytics.hpp"
#include "regpg/bandit.hpp"

namespace regpg {

struct CheckReport {
    std::string name;
    bool pass = false;
    double statistic = 0.0;
    double threshold = 0.0;
    std::string detail;
};

/// Samples n (arm, reward) pairs at frozen H and baseline, forms the policy-gradient
/// estimate and compares its empirical mean with exact_gradient coordinate by
/// coordinate. statistic = max_a |mean(a) - exact(a)| / SE(a); passes iff it is at most
/// se_multiplier. Coordinates with zero sample variance must match to 1e-12.
CheckReport check_unbiasedness(const ExactModel& model, std::span<const double> h, double baseline,
                               std::size_t n_samples, std::uint64_t seed,
                               double se_multiplier = 4.0,
                               const RewardModel& reward = RewardModel::gaussian());

/// Monte Carlo E|g|^2 at frozen H and baseline against 8 k C_m + 2 gamma^2 |H|^2. The
/// bound assumes baseline^2 <= C_m, which is how the running mean of rewards behaves.
CheckReport check_gradient_second_moment(const ExactModel& model, std::span<const double> h,
                                         std::size_t n_samples, std::uint64_t seed,
                                         double baseline,
                                         const RewardModel& reward = RewardModel::gaussian());

// Baseline defaults to the mean arm reward under the uniform policy.
CheckReport check_gradient_second_moment(const ExactModel& model, std::span<const double> h,
                                         std::size_t n_samples, std::uint64_t seed);

/// (<x, Pi> - x_l)^2 <= 2 |x|^2 on random x in [-10, 10]^k, random simplex points Pi and
/// every l, k drawn from 2..20. statistic = largest lhs - rhs seen.
CheckReport check_mean_range_bound(std::size_t n_cases, std::uint64_t seed);

/// prod_{j = t_start}^{t_start + horizon} (1 - rho_j xi) with rho_j = beta1 / (1 + beta2 j),
/// in log space. beta2 = 0 gives a constant rate. Passes iff the product is below 1e-6
/// and does not exceed exp(-xi sum rho_j). statistic and threshold are natural logs.
/// Throws PreconditionError unless every factor lies in (0, 1).
CheckReport check_product_lemma(double beta1, double beta2, double xi, std::size_t t_start,
                                std::size_t horizon);

/// Monte Carlo E[max - min] of k i.i.d. standard normals. Passes iff within `tolerance`
/// of `target` (defaults: 3.08 and 0.03, the k = 10 value).
CheckReport estimate_c_star_avg(std::size_t k, std::size_t n_samples, std::uint64_t seed,
                                double target = 3.08, double tolerance = 0.03);

// exact_gradient against central differences of objective (step 1e-5) on random models.
CheckReport check_gradient_fd(std::size_t n_cases, std::uint64_t seed, double rel_tol = 1e-6);

// hessian_quadratic_form against second differences of objective (step 1e-4).
CheckReport check_hessian_fd(std::size_t n_cases, std::uint64_t seed, double rel_tol = 1e-4);

// hessian_quadratic_form <= (c_star - gamma) |dh|^2 + slack at alpha = 1.
CheckReport check_hessian_bound(std::size_t n_cases, std::uint64_t seed, double slack = 1e-9);

/// Runs check_unbiasedness on n_cases random (q* ~ N(4, 1), gamma in {0, 0.5, 5},
/// H in [-3, 3]^k, baseline) triples; passes iff at least min_pass_fraction pass.
CheckReport check_unbiasedness_batch(std::size_t n_cases, std::size_t k, std::size_t n_samples,
                                     std::uint64_t seed, double se_multiplier = 5.0,
                                     double min_pass_fraction = 0.95);

CheckReport check_alpha_map(std::span<const double> q_star, double gamma, double alpha,
                            double tol = 1e-6);

// One line: check=<name> pass=<true|false> statistic=<v> threshold=<v> detail="..."
std::string format_report_line(const CheckReport& report);

const std::vector<std::string>& verify_suite_names();

/// Runs a named suite ("all" or one of verify_suite_names()) and returns its reports in a
/// fixed order. Throws ValidationError for an unknown suite.
std::vector<CheckReport> run_verify_suite(const std::string& suite, std::uint64_t seed);

// Central-difference oracles, kept separate from the closed forms they check.
std::vector<double> finite_difference_gradient(const ExactModel& model, std::span<const double> h,
                                               double step = 1e-5);
double finite_difference_curvature(const ExactModel& model, std::span<const double> h,
                                   std::span<const double> dh, double step = 1e-4);

}  // namespace regpg
