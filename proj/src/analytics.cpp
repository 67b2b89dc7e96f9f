#include "regpg/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "regpg/errors.hpp"

namespace regpg {

namespace {

void require_size(const ExactModel& model, std::span<const double> v, const char* what) {
    if (v.size() != model.arms()) {
        throw ValidationError(std::string(what) + " has length " + std::to_string(v.size()) +
                              ", model has " + std::to_string(model.arms()) + " arms");
    }
}

double sup_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double squared_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

double range_of(std::span<const double> q) {
    const auto [lo, hi] = std::minmax_element(q.begin(), q.end());
    return *hi - *lo;
}

// Radical inverse of n in the given base, in [0, 1).
double radical_inverse(std::size_t n, std::size_t base) {
    double inv = 1.0 / static_cast<double>(base);
    double f = inv;
    double r = 0.0;
    while (n > 0) {
        r += f * static_cast<double>(n % base);
        n /= base;
        f *= inv;
    }
    return r;
}

std::vector<std::size_t> first_primes(std::size_t count) {
    std::vector<std::size_t> primes;
    for (std::size_t n = 2; primes.size() < count; ++n) {
        bool is_prime = true;
        for (std::size_t p : primes) {
            if (p * p > n) break;
            if (n % p == 0) {
                is_prime = false;
                break;
            }
        }
        if (is_prime) primes.push_back(n);
    }
    return primes;
}

std::vector<std::vector<double>> starting_points(std::size_t k, std::size_t multistart) {
    std::vector<std::vector<double>> starts;
    starts.emplace_back(k, 0.0);
    for (std::size_t a = 0; a < k; ++a) {
        for (double sign : {5.0, -5.0}) {
            std::vector<double> s(k, 0.0);
            s[a] = sign;
            starts.push_back(std::move(s));
        }
    }
    const auto primes = first_primes(k);
    for (std::size_t i = 1; i <= multistart; ++i) {
        std::vector<double> s(k);
        for (std::size_t a = 0; a < k; ++a) s[a] = -5.0 + 10.0 * radical_inverse(i, primes[a]);
        starts.push_back(std::move(s));
    }
    return starts;
}

struct Ascent {
    std::vector<double> h;
    double value = 0.0;
    double grad_norm = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

Ascent ascend(const ExactModel& model, std::vector<double> h, double tol, std::size_t max_iter) {
    constexpr double kArmijo = 1e-4;
    constexpr double kEps = std::numeric_limits<double>::epsilon();
    // Step 1 / (alpha^2 c* + gamma + 1) is below the inverse Lipschitz constant of the
    // gradient, so it is always an ascent step in exact arithmetic.
    const double initial_step = 1.0 / (model.alpha * model.alpha * model.c_star() + model.gamma + 1.0);

    Ascent out;
    double value = objective(model, h);
    std::vector<double> grad = exact_gradient(model, h);
    std::vector<double> trial(h.size());
    std::size_t iter = 0;
    for (; iter < max_iter; ++iter) {
        if (sup_norm(grad) < tol) break;
        const double slope = squared_norm(grad);
        double step = initial_step;
        double trial_value = 0.0;
        for (;;) {
            for (std::size_t a = 0; a < h.size(); ++a) trial[a] = h[a] + step * grad[a];
            trial_value = objective(model, trial);
            // The slack absorbs round-off once the increase is below double resolution.
            const double slack = 8.0 * kEps * (std::abs(value) + 1.0);
            if (trial_value >= value + kArmijo * step * slope - slack) break;
            step *= 0.5;
            if (step < 1e-30) break;
        }
        h.swap(trial);
        value = trial_value;
        grad = exact_gradient(model, h);
    }
    out.grad_norm = sup_norm(grad);
    out.converged = out.grad_norm < tol;
    out.iterations = iter;
    out.value = value;
    out.h = std::move(h);
    return out;
}

}  // namespace

ExactModel::ExactModel(std::vector<double> means, double gamma_, double alpha_)
    : q_star(std::move(means)), gamma(gamma_), alpha(alpha_) {
    if (q_star.empty()) throw ValidationError("model needs at least one arm");
    for (double q : q_star) {
        if (!std::isfinite(q)) throw ValidationError("arm means must be finite");
    }
    if (!std::isfinite(gamma) || gamma < 0.0) throw ValidationError("gamma must be >= 0");
    if (!std::isfinite(alpha) || alpha <= 0.0) throw ValidationError("alpha must be > 0");
}

double ExactModel::c_star() const { return range_of(q_star); }

double ExactModel::mu() const { return gamma - alpha * alpha * c_star(); }

double objective(const ExactModel& model, std::span<const double> h) {
    require_size(model, h, "preference vector");
    const auto policy = softmax_policy(h, model.alpha);
    double expected = 0.0;
    for (std::size_t a = 0; a < h.size(); ++a) expected += model.q_star[a] * policy.probs[a];
    return expected - 0.5 * model.gamma * squared_norm(h);
}

std::vector<double> exact_gradient(const ExactModel& model, std::span<const double> h) {
    require_size(model, h, "preference vector");
    const auto policy = softmax_policy(h, model.alpha);
    double mean = 0.0;
    for (std::size_t a = 0; a < h.size(); ++a) mean += model.q_star[a] * policy.probs[a];
    std::vector<double> grad(h.size());
    for (std::size_t b = 0; b < h.size(); ++b) {
        grad[b] = model.alpha * policy.probs[b] * (model.q_star[b] - mean) - model.gamma * h[b];
    }
    return grad;
}

double hessian_quadratic_form(const ExactModel& model, std::span<const double> h,
                              std::span<const double> dh) {
    require_size(model, h, "preference vector");
    require_size(model, dh, "direction");
    const auto policy = softmax_policy(h, model.alpha);
    const auto& p = policy.probs;

    // Summing the second derivatives against dh(a) dh(b) gives, for each A,
    //   Pi(A) [(dh(A) - <dh, Pi>)^2 - (<dh^2, Pi> - <dh, Pi>^2)].
    double mean_dh = 0.0;
    double mean_dh2 = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) {
        mean_dh += p[a] * dh[a];
        mean_dh2 += p[a] * dh[a] * dh[a];
    }
    const double spread = mean_dh2 - mean_dh * mean_dh;
    double reward_part = 0.0;
    for (std::size_t A = 0; A < p.size(); ++A) {
        const double centered = dh[A] - mean_dh;
        reward_part += model.q_star[A] * p[A] * (centered * centered - spread);
    }
    return model.alpha * model.alpha * reward_part - model.gamma * squared_norm(dh);
}

TheoryConstants theory_constants(std::span<const double> q_star, double gamma,
                                 const RewardModel& reward, double alpha) {
    if (q_star.empty()) throw ValidationError("need at least one arm");
    TheoryConstants c;
    c.c_star = range_of(q_star);
    c.mu = gamma - alpha * alpha * c.c_star;
    for (double q : q_star) {
        reward.check_mean(q);
        c.c_m = std::max(c.c_m, reward.second_moment(q));
    }
    c.reward_coeff = 8.0 * static_cast<double>(q_star.size()) * c.c_m;
    c.h_coeff = 2.0 * gamma * gamma;
    return c;
}

OptimumResult solve_optimum(const ExactModel& model, const SolverOptions& options) {
    if (!(options.tol > 0.0)) throw ValidationError("solver tolerance must be positive");
    const std::size_t k = model.arms();
    const bool certified = model.mu() > 0.0;

    const auto starts = certified ? std::vector<std::vector<double>>{std::vector<double>(k, 0.0)}
                                  : starting_points(k, options.multistart);

    std::size_t total_iterations = 0;
    bool have_best = false;
    Ascent best;
    Ascent closest;  // for the error report when nothing converges
    closest.grad_norm = std::numeric_limits<double>::infinity();
    for (const auto& start : starts) {
        Ascent run = ascend(model, start, options.tol, options.max_iter);
        total_iterations += run.iterations;
        if (run.converged) {
            if (!have_best || run.value > best.value) {
                best = std::move(run);
                have_best = true;
            }
        } else if (run.grad_norm < closest.grad_norm) {
            closest = std::move(run);
        }
    }
    if (!have_best) {
        throw ConvergenceError(closest.h, closest.grad_norm,
                               "optimum solver did not reach gradient tolerance within " +
                                   std::to_string(options.max_iter) + " iterations");
    }

    OptimumResult result;
    result.h_star = std::move(best.h);
    result.value = best.value;
    result.grad_norm = best.grad_norm;
    result.unique_certified = certified;
    result.iterations = total_iterations;
    return result;
}

OptimumResult solve_optimum(const ExactModel& model, double tol, std::size_t max_iter,
                            std::size_t multistart) {
    return solve_optimum(model, SolverOptions{tol, max_iter, multistart});
}

double optimal_value(std::span<const double> q_star, double gamma, const SolverOptions& options) {
    if (q_star.empty()) throw ValidationError("need at least one arm");
    if (gamma == 0.0) return *std::max_element(q_star.begin(), q_star.end());
    const ExactModel model({q_star.begin(), q_star.end()}, gamma);
    return solve_optimum(model, options).value;
}

CriticalMapReport alpha_critical_map_check(std::span<const double> q_star, double gamma,
                                           double alpha, double tol) {
    if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
    const std::vector<double> q(q_star.begin(), q_star.end());
    const ExactModel scaled(q, gamma, alpha);
    const ExactModel original(q, gamma / (alpha * alpha), 1.0);
    if (!(original.mu() > 0.0)) {
        throw PreconditionError("alpha map check needs gamma / alpha^2 > c_star");
    }

    SolverOptions opts;
    opts.tol = 1e-13;
    const auto a = solve_optimum(scaled, opts);
    const auto b = solve_optimum(original, opts);

    CriticalMapReport report;
    report.h_scaled = a.h_star;
    report.h_original = b.h_star;
    double d2 = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double d = alpha * a.h_star[i] - b.h_star[i];
        d2 += d * d;
    }
    report.difference = std::sqrt(d2);
    report.tol = tol;
    report.pass = report.difference <= tol;
    return report;
}

}  // namespace regpg
