#include "regpg/verification.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "regpg/errors.hpp"
#include "regpg/numfmt.hpp"
#include "regpg/rng.hpp"

namespace regpg {

namespace {

double squared_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

double sup_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

std::uint64_t case_seed(std::uint64_t seed, std::size_t index) {
    return mix64(mix64(seed) ^ static_cast<std::uint64_t>(index));
}

double uniform_in(StreamRng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

std::size_t uniform_int(StreamRng& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng.uniform() * static_cast<double>(hi - lo + 1));
}

void require_samples(std::size_t n) {
    if (n < 10000) throw PreconditionError("Monte Carlo checks need at least 10^4 samples");
}

CheckReport make_report(std::string name, bool pass, double statistic, double threshold,
                        std::string detail) {
    return CheckReport{std::move(name), pass, statistic, threshold, std::move(detail)};
}

// Random model for the analytic oracle checks.
ExactModel random_model(StreamRng& rng, std::size_t max_k, bool random_alpha) {
    const std::size_t k = uniform_int(rng, 2, max_k);
    std::vector<double> q(k);
    for (double& x : q) x = 4.0 + rng.normal();
    const double gamma = uniform_in(rng, 0.0, 10.0);
    const double alpha = random_alpha ? uniform_in(rng, 0.5, 2.0) : 1.0;
    return ExactModel(std::move(q), gamma, alpha);
}

std::vector<double> random_vector(StreamRng& rng, std::size_t k, double lo, double hi) {
    std::vector<double> v(k);
    for (double& x : v) x = uniform_in(rng, lo, hi);
    return v;
}

}  // namespace

std::vector<double> finite_difference_gradient(const ExactModel& model, std::span<const double> h,
                                               double step) {
    std::vector<double> x(h.begin(), h.end());
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + step;
        const double up = objective(model, x);
        x[i] = saved - step;
        const double down = objective(model, x);
        x[i] = saved;
        grad[i] = (up - down) / (2.0 * step);
    }
    return grad;
}

double finite_difference_curvature(const ExactModel& model, std::span<const double> h,
                                   std::span<const double> dh, double step) {
    std::vector<double> up(h.begin(), h.end());
    std::vector<double> down(h.begin(), h.end());
    for (std::size_t i = 0; i < up.size(); ++i) {
        up[i] += step * dh[i];
        down[i] -= step * dh[i];
    }
    return (objective(model, up) - 2.0 * objective(model, h) + objective(model, down)) /
           (step * step);
}

CheckReport check_unbiasedness(const ExactModel& model, std::span<const double> h, double baseline,
                               std::size_t n_samples, std::uint64_t seed, double se_multiplier,
                               const RewardModel& reward) {
    require_samples(n_samples);
    const std::size_t k = model.arms();
    const BanditInstance instance(model.q_star, reward);
    AgentState state(std::vector<double>(h.begin(), h.end()), model.alpha);
    const auto policy = softmax_policy(state.h, model.alpha);
    const auto exact = exact_gradient(model, h);

    StreamRng actions(stream_key(seed, 0, StreamId::ActionUniforms));
    StreamRng noise(stream_key(seed, 0, StreamId::RewardNoise));
    const bool normal_noise = reward.uses_normal_noise();

    // Only the stochastic part alpha (R - b)(1{a=A} - Pi(a)) is accumulated; the -gamma H
    // term is constant across samples.
    std::vector<double> sum(k, 0.0), sum_sq(k, 0.0);
    for (std::size_t s = 0; s < n_samples; ++s) {
        const std::size_t arm = sample_arm(policy, actions.uniform());
        const double r = sample_reward(instance, arm, normal_noise ? noise.normal() : noise.uniform());
        const double advantage = model.alpha * (r - baseline);
        for (std::size_t a = 0; a < k; ++a) {
            const double x = advantage * ((a == arm ? 1.0 : 0.0) - policy.probs[a]);
            sum[a] += x;
            sum_sq[a] += x * x;
        }
    }

    const double n = static_cast<double>(n_samples);
    double worst = 0.0;
    std::size_t worst_arm = 0;
    for (std::size_t a = 0; a < k; ++a) {
        const double mean = sum[a] / n - model.gamma * h[a];
        const double var = std::max(0.0, (sum_sq[a] - sum[a] * sum[a] / n) / (n - 1.0));
        const double se = std::sqrt(var / n);
        const double err = std::abs(mean - exact[a]);
        double z = 0.0;
        if (se > 0.0) {
            z = err / se;
        } else if (err > 1e-12 * (1.0 + std::abs(exact[a]))) {
            z = HUGE_VAL;
        }
        if (z > worst) {
            worst = z;
            worst_arm = a;
        }
    }
    std::ostringstream detail;
    detail << "k=" << k << " n=" << n_samples << " worst_arm=" << worst_arm;
    return make_report("unbiasedness", worst <= se_multiplier, worst, se_multiplier, detail.str());
}

CheckReport check_gradient_second_moment(const ExactModel& model, std::span<const double> h,
                                         std::size_t n_samples, std::uint64_t seed,
                                         double baseline, const RewardModel& reward) {
    require_samples(n_samples);
    const auto constants = theory_constants(model.q_star, model.gamma, reward, model.alpha);
    const BanditInstance instance(model.q_star, reward);
    AgentState state(std::vector<double>(h.begin(), h.end()), model.alpha);
    // The reconstructed constant accounts for alpha = 1; alpha^2 scales the reward part.
    const double bound = model.alpha * model.alpha * constants.reward_coeff +
                         constants.h_coeff * squared_norm(h);
    const auto policy = softmax_policy(state.h, model.alpha);

    StreamRng actions(stream_key(seed, 0, StreamId::ActionUniforms));
    StreamRng noise(stream_key(seed, 0, StreamId::RewardNoise));
    const bool normal_noise = reward.uses_normal_noise();

    // The baseline is frozen, so it is injected through the state's running sum.
    state.t = 1;
    state.reward_sum = baseline;
    double total = 0.0;
    for (std::size_t s = 0; s < n_samples; ++s) {
        const std::size_t arm = sample_arm(policy, actions.uniform());
        const double r = sample_reward(instance, arm, normal_noise ? noise.normal() : noise.uniform());
        total += squared_norm(gradient_estimate(state, policy, arm, r, model.gamma));
    }
    const double estimate = total / static_cast<double>(n_samples);
    std::ostringstream detail;
    detail << "k=" << model.arms() << " C_m=" << format_double(constants.c_m)
           << " |h|^2=" << format_double(squared_norm(h));
    return make_report("gradient-second-moment", estimate <= bound, estimate, bound, detail.str());
}

CheckReport check_gradient_second_moment(const ExactModel& model, std::span<const double> h,
                                         std::size_t n_samples, std::uint64_t seed) {
    double mean = 0.0;
    for (double q : model.q_star) mean += q;
    mean /= static_cast<double>(model.arms());
    return check_gradient_second_moment(model, h, n_samples, seed, mean);
}

CheckReport check_mean_range_bound(std::size_t n_cases, std::uint64_t seed) {
    if (n_cases < 1) throw PreconditionError("need at least one case");
    StreamRng rng(mix64(seed));
    double worst = -HUGE_VAL;
    std::size_t violations = 0;
    std::size_t comparisons = 0;
    std::vector<double> x, pi;
    for (std::size_t c = 0; c < n_cases; ++c) {
        const std::size_t k = uniform_int(rng, 2, 20);
        x.resize(k);
        pi.resize(k);
        for (double& v : x) v = uniform_in(rng, -10.0, 10.0);
        // Logit spread up to 10 covers near-uniform through near-Dirac simplex points.
        const double spread = uniform_in(rng, 0.0, 10.0);
        for (double& p : pi) p = spread * rng.normal();
        const double top = *std::max_element(pi.begin(), pi.end());
        double total = 0.0;
        for (double& p : pi) {
            p = std::exp(p - top);
            total += p;
        }
        double mean = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            pi[a] /= total;
            mean += x[a] * pi[a];
        }
        const double rhs = 2.0 * squared_norm(x);
        for (std::size_t l = 0; l < k; ++l) {
            const double lhs = (mean - x[l]) * (mean - x[l]);
            worst = std::max(worst, lhs - rhs);
            if (lhs - rhs > 1e-12) ++violations;
            ++comparisons;
        }
    }
    std::ostringstream detail;
    detail << "cases=" << n_cases << " comparisons=" << comparisons << " violations=" << violations;
    return make_report("mean-range-bound", violations == 0, worst, 1e-12, detail.str());
}

CheckReport check_product_lemma(double beta1, double beta2, double xi, std::size_t t_start,
                                std::size_t horizon) {
    if (!(xi > 0.0)) throw PreconditionError("product lemma needs xi > 0");
    if (!(beta1 > 0.0) || !(beta2 >= 0.0)) {
        throw PreconditionError("product lemma needs beta1 > 0 and beta2 >= 0");
    }
    // rho_j is nonincreasing, so the first factor is the smallest.
    if (!(beta1 * xi < 1.0 + beta2 * static_cast<double>(t_start))) {
        throw PreconditionError("factor 1 - rho_j xi is not in (0, 1) at j = t_start");
    }
    double log_product = 0.0;
    double rho_sum = 0.0;
    for (std::size_t j = t_start; j <= t_start + horizon; ++j) {
        const double rho = beta1 / (1.0 + beta2 * static_cast<double>(j));
        log_product += std::log1p(-rho * xi);
        rho_sum += rho;
    }
    const double analytic = -xi * rho_sum;
    const double threshold = std::log(1e-6);
    const bool below_bound = log_product <= analytic + 1e-12 * std::abs(analytic);
    std::ostringstream detail;
    detail << "log_product=" << format_double(log_product)
           << " log_bound=" << format_double(analytic);
    return make_report("product-lemma", log_product < threshold && below_bound, log_product,
                       threshold, detail.str());
}

CheckReport estimate_c_star_avg(std::size_t k, std::size_t n_samples, std::uint64_t seed,
                                double target, double tolerance) {
    if (k < 1 || n_samples < 1) throw PreconditionError("need k >= 1 and n >= 1");
    StreamRng rng(stream_key(seed, 0, StreamId::MeanSampling));
    double total = 0.0;
    for (std::size_t s = 0; s < n_samples; ++s) {
        double lo = HUGE_VAL;
        double hi = -HUGE_VAL;
        for (std::size_t a = 0; a < k; ++a) {
            const double z = rng.normal();
            lo = std::min(lo, z);
            hi = std::max(hi, z);
        }
        total += hi - lo;
    }
    const double estimate = total / static_cast<double>(n_samples);
    std::ostringstream detail;
    detail << "k=" << k << " n=" << n_samples << " target=" << format_double(target);
    return make_report("c-star-avg", std::abs(estimate - target) <= tolerance, estimate, tolerance,
                       detail.str());
}

CheckReport check_gradient_fd(std::size_t n_cases, std::uint64_t seed, double rel_tol) {
    StreamRng rng(mix64(seed ^ 0x6772616446ULL));
    double worst = 0.0;
    for (std::size_t c = 0; c < n_cases; ++c) {
        const auto model = random_model(rng, 10, true);
        const auto h = random_vector(rng, model.arms(), -3.0, 3.0);
        const auto exact = exact_gradient(model, h);
        const auto fd = finite_difference_gradient(model, h);
        std::vector<double> diff(exact.size());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = exact[i] - fd[i];
        worst = std::max(worst, sup_norm(diff) / (1.0 + sup_norm(exact)));
    }
    return make_report("gradient-fd", worst <= rel_tol, worst, rel_tol,
                       "cases=" + std::to_string(n_cases));
}

CheckReport check_hessian_fd(std::size_t n_cases, std::uint64_t seed, double rel_tol) {
    StreamRng rng(mix64(seed ^ 0x6865737346ULL));
    double worst = 0.0;
    for (std::size_t c = 0; c < n_cases; ++c) {
        const auto model = random_model(rng, 10, true);
        const auto h = random_vector(rng, model.arms(), -3.0, 3.0);
        const auto dh = random_vector(rng, model.arms(), -1.0, 1.0);
        const double exact = hessian_quadratic_form(model, h, dh);
        const double fd = finite_difference_curvature(model, h, dh);
        worst = std::max(worst, std::abs(exact - fd) / (1.0 + std::abs(exact)));
    }
    return make_report("hessian-fd", worst <= rel_tol, worst, rel_tol,
                       "cases=" + std::to_string(n_cases));
}

CheckReport check_hessian_bound(std::size_t n_cases, std::uint64_t seed, double slack) {
    StreamRng rng(mix64(seed ^ 0x626f756e64ULL));
    double worst = -HUGE_VAL;
    std::size_t violations = 0;
    for (std::size_t c = 0; c < n_cases; ++c) {
        const auto model = random_model(rng, 10, false);
        const auto h = random_vector(rng, model.arms(), -5.0, 5.0);
        std::vector<double> dh(model.arms());
        for (double& x : dh) x = rng.normal();
        const double form = hessian_quadratic_form(model, h, dh);
        const double bound = (model.c_star() - model.gamma) * squared_norm(dh);
        worst = std::max(worst, form - bound);
        if (form - bound > slack) ++violations;
    }
    return make_report("hessian-bound", violations == 0, worst, slack,
                       "cases=" + std::to_string(n_cases) + " violations=" + std::to_string(violations));
}

CheckReport check_unbiasedness_batch(std::size_t n_cases, std::size_t k, std::size_t n_samples,
                                     std::uint64_t seed, double se_multiplier,
                                     double min_pass_fraction) {
    if (n_cases < 1) throw PreconditionError("need at least one case");
    static constexpr double kGammas[] = {0.0, 0.5, 5.0};
    std::size_t passed = 0;
    double worst = 0.0;
    for (std::size_t c = 0; c < n_cases; ++c) {
        StreamRng rng(case_seed(seed, c));
        std::vector<double> q(k);
        for (double& x : q) x = 4.0 + rng.normal();
        const ExactModel model(std::move(q), kGammas[c % 3]);
        const auto h = random_vector(rng, k, -3.0, 3.0);
        const double baseline = uniform_in(rng, 2.0, 6.0);
        const auto report = check_unbiasedness(model, h, baseline, n_samples, case_seed(seed, c) + 1,
                                               se_multiplier);
        if (report.pass) ++passed;
        worst = std::max(worst, report.statistic);
    }
    const double fraction = static_cast<double>(passed) / static_cast<double>(n_cases);
    std::ostringstream detail;
    detail << "passed=" << passed << "/" << n_cases << " se_multiplier=" << se_multiplier
           << " worst_z=" << format_double(worst);
    return make_report("unbiasedness-batch", fraction >= min_pass_fraction, fraction,
                       min_pass_fraction, detail.str());
}

CheckReport check_alpha_map(std::span<const double> q_star, double gamma, double alpha,
                            double tol) {
    const auto r = alpha_critical_map_check(q_star, gamma, alpha, tol);
    std::ostringstream detail;
    detail << "alpha=" << format_double(alpha) << " gamma=" << format_double(gamma)
           << " rescaled_gamma=" << format_double(gamma / (alpha * alpha));
    return make_report("alpha-map", r.pass, r.difference, tol, detail.str());
}

std::string format_report_line(const CheckReport& report) {
    std::string detail = report.detail;
    std::replace(detail.begin(), detail.end(), '"', '\'');
    return "check=" + report.name + " pass=" + (report.pass ? "true" : "false") +
           " statistic=" + format_double(report.statistic) +
           " threshold=" + format_double(report.threshold) + " detail=\"" + detail + "\"";
}

const std::vector<std::string>& verify_suite_names() {
    static const std::vector<std::string> names{"unbiasedness", "moments",     "mean-range",
                                                "product",      "cstar",       "gradient-fd",
                                                "hessian-bound", "alpha-map"};
    return names;
}

std::vector<CheckReport> run_verify_suite(const std::string& suite, std::uint64_t seed) {
    if (suite == "all") {
        std::vector<CheckReport> all;
        for (const auto& name : verify_suite_names()) {
            auto part = run_verify_suite(name, seed);
            all.insert(all.end(), part.begin(), part.end());
        }
        return all;
    }
    if (suite == "unbiasedness") {
        return {check_unbiasedness_batch(100, 10, 200000, seed)};
    }
    if (suite == "moments") {
        StreamRng rng(case_seed(seed, 77));
        std::vector<double> q(10);
        for (double& x : q) x = 4.0 + rng.normal();
        const ExactModel free_model(q, 0.0);
        const ExactModel stiff(q, 10.0);
        std::vector<double> h3(10, 0.0);
        h3[0] = 3.0;
        auto at_zero = check_gradient_second_moment(free_model, std::vector<double>(10, 0.0), 100000,
                                                    seed);
        at_zero.name = "gradient-second-moment-h0";
        auto stiff_report = check_gradient_second_moment(stiff, h3, 100000, seed + 1);
        stiff_report.name = "gradient-second-moment-gamma10";
        return {at_zero, stiff_report};
    }
    if (suite == "mean-range") return {check_mean_range_bound(100000, seed)};
    if (suite == "product") {
        auto decaying = check_product_lemma(1.0, 0.05, 1.0, 100, 1000000);
        auto constant = check_product_lemma(0.05, 0.0, 1.0, 0, 10000);
        constant.name = "product-lemma-constant";
        return {decaying, constant};
    }
    if (suite == "cstar") return {estimate_c_star_avg(10, 1000000, seed)};
    if (suite == "gradient-fd") return {check_gradient_fd(100, seed), check_hessian_fd(100, seed)};
    if (suite == "hessian-bound") return {check_hessian_bound(1000, seed)};
    if (suite == "alpha-map") {
        const std::vector<double> q{1.0, 2.0, 4.0};
        return {check_alpha_map(q, 16.0, 2.0)};
    }
    std::string known = "all";
    for (const auto& n : verify_suite_names()) known += ", " + n;
    throw ValidationError("unknown verify suite '" + suite + "'; valid suites: " + known);
}

}  // namespace regpg
