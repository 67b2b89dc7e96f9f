#pragma once

#include <cstddef>
#include <string>
#include <variant>

namespace regpg {

// Learning rate rho_t.
struct ConstantRate {
    double rho = 0.05;
};

// rho_t = beta1 / (1 + beta2 t)
struct LinearDecayRate {
    double beta1 = 1.0;
    double beta2 = 0.05;
};

class LearningRateSchedule {
public:
    using Kind = std::variant<ConstantRate, LinearDecayRate>;

    LearningRateSchedule() : LearningRateSchedule(ConstantRate{}) {}
    LearningRateSchedule(ConstantRate c);
    LearningRateSchedule(LinearDecayRate d);

    static LearningRateSchedule constant(double rho) { return ConstantRate{rho}; }
    static LearningRateSchedule linear_decay(double beta1, double beta2) {
        return LinearDecayRate{beta1, beta2};
    }

    double rate_at(std::size_t t) const;

    const Kind& kind() const noexcept { return kind_; }
    bool is_constant() const noexcept { return std::holds_alternative<ConstantRate>(kind_); }
    std::string describe() const;

private:
    Kind kind_;
};

// Regularization gamma_t.
struct ConstantGamma {
    double gamma = 0.0;
};

// gamma_t = gamma0 / (1 + eta t)
struct LinearDecayGamma {
    double gamma0 = 10.0;
    double eta = 0.2;
};

class RegularizationSchedule {
public:
    using Kind = std::variant<ConstantGamma, LinearDecayGamma>;

    RegularizationSchedule() : RegularizationSchedule(ConstantGamma{}) {}
    RegularizationSchedule(ConstantGamma c);
    RegularizationSchedule(LinearDecayGamma d);

    static RegularizationSchedule constant(double gamma) { return ConstantGamma{gamma}; }
    static RegularizationSchedule linear_decay(double gamma0, double eta) {
        return LinearDecayGamma{gamma0, eta};
    }

    double gamma_at(std::size_t t) const;

    const Kind& kind() const noexcept { return kind_; }
    bool is_constant() const noexcept { return std::holds_alternative<ConstantGamma>(kind_); }
    std::string describe() const;

private:
    Kind kind_;
};

double rate_at(const LearningRateSchedule& schedule, std::size_t t);
double gamma_at(const RegularizationSchedule& schedule, std::size_t t);

}  // namespace regpg
