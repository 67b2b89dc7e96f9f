#include "regpg/schedules.hpp"

#include <cmath>
#include <sstream>

#include "regpg/errors.hpp"

namespace regpg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool positive(double x) { return std::isfinite(x) && x > 0.0; }
bool nonnegative(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

LearningRateSchedule::LearningRateSchedule(ConstantRate c) : kind_(c) {
    if (!positive(c.rho)) throw ValidationError("constant learning rate must be positive");
}

LearningRateSchedule::LearningRateSchedule(LinearDecayRate d) : kind_(d) {
    if (!positive(d.beta1) || !positive(d.beta2)) {
        throw ValidationError("linear-decay learning rate needs beta1 > 0 and beta2 > 0");
    }
}

double LearningRateSchedule::rate_at(std::size_t t) const {
    return std::visit(overloaded{
                          [](const ConstantRate& c) { return c.rho; },
                          [t](const LinearDecayRate& d) {
                              return d.beta1 / (1.0 + d.beta2 * static_cast<double>(t));
                          },
                      },
                      kind_);
}

std::string LearningRateSchedule::describe() const {
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const ConstantRate& c) { os << "constant(" << c.rho << ")"; },
                   [&](const LinearDecayRate& d) {
                       os << "linear(" << d.beta1 << ", " << d.beta2 << ")";
                   },
               },
               kind_);
    return os.str();
}

RegularizationSchedule::RegularizationSchedule(ConstantGamma c) : kind_(c) {
    if (!nonnegative(c.gamma)) throw ValidationError("regularization must be nonnegative");
}

RegularizationSchedule::RegularizationSchedule(LinearDecayGamma d) : kind_(d) {
    if (!nonnegative(d.gamma0) || !positive(d.eta)) {
        throw ValidationError("linear-decay regularization needs gamma0 >= 0 and eta > 0");
    }
}

double RegularizationSchedule::gamma_at(std::size_t t) const {
    return std::visit(overloaded{
                          [](const ConstantGamma& c) { return c.gamma; },
                          [t](const LinearDecayGamma& d) {
                              return d.gamma0 / (1.0 + d.eta * static_cast<double>(t));
                          },
                      },
                      kind_);
}

std::string RegularizationSchedule::describe() const {
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const ConstantGamma& c) { os << "constant(" << c.gamma << ")"; },
                   [&](const LinearDecayGamma& d) {
                       os << "linear(" << d.gamma0 << ", " << d.eta << ")";
                   },
               },
               kind_);
    return os.str();
}

double rate_at(const LearningRateSchedule& schedule, std::size_t t) { return schedule.rate_at(t); }

double gamma_at(const RegularizationSchedule& schedule, std::size_t t) {
    return schedule.gamma_at(t);
}

}  // namespace regpg
