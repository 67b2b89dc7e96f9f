#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace regpg {

// Bad argument values: non-finite inputs, size mismatches, out-of-range parameters.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A documented precondition of a check or solver does not hold for the given inputs.
class PreconditionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// The preference vector left the finite range during an update.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::size_t step, const std::string& what)
        : std::runtime_error(what), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

// A run of an experiment failed; carries the run index of the offending run.
class RunError : public std::runtime_error {
public:
    RunError(std::size_t run_index, std::size_t step, const std::string& what)
        : std::runtime_error(what), run_index_(run_index), step_(step) {}

    std::size_t run_index() const noexcept { return run_index_; }
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t run_index_;
    std::size_t step_;
};

// Optimum solver ran out of iterations. The last iterate is kept for inspection.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(std::vector<double> last_iterate, double grad_norm, const std::string& what)
        : std::runtime_error(what), last_iterate_(std::move(last_iterate)), grad_norm_(grad_norm) {}

    const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
    double grad_norm() const noexcept { return grad_norm_; }

private:
    std::vector<double> last_iterate_;
    double grad_norm_;
};

// Malformed configuration document. line() is 0 when the problem is not tied to a line.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, std::size_t line, const std::string& what)
        : std::runtime_error(what), key_(std::move(key)), line_(line) {}

    const std::string& key() const noexcept { return key_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string key_;
    std::size_t line_;
};

}  // namespace regpg
