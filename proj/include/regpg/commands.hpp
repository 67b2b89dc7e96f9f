#pragma once

// Entry points behind the `regpg` command-line tool. Each returns the process exit code:
// 0 success, 1 a check or solve failed, 2 an I/O or configuration error.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "regpg/experiment.hpp"
#include "regpg/verification.hpp"

namespace regpg {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

// $REGPG_OUT_DIR when set, "." otherwise.
std::string default_out_dir();

/// All variants must see identical arm means in every run; compares instance digests.
CheckReport check_variant_pairing(const ExperimentSet& set, std::size_t runs_to_check = 0);

// Runs every variant and writes <out_dir>/<name>.csv and <out_dir>/<name>.svg.
void write_experiment(const ExperimentSet& set, const std::string& out_dir, ExecutionOptions exec,
                      std::ostream& log);

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 ExecutionOptions exec, std::ostream& out, std::ostream& err);

struct FigureOptions {
    std::string preset;
    std::optional<std::size_t> runs;
    std::optional<std::size_t> steps;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    bool dump_config = false;  // print the preset as a configuration file instead of running
    ExecutionOptions exec;
};

int cmd_figure(const FigureOptions& options, std::ostream& out, std::ostream& err);

int cmd_verify(const std::string& suite, std::uint64_t seed, std::ostream& out, std::ostream& err);

struct RateOptions {
    double gamma = 5.0;
    double beta1 = 2.0;
    double beta2 = 0.01;
    std::size_t runs = 200;
    std::size_t horizon = 20000;
    std::vector<std::size_t> checkpoints{1250, 2500, 5000, 10000, 20000};
    std::vector<double> q_star{1.0, 2.0, 4.0};  // empty: sample q* ~ N(q_mean, q_std^2)
    std::size_t k = 10;
    double q_mean = 4.0;
    double q_std = 1.0;
    std::uint64_t seed = 1;
    std::string out_path;  // empty: standard output
    ExecutionOptions exec;
};

ExperimentConfig rate_config(const RateOptions& options);

int cmd_rate(const RateOptions& options, std::ostream& out, std::ostream& err);

struct OptimumOptions {
    std::vector<double> q_star;
    double gamma = 1.0;
    double alpha = 1.0;
    double tol = 1e-10;
    std::size_t max_iter = 500000;
    std::size_t multistart = 8;
};

int cmd_optimum(const OptimumOptions& options, std::ostream& out, std::ostream& err);

}  // namespace regpg
