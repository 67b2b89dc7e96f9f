#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "regpg/commands.hpp"
#include "regpg/experiment.hpp"
#include "regpg/verification.hpp"

int main(int argc, char** argv) {
    using namespace regpg;

    CLI::App app{"Regularized softmax policy gradient for the multi-armed bandit"};
    app.require_subcommand(1);
    app.fallthrough();

    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker threads for Monte Carlo runs (0 = all cores)");

    std::string config_path;
    std::string sim_out = default_out_dir();
    auto* simulate = app.add_subcommand("simulate", "Run the experiments of a configuration file");
    simulate->add_option("config", config_path, "Configuration file")->required();
    simulate->add_option("-o,--out", sim_out, "Output directory (default $REGPG_OUT_DIR or .)");

    FigureOptions fig;
    fig.out_dir = default_out_dir();
    std::size_t fig_runs = 0, fig_steps = 0;
    std::uint64_t fig_seed = 0;
    auto* figure = app.add_subcommand("figure", "Reproduce a figure preset");
    std::string preset_help = "Preset name:";
    for (const auto& n : figure_preset_names()) preset_help += " " + n;
    figure->add_option("preset", fig.preset, preset_help)->required();
    auto* runs_opt = figure->add_option("--runs", fig_runs, "Override the number of runs");
    auto* steps_opt = figure->add_option("--steps", fig_steps, "Override the number of steps");
    auto* seed_opt = figure->add_option("--seed", fig_seed, "Override the master seed");
    figure->add_option("-o,--out", fig.out_dir, "Output directory (default $REGPG_OUT_DIR or .)");
    figure->add_flag("--dump-config", fig.dump_config, "Print the preset as a configuration file");

    std::string suite = "all";
    std::uint64_t verify_seed = 1;
    auto* verify = app.add_subcommand("verify", "Run verification checks");
    std::string suite_help = "Suite: all";
    for (const auto& n : verify_suite_names()) suite_help += " " + n;
    verify->add_option("suite", suite, suite_help);
    verify->add_option("--seed", verify_seed, "Seed");

    RateOptions rate;
    auto* rate_cmd = app.add_subcommand("rate", "Mean squared distance to the optimum over time");
    rate_cmd->add_option("--gamma", rate.gamma, "Regularization")->capture_default_str();
    rate_cmd->add_option("--beta1", rate.beta1, "rho_t = beta1 / (1 + beta2 t)")->capture_default_str();
    rate_cmd->add_option("--beta2", rate.beta2)->capture_default_str();
    rate_cmd->add_option("--runs", rate.runs)->capture_default_str();
    rate_cmd->add_option("--horizon", rate.horizon)->capture_default_str();
    rate_cmd->add_option("--checkpoints", rate.checkpoints)->delimiter(',')->capture_default_str();
    rate_cmd->add_option("--q", rate.q_star, "Explicit arm means, comma separated")
        ->delimiter(',')
        ->capture_default_str();
    bool sample_q = false;
    rate_cmd->add_flag("--sample-q", sample_q, "Sample arm means from N(q-mean, q-std^2) instead");
    rate_cmd->add_option("--k", rate.k, "Arms when sampling means")->capture_default_str();
    rate_cmd->add_option("--q-mean", rate.q_mean)->capture_default_str();
    rate_cmd->add_option("--q-std", rate.q_std)->capture_default_str();
    rate_cmd->add_option("--seed", rate.seed)->capture_default_str();
    rate_cmd->add_option("-o,--out", rate.out_path, "CSV output file (default stdout)");

    OptimumOptions opt;
    auto* optimum = app.add_subcommand("optimum", "Solve for the maximizer of the objective");
    optimum->add_option("--q", opt.q_star, "Arm means, comma separated")->delimiter(',')->required();
    optimum->add_option("--gamma", opt.gamma)->required();
    optimum->add_option("--alpha", opt.alpha)->capture_default_str();
    optimum->add_option("--tol", opt.tol)->capture_default_str();
    optimum->add_option("--max-iter", opt.max_iter)->capture_default_str();
    optimum->add_option("--multistart", opt.multistart)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    const ExecutionOptions exec{threads};
    if (simulate->parsed()) {
        return cmd_simulate(config_path, sim_out, exec, std::cout, std::cerr);
    }
    if (figure->parsed()) {
        if (runs_opt->count()) fig.runs = fig_runs;
        if (steps_opt->count()) fig.steps = fig_steps;
        if (seed_opt->count()) fig.seed = fig_seed;
        fig.exec = exec;
        return cmd_figure(fig, std::cout, std::cerr);
    }
    if (verify->parsed()) return cmd_verify(suite, verify_seed, std::cout, std::cerr);
    if (rate_cmd->parsed()) {
        if (sample_q) rate.q_star.clear();
        rate.exec = exec;
        return cmd_rate(rate, std::cout, std::cerr);
    }
    if (optimum->parsed()) return cmd_optimum(opt, std::cout, std::cerr);
    return kExitUsage;
}
