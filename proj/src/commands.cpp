#include "regpg/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "regpg/errors.hpp"
#include "regpg/io.hpp"
#include "regpg/numfmt.hpp"

namespace regpg {

namespace fs = std::filesystem;

namespace {

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
}

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::ios_base::failure("cannot open '" + path.string() + "' for writing");
    f << contents;
    f.close();
    if (!f) throw std::ios_base::failure("failed writing '" + path.string() + "'");
}

// Maps library errors onto exit codes after reporting them.
template <class Body>
int guarded(std::ostream& err, Body body) {
    try {
        return body();
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    } catch (const RunError& e) {
        err << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

}  // namespace

std::string default_out_dir() {
    const char* env = std::getenv("REGPG_OUT_DIR");
    return env && *env ? std::string(env) : std::string(".");
}

CheckReport check_variant_pairing(const ExperimentSet& set, std::size_t runs_to_check) {
    CheckReport report;
    report.name = "variant-pairing";
    report.threshold = 0.0;
    if (set.variants.empty()) {
        report.pass = true;
        return report;
    }
    const auto& first = set.variants.front();
    const std::size_t runs = runs_to_check == 0 ? first.runs : runs_to_check;
    std::size_t mismatches = 0;
    for (std::size_t r = 0; r < runs; ++r) {
        const auto reference = instance_digest(first, r);
        for (std::size_t v = 1; v < set.variants.size(); ++v) {
            if (instance_digest(set.variants[v], r) != reference) ++mismatches;
        }
    }
    report.statistic = static_cast<double>(mismatches);
    report.pass = mismatches == 0;
    report.detail = "variants=" + std::to_string(set.variants.size()) + " runs=" + std::to_string(runs);
    return report;
}

void write_experiment(const ExperimentSet& set, const std::string& out_dir, ExecutionOptions exec,
                      std::ostream& log) {
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) {
        throw std::ios_base::failure("output directory '" + out_dir + "' is not usable");
    }

    std::vector<AggregateSeries> series;
    for (const auto& config : set.variants) {
        log << "running " << set.name << " [" << config.label << "]: " << config.runs << " runs x "
            << config.steps << " steps\n";
        series.push_back(run_experiment(config, exec));
    }

    std::ostringstream csv;
    write_series_csv(csv, series);
    std::ostringstream svg;
    write_plot_svg(svg, set.name, series);
    const auto csv_path = dir / (set.name + ".csv");
    const auto svg_path = dir / (set.name + ".svg");
    write_file(csv_path, csv.str());
    write_file(svg_path, svg.str());
    log << "wrote " << csv_path.string() << " and " << svg_path.string() << "\n";
}

namespace {

int run_set(const ExperimentSet& set, const std::string& out_dir, ExecutionOptions exec,
            std::ostream& out, std::ostream& err) {
    const auto pairing = check_variant_pairing(set);
    if (!pairing.pass) {
        err << "error: variants do not share arm means: " << format_report_line(pairing) << "\n";
        return kExitCheckFailed;
    }
    write_experiment(set, out_dir, exec, out);
    return kExitOk;
}

}  // namespace

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 ExecutionOptions exec, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] { return run_set(parse_config(config_path), out_dir, exec, out, err); });
}

int cmd_figure(const FigureOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        ExperimentSet set = figure_preset(options.preset);
        for (auto& c : set.variants) {
            if (options.runs) c.runs = *options.runs;
            if (options.steps) c.steps = *options.steps;
            if (options.seed) c.master_seed = *options.seed;
            c.validate();
        }
        if (options.dump_config) {
            out << format_config(set);
            return kExitOk;
        }
        return run_set(set, options.out_dir, options.exec, out, err);
    });
}

int cmd_verify(const std::string& suite, std::uint64_t seed, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto reports = run_verify_suite(suite, seed);
        bool all = true;
        for (const auto& r : reports) {
            out << format_report_line(r) << "\n";
            all = all && r.pass;
        }
        return all ? kExitOk : kExitCheckFailed;
    });
}

ExperimentConfig rate_config(const RateOptions& options) {
    ExperimentConfig c;
    c.label = "rate";
    c.runs = options.runs;
    c.steps = options.horizon;
    c.master_seed = options.seed;
    c.rate = LearningRateSchedule::linear_decay(options.beta1, options.beta2);
    c.gamma = RegularizationSchedule::constant(options.gamma);
    if (options.q_star.empty()) {
        c.k = options.k;
        c.q_sampling = GaussianMeans{options.q_mean, options.q_std};
    } else {
        c.k = options.q_star.size();
        c.q_sampling = ExplicitMeans{options.q_star};
    }
    c.validate();
    return c;
}

int cmd_rate(const RateOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto config = rate_config(options);
        if (!options.q_star.empty()) {
            const ExactModel model(options.q_star, options.gamma);
            if (!(model.mu() > 0.0)) {
                err << "refusing: mu = gamma - (max q* - min q*) = " << format_double(model.mu())
                    << " is not positive, so the optimum is not certified unique; "
                    << "choose gamma > " << format_double(model.c_star()) << "\n";
                return kExitUsage;
            }
        }
        DistanceSeries series;
        try {
            series = rate_study(config, options.checkpoints, options.exec);
        } catch (const PreconditionError& e) {
            err << "refusing: " << e.what() << "\n";
            return kExitUsage;
        }
        std::ostringstream csv;
        write_distance_csv(csv, series);
        if (options.out_path.empty()) {
            out << csv.str();
        } else {
            write_file(options.out_path, csv.str());
            out << "wrote " << options.out_path << "\n";
        }
        return kExitOk;
    });
}

int cmd_optimum(const OptimumOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ExactModel model(options.q_star, options.gamma, options.alpha);
        const auto result =
            solve_optimum(model, options.tol, options.max_iter, options.multistart);
        out << "h_star=" << join(result.h_star) << "\n"
            << "value=" << format_double(result.value) << "\n"
            << "grad_norm=" << format_double(result.grad_norm) << "\n"
            << "mu=" << format_double(model.mu()) << "\n"
            << "unique_certified=" << (result.unique_certified ? "true" : "false") << "\n"
            << "iterations=" << result.iterations << "\n";
        return kExitOk;
    });
}

}  // namespace regpg
