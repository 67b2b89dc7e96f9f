#pragma once

// Experiment configuration files, CSV series and SVG plots.
//
// Configuration files are line-oriented `key = value` documents. '#' starts a comment.
// A `[variant <label>]` header opens a block of overrides applied on top of the base
// keys; every variant inherits the base seed so that all variants share arm means run by
// run. See configs/ for one example per figure preset.
//
//   name            experiment name, used for output file names (required)
//   label           curve label when there are no variants (default: name)
//   k, steps, runs  integers >= 1 (defaults 10, 2000, 1000)
//   seed            unsigned 64-bit master seed (default 1)
//   h0              zeros | biased <v> | explicit <h1,...,hk>
//   rate            constant <rho> | linear <beta1> <beta2>
//   gamma           constant <gamma> | linear <gamma0> <eta>
//   alpha           positive real (default 1)
//   reward          gaussian | bernoulli <shift> <scale> | uniform <width>
//   q               normal <mean> <std> | explicit <q1,...,qk>
//   record_distance true | false
//   common_noise    true | false

#include <iosfwd>
#include <string>
#include <vector>

#include "regpg/experiment.hpp"

namespace regpg {

// Throws ConfigError naming the key and line of the first problem found.
ExperimentSet parse_config_text(const std::string& text);
ExperimentSet parse_config(const std::string& path);

// Inverse of parse_config_text.
std::string format_config(const ExperimentSet& set);

/// Header `step`, then per label: <label>:mean_rel_reward_observed, <label>:stderr_observed,
/// <label>:mean_rel_reward_expected, <label>:stderr_expected and, when distances were
/// recorded, <label>:d_t and <label>:t_times_dt. Row i holds step i + 1. All series must
/// have the same length.
void write_series_csv(std::ostream& out, const std::vector<AggregateSeries>& series);

// Reads what write_series_csv emits. Raw reward and run counts are not part of the file.
std::vector<AggregateSeries> read_series_csv(std::istream& in);

// Columns t, d_t, stderr_d_t, t_times_dt, stderr_diff.
void write_distance_csv(std::ostream& out, const DistanceSeries& series);

/// Standalone SVG line chart of mean relative reward against step, one polyline per
/// series, legend from the labels.
void write_plot_svg(std::ostream& out, const std::string& title,
                    const std::vector<AggregateSeries>& series, bool observed = true);

}  // namespace regpg
