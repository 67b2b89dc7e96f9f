#include "regpg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "regpg/errors.hpp"
#include "regpg/numfmt.hpp"

namespace regpg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

// Splits on whitespace and commas.
std::vector<std::string> tokens(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == ',') {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

struct Entry {
    std::string value;
    std::size_t line = 0;
};

class Parser {
public:
    Parser(const std::string& key, const Entry& entry) : key_(key), entry_(entry) {}

    [[noreturn]] void fail(const std::string& why) const {
        throw ConfigError(key_, entry_.line,
                          "line " + std::to_string(entry_.line) + ": key '" + key_ + "': " + why);
    }

    double real(const std::string& text) const {
        const auto v = parse_double(text);
        if (!v || !std::isfinite(*v)) fail("expected a finite number, got '" + text + "'");
        return *v;
    }

    std::uint64_t unsigned_integer(const std::string& text) const {
        std::uint64_t v = 0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
            fail("expected a nonnegative integer, got '" + text + "'");
        }
        return v;
    }

    std::size_t count() const {
        const auto t = single();
        const auto v = unsigned_integer(t);
        if (v < 1) fail("must be >= 1");
        return static_cast<std::size_t>(v);
    }

    std::string single() const {
        const auto t = tokens(entry_.value);
        if (t.size() != 1) fail("expected a single value");
        return t[0];
    }

    bool boolean() const {
        const auto t = single();
        if (t == "true" || t == "1" || t == "yes") return true;
        if (t == "false" || t == "0" || t == "no") return false;
        fail("expected true or false, got '" + t + "'");
    }

    std::vector<double> reals_after(const std::vector<std::string>& t, std::size_t from) const {
        std::vector<double> out;
        for (std::size_t i = from; i < t.size(); ++i) out.push_back(real(t[i]));
        return out;
    }

    void arity(const std::vector<std::string>& t, std::size_t n) const {
        if (t.size() != n) {
            fail("'" + t[0] + "' takes " + std::to_string(n - 1) + " argument(s)");
        }
    }

    std::vector<std::string> words() const {
        auto t = tokens(entry_.value);
        if (t.empty()) fail("missing value");
        return t;
    }

private:
    const std::string& key_;
    const Entry& entry_;
};

using Block = std::map<std::string, Entry>;

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys{
        "name",  "label",  "k",      "steps", "runs", "seed",            "h0",
        "rate",  "gamma",  "alpha",  "reward", "q",   "record_distance", "common_noise"};
    return keys;
}

void apply(ExperimentConfig& c, const std::string& key, const Entry& entry) {
    const Parser p(key, entry);
    if (key == "label") {
        c.label = trim(entry.value);
        if (c.label.empty()) p.fail("label must not be empty");
        if (c.label.find_first_of(",\"") != std::string::npos) {
            p.fail("label must not contain commas or quotes");
        }
    } else if (key == "k") {
        c.k = p.count();
    } else if (key == "steps") {
        c.steps = p.count();
    } else if (key == "runs") {
        c.runs = p.count();
    } else if (key == "seed") {
        c.master_seed = p.unsigned_integer(p.single());
    } else if (key == "alpha") {
        c.alpha = p.real(p.single());
        if (!(c.alpha > 0.0)) p.fail("must be positive");
    } else if (key == "record_distance") {
        c.record_distance = p.boolean();
    } else if (key == "common_noise") {
        c.common_noise = p.boolean();
    } else if (key == "h0") {
        const auto t = p.words();
        if (t[0] == "zeros") {
            p.arity(t, 1);
            c.h0 = ZeroPreferences{};
        } else if (t[0] == "biased") {
            p.arity(t, 2);
            c.h0 = BiasedFirstPreferences{p.real(t[1])};
        } else if (t[0] == "explicit") {
            auto v = p.reals_after(t, 1);
            if (v.empty()) p.fail("explicit h0 needs values");
            c.h0 = ExplicitPreferences{std::move(v)};
        } else {
            p.fail("expected zeros, biased or explicit");
        }
    } else if (key == "q") {
        const auto t = p.words();
        if (t[0] == "normal") {
            p.arity(t, 3);
            const double sd = p.real(t[2]);
            if (sd < 0.0) p.fail("std must be >= 0");
            c.q_sampling = GaussianMeans{p.real(t[1]), sd};
        } else if (t[0] == "explicit") {
            auto v = p.reals_after(t, 1);
            if (v.empty()) p.fail("explicit q needs values");
            c.q_sampling = ExplicitMeans{std::move(v)};
        } else {
            p.fail("expected normal or explicit");
        }
    } else if (key == "rate" || key == "gamma" || key == "reward") {
        const auto t = p.words();
        try {
            if (key == "rate" && t[0] == "constant") {
                p.arity(t, 2);
                c.rate = LearningRateSchedule::constant(p.real(t[1]));
            } else if (key == "rate" && t[0] == "linear") {
                p.arity(t, 3);
                c.rate = LearningRateSchedule::linear_decay(p.real(t[1]), p.real(t[2]));
            } else if (key == "gamma" && t[0] == "constant") {
                p.arity(t, 2);
                c.gamma = RegularizationSchedule::constant(p.real(t[1]));
            } else if (key == "gamma" && t[0] == "linear") {
                p.arity(t, 3);
                c.gamma = RegularizationSchedule::linear_decay(p.real(t[1]), p.real(t[2]));
            } else if (key == "reward" && t[0] == "gaussian") {
                p.arity(t, 1);
                c.reward = RewardModel::gaussian();
            } else if (key == "reward" && t[0] == "bernoulli") {
                p.arity(t, 3);
                c.reward = RewardModel::bernoulli(p.real(t[1]), p.real(t[2]));
            } else if (key == "reward" && t[0] == "uniform") {
                p.arity(t, 2);
                c.reward = RewardModel::uniform(p.real(t[1]));
            } else {
                p.fail(key == "reward" ? "expected gaussian, bernoulli or uniform"
                                       : "expected constant or linear");
            }
        } catch (const ValidationError& e) {
            p.fail(e.what());
        }
    }
}

std::string join_reals(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
}

std::string format_rate(const LearningRateSchedule& r) {
    return std::visit(overloaded{
                          [](const ConstantRate& c) { return "constant " + format_double(c.rho); },
                          [](const LinearDecayRate& d) {
                              return "linear " + format_double(d.beta1) + " " +
                                     format_double(d.beta2);
                          },
                      },
                      r.kind());
}

std::string format_gamma(const RegularizationSchedule& g) {
    return std::visit(overloaded{
                          [](const ConstantGamma& c) { return "constant " + format_double(c.gamma); },
                          [](const LinearDecayGamma& d) {
                              return "linear " + format_double(d.gamma0) + " " +
                                     format_double(d.eta);
                          },
                      },
                      g.kind());
}

std::string format_reward(const RewardModel& r) {
    switch (r.kind) {
        case RewardKind::Gaussian:
            return "gaussian";
        case RewardKind::Bernoulli:
            return "bernoulli " + format_double(r.shift) + " " + format_double(r.scale);
        case RewardKind::Uniform:
            return "uniform " + format_double(r.width);
    }
    return "gaussian";
}

std::map<std::string, std::string> config_fields(const ExperimentConfig& c) {
    std::map<std::string, std::string> f;
    f["label"] = c.label;
    f["k"] = std::to_string(c.k);
    f["steps"] = std::to_string(c.steps);
    f["runs"] = std::to_string(c.runs);
    f["alpha"] = format_double(c.alpha);
    f["rate"] = format_rate(c.rate);
    f["gamma"] = format_gamma(c.gamma);
    f["reward"] = format_reward(c.reward);
    f["record_distance"] = c.record_distance ? "true" : "false";
    f["common_noise"] = c.common_noise ? "true" : "false";
    f["h0"] = std::visit(overloaded{
                             [](const ZeroPreferences&) { return std::string("zeros"); },
                             [](const BiasedFirstPreferences& b) {
                                 return "biased " + format_double(b.value);
                             },
                             [](const ExplicitPreferences& e) {
                                 return "explicit " + join_reals(e.values);
                             },
                         },
                         c.h0);
    f["q"] = std::visit(overloaded{
                            [](const GaussianMeans& g) {
                                return "normal " + format_double(g.mean) + " " +
                                       format_double(g.std);
                            },
                            [](const ExplicitMeans& e) { return "explicit " + join_reals(e.values); },
                        },
                        c.q_sampling);
    return f;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(std::move(cur));
    return out;
}

constexpr const char* kObservedMean = "mean_rel_reward_observed";
constexpr const char* kObservedSe = "stderr_observed";
constexpr const char* kExpectedMean = "mean_rel_reward_expected";
constexpr const char* kExpectedSe = "stderr_expected";
constexpr const char* kDistance = "d_t";
constexpr const char* kScaledDistance = "t_times_dt";

}  // namespace

ExperimentSet parse_config_text(const std::string& text) {
    Block base;
    std::vector<std::pair<std::string, Block>> variants;
    std::vector<std::size_t> variant_lines;
    Block* current = &base;

    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("", line_no, "line " + std::to_string(line_no) +
                                                   ": unterminated section header");
            }
            const std::string inner = trim(std::string_view(line).substr(1, line.size() - 2));
            if (inner.rfind("variant", 0) != 0) {
                throw ConfigError("", line_no, "line " + std::to_string(line_no) +
                                                   ": unknown section '" + inner + "'");
            }
            const std::string label = trim(std::string_view(inner).substr(7));
            if (label.empty() || label.find_first_of(",\"") != std::string::npos) {
                throw ConfigError("label", line_no,
                                  "line " + std::to_string(line_no) +
                                      ": variant label must be non-empty without commas or quotes");
            }
            for (const auto& [existing, block] : variants) {
                if (existing == label) {
                    throw ConfigError("label", line_no, "line " + std::to_string(line_no) +
                                                            ": duplicate variant '" + label + "'");
                }
            }
            variants.emplace_back(label, Block{});
            variant_lines.push_back(line_no);
            current = &variants.back().second;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("", line_no,
                              "line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        const auto& keys = known_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw ConfigError(key, line_no,
                              "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
        if (current != &base && (key == "seed" || key == "name" || key == "label")) {
            throw ConfigError(key, line_no,
                              "line " + std::to_string(line_no) + ": key '" + key +
                                  "' is not allowed in a variant (variants share the base " +
                                  "name and seed, and carry their label in the header)");
        }
        if (current->count(key)) {
            throw ConfigError(key, line_no,
                              "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
        (*current)[key] = Entry{value, line_no};
    }

    if (!base.count("name")) throw ConfigError("name", 0, "missing required key 'name'");

    ExperimentSet set;
    set.name = trim(base.at("name").value);
    if (set.name.empty() || set.name.find_first_of("/\\ ") != std::string::npos) {
        throw ConfigError("name", base.at("name").line,
                          "line " + std::to_string(base.at("name").line) +
                              ": name must be a non-empty file-name stem without spaces");
    }

    ExperimentConfig base_config;
    base_config.label = set.name;
    for (const auto& [key, entry] : base) {
        if (key != "name") apply(base_config, key, entry);
    }

    // Without an explicit k, an explicit mean vector fixes the arm count.
    auto finish = [&base](ExperimentConfig c, std::size_t line, const Block* overrides = nullptr) {
        const bool k_given = base.count("k") || (overrides && overrides->count("k"));
        if (const auto* e = std::get_if<ExplicitMeans>(&c.q_sampling); e && !k_given) {
            c.k = e->values.size();
        }
        try {
            c.validate();
        } catch (const ValidationError& e) {
            throw ConfigError("", line, std::string("invalid configuration: ") + e.what());
        }
        return c;
    };

    if (variants.empty()) {
        set.variants.push_back(finish(base_config, 0));
    } else {
        for (std::size_t i = 0; i < variants.size(); ++i) {
            ExperimentConfig c = base_config;
            c.label = variants[i].first;
            for (const auto& [key, entry] : variants[i].second) apply(c, key, entry);
            set.variants.push_back(finish(std::move(c), variant_lines[i], &variants[i].second));
        }
    }
    return set;
}

ExperimentSet parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", 0, "cannot read configuration file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string format_config(const ExperimentSet& set) {
    std::ostringstream os;
    os << "name = " << set.name << "\n";
    if (set.variants.empty()) return os.str();
    const auto& first = set.variants.front();
    os << "seed = " << first.master_seed << "\n";

    const auto base = config_fields(first);
    if (set.variants.size() == 1) {
        for (const auto& [key, value] : base) os << key << " = " << value << "\n";
        return os.str();
    }
    // Keys identical across variants go to the base block.
    std::vector<std::map<std::string, std::string>> all;
    for (const auto& v : set.variants) all.push_back(config_fields(v));
    std::map<std::string, bool> shared;
    for (const auto& [key, value] : base) {
        shared[key] = std::all_of(all.begin(), all.end(),
                                  [&](const auto& f) { return f.at(key) == value; });
    }
    for (const auto& [key, value] : base) {
        if (key != "label" && shared[key]) os << key << " = " << value << "\n";
    }
    for (const auto& f : all) {
        os << "\n[variant " << f.at("label") << "]\n";
        for (const auto& [key, value] : f) {
            if (key != "label" && !shared[key]) os << key << " = " << value << "\n";
        }
    }
    return os.str();
}

void write_series_csv(std::ostream& out, const std::vector<AggregateSeries>& series) {
    if (series.empty()) throw ValidationError("no series to write");
    const std::size_t steps = series.front().steps();
    for (const auto& s : series) {
        if (s.steps() != steps) throw ValidationError("series differ in length");
    }
    out << "step";
    for (const auto& s : series) {
        for (const char* col : {kObservedMean, kObservedSe, kExpectedMean, kExpectedSe}) {
            out << ',' << s.label << ':' << col;
        }
        if (s.has_distance()) out << ',' << s.label << ':' << kDistance << ',' << s.label << ':' << kScaledDistance;
    }
    out << '\n';
    for (std::size_t i = 0; i < steps; ++i) {
        const std::size_t step = i + 1;
        out << step;
        for (const auto& s : series) {
            out << ',' << format_double(s.rel_observed.mean[i]) << ','
                << format_double(s.rel_observed.std_error[i]) << ','
                << format_double(s.rel_expected.mean[i]) << ','
                << format_double(s.rel_expected.std_error[i]);
            if (s.has_distance()) {
                out << ',' << format_double(s.distance.mean[i]) << ','
                    << format_double(static_cast<double>(step) * s.distance.mean[i]);
            }
        }
        out << '\n';
    }
}

std::vector<AggregateSeries> read_series_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty CSV");
    const auto header = split_csv_line(line);
    if (header.empty() || header[0] != "step") throw ValidationError("CSV must start with 'step'");

    struct Column {
        std::size_t series;
        std::string metric;
    };
    std::vector<AggregateSeries> out;
    std::vector<Column> columns;
    for (std::size_t c = 1; c < header.size(); ++c) {
        const auto colon = header[c].rfind(':');
        if (colon == std::string::npos) throw ValidationError("bad CSV column '" + header[c] + "'");
        const std::string label = header[c].substr(0, colon);
        if (out.empty() || out.back().label != label) {
            out.emplace_back();
            out.back().label = label;
        }
        columns.push_back({out.size() - 1, header[c].substr(colon + 1)});
    }

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) throw ValidationError("ragged CSV row");
        for (std::size_t c = 1; c < cells.size(); ++c) {
            const auto v = parse_double(cells[c]);
            if (!v) throw ValidationError("bad CSV number '" + cells[c] + "'");
            auto& s = out[columns[c - 1].series];
            const auto& m = columns[c - 1].metric;
            if (m == kObservedMean) s.rel_observed.mean.push_back(*v);
            else if (m == kObservedSe) s.rel_observed.std_error.push_back(*v);
            else if (m == kExpectedMean) s.rel_expected.mean.push_back(*v);
            else if (m == kExpectedSe) s.rel_expected.std_error.push_back(*v);
            else if (m == kDistance) s.distance.mean.push_back(*v);
            else if (m == kScaledDistance) continue;
            else throw ValidationError("unknown CSV metric '" + m + "'");
        }
    }
    return out;
}

void write_distance_csv(std::ostream& out, const DistanceSeries& series) {
    out << "t,d_t,stderr_d_t,t_times_dt,stderr_diff\n";
    for (std::size_t i = 0; i < series.t.size(); ++i) {
        out << series.t[i] << ',' << format_double(series.d[i]) << ','
            << format_double(series.std_error[i]) << ',' << format_double(series.t_times_d[i])
            << ',' << format_double(series.diff_std_error[i]) << '\n';
    }
}

namespace {

std::string xml_escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

void write_plot_svg(std::ostream& out, const std::string& title,
                    const std::vector<AggregateSeries>& series, bool observed) {
    constexpr double kWidth = 800, kHeight = 500;
    constexpr double kLeft = 70, kRight = 180, kTop = 40, kBottom = 50;
    static const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

    std::size_t steps = 0;
    double lo = HUGE_VAL, hi = -HUGE_VAL;
    for (const auto& s : series) {
        const auto& m = observed ? s.rel_observed.mean : s.rel_expected.mean;
        steps = std::max(steps, m.size());
        for (double v : m) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!(hi > lo)) {
        lo = (std::isfinite(lo) ? lo : 0.0) - 0.5;
        hi = lo + 1.0;
    }
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto px = [&](double step) {
        return kLeft + plot_w * (steps > 1 ? (step - 1.0) / static_cast<double>(steps - 1) : 0.0);
    };
    auto py = [&](double v) { return kTop + plot_h * (hi - v) / (hi - lo); };
    auto num = [](double v) {
        std::ostringstream os;
        os.precision(6);
        os << v;
        return os.str();
    };

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"16\">" << xml_escape(title) << "</text>\n"
        << "<g stroke=\"black\" stroke-width=\"1\">\n"
        << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w
        << "\" y2=\"" << kTop + plot_h << "\"/>\n"
        << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
        << kTop + plot_h << "\"/>\n</g>\n";

    out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int i = 0; i <= 4; ++i) {
        const double v = lo + (hi - lo) * i / 4.0;
        out << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(py(v) + 4)
            << "\" text-anchor=\"end\">" << num(v) << "</text>\n";
        const double step = 1.0 + (static_cast<double>(steps) - 1.0) * i / 4.0;
        out << "<text x=\"" << num(px(step)) << "\" y=\"" << kTop + plot_h + 16
            << "\" text-anchor=\"middle\">" << num(std::round(step)) << "</text>\n";
    }
    out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 10
        << "\" text-anchor=\"middle\">step</text>\n"
        << "<text x=\"16\" y=\"" << kTop + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << kTop + plot_h / 2 << ")\">mean relative reward (" << (observed ? "observed" : "expected")
        << ")</text>\n</g>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& m = observed ? series[k].rel_observed.mean : series[k].rel_expected.mean;
        const char* color = kColors[k % std::size(kColors)];
        const std::size_t stride = std::max<std::size_t>(1, m.size() / 1000);
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < m.size(); i += stride) {
            out << num(px(static_cast<double>(i + 1))) << ',' << num(py(m[i])) << ' ';
        }
        if (!m.empty()) out << num(px(static_cast<double>(m.size()))) << ',' << num(py(m.back()));
        out << "\"/>\n";
        const double ly = kTop + 16.0 + 20.0 * static_cast<double>(k);
        out << "<line x1=\"" << kLeft + plot_w + 12 << "\" y1=\"" << ly << "\" x2=\""
            << kLeft + plot_w + 36 << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << kLeft + plot_w + 42 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(series[k].label) << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace regpg
