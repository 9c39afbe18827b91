#pragma once

/**
 * @file
 * Command-line front end: `probs`, `report`, `curve`, `ppt`, `simulate`.
 *
 * stdout carries data only, stderr diagnostics. Exit codes: 0 success,
 * 2 usage or configuration error, 1 internal-consistency error.
 * JSON documents open with "schema": 1 and keep a fixed key order.
 */

#include "relq/sim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <locale>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace relq::cli {

using Json = nlohmann::ordered_json;

inline constexpr int exit_ok = 0;
inline constexpr int exit_internal = 1;
inline constexpr int exit_usage = 2;
inline constexpr int json_schema_version = 1;
inline constexpr int default_grid_points = 181;

/// Malformed command-line input.
class UsageError : public Error {
  public:
    using Error::Error;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t");
    return std::string(s.substr(first, last - first + 1));
}

template <class T = long long>
std::optional<T> parse_integer(std::string_view s) {
    T v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return v;
}

inline std::optional<double> parse_real(std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return v;
}

} // namespace detail

/// Shortest round-trip decimal, locale independent.
inline std::string format_number(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return {buf, res.ptr};
}

/// x with `digits` significant digits.
inline std::string format_number(double x, int digits) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, digits);
    return {buf, res.ptr};
}

inline double round_significant(double x, int digits) {
    return *detail::parse_real(format_number(x, digits));
}

/// "3", "3/2", "1.5", "2.0" -> Spin; `field` names the option in errors.
inline Spin parse_spin(std::string_view text, std::string_view field) {
    const std::string s = detail::trim(text);
    auto fail = [&]() -> Spin {
        throw UsageError("invalid half-integer for " + std::string(field) + ": '" +
                         std::string(text) + "'");
    };
    if (s.empty()) {
        return fail();
    }
    if (const auto slash = s.find('/'); slash != std::string::npos) {
        const auto num = detail::parse_integer(std::string_view(s).substr(0, slash));
        const auto den = detail::parse_integer(std::string_view(s).substr(slash + 1));
        if (!num || !den || *den != 2 || *num < 0 || *num > 1'000'000) {
            return fail();
        }
        return Spin::from_twice(static_cast<int>(*num));
    }
    if (const auto whole = detail::parse_integer(s)) {
        if (*whole < 0 || *whole > 500'000) {
            return fail();
        }
        return Spin::integer(static_cast<int>(*whole));
    }
    const auto real = detail::parse_real(s);
    if (!real || *real < 0.0 || *real > 500'000.0) {
        return fail();
    }
    const double twice = 2.0 * *real;
    if (twice != std::floor(twice)) {
        return fail();
    }
    return Spin::from_twice(static_cast<int>(twice));
}

/// Angles as plain numbers or multiples of pi: "1.2", "pi", "pi/2", "2pi/3", "0.5*pi".
inline double parse_angle(std::string_view text, std::string_view field = "--alpha") {
    std::string s = detail::trim(text);
    auto fail = [&]() -> double {
        throw UsageError("invalid angle for " + std::string(field) + ": '" + std::string(text) +
                         "'");
    };
    const auto at = s.find("pi");
    if (at == std::string::npos) {
        const auto v = detail::parse_real(s);
        return v ? *v : fail();
    }
    std::string coeff = s.substr(0, at);
    if (!coeff.empty() && coeff.back() == '*') {
        coeff.pop_back();
    }
    double value = pi;
    if (!coeff.empty()) {
        const auto c = detail::parse_real(coeff);
        if (!c) {
            return fail();
        }
        value *= *c;
    }
    const std::string rest = s.substr(at + 2);
    if (!rest.empty()) {
        if (rest.front() != '/') {
            return fail();
        }
        const auto d = detail::parse_real(std::string_view(rest).substr(1));
        if (!d || *d == 0.0) {
            return fail();
        }
        value /= *d;
    }
    return value;
}

enum class OutputFormat { csv, json };

inline std::string to_string(PriorKind k) {
    return k == PriorKind::parallel_antiparallel ? "pap" : "uniform";
}
inline std::string to_string(PovmKind k) {
    return k == PovmKind::optimal ? "optimal" : "local";
}
inline std::string to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "json"; }

inline PriorKind parse_prior(std::string_view s) {
    if (s == "pap") {
        return PriorKind::parallel_antiparallel;
    }
    if (s == "uniform") {
        return PriorKind::uniform_directions;
    }
    throw UsageError("invalid value for --prior: '" + std::string(s) + "' (pap|uniform)");
}

inline PovmKind parse_povm(std::string_view s) {
    if (s == "optimal") {
        return PovmKind::optimal;
    }
    if (s == "local") {
        return PovmKind::optimal_local;
    }
    throw UsageError("invalid value for --povm: '" + std::string(s) + "' (optimal|local)");
}

inline OutputFormat parse_format(std::string_view s) {
    if (s == "csv") {
        return OutputFormat::csv;
    }
    if (s == "json") {
        return OutputFormat::json;
    }
    throw UsageError("invalid value for --format: '" + std::string(s) + "' (csv|json)");
}

/// One estimation scenario. Canonical text form:
/// "j1=1/2 j2=3 prior=pap povm=optimal format=csv[ seed=7][ alpha=1.5]".
struct ScenarioConfig {
    Spin j1 = spin_half;
    Spin j2 = spin_half;
    PriorKind prior = PriorKind::parallel_antiparallel;
    PovmKind povm = PovmKind::optimal;
    OutputFormat format = OutputFormat::csv;
    std::optional<std::uint64_t> seed;
    std::optional<double> alpha;

    [[nodiscard]] std::string to_string() const {
        std::string out = "j1=" + j1.to_string() + " j2=" + j2.to_string() +
                          " prior=" + cli::to_string(prior) + " povm=" + cli::to_string(povm) +
                          " format=" + cli::to_string(format);
        if (seed) {
            out += " seed=" + std::to_string(*seed);
        }
        if (alpha) {
            out += " alpha=" + format_number(*alpha);
        }
        return out;
    }

    /// Whitespace-separated key=value pairs in any order; absent keys keep defaults.
    static ScenarioConfig parse(std::string_view text) {
        ScenarioConfig c;
        std::istringstream in{std::string(text)};
        std::string token;
        while (in >> token) {
            const auto eq = token.find('=');
            if (eq == std::string::npos) {
                throw UsageError("scenario token without '=': '" + token + "'");
            }
            const std::string key = token.substr(0, eq);
            const std::string value = token.substr(eq + 1);
            if (key == "j1") {
                c.j1 = parse_spin(value, "j1");
            } else if (key == "j2") {
                c.j2 = parse_spin(value, "j2");
            } else if (key == "prior") {
                c.prior = parse_prior(value);
            } else if (key == "povm") {
                c.povm = parse_povm(value);
            } else if (key == "format") {
                c.format = parse_format(value);
            } else if (key == "seed") {
                const auto v = detail::parse_integer<std::uint64_t>(value);
                if (!v) {
                    throw UsageError("invalid seed: '" + value + "'");
                }
                c.seed = *v;
            } else if (key == "alpha") {
                c.alpha = parse_angle(value, "alpha");
            } else {
                throw UsageError("unknown scenario key '" + key + "'");
            }
        }
        return c;
    }
};

inline Json posterior_json(const PosteriorOverAngle &post, int grid_points) {
    Json j;
    const auto &dist = post.distribution;
    if (dist.is_discrete()) {
        j["kind"] = "discrete";
        Json pts = Json::array();
        for (const auto &p : dist.points()) {
            pts.push_back({{"alpha", round_significant(p.alpha, 10)},
                           {"weight", round_significant(p.weight, 10)}});
        }
        j["points"] = std::move(pts);
    } else {
        j["kind"] = "density";
        Json alphas = Json::array();
        Json values = Json::array();
        for (int k = 0; k < grid_points; ++k) {
            const double a = grid_points == 1 ? 0.0 : pi * k / (grid_points - 1);
            alphas.push_back(round_significant(a, 10));
            values.push_back(round_significant(dist.density_at(a), 10));
        }
        j["alpha"] = std::move(alphas);
        j["density"] = std::move(values);
    }
    j["map_alpha"] = round_significant(map_estimate(dist), 10);
    return j;
}

inline void cmd_probs(const ScenarioConfig &cfg, std::ostream &out,
                      int grid_points = default_grid_points) {
    std::vector<double> alphas;
    if (cfg.alpha) {
        check_angle(*cfg.alpha);
        alphas.push_back(*cfg.alpha);
    } else {
        if (grid_points < 2) {
            throw UsageError("--grid needs at least 2 points");
        }
        for (int k = 0; k < grid_points; ++k) {
            alphas.push_back(k == grid_points - 1 ? pi : pi * k / (grid_points - 1));
        }
    }
    const CoherentPairModel model(cfg.j1, cfg.j2);
    const auto totals = total_j_values(cfg.j1, cfg.j2);
    if (cfg.format == OutputFormat::csv) {
        out << "alpha,J,probability\n";
        for (double a : alphas) {
            const auto p = model(a);
            for (std::size_t k = 0; k < totals.size(); ++k) {
                out << format_number(a) << ',' << totals[k].to_string() << ','
                    << format_number(p[k]) << '\n';
            }
        }
        return;
    }
    Json doc;
    doc["schema"] = json_schema_version;
    doc["j1"] = cfg.j1.to_string();
    doc["j2"] = cfg.j2.to_string();
    Json rows = Json::array();
    for (double a : alphas) {
        const auto p = model(a);
        for (std::size_t k = 0; k < totals.size(); ++k) {
            rows.push_back({{"alpha", a}, {"J", totals[k].to_string()}, {"probability", p[k]}});
        }
    }
    doc["rows"] = std::move(rows);
    out << doc.dump(2) << '\n';
}

inline EstimationReport scenario_report(const ScenarioConfig &cfg) {
    return average_information_gain(cfg.j1, cfg.j2, make_prior(cfg.prior),
                                    make_povm(cfg.povm, cfg.j1, cfg.j2));
}

/// Numbers carry 10 significant digits.
inline void cmd_report(const ScenarioConfig &cfg, std::ostream &out) {
    const EstimationReport report = scenario_report(cfg);
    const auto totals = report.povm.totals();
    if (cfg.format == OutputFormat::csv) {
        out << "label,p,I_bits\n";
        for (const auto &o : report.outcomes) {
            out << o.label << ',' << format_number(o.probability, 10) << ','
                << format_number(o.information_bits, 10) << '\n';
        }
        out << "average,1," << format_number(report.average_information_bits, 10) << '\n';
        return;
    }
    Json doc;
    doc["schema"] = json_schema_version;
    doc["j1"] = cfg.j1.to_string();
    doc["j2"] = cfg.j2.to_string();
    doc["prior"] = to_string(cfg.prior);
    Json povm;
    povm["kind"] = report.povm.name();
    Json elements = Json::array();
    for (std::size_t k = 0; k < report.povm.size(); ++k) {
        Json weights = Json::array();
        for (std::size_t b = 0; b < totals.size(); ++b) {
            weights.push_back(
                {{"J", totals[b].to_string()},
                 {"s", round_significant(report.povm.weights()(static_cast<Eigen::Index>(k),
                                                               static_cast<Eigen::Index>(b)),
                                         10)}});
        }
        elements.push_back({{"label", report.povm.labels()[k]}, {"weights", std::move(weights)}});
    }
    povm["elements"] = std::move(elements);
    doc["povm"] = std::move(povm);
    Json outcomes = Json::array();
    for (const auto &o : report.outcomes) {
        Json e;
        e["label"] = o.label;
        e["p"] = round_significant(o.probability, 10);
        e["I_bits"] = round_significant(o.information_bits, 10);
        e["posterior"] = o.posterior ? posterior_json(*o.posterior, default_grid_points) : Json();
        outcomes.push_back(std::move(e));
    }
    doc["outcomes"] = std::move(outcomes);
    doc["I_av_bits"] = round_significant(report.average_information_bits, 10);
    out << doc.dump(2) << '\n';
}

struct CurveRequest {
    Spin j_min = spin_half;
    Spin j_max = Spin::integer(50);
    Spin j_step = spin_half;
    std::string curves = "abcd";
    OutputFormat format = OutputFormat::csv;
    unsigned threads = 1;
};

inline std::vector<Spin> curve_js(const CurveRequest &req) {
    if (req.j_step.twice() == 0) {
        throw UsageError("--j-step must be positive");
    }
    if (req.j_min.twice() < 1) {
        throw UsageError("--j-min must be at least 1/2");
    }
    std::vector<Spin> js;
    for (int t = req.j_min.twice(); t <= req.j_max.twice(); t += req.j_step.twice()) {
        js.push_back(Spin::from_twice(t));
    }
    if (js.empty()) {
        throw UsageError("empty j range");
    }
    return js;
}

inline void cmd_curve(const CurveRequest &req, std::ostream &out) {
    const auto js = curve_js(req);
    if (req.curves.empty()) {
        throw UsageError("--curves must name at least one of a, b, c, d");
    }
    for (char c : req.curves) {
        if (c < 'a' || c > 'd') {
            throw UsageError(std::string("--curves: unknown curve '") + c + "'");
        }
    }
    Json rows = Json::array();
    if (req.format == OutputFormat::csv) {
        out << "j,I_av_bits,scenario\n";
    }
    for (char c : req.curves) {
        for (const auto &p : infogain_curve(js, curve_scenario(c), req.threads)) {
            if (req.format == OutputFormat::csv) {
                out << p.j.to_string() << ',' << format_number(p.average_information_bits) << ','
                    << c << '\n';
            } else {
                rows.push_back({{"j", p.j.to_string()},
                                {"I_av_bits", p.average_information_bits},
                                {"scenario", std::string(1, c)}});
            }
        }
    }
    if (req.format == OutputFormat::json) {
        Json doc;
        doc["schema"] = json_schema_version;
        doc["rows"] = std::move(rows);
        out << doc.dump(2) << '\n';
    }
}

inline void cmd_ppt(Spin j, OutputFormat format, std::ostream &out) {
    const double x_star = ppt_threshold(j);
    const double predicted = 1.0 / (j.twice() + 2.0);
    const double diff = std::abs(x_star - predicted);
    if (format == OutputFormat::csv) {
        out << "j,x_star,predicted,abs_diff\n"
            << j.to_string() << ',' << format_number(x_star) << ',' << format_number(predicted)
            << ',' << format_number(diff) << '\n';
        return;
    }
    Json doc;
    doc["schema"] = json_schema_version;
    doc["j"] = j.to_string();
    doc["x_star"] = x_star;
    doc["predicted"] = predicted;
    doc["abs_diff"] = diff;
    out << doc.dump(2) << '\n';
}

inline constexpr std::uint64_t default_seed = 0;

inline void cmd_simulate(const ScenarioConfig &cfg, std::size_t n_trials, unsigned threads,
                         std::ostream &out) {
    if (n_trials < 1) {
        throw UsageError("--n must be at least 1");
    }
    const std::uint64_t seed = cfg.seed.value_or(default_seed);
    const ExperimentSummary s =
        run_experiment(cfg.j1, cfg.j2, make_prior(cfg.prior), make_povm(cfg.povm, cfg.j1, cfg.j2),
                       n_trials, seed, threads);
    if (cfg.format == OutputFormat::csv) {
        out << "label,count,frequency,standard_error,analytic_p\n";
        for (std::size_t k = 0; k < s.labels.size(); ++k) {
            out << s.labels[k] << ',' << s.counts[k] << ',' << format_number(s.frequencies[k])
                << ',' << format_number(s.frequency_standard_errors[k]) << ','
                << format_number(s.analytic_probabilities[k]) << '\n';
        }
        return;
    }
    Json doc;
    doc["schema"] = json_schema_version;
    doc["j1"] = cfg.j1.to_string();
    doc["j2"] = cfg.j2.to_string();
    doc["prior"] = to_string(cfg.prior);
    doc["povm"] = to_string(cfg.povm);
    doc["n_trials"] = s.n_trials;
    doc["seed"] = s.seed;
    Json outcomes = Json::array();
    for (std::size_t k = 0; k < s.labels.size(); ++k) {
        outcomes.push_back({{"label", s.labels[k]},
                            {"count", s.counts[k]},
                            {"frequency", s.frequencies[k]},
                            {"standard_error", s.frequency_standard_errors[k]},
                            {"analytic_p", s.analytic_probabilities[k]}});
    }
    doc["outcomes"] = std::move(outcomes);
    doc["mean_I_bits"] = s.mean_information_bits;
    doc["standard_error_bits"] = s.information_standard_error;
    doc["analytic_I_av_bits"] = s.analytic_information_bits;
    out << doc.dump(2) << '\n';
}

/// Parse argv-style arguments (without the program name) and run one command.
inline int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Optimal and local measurements of the relative angle between two spins",
                 "relq"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string format_text;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    app.add_option("--format", format_text, "Output format: csv|json");
    app.add_option("--out", out_path, "Write output to this file instead of stdout");
    app.add_option("--seed", seed, "Random seed (simulate)");

    std::string j1_text = "1/2", j2_text = "1/2", prior_text = "pap", povm_text = "optimal";
    std::string alpha_text;
    auto add_scenario = [&](CLI::App *sub, bool with_alpha) {
        sub->add_option("--j1", j1_text, "First spin, e.g. 1/2, 3, 2.5")->required();
        sub->add_option("--j2", j2_text, "Second spin")->required();
        if (with_alpha) {
            sub->add_option("--alpha", alpha_text, "Single relative angle, e.g. pi/3");
        } else {
            sub->add_option("--prior", prior_text, "Prior over alpha: pap|uniform");
            sub->add_option("--povm", povm_text, "Measurement: optimal|local");
        }
    };

    auto *probs = app.add_subcommand("probs", "Table of p(J | alpha)");
    add_scenario(probs, true);
    int grid_points = default_grid_points;
    probs->add_option("--grid", grid_points, "Number of alpha grid points over [0, pi]");

    auto *report = app.add_subcommand("report", "Posteriors and information gains");
    add_scenario(report, false);

    auto *curve = app.add_subcommand("curve", "Average information gain versus j");
    std::string j_min_text = "1/2", j_max_text = "50", j_step_text = "1/2", curves_text = "abcd";
    unsigned threads = 1;
    curve->add_option("--j-min", j_min_text, "Smallest j");
    curve->add_option("--j-max", j_max_text, "Largest j");
    curve->add_option("--j-step", j_step_text, "Step in j");
    curve->add_option("--curves", curves_text, "Subset of abcd");
    curve->add_option("--threads", threads, "Worker threads");

    auto *ppt = app.add_subcommand("ppt", "PPT threshold of Pi_- + x Pi_+ on spin-1/2 x spin-j");
    std::string j_text;
    ppt->add_option("--j", j_text, "The large spin j")->required();

    auto *simulate = app.add_subcommand("simulate", "Monte Carlo single-shot experiments");
    add_scenario(simulate, false);
    std::size_t n_trials = 100000;
    simulate->add_option("--n", n_trials, "Number of trials");
    simulate->add_option("--threads", threads, "Worker threads");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError &e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return exit_ok;
        }
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }

    std::ofstream file;
    std::ostream *sink = &out;
    try {
        if (!out_path.empty()) {
            file.open(out_path, std::ios::binary);
            if (!file) {
                throw UsageError("cannot open --out file '" + out_path + "'");
            }
            sink = &file;
        }
        sink->imbue(std::locale::classic());

        auto format_or = [&](OutputFormat fallback) {
            return format_text.empty() ? fallback : parse_format(format_text);
        };
        auto scenario = [&](OutputFormat fallback) {
            ScenarioConfig c;
            c.j1 = parse_spin(j1_text, "--j1");
            c.j2 = parse_spin(j2_text, "--j2");
            c.prior = parse_prior(prior_text);
            c.povm = parse_povm(povm_text);
            c.format = format_or(fallback);
            c.seed = seed;
            if (!alpha_text.empty()) {
                c.alpha = parse_angle(alpha_text);
            }
            return c;
        };

        if (probs->parsed()) {
            cmd_probs(scenario(OutputFormat::csv), *sink, grid_points);
        } else if (report->parsed()) {
            cmd_report(scenario(OutputFormat::json), *sink);
        } else if (curve->parsed()) {
            CurveRequest req;
            req.j_min = parse_spin(j_min_text, "--j-min");
            req.j_max = parse_spin(j_max_text, "--j-max");
            req.j_step = parse_spin(j_step_text, "--j-step");
            req.curves = curves_text;
            req.format = format_or(OutputFormat::csv);
            req.threads = threads;
            cmd_curve(req, *sink);
        } else if (ppt->parsed()) {
            cmd_ppt(parse_spin(j_text, "--j"), format_or(OutputFormat::json), *sink);
        } else if (simulate->parsed()) {
            cmd_simulate(scenario(OutputFormat::json), n_trials, threads, *sink);
        }
        sink->flush();
    } catch (const ConsistencyError &e) {
        err << "internal error: " << e.what() << '\n';
        return exit_internal;
    } catch (const Error &e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception &e) {
        err << "internal error: " << e.what() << '\n';
        return exit_internal;
    }
    return exit_ok;
}

inline int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    return run(args, out, err);
}

} // namespace relq::cli
