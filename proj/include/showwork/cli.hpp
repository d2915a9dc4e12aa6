#pragma once

// `showwork <subcommand> [flags]` front end.
//
// Exit status: 0 success, 1 semantic error, 2 input or parse error.
// Outputs are chosen by file extension (.csv, .json, .md, .svg, .jsonl);
// "-" writes CSV, JSON or markdown to standard output.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "showwork/showwork.hpp"

namespace showwork::cli {

namespace fs = std::filesystem;

namespace detail {

inline std::string extension_of(const std::string& path) {
    if (path == "-") return "-";
    auto ext = fs::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_output(const std::string& path, const std::string& content, std::ostream& out) {
    if (path == "-") {
        out << content;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot write '" + path + "'");
    f << content;
}

inline Json parse_json_file(const std::string& path) {
    const auto text = read_file(path);
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError("'" + path + "': malformed JSON: " + e.what());
    }
}

struct TrialInput {
    std::string path;
    std::string format;  // empty: by extension
    std::string metric = "accuracy";
    bool lower_is_better = false;

    void add_to(CLI::App* cmd) {
        cmd->add_option("-i,--input", path, "Trial log (JSONL or CSV)")->required();
        cmd->add_option("--format", format, "Log format; defaults to csv for .csv files, jsonl otherwise")
            ->check(CLI::IsMember({"jsonl", "csv"}));
        cmd->add_option("--metric", metric, "Name of the validation metric")->capture_default_str();
        cmd->add_flag("--lower-is-better", lower_is_better, "Metric is a loss: smaller values are better");
    }

    std::vector<FamilyRun> load() const {
        IngestOptions opts;
        const auto fmt = format.empty() ? (extension_of(path) == ".csv" ? "csv" : "jsonl") : format;
        opts.format = fmt == "csv" ? LogFormat::csv : LogFormat::jsonl;
        opts.metric_name = metric;
        opts.higher_is_better = !lower_is_better;
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ParseError("cannot read '" + path + "'");
        auto runs = ingest_trials(in, opts);
        if (runs.empty()) throw ParseError("'" + path + "': no trials");
        return runs;
    }
};

inline std::string available(const std::vector<FamilyRun>& runs) {
    std::string s;
    for (const auto& r : runs) s += (s.empty() ? "" : ", ") + r.model_family;
    return s;
}

/// Runs named by `names` (all runs when empty), in the order requested.
inline std::vector<FamilyRun> select(const std::vector<FamilyRun>& runs, const std::vector<std::string>& names) {
    if (names.empty()) return runs;
    std::vector<FamilyRun> out;
    for (const auto& n : names) {
        const auto* r = find_family(runs, n);
        if (!r) throw DomainError("unknown family '" + n + "'; available families: " + available(runs));
        out.push_back(*r);
    }
    return out;
}

struct AxisFlags {
    std::string axis = "trials";
    double rate = 0.0;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--axis", axis, "Budget axis")
            ->check(CLI::IsMember({"trials", "seconds", "currency"}))
            ->capture_default_str();
        cmd->add_option("--rate", rate, "Currency per second of training, for --axis currency");
    }

    BudgetAxis for_run(const FamilyRun& run) const {
        switch (parse_budget_unit(axis)) {
            case BudgetUnit::trials: return BudgetAxis::trials();
            case BudgetUnit::seconds: return BudgetAxis::seconds(mean_duration(run));
            case BudgetUnit::currency: return BudgetAxis::currency(mean_duration(run), rate);
        }
        return BudgetAxis::trials();
    }
};

struct FigureFlags {
    bool band = false, no_band = false, log_x = false;
    std::vector<std::string> references;

    void add_to(CLI::App* cmd) {
        cmd->add_flag("--band", band, "Shade expected performance +/- 1 std (clipped to the observed range)");
        cmd->add_flag("--no-band", no_band, "Do not shade the spread");
        cmd->add_flag("--log-x", log_x, "Logarithmic budget axis");
        cmd->add_option("--reference", references, "Horizontal dashed reference line <value:label>");
    }

    FigureOptions options() const {
        FigureOptions o;
        if (band && no_band) throw ParseError("--band and --no-band are mutually exclusive");
        if (band) o.band = true;
        if (no_band) o.band = false;
        o.log_x = log_x;
        for (const auto& r : references) o.references.push_back(parse_reference(r));
        return o;
    }
};

inline std::string curves_csv(const std::vector<ExpectedMaxCurve>& curves) {
    std::ostringstream ss;
    for (const auto& c : curves) write_curve_csv(ss, c);
    return ss.str();
}

inline std::string curves_json(const std::vector<ExpectedMaxCurve>& curves) {
    Json arr = Json::array();
    for (const auto& c : curves) arr.push_back(curve_to_json(c));
    return arr.dump(2) + "\n";
}

inline std::vector<ExpectedMaxCurve> curves_of(const std::vector<FamilyRun>& runs) {
    std::vector<ExpectedMaxCurve> out;
    for (const auto& r : runs) out.push_back(build_curve(r));
    return out;
}

inline std::vector<BudgetAxis> axes_of(const std::vector<FamilyRun>& runs, const AxisFlags& flags) {
    std::vector<BudgetAxis> out;
    for (const auto& r : runs) out.push_back(flags.for_run(r));
    return out;
}

}  // namespace detail

// --- subcommands ------------------------------------------------------------

struct IngestCmd {
    detail::TrialInput input;
    std::string out;

    int run(std::ostream& os) const {
        const auto runs = input.load();
        os << "family,N,min,max,mean,mean_duration_seconds\n";
        for (const auto& r : runs) {
            const auto s = family_summary(r);
            os << r.model_family << ',' << s.count << ',' << format_g17(s.min) << ',' << format_g17(s.max) << ','
               << format_g17(s.mean) << ',' << format_g17(s.mean_duration_seconds) << '\n';
        }
        if (!out.empty()) {
            std::ostringstream ss;
            write_jsonl(ss, runs);
            detail::write_output(out, ss.str(), os);
        }
        return 0;
    }
};

struct CurveCmd {
    detail::TrialInput input;
    std::vector<std::string> families;
    std::vector<std::string> outs;
    detail::AxisFlags axis;
    detail::FigureFlags figure;

    int run(std::ostream& os) const {
        const auto runs = detail::select(input.load(), families);
        const auto curves = detail::curves_of(runs);
        const auto targets = outs.empty() ? std::vector<std::string>{"-"} : outs;
        for (const auto& path : targets) {
            const auto ext = detail::extension_of(path);
            if (ext == "-" || ext == ".csv") {
                detail::write_output(path, detail::curves_csv(curves), os);
            } else if (ext == ".json") {
                detail::write_output(path, detail::curves_json(curves), os);
            } else if (ext == ".svg") {
                const auto axes = detail::axes_of(runs, axis);
                detail::write_output(path, render_curve_figure(curves, axes, figure.options()), os);
            } else {
                throw ParseError("unsupported output '" + path + "' for curve (use .csv, .json or .svg)");
            }
        }
        return 0;
    }
};

struct CompareCmd {
    detail::TrialInput input;
    std::vector<std::string> families;
    std::vector<std::string> outs;
    bool strict = false;
    double tie_epsilon = kDefaultTieEpsilon;
    detail::AxisFlags axis;
    detail::FigureFlags figure;

    int run(std::ostream& os, std::ostream& es) const {
        const auto all = input.load();
        const auto runs = detail::select(all, families);
        if (runs.size() < 2)
            throw DomainError("compare needs at least two families; available families: " + detail::available(all));
        const auto curves = detail::curves_of(runs);

        Json verdict_json;
        std::vector<double> crossover_marks;
        std::vector<std::string> warnings;
        if (axis.axis == "trials") {
            auto v = compare_families(curves, tie_epsilon);
            verdict_json = verdict_to_json(v);
            crossover_marks.assign(v.crossovers.begin(), v.crossovers.end());
            warnings = v.warnings;
        } else {
            std::vector<double> scales;
            for (const auto& a : detail::axes_of(runs, axis)) scales.push_back(a.scale_per_trial);
            auto v = compare_families_on_axis(curves, scales, parse_budget_unit(axis.axis), tie_epsilon);
            verdict_json = verdict_to_json(v, curves);
            crossover_marks = v.crossovers;
            warnings = v.warnings;
        }
        for (const auto& w : warnings) es << "warning: " << w << '\n';
        if (strict && !warnings.empty()) {
            es << "error: --strict comparison refused because of unequal budgets\n";
            return 1;
        }

        const auto targets = outs.empty() ? std::vector<std::string>{"-"} : outs;
        for (const auto& path : targets) {
            const auto ext = detail::extension_of(path);
            if (ext == "-" || ext == ".json") {
                detail::write_output(path, verdict_json.dump(2) + "\n", os);
            } else if (ext == ".svg") {
                auto opts = figure.options();
                opts.crossovers = crossover_marks;
                detail::write_output(path, render_curve_figure(curves, detail::axes_of(runs, axis), opts), os);
            } else {
                throw ParseError("unsupported output '" + path + "' for compare (use .json or .svg)");
            }
        }
        return 0;
    }
};

struct BudgetCmd {
    detail::TrialInput input;
    std::vector<std::string> families;
    double target = 0.0;
    detail::AxisFlags axis;
    std::string time_mode = "mean";

    int run(std::ostream& os) const {
        const auto runs = detail::select(input.load(), families);
        const auto unit = parse_budget_unit(axis.axis);
        for (const auto& run : runs) {
            const auto curve = build_curve(run);
            const auto n = min_budget_for_target(curve, target);
            os << run.model_family << ": ";
            if (!n) {
                os << "unreachable at N=" << curve.max_budget() << '\n';
                continue;
            }
            os << *n << " trials";
            const double mean = family_summary(run).mean_duration_seconds;
            if (unit != BudgetUnit::trials || mean > 0.0) {
                double seconds = 0.0;
                if (time_mode == "cumulative") {
                    seconds = to_time_axis(curve, run, TimeMode::cumulative)[static_cast<std::size_t>(*n - 1)].budget;
                } else {
                    seconds = BudgetAxis::seconds(mean_duration(run)).to_units(*n);
                }
                if (unit == BudgetUnit::currency) {
                    if (!(axis.rate > 0.0)) throw DomainError("--axis currency needs a positive --rate");
                    os << " = " << format_shortest(seconds * axis.rate) << " currency";
                } else {
                    os << " = " << format_shortest(seconds) << " seconds";
                }
            }
            os << '\n';
        }
        return 0;
    }
};

struct BootstrapCheckCmd {
    detail::TrialInput input;
    std::string family;
    std::int64_t n = 0;
    std::int64_t resamples = kDefaultBootstrapResamples;
    std::uint64_t seed = 0;
    std::vector<std::int64_t> schedule{100, 1000, 10000, 100000};
    unsigned threads = 1;
    std::string out;

    int run(std::ostream& os) const {
        const auto runs = input.load();
        const FamilyRun* run = nullptr;
        if (family.empty()) {
            if (runs.size() != 1)
                throw DomainError("log has several families; pick one with --family (available: " +
                                  detail::available(runs) + ")");
            run = &runs.front();
        } else {
            run = find_family(runs, family);
            if (!run) throw DomainError("unknown family '" + family + "'; available families: " + detail::available(runs));
        }
        const auto est = bootstrap_expected_max(*run, n, resamples, seed, threads);
        const auto profile = bootstrap_error_profile(*run, n, schedule, seed, threads);

        os << "family: " << run->model_family << '\n'
           << "n: " << n << '\n'
           << "K: " << resamples << '\n'
           << "seed: " << seed << '\n'
           << "closed_form: " << format_g17(profile.closed_form) << '\n'
           << "closed_form_resampling_error: " << format_g17(profile.closed_form_resampling_error) << '\n'
           << "bootstrap_mean: " << format_g17(est.mean_of_max) << '\n'
           << "bootstrap_std: " << format_g17(est.std_of_max) << '\n'
           << "abs_gap: " << format_g17(std::abs(est.mean_of_max - profile.closed_form)) << '\n';

        std::string csv = "K,abs_error\n";
        for (const auto& row : profile.rows) csv += std::to_string(row.resamples) + "," + format_g17(row.abs_error) + "\n";
        if (out.empty() || out == "-") os << csv;
        else detail::write_output(out, csv, os);
        return 0;
    }
};

struct SynthCmd {
    std::string space_path;
    std::string objective_path;
    std::string recipe;
    std::optional<double> constant;
    std::int64_t budget = 0;
    std::uint64_t seed = 0;
    std::string family = "model";
    std::string metric = "accuracy";
    bool lower_is_better = false;
    double duration = 1.0;
    std::vector<double> lognormal;
    std::string out = "-";

    int run(std::ostream& os) const {
        std::vector<FamilyRun> runs;
        if (!recipe.empty()) {
            if (recipe != "crossing") throw ParseError("unknown recipe '" + recipe + "' (available: crossing)");
            auto pair = recipes::crossing_pair();
            pair.seed = seed;
            if (budget > 0) pair.budget = budget;
            runs = recipes::run_recipe(pair);
        } else {
            if (space_path.empty()) throw ParseError("synth needs --space or --recipe");
            if (budget < 1) throw ParseError("synth needs --budget >= 1");
            const auto space = space_from_json(detail::parse_json_file(space_path));
            SyntheticObjective objective = ConstantObjective{0.0};
            if (constant) objective = ConstantObjective{*constant};
            else if (!objective_path.empty()) objective = objective_from_json(detail::parse_json_file(objective_path));
            else throw ParseError("synth needs --objective or --constant");

            SearchOptions opts;
            opts.model_family = family;
            opts.metric_name = metric;
            opts.higher_is_better = !lower_is_better;
            if (!lognormal.empty()) {
                if (lognormal.size() != 2) throw ParseError("--duration-lognormal expects mu,sigma");
                opts.duration = LogNormalDuration{lognormal[0], lognormal[1]};
            } else {
                if (!(duration >= 0.0)) throw ParseError("--duration must be >= 0");
                opts.duration = ConstantDuration{duration};
            }
            runs.push_back(run_random_search(space, objective, budget, seed, opts));
        }
        std::ostringstream ss;
        write_jsonl(ss, runs);
        detail::write_output(out, ss.str(), os);
        return 0;
    }
};

struct ReportCmd {
    std::string config;
    std::string audit_dir;
    std::string out = "-";
    std::string format;

    static std::vector<fs::path> report_files(const std::string& dir) {
        if (!fs::is_directory(dir)) throw ParseError("'" + dir + "' is not a directory");
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        return files;
    }

    static ChecklistReport load(const std::string& path) {
        try {
            return report_from_json(detail::parse_json_file(path));
        } catch (const ParseError& e) {
            throw ParseError("'" + path + "': " + e.what());
        }
    }

    int run(std::ostream& os) const {
        const auto ext = detail::extension_of(out);
        std::string fmt = format;
        if (fmt.empty()) fmt = ext == ".json" ? "json" : "markdown";
        if (ext != "-" && ext != ".json" && ext != ".md")
            throw ParseError("unsupported output '" + out + "' for report (use .md or .json)");

        if (!audit_dir.empty()) {
            std::vector<ChecklistReport> reports;
            std::vector<std::string> names;
            for (const auto& f : report_files(audit_dir)) {
                reports.push_back(load(f.string()));
                names.push_back(f.filename().string());
            }
            if (reports.empty()) throw DomainError("no .json reports in '" + audit_dir + "'");
            const auto audit = audit_reports(reports);
            detail::write_output(out, fmt == "json" ? audit_to_json(audit, names).dump(2) + "\n" : audit_to_markdown(audit),
                                 os);
            return 0;
        }
        if (config.empty()) throw ParseError("report needs --config or --audit");
        const auto report = load(config);
        detail::write_output(out,
                             render_checklist(report, fmt == "json" ? DocumentFormat::json : DocumentFormat::markdown),
                             os);
        return 0;
    }
};

/// Parses `args` (without the program name) and runs one subcommand.
inline int run(const std::vector<std::string>& args, std::ostream& os = std::cout, std::ostream& es = std::cerr) {
    CLI::App app{"Budget-aware expected validation performance from hyperparameter search logs", "showwork"};
    app.set_version_flag("--version", std::string("showwork ") + kVersion);
    app.require_subcommand(1);

    IngestCmd ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Validate a trial log and summarize each family");
    ingest.input.add_to(c_ingest);
    c_ingest->add_option("-o,--out", ingest.out, "Write the normalized log as JSONL");

    CurveCmd curve;
    auto* c_curve = app.add_subcommand("curve", "Expected best validation performance for n = 1..N");
    curve.input.add_to(c_curve);
    c_curve->add_option("-f,--family", curve.families, "Families to include (default: all)");
    c_curve->add_option("-o,--out", curve.outs, "Output files (.csv, .json, .svg) or - for CSV on stdout");
    curve.axis.add_to(c_curve);
    curve.figure.add_to(c_curve);

    CompareCmd compare;
    auto* c_compare = app.add_subcommand("compare", "Which family is best at each budget");
    compare.input.add_to(c_compare);
    c_compare->add_option("-f,--family", compare.families, "Families to compare (default: all)");
    c_compare->add_option("-o,--out", compare.outs, "Outputs (.json verdict, .svg overlay) or - for JSON");
    c_compare->add_flag("--strict", compare.strict, "Fail when families were searched with unequal budgets");
    c_compare->add_option("--tie-epsilon", compare.tie_epsilon, "Largest difference treated as a tie")
        ->capture_default_str();
    compare.axis.add_to(c_compare);
    compare.figure.add_to(c_compare);

    BudgetCmd budget;
    auto* c_budget = app.add_subcommand("budget", "Smallest budget whose expected performance reaches a target");
    budget.input.add_to(c_budget);
    c_budget->add_option("-f,--family", budget.families, "Families to report (default: all)");
    c_budget->add_option("-t,--target", budget.target, "Target validation performance")->required();
    budget.axis.add_to(c_budget);
    c_budget->add_option("--time-mode", budget.time_mode, "Seconds from mean duration or cumulative logged durations")
        ->check(CLI::IsMember({"mean", "cumulative"}))
        ->capture_default_str();

    BootstrapCheckCmd boot;
    auto* c_boot = app.add_subcommand("bootstrap-check", "Compare the closed form with a bootstrap estimate");
    boot.input.add_to(c_boot);
    c_boot->add_option("-f,--family", boot.family, "Family to check (required when the log has several)");
    c_boot->add_option("-n,--n", boot.n, "Budget n")->required();
    c_boot->add_option("--bootstrap-k", boot.resamples, "Bootstrap resamples K")->capture_default_str();
    c_boot->add_option("--seed", boot.seed, "Random seed")->required();
    c_boot->add_option("--schedule", boot.schedule, "Increasing K values for the error profile")
        ->delimiter(',')
        ->capture_default_str();
    c_boot->add_option("--threads", boot.threads, "Worker threads (output does not depend on this)")
        ->capture_default_str();
    c_boot->add_option("-o,--out", boot.out, "Write the error profile CSV here instead of stdout");

    SynthCmd synth;
    auto* c_synth = app.add_subcommand("synth", "Generate a random-search trial log from a synthetic objective");
    c_synth->add_option("--space", synth.space_path, "Search-space JSON file");
    c_synth->add_option("--objective", synth.objective_path, "Objective JSON file");
    c_synth->add_option("--constant", synth.constant, "Constant objective value");
    c_synth->add_option("--recipe", synth.recipe, "Shipped multi-family recipe (crossing)");
    c_synth->add_option("-B,--budget", synth.budget, "Number of trials");
    c_synth->add_option("--seed", synth.seed, "Random seed")->required();
    c_synth->add_option("-f,--family", synth.family, "Model family name")->capture_default_str();
    c_synth->add_option("--metric", synth.metric, "Metric name")->capture_default_str();
    c_synth->add_flag("--lower-is-better", synth.lower_is_better, "Metric is a loss");
    c_synth->add_option("--duration", synth.duration, "Constant training duration in seconds")->capture_default_str();
    c_synth->add_option("--duration-lognormal", synth.lognormal, "Log-normal durations: mu,sigma")->delimiter(',');
    c_synth->add_option("-o,--out", synth.out, "Output JSONL file or -")->capture_default_str();

    ReportCmd report;
    auto* c_report = app.add_subcommand("report", "Render an experimental-results checklist or audit a set of them");
    c_report->add_option("-c,--config", report.config, "Checklist JSON");
    c_report->add_option("--audit", report.audit_dir, "Directory of checklist JSON files to audit");
    c_report->add_option("-o,--out", report.out, "Output (.md, .json or -)")->capture_default_str();
    c_report->add_option("--format", report.format, "Override the output format")
        ->check(CLI::IsMember({"json", "markdown"}));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, os, es);
        return code == 0 ? 0 : 2;
    }

    try {
        if (c_ingest->parsed()) return ingest.run(os);
        if (c_curve->parsed()) return curve.run(os);
        if (c_compare->parsed()) return compare.run(os, es);
        if (c_budget->parsed()) return budget.run(os);
        if (c_boot->parsed()) return boot.run(os);
        if (c_synth->parsed()) return synth.run(os);
        if (c_report->parsed()) return report.run(os);
    } catch (const ParseError& e) {
        es << "error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        es << "error: " << e.what() << '\n';
        return 1;
    } catch (const Json::exception& e) {
        es << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

}  // namespace showwork::cli
