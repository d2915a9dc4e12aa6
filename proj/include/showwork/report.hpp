#pragma once

// Experimental-results checklist documents and checklist coverage audits.
//
// Every checklist field is optional: an absent value means "not reported",
// which is different from an empty string. In JSON, not-reported fields are
// written as null.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "showwork/error.hpp"
#include "showwork/estimator.hpp"
#include "showwork/format.hpp"
#include "showwork/sampler.hpp"
#include "showwork/trial_data.hpp"

namespace showwork {

inline const std::string kNotReported = "not reported";

/// Path to a curve file, or the curve itself.
using CurveReference = std::variant<std::string, ExpectedMaxCurve>;

struct ChecklistReport {
    std::optional<std::string> title;
    std::optional<std::string> computing_infrastructure;
    std::optional<double> average_runtime_seconds;
    /// Description of the train/validation/test splits.
    std::optional<std::string> data_splits;
    std::optional<double> validation_performance_for_test;
    std::optional<std::string> code_link;
    std::optional<SearchSpace> search_bounds;
    std::optional<HyperparameterValue> best_assignment;
    std::optional<std::int64_t> num_trials;
    std::optional<std::string> search_method;
    std::optional<std::string> selection_criterion;
    std::optional<std::string> metric_name;
    std::optional<double> best_validation_performance;
    std::optional<CurveReference> curve;
};

/// Throws DomainError when an embedded curve disagrees with num_trials.
inline void validate(const ChecklistReport& r) {
    if (r.num_trials && *r.num_trials < 1) throw DomainError("num_trials must be >= 1");
    if (r.curve) {
        if (const auto* c = std::get_if<ExpectedMaxCurve>(&*r.curve)) {
            if (!r.num_trials) throw DomainError("num_trials is required when a curve is embedded");
            if (c->max_budget() != *r.num_trials)
                throw DomainError("embedded curve has " + std::to_string(c->max_budget()) +
                                  " points but num_trials is " + std::to_string(*r.num_trials));
        }
    }
}

// --- JSON -------------------------------------------------------------------

inline Json curve_to_json(const ExpectedMaxCurve& c) {
    Json pts = Json::array();
    for (const auto& p : c.points) pts.push_back({{"n", p.n}, {"expected_max", p.expected_max}, {"std", p.std}});
    return {{"family", c.family},
            {"higher_is_better", c.higher_is_better},
            {"observed_min", c.observed_min},
            {"observed_max", c.observed_max},
            {"points", std::move(pts)}};
}

inline ExpectedMaxCurve curve_from_json(const Json& j) {
    auto fail = [](const std::string& what) { throw ParseError("field 'curve': " + what); };
    if (!j.is_object()) fail("expected a path string or a curve object");
    ExpectedMaxCurve c;
    try {
        c.family = j.at("family").get<std::string>();
        c.higher_is_better = j.value("higher_is_better", true);
        c.observed_min = j.at("observed_min").get<double>();
        c.observed_max = j.at("observed_max").get<double>();
        for (const auto& p : j.at("points")) {
            c.points.push_back({p.at("n").get<std::int64_t>(), p.at("expected_max").get<double>(),
                                p.at("std").get<double>()});
            if (c.points.back().n != static_cast<std::int64_t>(c.points.size())) fail("points must run n = 1..N");
        }
    } catch (const Json::exception& e) {
        fail(e.what());
    }
    return c;
}

inline Json report_to_json(const ChecklistReport& r) {
    auto opt = [](const auto& o) -> Json { return o ? Json(*o) : Json(nullptr); };
    Json j = Json::object();
    j["title"] = opt(r.title);
    j["computing_infrastructure"] = opt(r.computing_infrastructure);
    j["average_runtime_seconds"] = opt(r.average_runtime_seconds);
    j["data_splits"] = opt(r.data_splits);
    j["validation_performance_for_test"] = opt(r.validation_performance_for_test);
    j["code_link"] = opt(r.code_link);
    j["search_bounds"] = r.search_bounds ? space_to_json(*r.search_bounds) : Json(nullptr);
    if (r.best_assignment) {
        Json hp = Json::object();
        for (const auto& [k, v] : r.best_assignment->entries()) hp[k] = scalar_to_json(v);
        j["best_assignment"] = std::move(hp);
    } else {
        j["best_assignment"] = nullptr;
    }
    j["num_trials"] = opt(r.num_trials);
    j["search_method"] = opt(r.search_method);
    j["selection_criterion"] = opt(r.selection_criterion);
    j["metric_name"] = opt(r.metric_name);
    j["best_validation_performance"] = opt(r.best_validation_performance);
    if (!r.curve) j["curve"] = nullptr;
    else if (const auto* path = std::get_if<std::string>(&*r.curve)) j["curve"] = *path;
    else j["curve"] = curve_to_json(std::get<ExpectedMaxCurve>(*r.curve));
    return j;
}

/// Parses a full or partial report. Missing or null fields are not reported.
/// Throws ParseError naming the field on type mismatches or unknown fields.
inline ChecklistReport report_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("checklist report: expected a JSON object");
    auto bad = [](const std::string& field, const std::string& what) {
        throw ParseError("field '" + field + "': " + what);
    };
    auto present = [&](const char* f) { return j.contains(f) && !j[f].is_null(); };
    auto str = [&](const char* f) -> std::optional<std::string> {
        if (!present(f)) return std::nullopt;
        if (!j[f].is_string()) bad(f, "must be a string");
        return j[f].get<std::string>();
    };
    auto num = [&](const char* f) -> std::optional<double> {
        if (!present(f)) return std::nullopt;
        if (!j[f].is_number()) bad(f, "must be a number");
        return j[f].get<double>();
    };

    static constexpr std::string_view known[] = {
        "title", "computing_infrastructure", "average_runtime_seconds", "data_splits",
        "validation_performance_for_test", "code_link", "search_bounds", "best_assignment", "num_trials",
        "search_method", "selection_criterion", "metric_name", "best_validation_performance", "curve"};
    for (const auto& [key, _] : j.items())
        if (std::find(std::begin(known), std::end(known), key) == std::end(known)) bad(key, "unknown field");

    ChecklistReport r;
    r.title = str("title");
    r.computing_infrastructure = str("computing_infrastructure");
    r.average_runtime_seconds = num("average_runtime_seconds");
    r.data_splits = str("data_splits");
    r.validation_performance_for_test = num("validation_performance_for_test");
    r.code_link = str("code_link");
    if (present("search_bounds")) {
        try {
            r.search_bounds = space_from_json(j["search_bounds"]);
        } catch (const ParseError& e) {
            bad("search_bounds", e.what());
        }
    }
    if (present("best_assignment")) {
        if (!j["best_assignment"].is_object()) bad("best_assignment", "must be an object");
        HyperparameterValue h;
        for (const auto& [k, v] : j["best_assignment"].items()) {
            auto s = scalar_from_json(v);
            if (!s) bad("best_assignment." + k, "must be a scalar");
            try {
                h.set(k, *s);
            } catch (const DomainError& e) {
                bad("best_assignment", e.what());
            }
        }
        r.best_assignment = std::move(h);
    }
    if (present("num_trials")) {
        if (!j["num_trials"].is_number_integer()) bad("num_trials", "must be an integer");
        r.num_trials = j["num_trials"].get<std::int64_t>();
    }
    r.search_method = str("search_method");
    r.selection_criterion = str("selection_criterion");
    r.metric_name = str("metric_name");
    r.best_validation_performance = num("best_validation_performance");
    if (present("curve")) {
        if (j["curve"].is_string()) r.curve = j["curve"].get<std::string>();
        else r.curve = curve_from_json(j["curve"]);
    }
    try {
        validate(r);
    } catch (const DomainError& e) {
        throw ParseError(std::string("field 'num_trials': ") + e.what());
    }
    return r;
}

// --- markdown ---------------------------------------------------------------

namespace detail {

inline std::string md_cell(std::string s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += "\\|";
        else if (c == '\n') out += ' ';
        else out += c;
    }
    return out;
}

inline std::string or_not_reported(const std::optional<std::string>& s) { return s ? md_cell(*s) : kNotReported; }

inline std::string or_not_reported(const std::optional<double>& v) {
    return v ? format_shortest(*v) : kNotReported;
}

}  // namespace detail

/// Markdown laid out as a search-space table: a header table of
/// reporting items, the per-hyperparameter table of search space and best
/// assignment, and the expected-performance table when a curve is embedded.
inline std::string render_markdown(const ChecklistReport& r) {
    using detail::md_cell;
    using detail::or_not_reported;
    std::string md = "# Experimental results checklist";
    if (r.title) md += ": " + md_cell(*r.title);
    md += "\n\n| Item | Value |\n| --- | --- |\n";
    auto row = [&](const std::string& k, const std::string& v) { md += "| " + k + " | " + v + " |\n"; };

    const std::string metric = r.metric_name ? md_cell(*r.metric_name) : "accuracy";
    row("Computing infrastructure", or_not_reported(r.computing_infrastructure));
    row("Number of search trials", r.num_trials ? std::to_string(*r.num_trials) : kNotReported);
    row("Search strategy", or_not_reported(r.search_method));
    row("Selection criterion", or_not_reported(r.selection_criterion));
    row("Best validation " + metric, or_not_reported(r.best_validation_performance));
    row("Training duration",
        r.average_runtime_seconds ? format_shortest(*r.average_runtime_seconds) + " sec" : kNotReported);
    row("Model implementation", or_not_reported(r.code_link));
    row("Data splits", or_not_reported(r.data_splits));
    row("Validation " + metric + " of reported test result", or_not_reported(r.validation_performance_for_test));
    std::string curve_cell = kNotReported;
    if (r.curve) {
        if (const auto* path = std::get_if<std::string>(&*r.curve)) curve_cell = md_cell(*path);
        else curve_cell = "embedded below (" + std::to_string(std::get<ExpectedMaxCurve>(*r.curve).points.size()) +
                          " budgets)";
    }
    row("Expected validation performance", curve_cell);

    md += "\n| Hyperparameter | Search space | Best assignment |\n| --- | --- | --- |\n";
    std::vector<std::string> names;
    if (r.search_bounds)
        for (const auto& [name, _] : r.search_bounds->dimensions()) names.push_back(name);
    if (r.best_assignment)
        for (const auto& [name, _] : r.best_assignment->entries())
            if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
    if (names.empty()) md += "| " + kNotReported + " | " + kNotReported + " | " + kNotReported + " |\n";
    for (const auto& name : names) {
        const Domain* d = r.search_bounds ? r.search_bounds->find(name) : nullptr;
        const Scalar* best = r.best_assignment ? r.best_assignment->find(name) : nullptr;
        md += "| " + md_cell(name) + " | " + (d ? md_cell(describe_domain(*d)) : kNotReported) + " | " +
              (best ? md_cell(scalar_to_string(*best)) : kNotReported) + " |\n";
    }

    if (r.curve) {
        if (const auto* c = std::get_if<ExpectedMaxCurve>(&*r.curve)) {
            md += "\n## Expected validation " + metric + " by budget\n\n| n | expected | std |\n| --- | --- | --- |\n";
            for (const auto& p : c->points)
                md += "| " + std::to_string(p.n) + " | " + format_g17(p.expected_max) + " | " + format_g17(p.std) +
                      " |\n";
        }
    }
    return md;
}

enum class DocumentFormat { json, markdown };

inline std::string render_checklist(const ChecklistReport& r, DocumentFormat format) {
    validate(r);
    if (format == DocumentFormat::json) return report_to_json(r).dump(2) + "\n";
    return render_markdown(r);
}

// --- audit ------------------------------------------------------------------

struct ChecklistItem {
    std::string key;
    std::string label;
};

/// Audited items in their canonical order.
inline const std::vector<ChecklistItem>& checklist_items() {
    static const std::vector<ChecklistItem> items = {
        {"data_splits", "Reports train/validation/test splits"},
        {"best_assignment", "Reports best hyperparameter assignments"},
        {"code_link", "Reports code"},
        {"validation_performance", "Reports dev accuracy"},
        {"computing_infrastructure", "Reports computing infrastructure"},
        {"average_runtime", "Reports empirical runtime"},
        {"search_method", "Reports search strategy"},
        {"expected_performance", "Reports score distribution"},
        {"num_trials", "Reports number of hyperparameter trials"},
        {"search_bounds", "Reports hyperparameter search bounds"},
    };
    return items;
}

/// Whether `r` reports item `key`: present and non-empty.
inline bool reports_item(const ChecklistReport& r, std::string_view key) {
    auto text = [](const std::optional<std::string>& s) { return s && !s->empty(); };
    if (key == "data_splits") return text(r.data_splits);
    if (key == "best_assignment") return r.best_assignment && !r.best_assignment->empty();
    if (key == "code_link") return text(r.code_link);
    if (key == "validation_performance") return r.validation_performance_for_test.has_value();
    if (key == "computing_infrastructure") return text(r.computing_infrastructure);
    if (key == "average_runtime") return r.average_runtime_seconds.has_value();
    if (key == "search_method") return text(r.search_method);
    if (key == "expected_performance") {
        if (!r.curve) return false;
        if (const auto* p = std::get_if<std::string>(&*r.curve)) return !p->empty();
        return !std::get<ExpectedMaxCurve>(*r.curve).points.empty();
    }
    if (key == "num_trials") return r.num_trials && *r.num_trials >= 1;
    if (key == "search_bounds") return r.search_bounds && !r.search_bounds->empty();
    throw DomainError("unknown checklist item '" + std::string(key) + "'");
}

struct ItemAudit {
    ChecklistItem item;
    std::vector<bool> present;  // one flag per audited report
    std::size_t count = 0;
    double percentage = 0.0;
};

struct AuditResult {
    std::size_t report_count = 0;
    std::vector<ItemAudit> items;
};

inline AuditResult audit_reports(std::span<const ChecklistReport> reports) {
    if (reports.empty()) throw DomainError("audit needs at least one report");
    AuditResult out;
    out.report_count = reports.size();
    for (const auto& item : checklist_items()) {
        ItemAudit a{item, {}, 0, 0.0};
        for (const auto& r : reports) {
            const bool p = reports_item(r, item.key);
            a.present.push_back(p);
            a.count += p ? 1 : 0;
        }
        a.percentage = 100.0 * static_cast<double>(a.count) / static_cast<double>(reports.size());
        out.items.push_back(std::move(a));
    }
    return out;
}

inline Json audit_to_json(const AuditResult& a, std::span<const std::string> report_names = {}) {
    Json j = Json::object();
    j["report_count"] = a.report_count;
    if (!report_names.empty()) j["reports"] = std::vector<std::string>(report_names.begin(), report_names.end());
    j["items"] = Json::array();
    for (const auto& it : a.items) {
        Json flags = Json::array();
        for (bool p : it.present) flags.push_back(p);
        j["items"].push_back({{"item", it.item.key},
                              {"label", it.item.label},
                              {"count", it.count},
                              {"percentage", it.percentage},
                              {"present", std::move(flags)}});
    }
    return j;
}

inline std::string audit_to_markdown(const AuditResult& a) {
    std::string md = "| Checklist item | Percentage of reports |\n| --- | --- |\n";
    for (const auto& it : a.items) md += "| " + it.item.label + " | " + format_shortest(it.percentage) + "% |\n";
    md += "\n" + std::to_string(a.report_count) + " reports audited.\n";
    return md;
}

}  // namespace showwork
