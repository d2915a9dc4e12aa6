#pragma once

// Trial records, per-family runs and the JSONL / CSV log readers.
//
// JSONL (canonical), one object per line:
//   {"model_family": str, "trial_id": str, "hyperparameters": {str: scalar},
//    "validation_performance": number, "training_duration_seconds": number,
//    "metadata": {str: str}}            <- metadata optional
//
// CSV (convenience): header
//   model_family,trial_id,validation_performance,training_duration_seconds,hp.<name>...
// Cells under hp.<name> are typed as integer, real, boolean or string, in that
// order of preference; an empty cell leaves the hyperparameter unset.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "showwork/error.hpp"
#include "showwork/format.hpp"

namespace showwork {

using Json = nlohmann::ordered_json;

/// A single hyperparameter setting or metric-free metadata scalar.
using Scalar = std::variant<std::string, std::int64_t, double, bool>;

inline bool is_numeric(const Scalar& s) noexcept {
    return std::holds_alternative<std::int64_t>(s) || std::holds_alternative<double>(s);
}

inline Json scalar_to_json(const Scalar& s) {
    return std::visit([](const auto& v) { return Json(v); }, s);
}

/// Converts a JSON scalar; returns nullopt for arrays, objects and null.
inline std::optional<Scalar> scalar_from_json(const Json& j) {
    if (j.is_boolean()) return Scalar{j.get<bool>()};
    if (j.is_number_integer()) {
        if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
            return Scalar{static_cast<double>(j.get<std::uint64_t>())};
        return Scalar{j.get<std::int64_t>()};
    }
    if (j.is_number_float()) return Scalar{j.get<double>()};
    if (j.is_string()) return Scalar{j.get<std::string>()};
    return std::nullopt;
}

/// Human-readable rendering: integers plain, reals with shortest round-trip
/// digits, booleans as true/false.
inline std::string scalar_to_string(const Scalar& s) {
    struct Visitor {
        std::string operator()(const std::string& v) const { return v; }
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(double v) const { return format_shortest(v); }
        std::string operator()(bool v) const { return v ? "true" : "false"; }
    };
    return std::visit(Visitor{}, s);
}

/// Parses a CSV cell into the narrowest scalar type that accepts it.
inline Scalar scalar_from_text(std::string_view text) {
    std::int64_t i = 0;
    auto [iend, iec] = std::from_chars(text.data(), text.data() + text.size(), i);
    if (iec == std::errc{} && iend == text.data() + text.size()) return Scalar{i};
    if (auto d = parse_real(text)) return Scalar{*d};
    if (text == "true") return Scalar{true};
    if (text == "false") return Scalar{false};
    return Scalar{std::string(text)};
}

/// Ordered name -> scalar assignment (one hyperparameter value h).
class HyperparameterValue {
public:
    using Entry = std::pair<std::string, Scalar>;

    HyperparameterValue() = default;

    /// Appends or replaces an entry. Throws DomainError on an empty name or a
    /// non-finite real.
    void set(std::string name, Scalar value) {
        if (name.empty()) throw DomainError("hyperparameter name must be non-empty");
        if (const auto* d = std::get_if<double>(&value); d && !std::isfinite(*d))
            throw DomainError("hyperparameter '" + name + "' must be finite");
        for (auto& e : entries_) {
            if (e.first == name) {
                e.second = std::move(value);
                return;
            }
        }
        entries_.emplace_back(std::move(name), std::move(value));
    }

    const Scalar* find(std::string_view name) const noexcept {
        for (const auto& e : entries_)
            if (e.first == name) return &e.second;
        return nullptr;
    }

    const std::vector<Entry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    friend bool operator==(const HyperparameterValue&, const HyperparameterValue&) = default;

private:
    std::vector<Entry> entries_;
};

using Metadata = std::vector<std::pair<std::string, std::string>>;

struct TrialRecord {
    std::string model_family;
    std::string trial_id;
    HyperparameterValue hyperparameters;
    double validation_performance = 0.0;
    double training_duration_seconds = 0.0;
    std::optional<Metadata> metadata;

    friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// All trials of one model family from a single search, in log order.
struct FamilyRun {
    std::string model_family;
    std::vector<TrialRecord> trials;
    std::string metric_name = "accuracy";
    bool higher_is_better = true;

    std::size_t size() const noexcept { return trials.size(); }

    std::vector<double> performances() const {
        std::vector<double> out;
        out.reserve(trials.size());
        for (const auto& t : trials) out.push_back(t.validation_performance);
        return out;
    }

    friend bool operator==(const FamilyRun&, const FamilyRun&) = default;
};

enum class LogFormat { jsonl, csv };

struct IngestOptions {
    LogFormat format = LogFormat::jsonl;
    std::string metric_name = "accuracy";
    bool higher_is_better = true;
};

namespace detail {

inline bool valid_utf8(std::string_view s) noexcept {
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        std::size_t len = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + len > s.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            const auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
            cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
            return false;
        i += len;
    }
    return true;
}

inline std::string line_prefix(std::size_t line) { return "line " + std::to_string(line) + ": "; }

inline std::string field_error(std::size_t line, std::string_view field, std::string_view what) {
    return line_prefix(line) + "field '" + std::string(field) + "': " + std::string(what);
}

inline void check_record(const TrialRecord& r, std::size_t line) {
    if (r.model_family.empty()) throw ParseError(field_error(line, "model_family", "must be non-empty"));
    if (r.trial_id.empty()) throw ParseError(field_error(line, "trial_id", "must be non-empty"));
    if (!std::isfinite(r.validation_performance))
        throw ParseError(field_error(line, "validation_performance", "must be a finite number"));
    if (!std::isfinite(r.training_duration_seconds) || r.training_duration_seconds < 0.0)
        throw ParseError(field_error(line, "training_duration_seconds", "must be a finite number >= 0"));
}

/// Accumulates records into families, preserving first-appearance order of
/// families and input order within each family.
class RunBuilder {
public:
    explicit RunBuilder(const IngestOptions& opts) : opts_(opts) {}

    void add(TrialRecord rec, std::size_t line) {
        auto key = std::make_pair(rec.model_family, rec.trial_id);
        if (!seen_.emplace(key, line).second)
            throw DomainError(line_prefix(line) + "duplicate trial (model_family '" + rec.model_family +
                              "', trial_id '" + rec.trial_id + "'), first seen on line " +
                              std::to_string(seen_.at(key)));
        auto it = index_.find(rec.model_family);
        if (it == index_.end()) {
            it = index_.emplace(rec.model_family, runs_.size()).first;
            FamilyRun run;
            run.model_family = rec.model_family;
            run.metric_name = opts_.metric_name;
            run.higher_is_better = opts_.higher_is_better;
            runs_.push_back(std::move(run));
        }
        runs_[it->second].trials.push_back(std::move(rec));
    }

    std::vector<FamilyRun> finish() && { return std::move(runs_); }

private:
    IngestOptions opts_;
    std::vector<FamilyRun> runs_;
    std::map<std::string, std::size_t> index_;
    std::map<std::pair<std::string, std::string>, std::size_t> seen_;
};

inline double json_number(const Json& obj, std::string_view field, std::size_t line) {
    auto it = obj.find(std::string(field));
    if (it == obj.end()) throw ParseError(line_prefix(line) + "missing field '" + std::string(field) + "'");
    if (!it->is_number()) throw ParseError(field_error(line, field, "must be a finite number"));
    return it->get<double>();
}

inline std::string json_string(const Json& obj, std::string_view field, std::size_t line) {
    auto it = obj.find(std::string(field));
    if (it == obj.end()) throw ParseError(line_prefix(line) + "missing field '" + std::string(field) + "'");
    if (!it->is_string()) throw ParseError(field_error(line, field, "must be a string"));
    return it->get<std::string>();
}

inline TrialRecord record_from_json(const Json& obj, std::size_t line) {
    static constexpr std::string_view known[] = {"model_family", "trial_id", "hyperparameters",
                                                 "validation_performance", "training_duration_seconds",
                                                 "metadata"};
    if (!obj.is_object()) throw ParseError(line_prefix(line) + "expected a JSON object");
    for (const auto& [key, _] : obj.items()) {
        if (std::find(std::begin(known), std::end(known), key) == std::end(known))
            throw ParseError(field_error(line, key, "unknown field"));
    }
    TrialRecord rec;
    rec.model_family = json_string(obj, "model_family", line);
    rec.trial_id = json_string(obj, "trial_id", line);
    rec.validation_performance = json_number(obj, "validation_performance", line);
    rec.training_duration_seconds = json_number(obj, "training_duration_seconds", line);

    auto hp = obj.find("hyperparameters");
    if (hp == obj.end()) throw ParseError(line_prefix(line) + "missing field 'hyperparameters'");
    if (!hp->is_object()) throw ParseError(field_error(line, "hyperparameters", "must be an object"));
    for (const auto& [name, value] : hp->items()) {
        auto s = scalar_from_json(value);
        if (!s) throw ParseError(field_error(line, "hyperparameters." + name, "must be a scalar"));
        try {
            rec.hyperparameters.set(name, std::move(*s));
        } catch (const DomainError& e) {
            throw ParseError(field_error(line, "hyperparameters", e.what()));
        }
    }

    if (auto md = obj.find("metadata"); md != obj.end()) {
        if (!md->is_object()) throw ParseError(field_error(line, "metadata", "must be an object"));
        Metadata meta;
        for (const auto& [k, v] : md->items()) {
            if (!v.is_string()) throw ParseError(field_error(line, "metadata." + k, "must be a string"));
            meta.emplace_back(k, v.get<std::string>());
        }
        rec.metadata = std::move(meta);
    }
    check_record(rec, line);
    return rec;
}

/// Splits one CSV record; supports double-quoted fields with "" escapes.
inline std::vector<std::string> split_csv_line(std::string_view line, std::size_t lineno) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (quoted) throw ParseError(line_prefix(lineno) + "unterminated quoted field");
    out.push_back(std::move(cur));
    return out;
}

inline std::vector<FamilyRun> ingest_jsonl(std::istream& in, const IngestOptions& opts) {
    RunBuilder builder(opts);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (!valid_utf8(line)) throw ParseError(line_prefix(lineno) + "invalid UTF-8");
        Json obj;
        try {
            obj = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw ParseError(line_prefix(lineno) + "malformed JSON: " + e.what());
        }
        builder.add(record_from_json(obj, lineno), lineno);
    }
    return std::move(builder).finish();
}

inline std::vector<FamilyRun> ingest_csv(std::istream& in, const IngestOptions& opts) {
    RunBuilder builder(opts);
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> header;
    int col_family = -1, col_id = -1, col_perf = -1, col_dur = -1;

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (!valid_utf8(line)) throw ParseError(line_prefix(lineno) + "invalid UTF-8");
        auto cells = split_csv_line(line, lineno);

        if (header.empty()) {
            header = std::move(cells);
            for (std::size_t c = 0; c < header.size(); ++c) {
                const auto& h = header[c];
                const int ci = static_cast<int>(c);
                if (h == "model_family") col_family = ci;
                else if (h == "trial_id") col_id = ci;
                else if (h == "validation_performance") col_perf = ci;
                else if (h == "training_duration_seconds") col_dur = ci;
                else if (h.rfind("hp.", 0) != 0 || h.size() == 3)
                    throw ParseError(field_error(lineno, h, "unknown column"));
            }
            for (auto [name, col] : {std::pair{"model_family", col_family}, std::pair{"trial_id", col_id},
                                     std::pair{"validation_performance", col_perf},
                                     std::pair{"training_duration_seconds", col_dur}}) {
                if (col < 0) throw ParseError(line_prefix(lineno) + "missing column '" + name + "'");
            }
            continue;
        }

        if (cells.size() != header.size())
            throw ParseError(line_prefix(lineno) + "expected " + std::to_string(header.size()) + " fields, got " +
                             std::to_string(cells.size()));
        TrialRecord rec;
        rec.model_family = cells[col_family];
        rec.trial_id = cells[col_id];
        auto perf = parse_real(cells[col_perf]);
        if (!perf) throw ParseError(field_error(lineno, "validation_performance", "must be a finite number"));
        rec.validation_performance = *perf;
        auto dur = parse_real(cells[col_dur]);
        if (!dur) throw ParseError(field_error(lineno, "training_duration_seconds", "must be a finite number >= 0"));
        rec.training_duration_seconds = *dur;
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (header[c].rfind("hp.", 0) != 0 || cells[c].empty()) continue;
            auto value = scalar_from_text(cells[c]);
            if (const auto* d = std::get_if<double>(&value); d && !std::isfinite(*d))
                throw ParseError(field_error(lineno, header[c], "must be finite"));
            rec.hyperparameters.set(header[c].substr(3), std::move(value));
        }
        check_record(rec, lineno);
        builder.add(std::move(rec), lineno);
    }
    return std::move(builder).finish();
}

}  // namespace detail

/// Reads a trial log and groups records by model family.
///
/// Families appear in order of first occurrence; trials keep their input
/// order. Throws ParseError (line-numbered) on malformed or invalid records
/// and DomainError on duplicate (model_family, trial_id) pairs.
inline std::vector<FamilyRun> ingest_trials(std::istream& in, const IngestOptions& opts = {}) {
    return opts.format == LogFormat::jsonl ? detail::ingest_jsonl(in, opts) : detail::ingest_csv(in, opts);
}

inline std::vector<FamilyRun> ingest_trials(std::string_view text, const IngestOptions& opts = {}) {
    std::istringstream in{std::string(text)};
    return ingest_trials(in, opts);
}

/// Merges two ingests as if their logs had been concatenated.
inline std::vector<FamilyRun> merge_runs(std::vector<FamilyRun> first, const std::vector<FamilyRun>& second) {
    for (const auto& run : second) {
        auto it = std::find_if(first.begin(), first.end(),
                               [&](const FamilyRun& r) { return r.model_family == run.model_family; });
        if (it == first.end()) {
            first.push_back(run);
            continue;
        }
        for (const auto& t : run.trials) {
            const bool dup = std::any_of(it->trials.begin(), it->trials.end(),
                                         [&](const TrialRecord& x) { return x.trial_id == t.trial_id; });
            if (dup)
                throw DomainError("duplicate trial (model_family '" + t.model_family + "', trial_id '" + t.trial_id +
                                  "')");
            it->trials.push_back(t);
        }
    }
    return first;
}

inline Json trial_to_json(const TrialRecord& t) {
    Json obj = Json::object();
    obj["model_family"] = t.model_family;
    obj["trial_id"] = t.trial_id;
    Json hp = Json::object();
    for (const auto& [name, value] : t.hyperparameters.entries()) hp[name] = scalar_to_json(value);
    obj["hyperparameters"] = std::move(hp);
    obj["validation_performance"] = t.validation_performance;
    obj["training_duration_seconds"] = t.training_duration_seconds;
    if (t.metadata) {
        Json md = Json::object();
        for (const auto& [k, v] : *t.metadata) md[k] = v;
        obj["metadata"] = std::move(md);
    }
    return obj;
}

/// Writes runs back as canonical JSONL, one trial per line, family by family.
inline void write_jsonl(std::ostream& out, const std::vector<FamilyRun>& runs) {
    for (const auto& run : runs)
        for (const auto& t : run.trials) out << trial_to_json(t).dump() << '\n';
}

struct FamilySummary {
    std::size_t count = 0;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    /// Best observed value under the run's direction (max, or min for losses).
    double best = 0.0;
    double mean_duration_seconds = 0.0;
};

inline FamilySummary family_summary(const FamilyRun& run) {
    if (run.trials.empty()) throw DomainError("family '" + run.model_family + "' has no trials");
    FamilySummary s;
    s.count = run.trials.size();
    s.min = s.max = run.trials.front().validation_performance;
    double perf_sum = 0.0, dur_sum = 0.0;
    for (const auto& t : run.trials) {
        s.min = std::min(s.min, t.validation_performance);
        s.max = std::max(s.max, t.validation_performance);
        perf_sum += t.validation_performance;
        dur_sum += t.training_duration_seconds;
    }
    const auto n = static_cast<double>(s.count);
    s.mean = perf_sum / n;
    s.mean_duration_seconds = dur_sum / n;
    s.best = run.higher_is_better ? s.max : s.min;
    return s;
}

inline const FamilyRun* find_family(const std::vector<FamilyRun>& runs, std::string_view name) noexcept {
    for (const auto& r : runs)
        if (r.model_family == name) return &r;
    return nullptr;
}

}  // namespace showwork
