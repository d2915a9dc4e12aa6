#pragma once

// Budget units, budget inference and budget-dependent model comparison.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "showwork/error.hpp"
#include "showwork/estimator.hpp"
#include "showwork/trial_data.hpp"

namespace showwork {

enum class BudgetUnit { trials, seconds, currency };

inline std::string to_string(BudgetUnit u) {
    switch (u) {
        case BudgetUnit::trials: return "trials";
        case BudgetUnit::seconds: return "seconds";
        case BudgetUnit::currency: return "currency";
    }
    return "trials";
}

inline BudgetUnit parse_budget_unit(std::string_view s) {
    if (s == "trials") return BudgetUnit::trials;
    if (s == "seconds") return BudgetUnit::seconds;
    if (s == "currency") return BudgetUnit::currency;
    throw ParseError("unknown budget axis '" + std::string(s) + "' (expected trials, seconds or currency)");
}

/// Linear map between a trial count and another budget unit.
struct BudgetAxis {
    BudgetUnit unit = BudgetUnit::trials;
    double scale_per_trial = 1.0;

    static BudgetAxis trials() { return {}; }

    static BudgetAxis seconds(double mean_duration) {
        if (!(mean_duration > 0.0) || !std::isfinite(mean_duration))
            throw DomainError("time axis needs a positive mean training duration");
        return {BudgetUnit::seconds, mean_duration};
    }

    static BudgetAxis currency(double mean_duration, double rate_per_second) {
        if (!(rate_per_second > 0.0) || !std::isfinite(rate_per_second))
            throw DomainError("currency axis needs a positive rate per second");
        return {BudgetUnit::currency, seconds(mean_duration).scale_per_trial * rate_per_second};
    }

    double to_units(std::int64_t n) const noexcept { return static_cast<double>(n) * scale_per_trial; }

    /// Nearest whole trial count for an amount in this axis' unit.
    std::int64_t to_trial_count(double units) const noexcept {
        return static_cast<std::int64_t>(std::llround(units / scale_per_trial));
    }
};

/// Arithmetic mean of recorded training durations; throws if none are positive.
inline double mean_duration(const FamilyRun& run) {
    const auto s = family_summary(run);
    if (!(s.mean_duration_seconds > 0.0))
        throw DomainError("family '" + run.model_family + "' has no recorded training durations");
    return s.mean_duration_seconds;
}

enum class TimeMode {
    /// n trials cost n times the mean duration.
    mean,
    /// n trials cost the summed durations of the first n logged trials.
    cumulative,
};

struct AxisPoint {
    double budget;
    double expected_max;
    double std;
};

/// Re-expresses a curve on a wall-clock axis.
inline std::vector<AxisPoint> to_time_axis(const ExpectedMaxCurve& curve, const FamilyRun& run,
                                           TimeMode mode = TimeMode::mean) {
    const double mean = mean_duration(run);
    if (curve.max_budget() > static_cast<std::int64_t>(run.trials.size()))
        throw DomainError("curve for '" + curve.family + "' is longer than its run");
    std::vector<AxisPoint> out;
    out.reserve(curve.points.size());
    double cumulative = 0.0;
    for (const auto& p : curve.points) {
        double t = static_cast<double>(p.n) * mean;
        if (mode == TimeMode::cumulative) {
            cumulative += run.trials[static_cast<std::size_t>(p.n - 1)].training_duration_seconds;
            t = cumulative;
        }
        out.push_back({t, p.expected_max, p.std});
    }
    return out;
}

inline std::vector<AxisPoint> to_axis(const ExpectedMaxCurve& curve, const BudgetAxis& axis) {
    std::vector<AxisPoint> out;
    out.reserve(curve.points.size());
    for (const auto& p : curve.points) out.push_back({axis.to_units(p.n), p.expected_max, p.std});
    return out;
}

/// Smallest n whose expected best performance reaches `target`
/// (at or above it, or at or below it for lower-is-better metrics).
/// nullopt when even n = N falls short; there is no extrapolation.
inline std::optional<std::int64_t> min_budget_for_target(const ExpectedMaxCurve& curve, double target) {
    const double goal = curve.higher_is_better ? target : -target;
    for (std::int64_t n = 1; n <= curve.max_budget(); ++n)
        if (curve.oriented(n) >= goal) return n;
    return std::nullopt;
}

inline const std::string kTie = "tie";

struct WinnerSegment {
    std::int64_t from;
    std::int64_t to;
    /// Family name or "tie".
    std::string winner;

    friend bool operator==(const WinnerSegment&, const WinnerSegment&) = default;
};

struct ComparisonVerdict {
    std::vector<WinnerSegment> segments;
    std::vector<std::int64_t> crossovers;
    BudgetAxis axis;
    std::vector<std::string> warnings;
};

namespace detail {

inline void check_comparable(std::span<const ExpectedMaxCurve> curves) {
    if (curves.size() < 2) throw DomainError("comparison needs at least two curves");
    for (const auto& c : curves) {
        if (c.points.empty()) throw DomainError("curve for '" + c.family + "' is empty");
        if (c.higher_is_better != curves.front().higher_is_better)
            throw DomainError("cannot compare a higher-is-better curve with a lower-is-better one");
    }
}

/// Label of the unique best entry among `values`, or "tie" when another
/// entry is within `eps` of the best. Entries with NaN are unavailable.
inline std::string winner_of(std::span<const double> values, std::span<const ExpectedMaxCurve> curves, double eps) {
    std::size_t best = values.size();
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!std::isnan(values[i]) && (best == values.size() || values[i] > values[best])) best = i;
    if (best == values.size()) return "none";
    for (std::size_t i = 0; i < values.size(); ++i)
        if (i != best && !std::isnan(values[i]) && std::abs(values[i] - values[best]) <= eps) return kTie;
    return curves[best].family;
}

inline std::vector<std::string> unequal_budget_warnings(std::span<const ExpectedMaxCurve> curves) {
    std::vector<std::string> out;
    const auto first = curves.front().max_budget();
    const bool unequal = std::any_of(curves.begin(), curves.end(),
                                     [&](const ExpectedMaxCurve& c) { return c.max_budget() != first; });
    if (unequal) {
        std::string msg = "families were searched with unequal budgets (";
        for (std::size_t i = 0; i < curves.size(); ++i) {
            if (i) msg += ", ";
            msg += curves[i].family + ": N=" + std::to_string(curves[i].max_budget());
        }
        msg += "); comparison is truncated to the shared range and differences beyond it may be due to the "
               "budget rather than the model";
        out.push_back(std::move(msg));
    }
    return out;
}

}  // namespace detail

inline constexpr double kDefaultTieEpsilon = 1e-12;

/// Winner per budget over the shared range 1..min N, on the trial axis.
inline ComparisonVerdict compare_families(std::span<const ExpectedMaxCurve> curves,
                                          double tie_epsilon = kDefaultTieEpsilon) {
    detail::check_comparable(curves);
    std::int64_t shared = std::numeric_limits<std::int64_t>::max();
    for (const auto& c : curves) shared = std::min(shared, c.max_budget());

    ComparisonVerdict verdict;
    verdict.warnings = detail::unequal_budget_warnings(curves);
    std::vector<double> values(curves.size());
    for (std::int64_t n = 1; n <= shared; ++n) {
        for (std::size_t i = 0; i < curves.size(); ++i) values[i] = curves[i].oriented(n);
        auto label = detail::winner_of(values, curves, tie_epsilon);
        if (!verdict.segments.empty() && verdict.segments.back().winner == label) {
            verdict.segments.back().to = n;
        } else {
            if (!verdict.segments.empty()) verdict.crossovers.push_back(n);
            verdict.segments.push_back({n, n, std::move(label)});
        }
    }
    return verdict;
}

struct AxisSegment {
    double from;
    double to;
    std::string winner;
};

/// Comparison on a continuous budget axis where each family has its own cost
/// per trial (for example its mean training duration).
struct AxisVerdict {
    BudgetUnit unit = BudgetUnit::seconds;
    std::vector<double> scales;
    std::vector<AxisSegment> segments;
    std::vector<double> crossovers;
    std::vector<std::string> warnings;
};

/// At budget b a family has completed floor(b / scale) trials and its value is
/// its curve at that count. The axis runs from the cheapest family's first
/// trial to the point where the first family exhausts its trials. Families
/// that have not completed a trial yet do not compete.
inline AxisVerdict compare_families_on_axis(std::span<const ExpectedMaxCurve> curves, std::span<const double> scales,
                                            BudgetUnit unit, double tie_epsilon = kDefaultTieEpsilon) {
    detail::check_comparable(curves);
    if (scales.size() != curves.size()) throw DomainError("need one axis scale per curve");
    for (double s : scales)
        if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("axis scales must be positive");

    AxisVerdict verdict;
    verdict.unit = unit;
    verdict.scales.assign(scales.begin(), scales.end());
    verdict.warnings = detail::unequal_budget_warnings(curves);

    double start = std::numeric_limits<double>::infinity(), end = start;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        start = std::min(start, scales[i]);
        end = std::min(end, static_cast<double>(curves[i].max_budget()) * scales[i]);
    }

    std::vector<double> events;
    for (std::size_t i = 0; i < curves.size(); ++i)
        for (std::int64_t n = 1; n <= curves[i].max_budget(); ++n) {
            const double t = static_cast<double>(n) * scales[i];
            if (t > end) break;
            events.push_back(t);
        }
    std::sort(events.begin(), events.end());
    events.erase(std::unique(events.begin(), events.end()), events.end());

    std::vector<double> values(curves.size());
    for (double t : events) {
        for (std::size_t i = 0; i < curves.size(); ++i) {
            // Completed trials at t, corrected so that t == k * scale counts k
            // exactly as the event list computed it.
            auto done = static_cast<std::int64_t>(std::floor(t / scales[i]));
            while (static_cast<double>(done + 1) * scales[i] <= t) ++done;
            while (done > 0 && static_cast<double>(done) * scales[i] > t) --done;
            done = std::min(done, curves[i].max_budget());
            values[i] = done >= 1 ? curves[i].oriented(done) : std::numeric_limits<double>::quiet_NaN();
        }
        auto label = detail::winner_of(values, curves, tie_epsilon);
        if (!verdict.segments.empty() && verdict.segments.back().winner == label) continue;
        if (!verdict.segments.empty()) {
            verdict.segments.back().to = t;
            verdict.crossovers.push_back(t);
        }
        verdict.segments.push_back({t, end, std::move(label)});
    }
    return verdict;
}

struct GapRow {
    std::string family;
    double expected_max;
    double std;
};

/// Expected best performance of every family at one shared budget n, best
/// first; exact ties are ordered by family name.
inline std::vector<GapRow> report_gap_at_budget(std::span<const ExpectedMaxCurve> curves, std::int64_t n) {
    std::vector<std::pair<double, GapRow>> keyed;
    for (const auto& c : curves) {
        if (n < 1 || n > c.max_budget())
            throw BudgetOutOfRange("budget n=" + std::to_string(n) + " outside 1.." +
                                   std::to_string(c.max_budget()) + " for family '" + c.family + "'");
        const auto& p = c.at(n);
        keyed.push_back({c.oriented(n), GapRow{c.family, p.expected_max, p.std}});
    }
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second.family < b.second.family;
    });
    std::vector<GapRow> rows;
    for (auto& [_, row] : keyed) rows.push_back(std::move(row));
    return rows;
}

inline Json verdict_to_json(const ComparisonVerdict& v) {
    Json j = Json::object();
    j["segments"] = Json::array();
    for (const auto& s : v.segments) j["segments"].push_back({{"from", s.from}, {"to", s.to}, {"winner", s.winner}});
    j["crossovers"] = v.crossovers;
    j["axis"] = {{"unit", to_string(v.axis.unit)}, {"scale_per_trial", v.axis.scale_per_trial}};
    if (!v.warnings.empty()) j["warnings"] = v.warnings;
    return j;
}

/// Same layout as the trial-axis verdict; "scale_per_trial" maps each family
/// to its own cost per trial.
inline Json verdict_to_json(const AxisVerdict& v, std::span<const ExpectedMaxCurve> curves) {
    Json j = Json::object();
    j["segments"] = Json::array();
    for (const auto& s : v.segments) j["segments"].push_back({{"from", s.from}, {"to", s.to}, {"winner", s.winner}});
    j["crossovers"] = v.crossovers;
    Json scales = Json::object();
    for (std::size_t i = 0; i < curves.size(); ++i) scales[curves[i].family] = v.scales[i];
    j["axis"] = {{"unit", to_string(v.unit)}, {"scale_per_trial", std::move(scales)}};
    if (!v.warnings.empty()) j["warnings"] = v.warnings;
    return j;
}

}  // namespace showwork
