#pragma once

// Expected maximum validation performance as a function of the number of
// hyperparameter trials n, computed exactly from the empirical distribution
// of the N observed trials:
//
//   E[V*_n] = sum_v v * ( F(v)^n - F_<(v)^n ),   F(v) = #{V_i <= v} / N,
//                                                F_<(v) = #{V_i < v} / N.
//
// All arithmetic here assumes larger is better. Runs whose metric is a loss
// are negated on the way in and back on the way out (see build_curve).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "showwork/error.hpp"
#include "showwork/format.hpp"
#include "showwork/trial_data.hpp"

namespace showwork {

/// Observed performances deduplicated into a sorted (value, count) support.
class EmpiricalDistribution {
public:
    EmpiricalDistribution() = default;

    static EmpiricalDistribution from_values(std::span<const double> values) {
        if (values.empty()) throw DomainError("cannot build a distribution from zero trials");
        std::vector<double> sorted(values.begin(), values.end());
        for (double v : sorted)
            if (!std::isfinite(v)) throw DomainError("performance values must be finite");
        std::sort(sorted.begin(), sorted.end());

        EmpiricalDistribution d;
        for (double v : sorted) {
            if (d.support_.empty() || d.support_.back() != v) {
                d.support_.push_back(v);
                d.counts_.push_back(1);
            } else {
                ++d.counts_.back();
            }
        }
        d.cumulative_.resize(d.counts_.size());
        std::uint64_t running = 0;
        for (std::size_t i = 0; i < d.counts_.size(); ++i) d.cumulative_[i] = running += d.counts_[i];
        d.total_ = running;
        return d;
    }

    const std::vector<double>& support() const noexcept { return support_; }
    const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
    std::uint64_t total() const noexcept { return total_; }
    double min() const noexcept { return support_.front(); }
    double max() const noexcept { return support_.back(); }

    /// P(V <= v) under the empirical distribution.
    double cdf_at(double v) const noexcept {
        auto it = std::upper_bound(support_.begin(), support_.end(), v);
        return fraction(it - support_.begin());
    }

    /// P(V < v) under the empirical distribution.
    double strict_cdf_at(double v) const noexcept {
        auto it = std::lower_bound(support_.begin(), support_.end(), v);
        return fraction(it - support_.begin());
    }

    /// P(V <= support()[i]); the last entry is exactly 1.
    double cdf_step(std::size_t i) const noexcept { return fraction(static_cast<std::ptrdiff_t>(i) + 1); }

    /// P(V < support()[i]).
    double strict_cdf_step(std::size_t i) const noexcept { return fraction(static_cast<std::ptrdiff_t>(i)); }

    double mean() const noexcept {
        double s = 0.0;
        for (std::size_t i = 0; i < support_.size(); ++i) s += support_[i] * static_cast<double>(counts_[i]);
        return s / static_cast<double>(total_);
    }

private:
    // Fraction of the sample lying on the first `k` support points.
    double fraction(std::ptrdiff_t k) const noexcept {
        if (k <= 0) return 0.0;
        return static_cast<double>(cumulative_[static_cast<std::size_t>(k) - 1]) / static_cast<double>(total_);
    }

    std::vector<double> support_;
    std::vector<std::uint64_t> counts_;
    std::vector<std::uint64_t> cumulative_;
    std::uint64_t total_ = 0;
};

/// Values of `run` oriented so that larger is better.
inline std::vector<double> oriented_performances(const FamilyRun& run) {
    auto values = run.performances();
    if (!run.higher_is_better)
        for (auto& v : values) v = -v;
    return values;
}

inline EmpiricalDistribution build_distribution(const FamilyRun& run) {
    if (run.trials.empty()) throw DomainError("family '" + run.model_family + "' has no trials");
    const auto values = oriented_performances(run);
    return EmpiricalDistribution::from_values(values);
}

namespace detail {

inline void check_budget(const EmpiricalDistribution& dist, std::int64_t n) {
    if (n < 1 || static_cast<std::uint64_t>(n) > dist.total())
        throw BudgetOutOfRange("budget n=" + std::to_string(n) + " outside 1.." + std::to_string(dist.total()) +
                               " (no extrapolation beyond the observed trials)");
}

/// p^n for p in [0, 1]. Small probabilities with large exponents go through
/// log space so the result underflows gracefully.
inline double prob_power(double p, std::int64_t n) noexcept {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    if (p < 1e-3 && n > 50) return std::exp(static_cast<double>(n) * std::log(p));
    return std::pow(p, static_cast<double>(n));
}

}  // namespace detail

struct MaxPmfEntry {
    double value;
    double probability;
};

/// Probability that the best of n i.i.d. draws equals each support value.
inline std::vector<MaxPmfEntry> pmf_of_max(const EmpiricalDistribution& dist, std::int64_t n) {
    detail::check_budget(dist, n);
    const auto& support = dist.support();
    std::vector<MaxPmfEntry> out(support.size());
    double below = 0.0;  // F_<(v)^n, equal to the previous step's F(v)^n
    for (std::size_t i = 0; i < support.size(); ++i) {
        const double at_or_below = detail::prob_power(dist.cdf_step(i), n);
        out[i] = {support[i], at_or_below - below};
        below = at_or_below;
    }
    return out;
}

/// Expected best-of-n performance.
///
/// Evaluated in the summation-by-parts form
///   v_max - sum_{j < last} (v_{j+1} - v_j) F(v_j)^n,
/// which is algebraically identical to sum_v v * pmf(v) and is monotone in n
/// and bounded by v_max in floating point, not just in exact arithmetic.
inline double expected_max(const EmpiricalDistribution& dist, std::int64_t n) {
    detail::check_budget(dist, n);
    const auto& support = dist.support();
    double shortfall = 0.0;
    for (std::size_t i = 0; i + 1 < support.size(); ++i)
        shortfall += (support[i + 1] - support[i]) * detail::prob_power(dist.cdf_step(i), n);
    return support.back() - shortfall;
}

/// Plug-in standard deviation of the best-of-n performance.
inline double std_of_max(const EmpiricalDistribution& dist, std::int64_t n) {
    const auto pmf = pmf_of_max(dist, n);
    const double mean = expected_max(dist, n);
    // Centered second moment; equal to E[X^2] - E[X]^2 without the cancellation.
    double var = 0.0;
    for (const auto& [v, p] : pmf) var += p * (v - mean) * (v - mean);
    return var > 0.0 ? std::sqrt(var) : 0.0;
}

struct MaxMoments {
    double expected;
    double std;
};

/// Exact mean and standard deviation of the maximum over all N^n equally
/// likely ordered n-tuples of observed trials. Verification oracle for
/// expected_max / std_of_max; refuses when N^n exceeds `max_tuples`.
inline MaxMoments expected_max_by_enumeration(const EmpiricalDistribution& dist, std::int64_t n,
                                              std::uint64_t max_tuples = 10'000'000) {
    detail::check_budget(dist, n);
    const std::uint64_t big_n = dist.total();
    std::uint64_t tuples = 1;
    for (std::int64_t k = 0; k < n; ++k) {
        if (tuples > max_tuples / big_n)
            throw DomainError("enumeration of " + std::to_string(big_n) + "^" + std::to_string(n) +
                              " tuples exceeds the guard of " + std::to_string(max_tuples) +
                              "; use the closed form expected_max/std_of_max instead");
        tuples *= big_n;
    }

    // Trial i carries the rank of its value in the support.
    std::vector<std::size_t> rank_of_trial;
    rank_of_trial.reserve(big_n);
    for (std::size_t r = 0; r < dist.counts().size(); ++r)
        rank_of_trial.insert(rank_of_trial.end(), dist.counts()[r], r);

    // Count, for every support rank, the tuples whose maximum lands there.
    std::vector<std::uint64_t> hits(dist.support().size(), 0);
    std::vector<std::size_t> odometer(static_cast<std::size_t>(n), 0);
    for (std::uint64_t t = 0; t < tuples; ++t) {
        std::size_t best = 0;
        for (auto idx : odometer) best = std::max(best, rank_of_trial[idx]);
        ++hits[best];
        for (auto& digit : odometer) {
            if (++digit < big_n) break;
            digit = 0;
        }
    }

    const auto denom = static_cast<long double>(tuples);
    long double mean = 0.0L;
    for (std::size_t r = 0; r < hits.size(); ++r)
        mean += static_cast<long double>(dist.support()[r]) * static_cast<long double>(hits[r]);
    mean /= denom;
    long double var = 0.0L;
    for (std::size_t r = 0; r < hits.size(); ++r) {
        const long double d = static_cast<long double>(dist.support()[r]) - mean;
        var += d * d * static_cast<long double>(hits[r]);
    }
    var /= denom;
    return {static_cast<double>(mean), static_cast<double>(std::sqrt(std::max(var, 0.0L)))};
}

struct CurvePoint {
    std::int64_t n;
    double expected_max;
    double std;

    friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

/// Expected best performance for every budget n = 1..N, in metric units.
/// For lower-is-better metrics the curve holds the expected minimum and is
/// non-increasing.
struct ExpectedMaxCurve {
    std::string family;
    std::vector<CurvePoint> points;
    double observed_min = 0.0;
    double observed_max = 0.0;
    bool higher_is_better = true;

    std::int64_t max_budget() const noexcept { return static_cast<std::int64_t>(points.size()); }

    /// Point for budget n (1-based); throws BudgetOutOfRange.
    const CurvePoint& at(std::int64_t n) const {
        if (n < 1 || n > max_budget())
            throw BudgetOutOfRange("budget n=" + std::to_string(n) + " outside 1.." + std::to_string(max_budget()) +
                                   " for family '" + family + "'");
        return points[static_cast<std::size_t>(n - 1)];
    }

    /// Expected value with the sign flipped for losses, so bigger is better.
    double oriented(std::int64_t n) const { return higher_is_better ? at(n).expected_max : -at(n).expected_max; }

    friend bool operator==(const ExpectedMaxCurve&, const ExpectedMaxCurve&) = default;
};

inline ExpectedMaxCurve build_curve(const FamilyRun& run) {
    const auto dist = build_distribution(run);
    const double sign = run.higher_is_better ? 1.0 : -1.0;

    ExpectedMaxCurve curve;
    curve.family = run.model_family;
    curve.higher_is_better = run.higher_is_better;
    const auto summary = family_summary(run);
    curve.observed_min = summary.min;
    curve.observed_max = summary.max;

    const auto big_n = static_cast<std::int64_t>(dist.total());
    curve.points.reserve(static_cast<std::size_t>(big_n));
    for (std::int64_t n = 1; n <= big_n; ++n)
        curve.points.push_back({n, sign * expected_max(dist, n), std_of_max(dist, n)});
    return curve;
}

/// Writes one curve block:
///   # family=<id> N=<N> observed_min=<v> observed_max=<v>
///   n,expected_max,std
///   1,...
/// Reals use 17 significant digits. Lower-is-better curves append
/// " direction=min" to the comment line.
inline void write_curve_csv(std::ostream& out, const ExpectedMaxCurve& curve) {
    out << "# family=" << curve.family << " N=" << curve.points.size()
        << " observed_min=" << format_g17(curve.observed_min) << " observed_max=" << format_g17(curve.observed_max);
    if (!curve.higher_is_better) out << " direction=min";
    out << "\nn,expected_max,std\n";
    for (const auto& p : curve.points)
        out << p.n << ',' << format_g17(p.expected_max) << ',' << format_g17(p.std) << '\n';
}

/// Reads every curve block produced by write_curve_csv.
inline std::vector<ExpectedMaxCurve> read_curve_csv(std::istream& in) {
    std::vector<ExpectedMaxCurve> curves;
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& what) { throw ParseError(detail::line_prefix(lineno) + what); };
    auto real = [&](std::string_view s) {
        auto v = parse_real(s);
        if (!v) fail("expected a finite number, got '" + std::string(s) + "'");
        return *v;
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.rfind("# ", 0) == 0) {
            ExpectedMaxCurve c;
            std::istringstream fields(line.substr(2));
            std::string kv;
            while (fields >> kv) {
                auto eq = kv.find('=');
                if (eq == std::string::npos) fail("malformed curve header token '" + kv + "'");
                auto key = kv.substr(0, eq), val = kv.substr(eq + 1);
                if (key == "family") c.family = val;
                else if (key == "observed_min") c.observed_min = real(val);
                else if (key == "observed_max") c.observed_max = real(val);
                else if (key == "direction") c.higher_is_better = (val != "min");
            }
            curves.push_back(std::move(c));
            continue;
        }
        if (line == "n,expected_max,std") {
            if (curves.empty()) fail("curve rows before a '# family=' header");
            continue;
        }
        if (curves.empty()) fail("curve rows before a '# family=' header");
        auto cells = detail::split_csv_line(line, lineno);
        if (cells.size() != 3) fail("expected 3 fields");
        std::int64_t n = 0;
        auto [end, ec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), n);
        if (ec != std::errc{} || end != cells[0].data() + cells[0].size()) fail("bad budget '" + cells[0] + "'");
        auto& pts = curves.back().points;
        if (n != static_cast<std::int64_t>(pts.size()) + 1) fail("budgets must run 1..N without gaps");
        pts.push_back({n, real(cells[1]), real(cells[2])});
    }
    return curves;
}

}  // namespace showwork
