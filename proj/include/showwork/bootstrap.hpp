#pragma once

// Monte-Carlo bootstrap estimate of the expected best-of-n performance:
// draw n of the N observed trials with replacement, keep the best, repeat K
// times. Resample k always uses the random stream keyed by (seed, k), so the
// result does not depend on how resamples are spread over threads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <thread>
#include <vector>

#include "showwork/error.hpp"
#include "showwork/estimator.hpp"
#include "showwork/rng.hpp"
#include "showwork/trial_data.hpp"

namespace showwork {

inline constexpr std::int64_t kDefaultBootstrapResamples = 10'000;

struct BootstrapEstimate {
    std::int64_t n = 0;
    std::int64_t resamples = 0;
    double mean_of_max = 0.0;
    /// Population standard deviation of the K resample maxima.
    double std_of_max = 0.0;
    std::uint64_t seed = 0;
};

namespace detail {

/// Best of n draws (with replacement) from `values` using resample k's stream.
inline double resample_max(std::span<const double> values, std::int64_t n, std::uint64_t seed, std::uint64_t k) {
    auto gen = rng::substream(seed, k);
    double best = values[gen.below(values.size())];
    for (std::int64_t i = 1; i < n; ++i) best = std::max(best, values[gen.below(values.size())]);
    return best;
}

/// Runs `fn(begin, end)` over [0, count) split into `threads` contiguous chunks.
template <class Fn>
void parallel_chunks(std::size_t count, unsigned threads, Fn&& fn) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (threads == 1) {
        fn(std::size_t{0}, count);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    const std::size_t step = (count + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t begin = std::min(count, t * step);
        const std::size_t end = std::min(count, begin + step);
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
}

}  // namespace detail

/// Bootstrap mean and spread of the best of n resampled trials.
///
/// `threads` only changes wall-clock time; maxima are reduced in resample
/// order, so any thread count yields bit-identical output.
inline BootstrapEstimate bootstrap_expected_max(const FamilyRun& run, std::int64_t n, std::int64_t resamples,
                                                std::uint64_t seed, unsigned threads = 1) {
    const auto big_n = static_cast<std::int64_t>(run.trials.size());
    if (big_n < 1) throw DomainError("family '" + run.model_family + "' has no trials");
    if (n < 1 || n > big_n)
        throw BudgetOutOfRange("budget n=" + std::to_string(n) + " outside 1.." + std::to_string(big_n));
    if (resamples < 1) throw DomainError("bootstrap resample count K must be >= 1");

    const auto values = oriented_performances(run);
    const double sign = run.higher_is_better ? 1.0 : -1.0;

    // Welford accumulation in resample order over fixed-size blocks.
    constexpr std::size_t kBlock = 1 << 16;
    std::vector<double> maxima;
    double mean = 0.0, m2 = 0.0;
    std::int64_t seen = 0;
    for (std::int64_t start = 0; start < resamples; start += kBlock) {
        const auto len = static_cast<std::size_t>(std::min<std::int64_t>(kBlock, resamples - start));
        maxima.assign(len, 0.0);
        detail::parallel_chunks(len, threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i)
                maxima[i] = detail::resample_max(values, n, seed, static_cast<std::uint64_t>(start) + i);
        });
        for (double m : maxima) {
            ++seen;
            const double delta = m - mean;
            mean += delta / static_cast<double>(seen);
            m2 += delta * (m - mean);
        }
    }

    // Welford's running mean can drift by an ulp outside the sample range.
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    mean = std::clamp(mean, *lo, *hi);

    BootstrapEstimate est;
    est.n = n;
    est.resamples = resamples;
    est.mean_of_max = sign * mean;
    est.std_of_max = std::sqrt(std::max(0.0, m2 / static_cast<double>(resamples)));
    est.seed = seed;
    return est;
}

struct ErrorProfileRow {
    std::int64_t resamples;
    double abs_error;
};

struct ErrorProfile {
    double closed_form = 0.0;
    /// The closed form draws no resamples, so this is exactly zero.
    double closed_form_resampling_error = 0.0;
    std::vector<ErrorProfileRow> rows;
};

/// |bootstrap - closed form| for each K in an increasing schedule.
inline ErrorProfile bootstrap_error_profile(const FamilyRun& run, std::int64_t n,
                                            std::span<const std::int64_t> schedule, std::uint64_t seed,
                                            unsigned threads = 1) {
    if (schedule.empty()) throw DomainError("K schedule must be non-empty");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (schedule[i] < 1) throw DomainError("bootstrap resample count K must be >= 1");
        if (i > 0 && schedule[i] <= schedule[i - 1]) throw DomainError("K schedule must be strictly increasing");
    }
    const auto dist = build_distribution(run);
    ErrorProfile profile;
    const double oriented = expected_max(dist, n);
    profile.closed_form = run.higher_is_better ? oriented : -oriented;
    for (auto k : schedule) {
        const auto est = bootstrap_expected_max(run, n, k, seed, threads);
        profile.rows.push_back({k, std::abs(est.mean_of_max - profile.closed_form)});
    }
    return profile;
}

}  // namespace showwork
