#pragma once

// Shipped synthetic studies.

#include <cstdint>
#include <string>
#include <vector>

#include "showwork/sampler.hpp"
#include "showwork/trial_data.hpp"

namespace showwork::recipes {

struct FamilyRecipe {
    std::string family;
    SearchSpace space;
    SyntheticObjective objective;
    DurationModel duration;
};

/// Two families whose expected-performance curves cross once: "lr" is
/// stable and mediocre, "cnn" is erratic but occasionally excellent. Both
/// draw a configuration index uniformly from ten table rows.
struct CrossingPair {
    std::vector<FamilyRecipe> families;
    std::int64_t budget = 50;
    std::uint64_t seed = 0;
    /// Budget at which "cnn" overtakes "lr" for the shipped seed.
    std::int64_t crossover = 0;
};

inline CrossingPair crossing_pair() {
    auto rows = [] {
        Choice c;
        for (std::int64_t i = 0; i < 10; ++i) c.options.emplace_back(i);
        return SearchSpace{}.add("config", std::move(c));
    };
    auto table = [](std::vector<double> perf) {
        TableObjective t{"config", {}};
        for (std::size_t i = 0; i < perf.size(); ++i) t.table.emplace_back(std::to_string(i), perf[i]);
        return t;
    };

    CrossingPair pair;
    pair.families.push_back({"lr", rows(),
                             table({0.690, 0.695, 0.700, 0.702, 0.705, 0.707, 0.710, 0.712, 0.715, 0.720}),
                             ConstantDuration{1.56}});
    pair.families.push_back({"cnn", rows(),
                             table({0.350, 0.380, 0.400, 0.410, 0.420, 0.430, 0.440, 0.450, 0.790, 0.810}),
                             ConstantDuration{39.0}});
    pair.budget = 50;
    pair.seed = 10;
    pair.crossover = 7;
    return pair;
}

/// Runs every family of the recipe with its own search seed derived from the
/// recipe seed and the family name.
inline std::vector<FamilyRun> run_recipe(const CrossingPair& pair) {
    std::vector<FamilyRun> runs;
    for (const auto& f : pair.families) {
        SearchOptions opts;
        opts.model_family = f.family;
        opts.duration = f.duration;
        runs.push_back(run_random_search(f.space, f.objective, pair.budget,
                                         rng::mix64(pair.seed ^ rng::hash_label(f.family)), opts));
    }
    return runs;
}

}  // namespace showwork::recipes
