#pragma once

#include "showwork/error.hpp"
#include "showwork/format.hpp"
#include "showwork/rng.hpp"
#include "showwork/trial_data.hpp"
#include "showwork/estimator.hpp"
#include "showwork/bootstrap.hpp"
#include "showwork/budget.hpp"
#include "showwork/sampler.hpp"
#include "showwork/report.hpp"
#include "showwork/figure.hpp"
#include "showwork/recipes.hpp"

namespace showwork {
inline constexpr const char* kVersion = "1.0.0";
}
