#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "relprop/propdrm.hpp"
#include "relprop/propstar.hpp"

namespace relprop {

// Value function over coalitions of the instance's active features.  The
// argument lists the positions (into `features`) that are "on"; everything
// else is ablated to the baseline.
struct CoalitionEvaluator {
    std::vector<std::uint32_t> features;  // active feature indices of the instance
    std::function<double(std::span<const std::size_t> on)> f;
};

struct Attribution {
    std::vector<std::uint32_t> features;  // mirrors the evaluator
    std::vector<double> phi;              // per feature
    double f_empty = 0.0;
    double f_full = 0.0;
};

// Exact Shapley values by subset enumeration; memoizes all 2^|F| coalition
// values.  Throws for |F| > 20 and points at sampled_shapley.
Attribution exact_shapley(const CoalitionEvaluator& ev);

// Unbiased Monte Carlo estimate from `n_permutations` seeded random
// permutations (marginal contributions along each order).
Attribution sampled_shapley(const CoalitionEvaluator& ev, std::size_t n_permutations,
                            std::uint64_t seed);

// Model adapters.  Ablated features are zeros in the input row (PropDrm) and
// absent from the bag (PropStar); the score is P(class 1) and the
// positive-class dot product, respectively.
CoalitionEvaluator drm_evaluator(const DrmModel& model, std::span<const std::uint32_t> row);
CoalitionEvaluator star_evaluator(const StarModel& model, std::span<const std::uint32_t> features,
                                  int positive_class);

// Mean absolute attribution per feature over a set of instances, sorted by
// descending importance (ties by ascending feature index).
std::vector<std::pair<std::uint32_t, double>> mean_abs_attribution(
    std::span<const Attribution> attributions);

}  // namespace relprop
