#pragma once

#include <cstddef>

#include "bounty/dataset.hpp"
#include "bounty/hypothesis.hpp"

namespace bounty {

// Constant(mean label). Throws Errc::empty_dataset.
ConstantModel fit_constant(const Dataset& dataset);

// Ridge regression on numeric features and one-hot categorical levels. The
// intercept is not penalized. With ridge == 0 the first allowed value of each
// categorical feature is the reference level (coefficient fixed at zero), and
// a rank-deficient design throws Errc::singular_system.
LinearModel fit_linear(const Dataset& dataset, double ridge);

// Greedy variance-reduction regression tree. Numeric splits use midpoints
// between consecutive distinct values; categorical splits are prefixes of the
// categories ordered by mean label. Ties go to the lower feature index, then
// the lower threshold (or shorter prefix). Leaves predict the mean label.
// Each child must hold at least `min_leaf` rows.
RegressionTree fit_tree(const Dataset& dataset, std::size_t max_depth, std::size_t min_leaf);

}  // namespace bounty
