#pragma once

// Independent reference implementations used to check the library. Each one
// works a row at a time straight from the definitions and shares no
// evaluation code with the code under test.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

#include "bounty/bundle.hpp"
#include "bounty/dataset.hpp"
#include "bounty/hypothesis.hpp"
#include "bounty/pdl.hpp"
#include "bounty/predicate.hpp"
#include "bounty/rng.hpp"

namespace oracle {

bool predicate_row(const bounty::Predicate& p, const bounty::Dataset& d, std::size_t row);
std::vector<bool> predicate_mask(const bounty::Predicate& p, const bounty::Dataset& d);

double tree_row(const bounty::RegressionTree& t, const bounty::Dataset& d, std::size_t row);
double hypothesis_row(const bounty::Hypothesis& h, const bounty::Dataset& d, std::size_t row);

// Walks the node log of a PDL snapshot for one row at one version.
double pdl_row(const nlohmann::json& snapshot, const bounty::Dataset& d, std::uint32_t version, std::size_t row);
std::vector<double> pdl_predict(const nlohmann::json& snapshot, const bounty::Dataset& d, std::uint32_t version);

// Mean of squared residuals: residuals first, then a long-double sum.
double two_pass_mse(std::span<const double> p, std::span<const double> y);
double filtered_mse(std::span<const double> p, std::span<const double> y, const std::vector<bool>& mask);

}  // namespace oracle

namespace fuzz {

std::shared_ptr<const bounty::Schema> schema(bounty::Rng& rng);
bounty::Dataset dataset(const std::shared_ptr<const bounty::Schema>& schema, std::size_t rows, bounty::Rng& rng);
bounty::Predicate predicate(const bounty::Schema& schema, bounty::Rng& rng, std::size_t depth = 3);
bounty::Hypothesis hypothesis(const bounty::Schema& schema, bounty::Rng& rng);
bounty::RegressionTree tree(const bounty::Schema& schema, bounty::Rng& rng, std::size_t depth);
bounty::ModelBundle bundle(const bounty::Schema& schema, bounty::Rng& rng);
// Random mix of updates and repairs with `versions` prepends.
bounty::PointerDecisionList pdl(const std::shared_ptr<const bounty::Schema>& schema, bounty::Rng& rng,
                                std::size_t versions);

}  // namespace fuzz
