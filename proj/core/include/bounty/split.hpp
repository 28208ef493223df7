#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "bounty/dataset.hpp"

namespace bounty {

struct SplitWeights {
  double train = 0.70;
  double validation = 0.15;
  double test = 0.15;
};

struct SplitSet {
  Dataset train;
  Dataset validation;
  Dataset test;
  // Source row indices of each part, ascending.
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> validation_rows;
  std::vector<std::size_t> test_rows;
  std::uint64_t seed = 0;
  SplitWeights weights;
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

// Validation and test get floor(n * w); train takes the remainder.
SplitSizes split_sizes(std::size_t rows, const SplitWeights& weights);

// Shuffles row indices with a Fisher-Yates pass driven by Rng(seed), then
// assigns the first floor(n * w_val) shuffled rows to validation, the next
// floor(n * w_test) to test and the rest to train. Each part keeps its rows
// in ascending source order. Throws Errc::bad_weights unless all weights are
// positive and sum to 1 within 1e-12.
SplitSet split(const Dataset& dataset, const SplitWeights& weights, std::uint64_t seed);

}  // namespace bounty
