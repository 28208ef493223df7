#include "bounty/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bounty/error.hpp"
#include "bounty/rng.hpp"

namespace bounty {

namespace {

void check_weights(const SplitWeights& w) {
  const bool positive = w.train > 0.0 && w.validation > 0.0 && w.test > 0.0;
  const double sum = w.train + w.validation + w.test;
  if (!positive || !std::isfinite(sum) || std::abs(sum - 1.0) > 1e-12) {
    throw Error(Errc::bad_weights, "split weights must be positive and sum to 1");
  }
}

// floor(n * w), except that a product within rounding noise of an integer
// is taken to be that integer (0.1 * 10 must give 1, not 0).
std::size_t floor_share(std::size_t n, double w) {
  const double q = static_cast<double>(n) * w;
  const double nearest = std::round(q);
  if (std::abs(q - nearest) <= 1e-9 * std::max(1.0, q)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::floor(q));
}

}  // namespace

SplitSizes split_sizes(std::size_t rows, const SplitWeights& weights) {
  check_weights(weights);
  SplitSizes sizes;
  sizes.validation = floor_share(rows, weights.validation);
  sizes.test = floor_share(rows, weights.test);
  sizes.train = rows - sizes.validation - sizes.test;
  return sizes;
}

SplitSet split(const Dataset& dataset, const SplitWeights& weights, std::uint64_t seed) {
  const auto n = dataset.rows();
  const auto sizes = split_sizes(n, weights);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }

  const auto val_end = order.begin() + static_cast<std::ptrdiff_t>(sizes.validation);
  const auto test_end = val_end + static_cast<std::ptrdiff_t>(sizes.test);
  std::vector<std::size_t> validation_rows(order.begin(), val_end);
  std::vector<std::size_t> test_rows(val_end, test_end);
  std::vector<std::size_t> train_rows(test_end, order.end());
  std::sort(validation_rows.begin(), validation_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  std::sort(train_rows.begin(), train_rows.end());

  return SplitSet{dataset.select(train_rows),
                  dataset.select(validation_rows),
                  dataset.select(test_rows),
                  std::move(train_rows),
                  std::move(validation_rows),
                  std::move(test_rows),
                  seed,
                  weights};
}

}  // namespace bounty
