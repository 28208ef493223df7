#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bounty {

// g(x) evaluated over the rows of one dataset.
class GroupMask {
 public:
  GroupMask() = default;
  explicit GroupMask(std::size_t size, bool value = false)
      : bits_(size, value ? 1 : 0) {}
  explicit GroupMask(std::vector<std::uint8_t> bits);

  std::size_t size() const { return bits_.size(); }
  bool operator[](std::size_t row) const { return bits_[row] != 0; }
  void set(std::size_t row, bool value) { bits_[row] = value ? 1 : 0; }
  std::size_t count() const;
  std::span<const std::uint8_t> bits() const { return bits_; }

  GroupMask operator!() const;
  GroupMask& operator&=(const GroupMask& other);
  GroupMask& operator|=(const GroupMask& other);

  bool operator==(const GroupMask&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

// Mean squared error, accumulated in ascending index order.
double mse(std::span<const double> predictions, std::span<const double> labels);

// Mean squared error over the rows selected by `mask`. Throws
// Errc::empty_group when the mask selects nothing.
double group_loss(std::span<const double> predictions, std::span<const double> labels,
                  const GroupMask& mask);

// Fraction of rows selected by `mask`.
double group_weight(const GroupMask& mask);

}  // namespace bounty
