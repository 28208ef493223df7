#include "bounty/loss.hpp"

#include <string>

#include "bounty/error.hpp"

namespace bounty {

GroupMask::GroupMask(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t GroupMask::count() const {
  std::size_t n = 0;
  for (auto b : bits_) n += b;
  return n;
}

GroupMask GroupMask::operator!() const {
  GroupMask out = *this;
  for (auto& b : out.bits_) b ^= 1;
  return out;
}

GroupMask& GroupMask::operator&=(const GroupMask& other) {
  if (other.size() != size()) throw Error(Errc::length_mismatch, "mask sizes differ");
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] &= other.bits_[i];
  return *this;
}

GroupMask& GroupMask::operator|=(const GroupMask& other) {
  if (other.size() != size()) throw Error(Errc::length_mismatch, "mask sizes differ");
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
  return *this;
}

double mse(std::span<const double> predictions, std::span<const double> labels) {
  if (predictions.size() != labels.size()) {
    throw Error(Errc::length_mismatch, "predictions and labels differ in length (" +
                                           std::to_string(predictions.size()) + " vs " +
                                           std::to_string(labels.size()) + ")");
  }
  if (predictions.empty()) throw Error(Errc::empty_input, "mse of an empty vector");
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double r = predictions[i] - labels[i];
    sum += r * r;
  }
  return sum / static_cast<double>(predictions.size());
}

double group_loss(std::span<const double> predictions, std::span<const double> labels,
                  const GroupMask& mask) {
  if (predictions.size() != labels.size() || mask.size() != labels.size()) {
    throw Error(Errc::length_mismatch, "predictions, labels and mask must be aligned");
  }
  double sum = 0.0;
  std::size_t n = 0;
  const auto bits = mask.bits();
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (!bits[i]) continue;
    const double r = predictions[i] - labels[i];
    sum += r * r;
    ++n;
  }
  if (n == 0) throw Error(Errc::empty_group, "group selects no rows");
  return sum / static_cast<double>(n);
}

double group_weight(const GroupMask& mask) {
  if (mask.size() == 0) throw Error(Errc::empty_input, "group weight of an empty mask");
  return static_cast<double>(mask.count()) / static_cast<double>(mask.size());
}

}  // namespace bounty
