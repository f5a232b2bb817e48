#include "lantern/mask.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace lantern {

std::string to_string(MaskKind kind) {
  switch (kind) {
    case MaskKind::OneDRandom:
      return "1drandom";
    case MaskKind::Radial:
      return "radial";
    case MaskKind::Full:
      return "full";
  }
  return "unknown";
}

MaskKind mask_kind_from_string(const std::string& name) {
  if (name == "1drandom") return MaskKind::OneDRandom;
  if (name == "radial") return MaskKind::Radial;
  if (name == "full") return MaskKind::Full;
  throw std::invalid_argument("unknown mask kind '" + name + "'");
}

SamplingMask::SamplingMask(Shape shape, std::vector<std::uint8_t> bits, MaskKind kind,
                           double target_accel)
    : shape_(shape), bits_(std::move(bits)), kind_(kind), target_accel_(target_accel) {
  require_valid_shape(shape_);
  if (bits_.size() != shape_.size()) {
    throw ShapeError("mask length does not match shape " + to_string(shape_));
  }
  for (auto& b : bits_) {
    if (b > 1) throw std::invalid_argument("mask entries must be 0 or 1");
  }
  if (!(target_accel_ >= 1.0)) throw std::invalid_argument("target acceleration must be >= 1");
}

SamplingMask SamplingMask::full(Shape shape) {
  return SamplingMask(shape, std::vector<std::uint8_t>(shape.size(), 1), MaskKind::Full, 1.0);
}

std::size_t SamplingMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

std::size_t SamplingMask::frame_count(int t) const {
  auto first = bits_.begin() + static_cast<std::ptrdiff_t>(t * shape_.frame_size());
  return static_cast<std::size_t>(
      std::count(first, first + static_cast<std::ptrdiff_t>(shape_.frame_size()), 1));
}

double SamplingMask::net_acceleration() const {
  const auto ones = count();
  if (ones == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(shape_.size()) / static_cast<double>(ones);
}

}  // namespace lantern
