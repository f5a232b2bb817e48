#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lantern/volume.hpp"

namespace lantern {

enum class MaskKind { OneDRandom, Radial, Full };

std::string to_string(MaskKind kind);
MaskKind mask_kind_from_string(const std::string& name);

/// Binary k-space selection P, one 2D pattern per frame.
///
/// Entries are stored in FFT-native order (DC at index (0, 0) of each
/// frame, negative frequencies wrapped to the upper half), so the mask
/// multiplies the output of the per-frame FFT directly.
class SamplingMask {
 public:
  SamplingMask() = default;
  SamplingMask(Shape shape, std::vector<std::uint8_t> bits, MaskKind kind, double target_accel);

  /// Fully sampled mask.
  static SamplingMask full(Shape shape);

  const Shape& shape() const { return shape_; }
  MaskKind kind() const { return kind_; }
  double target_accel() const { return target_accel_; }

  bool sampled(std::size_t i) const { return bits_[i] != 0; }
  bool sampled(int x, int y, int t) const { return bits_[shape_.index(x, y, t)] != 0; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  std::size_t count() const;
  std::size_t frame_count(int t) const;
  /// (nx * ny * nt) / number of ones.
  double net_acceleration() const;

  friend bool operator==(const SamplingMask&, const SamplingMask&) = default;

 private:
  Shape shape_;
  std::vector<std::uint8_t> bits_;
  MaskKind kind_ = MaskKind::Full;
  double target_accel_ = 1.0;
};

}  // namespace lantern
