#pragma once

#include <vector>

#include "lantern/mask.hpp"
#include "lantern/volume.hpp"

namespace lantern {

struct Sample {
  KSpaceData kspace;
  SamplingMask mask;
  DynamicImage ground_truth;
};

/// Training or test set; every sample shares one shape.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<Sample> samples);

  void add(Sample sample);

  bool empty() const { return samples_.empty(); }
  std::size_t size() const { return samples_.size(); }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  const std::vector<Sample>& samples() const { return samples_; }
  /// Shape shared by all samples; throws on an empty set.
  const Shape& shape() const;

  /// Samples [first, first + count).
  Dataset slice(std::size_t first, std::size_t count) const;

 private:
  std::vector<Sample> samples_;
};

}  // namespace lantern
