#include "lantern/dataset.hpp"

#include <stdexcept>

namespace lantern {

Dataset::Dataset(std::vector<Sample> samples) {
  for (auto& s : samples) add(std::move(s));
}

void Dataset::add(Sample sample) {
  require_same_shape(sample.kspace.shape(), sample.ground_truth.shape(), "dataset sample");
  require_same_shape(sample.mask.shape(), sample.ground_truth.shape(), "dataset sample mask");
  if (!samples_.empty()) {
    require_same_shape(samples_.front().ground_truth.shape(), sample.ground_truth.shape(),
                       "dataset");
  }
  samples_.push_back(std::move(sample));
}

const Shape& Dataset::shape() const {
  if (samples_.empty()) throw std::logic_error("empty dataset has no shape");
  return samples_.front().ground_truth.shape();
}

Dataset Dataset::slice(std::size_t first, std::size_t count) const {
  if (first + count > samples_.size()) throw std::out_of_range("dataset slice out of range");
  Dataset out;
  out.samples_.assign(samples_.begin() + static_cast<std::ptrdiff_t>(first),
                      samples_.begin() + static_cast<std::ptrdiff_t>(first + count));
  return out;
}

}  // namespace lantern
