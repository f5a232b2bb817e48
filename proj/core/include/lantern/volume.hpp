#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lantern {

using Complex = std::complex<double>;

/// Spatiotemporal extents of a volume. Storage is t-major row-major:
/// x is fastest, then y, then t, so a single frame is contiguous.
struct Shape {
  int nx = 0;
  int ny = 0;
  int nt = 0;

  std::size_t frame_size() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t size() const { return frame_size() * nt; }
  std::size_t index(int x, int y, int t) const {
    return (static_cast<std::size_t>(t) * ny + y) * nx + x;
  }

  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& shape);

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws ShapeError unless nx >= 2, ny >= 2 and nt >= 1.
void require_valid_shape(const Shape& shape);
/// Throws ShapeError naming `what` when the two shapes differ.
void require_same_shape(const Shape& a, const Shape& b, const char* what);

/// Complex spatiotemporal volume. The tag keeps image-domain and k-space
/// data from being mixed up at compile time; both share one layout.
template <typename Tag>
class BasicVolume {
 public:
  BasicVolume() = default;
  explicit BasicVolume(Shape shape) : shape_(shape), data_(shape.size()) {
    require_valid_shape(shape);
  }
  BasicVolume(Shape shape, std::vector<Complex> data) : shape_(shape), data_(std::move(data)) {
    require_valid_shape(shape);
    if (data_.size() != shape.size()) {
      throw ShapeError("volume data length does not match shape " + to_string(shape));
    }
  }

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  Complex& operator[](std::size_t i) { return data_[i]; }
  const Complex& operator[](std::size_t i) const { return data_[i]; }
  Complex& at(int x, int y, int t) { return data_[shape_.index(x, y, t)]; }
  const Complex& at(int x, int y, int t) const { return data_[shape_.index(x, y, t)]; }

  std::span<Complex> values() { return data_; }
  std::span<const Complex> values() const { return data_; }
  std::span<Complex> frame(int t) {
    return std::span<Complex>(data_).subspan(t * shape_.frame_size(), shape_.frame_size());
  }
  std::span<const Complex> frame(int t) const {
    return std::span<const Complex>(data_).subspan(t * shape_.frame_size(), shape_.frame_size());
  }

  bool all_finite() const {
    for (const auto& z : data_) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
    return true;
  }

  void fill(Complex value) { std::fill(data_.begin(), data_.end(), value); }

  BasicVolume& operator+=(const BasicVolume& o) {
    require_same_shape(shape_, o.shape_, "volume +=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  BasicVolume& operator-=(const BasicVolume& o) {
    require_same_shape(shape_, o.shape_, "volume -=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  BasicVolume& operator*=(double s) {
    for (auto& z : data_) z *= s;
    return *this;
  }
  friend BasicVolume operator+(BasicVolume a, const BasicVolume& b) { return a += b; }
  friend BasicVolume operator-(BasicVolume a, const BasicVolume& b) { return a -= b; }
  friend BasicVolume operator*(double s, BasicVolume a) { return a *= s; }

  /// this += s * o
  void add_scaled(double s, const BasicVolume& o) {
    require_same_shape(shape_, o.shape_, "volume add_scaled");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
  }

  friend bool operator==(const BasicVolume&, const BasicVolume&) = default;

 private:
  Shape shape_;
  std::vector<Complex> data_;
};

struct ImageDomain {};
struct KSpaceDomain {};

/// Complex image x(nx, ny, nt); also holds iterates v, beta and ground truth.
using DynamicImage = BasicVolume<ImageDomain>;
/// Per-frame 2D Fourier coefficients of a DynamicImage.
using KSpaceData = BasicVolume<KSpaceDomain>;

/// Complex inner product <a, b> = sum conj(a_i) b_i.
template <typename Tag>
Complex inner(const BasicVolume<Tag>& a, const BasicVolume<Tag>& b) {
  require_same_shape(a.shape(), b.shape(), "inner product");
  Complex acc{};
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

/// Real part of the complex inner product; the pairing used for gradients
/// of real parameters.
template <typename Tag>
double real_inner(const BasicVolume<Tag>& a, const BasicVolume<Tag>& b) {
  require_same_shape(a.shape(), b.shape(), "inner product");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  }
  return acc;
}

template <typename Tag>
double squared_norm(const BasicVolume<Tag>& a) {
  double acc = 0.0;
  for (const auto& z : a.values()) acc += std::norm(z);
  return acc;
}

template <typename Tag>
double norm(const BasicVolume<Tag>& a) {
  return std::sqrt(squared_norm(a));
}

/// Magnitude image, frame-major like the source.
std::vector<double> magnitude(const DynamicImage& x);

}  // namespace lantern
