#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lantern/volume.hpp"

namespace lantern {

/// Real 3D kernel, taps stored x fastest, then y, then t. The tap at
/// (kx/2, ky/2, kt/2) is the origin.
struct Kernel {
  int kx = 1;
  int ky = 1;
  int kt = 1;
  std::vector<double> taps;

  Kernel() : taps(1, 0.0) {}
  Kernel(int kx_, int ky_, int kt_);

  std::size_t size() const { return taps.size(); }
  double& at(int x, int y, int t) { return taps[(static_cast<std::size_t>(t) * ky + y) * kx + x]; }
  double at(int x, int y, int t) const {
    return taps[(static_cast<std::size_t>(t) * ky + y) * kx + x];
  }
  bool same_extent(const Kernel& o) const { return kx == o.kx && ky == o.ky && kt == o.kt; }

  friend bool operator==(const Kernel&, const Kernel&) = default;
};

/// L learnable kernels with one bias each.
struct FilterBank {
  std::vector<Kernel> kernels;
  std::vector<double> biases;

  std::size_t size() const { return kernels.size(); }
  /// Same kernel extents, all taps and biases zero.
  FilterBank zeros_like() const;
  bool same_layout(const FilterBank& o) const;
  /// Throws unless L >= 1, biases match kernels and every entry is finite.
  void validate() const;
  /// Appends the kernels and biases of `other`.
  void append(const FilterBank& other);

  friend bool operator==(const FilterBank&, const FilterBank&) = default;
};

/// One complex feature map per filter.
using FeatureStack = std::vector<DynamicImage>;

/// 2D DCT-II atoms of size kx x ky (DC excluded, unit Frobenius norm) plus a
/// temporal finite difference [+1, -1] of extent 1 x 1 x 2. Biases are zero.
FilterBank init_dct_tv(int spatial_count = 8, int kx = 3, int ky = 3);

/// The spatial DCT atoms of init_dct_tv without the temporal kernel.
FilterBank init_dct_only(int spatial_count = 8, int kx = 3, int ky = 3);

/// I.i.d. N(0, sigma^2) taps, zero biases.
FilterBank init_random_gaussian(int count, int kx, int ky, int kt, double sigma,
                                std::uint64_t seed);

/// Circular convolution of v with every kernel, real and imaginary parts
/// filtered independently; bias l is added to the real part of map l.
FeatureStack conv_apply(const FilterBank& bank, const DynamicImage& v, bool with_bias = true);

/// Sum over l of the circular correlation of features[l] with kernel l:
/// the exact adjoint of bias-free conv_apply. Biases are ignored.
DynamicImage conv_adjoint(const FilterBank& bank, const FeatureStack& features);

/// Kernel and bias gradients of sum_l <cotangent_l, conv_apply(bank, v)_l>.
FilterBank conv_apply_param_grad(const FilterBank& bank, const DynamicImage& v,
                                 const FeatureStack& cotangent);

/// Kernel gradients of <cotangent, conv_adjoint(bank, features)>; the bias
/// slots hold the gradient of a real bias added to every output voxel.
FilterBank conv_adjoint_param_grad(const FilterBank& bank, const FeatureStack& features,
                                   const DynamicImage& cotangent);

/// Learnable piecewise-linear function through (p_i, q_i); positions are
/// fixed, values are learned. Extrapolates with the end segments' slopes.
class PiecewiseLinear {
 public:
  PiecewiseLinear(std::vector<double> positions, std::vector<double> values);

  /// `count` uniformly spaced positions on [lo, hi] with q = p.
  static PiecewiseLinear identity(int count = 101, double lo = -1.0, double hi = 1.0);

  std::size_t count() const { return p_.size(); }
  const std::vector<double>& positions() const { return p_; }
  const std::vector<double>& values() const { return q_; }
  std::vector<double>& values() { return q_; }

  /// Index s of the segment [p_s, p_{s+1}] used for input c. Exact knots
  /// take the segment to their right.
  std::size_t segment(double c) const;
  double operator()(double c) const;
  /// Slope of the segment used for c.
  double slope(double c) const;

  friend bool operator==(const PiecewiseLinear&, const PiecewiseLinear&) = default;

 private:
  std::vector<double> p_;
  std::vector<double> q_;
  bool uniform_ = false;
  double inv_step_ = 0.0;
};

/// Per-element PLF value and derivatives. d_q is sparse: element i depends
/// on q[segment[i]] with weight (1 - t[i]) and on q[segment[i] + 1] with t[i].
struct PlfEvaluation {
  std::vector<double> value;
  std::vector<double> d_input;
  std::vector<std::size_t> segment;
  std::vector<double> t;
};

PlfEvaluation plf_eval_and_grads(const PiecewiseLinear& plf, std::span<const double> c);

/// PLF applied to real and imaginary channels separately.
DynamicImage plf_apply(const PiecewiseLinear& plf, const DynamicImage& c);

/// Backward through plf_apply: returns dE/dc and accumulates dE/dq into d_q.
DynamicImage plf_backward(const PiecewiseLinear& plf, const DynamicImage& c,
                          const DynamicImage& cotangent, std::span<double> d_q);

}  // namespace lantern
