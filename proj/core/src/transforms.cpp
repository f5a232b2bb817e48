#include "lantern/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "instrumentation.hpp"

namespace lantern {

namespace {

int wrap(int i, int n) { return ((i % n) + n) % n; }

// out[x, y, t] += w * in[x + dx, y + dy, t + dt] with periodic wrap. Complex
// values are handled as interleaved doubles so both channels share the loop.
void accumulate_shifted(double* out, const double* in, const Shape& s, double w, int dx, int dy,
                        int dt) {
  const int sx = wrap(dx, s.nx);
  const int head = s.nx - sx;
  for (int t = 0; t < s.nt; ++t) {
    const int st = wrap(t + dt, s.nt);
    for (int y = 0; y < s.ny; ++y) {
      const int sy = wrap(y + dy, s.ny);
      double* o = out + 2 * s.index(0, y, t);
      const double* src = in + 2 * s.index(0, sy, st);
      const double* a = src + 2 * sx;
      for (int i = 0; i < 2 * head; ++i) o[i] += w * a[i];
      o += 2 * head;
      for (int i = 0; i < 2 * sx; ++i) o[i] += w * src[i];
    }
  }
}

// sum_i Re(conj(g[i]) * in[i + shift]) with periodic wrap.
double shifted_real_inner(const double* g, const double* in, const Shape& s, int dx, int dy,
                          int dt) {
  const int sx = wrap(dx, s.nx);
  const int head = s.nx - sx;
  double acc = 0.0;
  for (int t = 0; t < s.nt; ++t) {
    const int st = wrap(t + dt, s.nt);
    for (int y = 0; y < s.ny; ++y) {
      const int sy = wrap(y + dy, s.ny);
      const double* gr = g + 2 * s.index(0, y, t);
      const double* src = in + 2 * s.index(0, sy, st);
      const double* a = src + 2 * sx;
      double part = 0.0;
      for (int i = 0; i < 2 * head; ++i) part += gr[i] * a[i];
      gr += 2 * head;
      for (int i = 0; i < 2 * sx; ++i) part += gr[i] * src[i];
      acc += part;
    }
  }
  return acc;
}

const double* raw(const DynamicImage& v) { return reinterpret_cast<const double*>(v.values().data()); }
double* raw(DynamicImage& v) { return reinterpret_cast<double*>(v.values().data()); }

void require_fits(const Kernel& k, const Shape& s) {
  if (k.kx > s.nx || k.ky > s.ny || k.kt > s.nt) {
    throw std::invalid_argument("kernel (" + std::to_string(k.kx) + ", " + std::to_string(k.ky) +
                                ", " + std::to_string(k.kt) + ") larger than image " +
                                to_string(s));
  }
}

// Calls fn(tap_index, dx, dy, dt) for every tap, where (dx, dy, dt) is the
// tap's offset from the kernel origin.
template <typename Fn>
void for_each_tap(const Kernel& k, Fn&& fn) {
  std::size_t j = 0;
  for (int t = 0; t < k.kt; ++t) {
    for (int y = 0; y < k.ky; ++y) {
      for (int x = 0; x < k.kx; ++x, ++j) {
        fn(j, x - k.kx / 2, y - k.ky / 2, t - k.kt / 2);
      }
    }
  }
}

void add_real_bias(DynamicImage& v, double b) {
  if (b == 0.0) return;
  for (auto& z : v.values()) z += b;
}

double sum_real(const DynamicImage& v) {
  double acc = 0.0;
  for (const auto& z : v.values()) acc += z.real();
  return acc;
}

std::vector<double> dct_basis_1d(int n, int u) {
  std::vector<double> a(n);
  const double scale = u == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
  for (int x = 0; x < n; ++x) a[x] = scale * std::cos(std::numbers::pi * (2 * x + 1) * u / (2.0 * n));
  return a;
}

}  // namespace

Kernel::Kernel(int kx_, int ky_, int kt_) : kx(kx_), ky(ky_), kt(kt_) {
  if (kx < 1 || ky < 1 || kt < 1) throw std::invalid_argument("kernel extents must be >= 1");
  taps.assign(static_cast<std::size_t>(kx) * ky * kt, 0.0);
}

FilterBank FilterBank::zeros_like() const {
  FilterBank out;
  for (const auto& k : kernels) out.kernels.emplace_back(k.kx, k.ky, k.kt);
  out.biases.assign(biases.size(), 0.0);
  return out;
}

bool FilterBank::same_layout(const FilterBank& o) const {
  if (kernels.size() != o.kernels.size() || biases.size() != o.biases.size()) return false;
  for (std::size_t l = 0; l < kernels.size(); ++l) {
    if (!kernels[l].same_extent(o.kernels[l])) return false;
  }
  return true;
}

void FilterBank::validate() const {
  if (kernels.empty()) throw std::invalid_argument("filter bank needs at least one kernel");
  if (biases.size() != kernels.size()) throw std::invalid_argument("one bias per kernel required");
  for (const auto& k : kernels) {
    if (k.taps.size() != static_cast<std::size_t>(k.kx) * k.ky * k.kt) {
      throw std::invalid_argument("kernel tap count does not match its extents");
    }
    for (double w : k.taps) {
      if (!std::isfinite(w)) throw std::invalid_argument("non-finite kernel tap");
    }
  }
  for (double b : biases) {
    if (!std::isfinite(b)) throw std::invalid_argument("non-finite bias");
  }
}

void FilterBank::append(const FilterBank& other) {
  kernels.insert(kernels.end(), other.kernels.begin(), other.kernels.end());
  biases.insert(biases.end(), other.biases.begin(), other.biases.end());
}

FilterBank init_dct_only(int spatial_count, int kx, int ky) {
  if (spatial_count < 1 || spatial_count > kx * ky - 1) {
    throw std::invalid_argument("a " + std::to_string(kx) + "x" + std::to_string(ky) +
                                " DCT has only " + std::to_string(kx * ky - 1) +
                                " non-DC atoms; requested " + std::to_string(spatial_count));
  }
  FilterBank bank;
  for (int v = 0; v < ky && static_cast<int>(bank.size()) < spatial_count; ++v) {
    const auto by = dct_basis_1d(ky, v);
    for (int u = 0; u < kx && static_cast<int>(bank.size()) < spatial_count; ++u) {
      if (u == 0 && v == 0) continue;
      const auto bx = dct_basis_1d(kx, u);
      Kernel k(kx, ky, 1);
      double energy = 0.0;
      for (int y = 0; y < ky; ++y) {
        for (int x = 0; x < kx; ++x) {
          k.at(x, y, 0) = bx[x] * by[y];
          energy += k.at(x, y, 0) * k.at(x, y, 0);
        }
      }
      const double scale = 1.0 / std::sqrt(energy);
      for (double& w : k.taps) w *= scale;
      bank.kernels.push_back(std::move(k));
    }
  }
  bank.biases.assign(bank.size(), 0.0);
  return bank;
}

FilterBank init_dct_tv(int spatial_count, int kx, int ky) {
  FilterBank bank = init_dct_only(spatial_count, kx, ky);
  Kernel tv(1, 1, 2);
  tv.at(0, 0, 0) = 1.0;
  tv.at(0, 0, 1) = -1.0;
  bank.kernels.push_back(std::move(tv));
  bank.biases.push_back(0.0);
  return bank;
}

FilterBank init_random_gaussian(int count, int kx, int ky, int kt, double sigma,
                                std::uint64_t seed) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (count < 1) throw std::invalid_argument("filter count must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  FilterBank bank;
  for (int l = 0; l < count; ++l) {
    Kernel k(kx, ky, kt);
    for (double& w : k.taps) w = gauss(rng);
    bank.kernels.push_back(std::move(k));
  }
  bank.biases.assign(count, 0.0);
  return bank;
}

FeatureStack conv_apply(const FilterBank& bank, const DynamicImage& v, bool with_bias) {
  FeatureStack out;
  out.reserve(bank.size());
  for (std::size_t l = 0; l < bank.size(); ++l) {
    const Kernel& k = bank.kernels[l];
    require_fits(k, v.shape());
    DynamicImage c(v.shape());
    for_each_tap(k, [&](std::size_t j, int dx, int dy, int dt) {
      if (k.taps[j] != 0.0) accumulate_shifted(raw(c), raw(v), v.shape(), k.taps[j], -dx, -dy, -dt);
    });
    if (with_bias) add_real_bias(c, bank.biases[l]);
    out.push_back(std::move(c));
  }
  return out;
}

DynamicImage conv_adjoint(const FilterBank& bank, const FeatureStack& features) {
  if (features.size() != bank.size()) {
    throw std::invalid_argument("conv_adjoint: " + std::to_string(features.size()) +
                                " feature maps for " + std::to_string(bank.size()) + " kernels");
  }
  if (features.empty()) throw std::invalid_argument("conv_adjoint: no feature maps");
  const Shape& s = features.front().shape();
  DynamicImage out(s);
  for (std::size_t l = 0; l < bank.size(); ++l) {
    require_same_shape(features[l].shape(), s, "conv_adjoint");
    const Kernel& k = bank.kernels[l];
    require_fits(k, s);
    for_each_tap(k, [&](std::size_t j, int dx, int dy, int dt) {
      if (k.taps[j] != 0.0) accumulate_shifted(raw(out), raw(features[l]), s, k.taps[j], dx, dy, dt);
    });
  }
  return out;
}

FilterBank conv_apply_param_grad(const FilterBank& bank, const DynamicImage& v,
                                 const FeatureStack& cotangent) {
  if (cotangent.size() != bank.size()) throw std::invalid_argument("cotangent count mismatch");
  FilterBank g = bank.zeros_like();
  for (std::size_t l = 0; l < bank.size(); ++l) {
    require_same_shape(cotangent[l].shape(), v.shape(), "conv_apply_param_grad");
    for_each_tap(bank.kernels[l], [&](std::size_t j, int dx, int dy, int dt) {
      g.kernels[l].taps[j] = shifted_real_inner(raw(cotangent[l]), raw(v), v.shape(), -dx, -dy, -dt);
    });
    g.biases[l] = sum_real(cotangent[l]);
  }
  return g;
}

FilterBank conv_adjoint_param_grad(const FilterBank& bank, const FeatureStack& features,
                                   const DynamicImage& cotangent) {
  if (features.size() != bank.size()) throw std::invalid_argument("feature count mismatch");
  FilterBank g = bank.zeros_like();
  const double bias_grad = sum_real(cotangent);
  for (std::size_t l = 0; l < bank.size(); ++l) {
    require_same_shape(features[l].shape(), cotangent.shape(), "conv_adjoint_param_grad");
    for_each_tap(bank.kernels[l], [&](std::size_t j, int dx, int dy, int dt) {
      g.kernels[l].taps[j] =
          shifted_real_inner(raw(cotangent), raw(features[l]), cotangent.shape(), dx, dy, dt);
    });
    g.biases[l] = bias_grad;
  }
  return g;
}

PiecewiseLinear::PiecewiseLinear(std::vector<double> positions, std::vector<double> values)
    : p_(std::move(positions)), q_(std::move(values)) {
  if (p_.size() < 2) throw std::invalid_argument("piecewise-linear function needs >= 2 points");
  if (p_.size() != q_.size()) throw std::invalid_argument("positions and values differ in length");
  for (std::size_t i = 0; i + 1 < p_.size(); ++i) {
    if (!(p_[i] < p_[i + 1])) throw std::invalid_argument("positions must be strictly increasing");
  }
  const double step = (p_.back() - p_.front()) / static_cast<double>(p_.size() - 1);
  uniform_ = true;
  for (std::size_t i = 0; i < p_.size(); ++i) {
    if (p_[i] != p_.front() + static_cast<double>(i) * step) {
      uniform_ = false;
      break;
    }
  }
  inv_step_ = 1.0 / step;
}

PiecewiseLinear PiecewiseLinear::identity(int count, double lo, double hi) {
  if (count < 2 || !(lo < hi)) throw std::invalid_argument("invalid identity PLF range");
  std::vector<double> p(count);
  const double step = (hi - lo) / (count - 1);
  for (int i = 0; i < count; ++i) p[i] = lo + i * step;
  return PiecewiseLinear(p, p);
}

std::size_t PiecewiseLinear::segment(double c) const {
  const std::size_t last = p_.size() - 2;
  if (!(c > p_.front())) return 0;
  if (c >= p_.back()) return last;
  std::size_t s;
  if (uniform_) {
    s = static_cast<std::size_t>((c - p_.front()) * inv_step_);
    // rounding can land one off near a knot
    if (s > last) s = last;
    if (c < p_[s]) --s;
    else if (s < last && c >= p_[s + 1]) ++s;
  } else {
    s = static_cast<std::size_t>(std::upper_bound(p_.begin(), p_.end(), c) - p_.begin()) - 1;
  }
  return std::min(s, last);
}

double PiecewiseLinear::operator()(double c) const {
  const std::size_t s = segment(c);
  const double t = (c - p_[s]) / (p_[s + 1] - p_[s]);
  return (1.0 - t) * q_[s] + t * q_[s + 1];
}

double PiecewiseLinear::slope(double c) const {
  const std::size_t s = segment(c);
  return (q_[s + 1] - q_[s]) / (p_[s + 1] - p_[s]);
}

PlfEvaluation plf_eval_and_grads(const PiecewiseLinear& plf, std::span<const double> c) {
  const auto& p = plf.positions();
  const auto& q = plf.values();
  PlfEvaluation out;
  out.value.resize(c.size());
  out.d_input.resize(c.size());
  out.segment.resize(c.size());
  out.t.resize(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const std::size_t s = plf.segment(c[i]);
    const double width = p[s + 1] - p[s];
    const double t = (c[i] - p[s]) / width;
    out.segment[i] = s;
    out.t[i] = t;
    out.value[i] = (1.0 - t) * q[s] + t * q[s + 1];
    out.d_input[i] = (q[s + 1] - q[s]) / width;
  }
  return out;
}

DynamicImage plf_apply(const PiecewiseLinear& plf, const DynamicImage& c) {
  detail::note_forward_evaluation();
  DynamicImage out(c.shape());
  for (std::size_t i = 0; i < c.size(); ++i) {
    out[i] = Complex(plf(c[i].real()), plf(c[i].imag()));
  }
  return out;
}

DynamicImage plf_backward(const PiecewiseLinear& plf, const DynamicImage& c,
                          const DynamicImage& cotangent, std::span<double> d_q) {
  require_same_shape(c.shape(), cotangent.shape(), "plf_backward");
  if (d_q.size() != plf.count()) throw std::invalid_argument("d_q length mismatch");
  const auto& p = plf.positions();
  const auto& q = plf.values();
  DynamicImage grad(c.shape());
  auto channel = [&](double x, double g, double& dx) {
    const std::size_t s = plf.segment(x);
    const double width = p[s + 1] - p[s];
    const double t = (x - p[s]) / width;
    dx = g * (q[s + 1] - q[s]) / width;
    d_q[s] += g * (1.0 - t);
    d_q[s + 1] += g * t;
  };
  for (std::size_t i = 0; i < c.size(); ++i) {
    double re = 0.0;
    double im = 0.0;
    channel(c[i].real(), cotangent[i].real(), re);
    channel(c[i].imag(), cotangent[i].imag(), im);
    grad[i] = Complex(re, im);
  }
  return grad;
}

}  // namespace lantern
