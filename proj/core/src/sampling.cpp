#include "lantern/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "instrumentation.hpp"
#include "lantern/fft.hpp"

namespace lantern {

namespace {

// Portable uniform draw in [0, n); std::uniform_int_distribution is not
// specified bit-for-bit across standard libraries.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

bool within_tolerance(double achieved, double target) {
  return std::abs(achieved - target) <= 0.1 * target;
}

void require_dims(int nx, int ny, int nt) { require_valid_shape(Shape{nx, ny, nt}); }

// Rasterizes `spokes` lines through the centre of one frame, rotated by `offset`.
void rasterize_spokes(std::uint8_t* frame, int nx, int ny, int spokes, double offset) {
  const int cx = nx / 2;
  const int cy = ny / 2;
  const double reach = std::hypot(nx / 2.0, ny / 2.0) + 1.0;
  for (int s = 0; s < spokes; ++s) {
    const double theta = offset + s * std::numbers::pi / spokes;
    const double c = std::cos(theta);
    const double sn = std::sin(theta);
    for (double r = -reach; r <= reach; r += 0.5) {
      const long sx = std::lround(cx + r * c);
      const long sy = std::lround(cy + r * sn);
      if (sx < 0 || sx >= nx || sy < 0 || sy >= ny) continue;
      // centred (shifted) index -> FFT-native index
      const long x = (sx - cx + nx) % nx;
      const long y = (sy - cy + ny) % ny;
      frame[y * nx + x] = 1;
    }
  }
}

std::vector<std::uint8_t> radial_bits(const Shape& shape, int spokes, double start) {
  constexpr double golden = std::numbers::pi * 0.6180339887498949;
  std::vector<std::uint8_t> bits(shape.size(), 0);
  for (int t = 0; t < shape.nt; ++t) {
    rasterize_spokes(bits.data() + t * shape.frame_size(), shape.nx, shape.ny, spokes,
                     start + t * golden);
  }
  return bits;
}

}  // namespace

SamplingMask make_mask_1d_random(int nx, int ny, int nt, double accel, int center_lines,
                                 std::uint64_t seed) {
  require_dims(nx, ny, nt);
  if (!(accel >= 1.0)) throw std::invalid_argument("acceleration must be >= 1");
  if (center_lines < 0 || center_lines > ny) {
    throw std::invalid_argument("center_lines must lie in [0, ny]");
  }
  const Shape shape{nx, ny, nt};
  const int budget = static_cast<int>(std::lround(ny / accel));
  if (budget < center_lines || budget < 1) {
    throw std::invalid_argument("acceleration " + std::to_string(accel) + " leaves " +
                                std::to_string(budget) + " lines per frame, fewer than the " +
                                std::to_string(center_lines) + " centre lines");
  }
  const double achieved = static_cast<double>(ny) / budget;
  if (!within_tolerance(achieved, accel)) {
    throw std::invalid_argument("ny=" + std::to_string(ny) + " cannot realise acceleration " +
                                std::to_string(accel) + " within 10%");
  }

  std::vector<bool> is_center(ny, false);
  for (int i = 0; i < center_lines; ++i) {
    const int freq = i - center_lines / 2;
    is_center[(freq + ny) % ny] = true;
  }
  std::vector<int> outer;
  for (int y = 0; y < ny; ++y) {
    if (!is_center[y]) outer.push_back(y);
  }

  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> bits(shape.size(), 0);
  for (int t = 0; t < nt; ++t) {
    std::vector<int> pool = outer;
    // partial Fisher-Yates: the first `extra` entries are the draw
    const int extra = budget - center_lines;
    for (int i = 0; i < extra; ++i) {
      const auto j = i + static_cast<int>(uniform_below(rng, pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    auto select = [&](int y) {
      std::fill_n(bits.begin() + static_cast<std::ptrdiff_t>(shape.index(0, y, t)), nx, 1);
    };
    for (int y = 0; y < ny; ++y) {
      if (is_center[y]) select(y);
    }
    for (int i = 0; i < extra; ++i) select(pool[i]);
  }
  return SamplingMask(shape, std::move(bits), MaskKind::OneDRandom, accel);
}

SamplingMask make_mask_radial(int nx, int ny, int nt, double accel, std::uint64_t seed) {
  require_dims(nx, ny, nt);
  if (!(accel >= 1.0)) throw std::invalid_argument("acceleration must be >= 1");
  const Shape shape{nx, ny, nt};
  std::mt19937_64 rng(seed);
  const double start = uniform_unit(rng) * std::numbers::pi;
  const double target = static_cast<double>(shape.frame_size()) / accel;

  auto mean_count = [&](int spokes) {
    SamplingMask m(shape, radial_bits(shape, spokes, start), MaskKind::Radial, accel);
    return static_cast<double>(m.count()) / nt;
  };

  int lo = 1;
  int hi = 8 * (nx + ny);
  if (mean_count(hi) < target) {
    throw std::invalid_argument("radial coverage cannot reach acceleration " +
                                std::to_string(accel) + " on this grid");
  }
  if (mean_count(lo) >= target) {
    hi = lo;
  }
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (mean_count(mid) >= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  int spokes = hi;
  if (hi > 1 && std::abs(mean_count(hi - 1) - target) < std::abs(mean_count(hi) - target)) {
    spokes = hi - 1;
  }

  SamplingMask mask(shape, radial_bits(shape, spokes, start), MaskKind::Radial, accel);
  for (int t = 0; t < nt; ++t) {
    if (!within_tolerance(static_cast<double>(mask.frame_count(t)), target)) {
      throw std::invalid_argument("grid " + to_string(shape) +
                                  " too small for radial acceleration " + std::to_string(accel) +
                                  " within 10%");
    }
  }
  return mask;
}

KSpaceData apply_mask(KSpaceData k, const SamplingMask& mask) {
  require_same_shape(k.shape(), mask.shape(), "apply_mask");
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (!mask.sampled(i)) k[i] = Complex{};
  }
  return k;
}

KSpaceData forward_undersample(const DynamicImage& x, const SamplingMask& mask,
                               double noise_sigma, std::uint64_t seed) {
  require_same_shape(x.shape(), mask.shape(), "forward_undersample");
  if (noise_sigma < 0.0) throw std::invalid_argument("noise sigma must be non-negative");
  KSpaceData k = fft_frames(x);
  if (noise_sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, noise_sigma);
    for (auto& z : k.values()) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      z += Complex(re, im);
    }
  }
  return apply_mask(std::move(k), mask);
}

DynamicImage zero_filled_recon(const KSpaceData& y, const SamplingMask& mask) {
  return ifft_frames(apply_mask(y, mask));
}

ReconResult recon_layer(const KSpaceData& y, const DynamicImage& v, const DynamicImage& beta,
                        double rho, const SamplingMask& mask) {
  detail::note_forward_evaluation();
  if (!(rho > 0.0)) throw std::invalid_argument("recon layer needs rho > 0");
  require_same_shape(y.shape(), mask.shape(), "recon_layer y/mask");
  require_same_shape(v.shape(), y.shape(), "recon_layer v");
  require_same_shape(beta.shape(), y.shape(), "recon_layer beta");

  ReconResult r;
  r.prior_spectrum = fft_frames(v - beta);
  r.spectrum = KSpaceData(y.shape());
  const double on = 1.0 / (1.0 + rho);
  const double off = 1.0 / rho;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const Complex prior = rho * r.prior_spectrum[i];
    r.spectrum[i] = mask.sampled(i) ? (y[i] + prior) * on : prior * off;
  }
  r.x = ifft_frames(r.spectrum);
  return r;
}

}  // namespace lantern
