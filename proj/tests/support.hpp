#pragma once

// Shared helpers for the test suites. Everything here is deliberately
// naive: the oracles recompute from definitions, never via library code.

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

#include "lantern/transforms.hpp"
#include "lantern/volume.hpp"

namespace lantern::test {

template <typename Tag = ImageDomain>
BasicVolume<Tag> random_volume(Shape s, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  BasicVolume<Tag> v(s);
  for (auto& z : v.values()) z = Complex(n(rng), n(rng));
  return v;
}

inline DynamicImage random_image(Shape s, std::uint64_t seed, double scale = 1.0) {
  return random_volume<ImageDomain>(s, seed, scale);
}

inline KSpaceData random_kspace(Shape s, std::uint64_t seed, double scale = 1.0) {
  return random_volume<KSpaceDomain>(s, seed, scale);
}

/// Direct O(N^2) orthonormal 2D DFT per frame, FFT-native ordering.
inline KSpaceData naive_dft(const DynamicImage& x, int sign = -1) {
  const Shape& s = x.shape();
  KSpaceData k(s);
  const double norm = 1.0 / std::sqrt(static_cast<double>(s.frame_size()));
  for (int t = 0; t < s.nt; ++t) {
    for (int ky = 0; ky < s.ny; ++ky) {
      for (int kx = 0; kx < s.nx; ++kx) {
        Complex acc{};
        for (int y = 0; y < s.ny; ++y) {
          for (int xx = 0; xx < s.nx; ++xx) {
            const double ph = sign * 2.0 * std::numbers::pi *
                              (static_cast<double>(kx) * xx / s.nx +
                               static_cast<double>(ky) * y / s.ny);
            acc += x.at(xx, y, t) * std::polar(1.0, ph);
          }
        }
        k.at(kx, ky, t) = acc * norm;
      }
    }
  }
  return k;
}

/// Inverse of naive_dft.
inline DynamicImage naive_idft(const KSpaceData& k) {
  const auto out = naive_dft(DynamicImage(k.shape(), {k.values().begin(), k.values().end()}), +1);
  return DynamicImage(k.shape(), {out.values().begin(), out.values().end()});
}

template <typename Tag>
double max_abs_diff(const BasicVolume<Tag>& a, const BasicVolume<Tag>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

template <typename Tag>
double rel_diff(const BasicVolume<Tag>& a, const BasicVolume<Tag>& b) {
  return norm(a - b) / std::max(norm(b), 1e-300);
}

inline int wrap_index(int i, int n) { return ((i % n) + n) % n; }

/// out(x) = sum_j k(j) v(x - sign * (j - origin)); sign = +1 is circular
/// convolution, sign = -1 circular correlation. Straight from the definition.
inline DynamicImage brute_filter(const Kernel& k, const DynamicImage& v, int sign = +1) {
  const Shape& s = v.shape();
  DynamicImage out(s);
  for (int t = 0; t < s.nt; ++t)
    for (int y = 0; y < s.ny; ++y)
      for (int x = 0; x < s.nx; ++x) {
        Complex acc{};
        for (int c = 0; c < k.kt; ++c)
          for (int b = 0; b < k.ky; ++b)
            for (int a = 0; a < k.kx; ++a) {
              acc += k.at(a, b, c) * v.at(wrap_index(x - sign * (a - k.kx / 2), s.nx),
                                          wrap_index(y - sign * (b - k.ky / 2), s.ny),
                                          wrap_index(t - sign * (c - k.kt / 2), s.nt));
            }
        out.at(x, y, t) = acc;
      }
  return out;
}

/// Linear interpolation through (p, q) by scanning for the bracketing
/// segment; end segments extrapolate.
inline double brute_plf(const std::vector<double>& p, const std::vector<double>& q, double c) {
  std::size_t s = 0;
  while (s + 2 < p.size() && c >= p[s + 1]) ++s;
  const double w = (c - p[s]) / (p[s + 1] - p[s]);
  return q[s] + w * (q[s + 1] - q[s]);
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("lantern_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace lantern::test
