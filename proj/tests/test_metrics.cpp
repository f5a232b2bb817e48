#include <gtest/gtest.h>

#include <limits>

#include "lantern/metrics.hpp"
#include "lantern/phantom.hpp"
#include "support.hpp"

using namespace lantern;
using test::random_image;

namespace {

// Second implementations, written from the textbook definitions.

std::vector<double> frame_magnitude(const DynamicImage& x, int t) {
  std::vector<double> m;
  for (const auto& z : x.frame(t)) m.push_back(std::abs(z));
  return m;
}

double brute_psnr(const DynamicImage& x, const DynamicImage& g) {
  double peak = 0.0;
  double mse = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    peak = std::max(peak, std::abs(g[i]));
    mse += std::pow(std::abs(x[i]) - std::abs(g[i]), 2);
  }
  mse /= static_cast<double>(g.size());
  return 20.0 * std::log10(peak) - 10.0 * std::log10(mse);
}

double brute_ssim(const DynamicImage& x, const DynamicImage& g, int win, double sigma) {
  const Shape& s = g.shape();
  double L = 0.0;
  for (const auto& z : g.values()) L = std::max(L, std::abs(z));
  const double C1 = std::pow(0.01 * L, 2);
  const double C2 = std::pow(0.03 * L, 2);
  const int r = win / 2;
  double acc_t = 0.0;
  for (int t = 0; t < s.nt; ++t) {
    const auto a = frame_magnitude(x, t);
    const auto b = frame_magnitude(g, t);
    double acc = 0.0;
    int windows = 0;
    for (int cy = r; cy < s.ny - r; ++cy) {
      for (int cx = r; cx < s.nx - r; ++cx) {
        double wsum = 0.0, ma = 0.0, mb = 0.0;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx) {
            const double w = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
            const std::size_t i = static_cast<std::size_t>(cy + dy) * s.nx + cx + dx;
            wsum += w;
            ma += w * a[i];
            mb += w * b[i];
          }
        ma /= wsum;
        mb /= wsum;
        double va = 0.0, vb = 0.0, cov = 0.0;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx) {
            const double w = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma)) / wsum;
            const std::size_t i = static_cast<std::size_t>(cy + dy) * s.nx + cx + dx;
            va += w * (a[i] - ma) * (a[i] - ma);
            vb += w * (b[i] - mb) * (b[i] - mb);
            cov += w * (a[i] - ma) * (b[i] - mb);
          }
        acc += (2 * ma * mb + C1) * (2 * cov + C2) / ((ma * ma + mb * mb + C1) * (va + vb + C2));
        ++windows;
      }
    }
    acc_t += acc / windows;
  }
  return acc_t / s.nt;
}

double brute_hfen(const DynamicImage& x, const DynamicImage& g) {
  // fspecial('log', 15, 1.5)
  const int n = 15;
  const double sg = 1.5;
  std::vector<double> h(n * n), h1(n * n);
  double hs = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double xx = j - 7.0, yy = i - 7.0;
      h[i * n + j] = std::exp(-(xx * xx + yy * yy) / (2 * sg * sg));
      hs += h[i * n + j];
    }
  double h1s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double xx = j - 7.0, yy = i - 7.0;
      h1[i * n + j] = h[i * n + j] / hs * (xx * xx + yy * yy - 2 * sg * sg) / std::pow(sg, 4);
      h1s += h1[i * n + j];
    }
  for (double& v : h1) v -= h1s / (n * n);

  const Shape& s = g.shape();
  auto filt = [&](const std::vector<double>& img) {
    std::vector<double> out(img.size());
    for (int y = 0; y < s.ny; ++y)
      for (int x0 = 0; x0 < s.nx; ++x0) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            const int yy = std::min(std::max(y + i - 7, 0), s.ny - 1);
            const int xx = std::min(std::max(x0 + j - 7, 0), s.nx - 1);
            acc += h1[i * n + j] * img[yy * s.nx + xx];
          }
        out[y * s.nx + x0] = acc;
      }
    return out;
  };
  double total = 0.0;
  for (int t = 0; t < s.nt; ++t) {
    const auto la = filt(frame_magnitude(x, t));
    const auto lb = filt(frame_magnitude(g, t));
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < la.size(); ++i) {
      num += (la[i] - lb[i]) * (la[i] - lb[i]);
      den += lb[i] * lb[i];
    }
    total += std::sqrt(num / den);
  }
  return total / s.nt;
}

DynamicImage phantom(int n = 32, int nt = 4, std::uint64_t seed = 1) {
  PhantomConfig cfg;
  cfg.nx = n;
  cfg.ny = n;
  cfg.nt = nt;
  cfg.seed = seed;
  return generate_dynamic_phantom(cfg);
}

DynamicImage with_noise(const DynamicImage& g, double sigma, std::uint64_t seed) {
  return g + random_image(g.shape(), seed, sigma);
}

DynamicImage reversed_frames(const DynamicImage& x) {
  DynamicImage out(x.shape());
  const int nt = x.shape().nt;
  for (int t = 0; t < nt; ++t) {
    for (std::size_t i = 0; i < x.shape().frame_size(); ++i) out.frame(t)[i] = x.frame(nt - 1 - t)[i];
  }
  return out;
}

}  // namespace

TEST(Nmse, ClosedForms) {
  const auto g = phantom();
  EXPECT_EQ(nmse(g, g), 0.0);
  EXPECT_DOUBLE_EQ(nmse(DynamicImage(g.shape()), g), 1.0);
  EXPECT_NEAR(nmse(1.1 * g, g), 0.1, 1e-12);
  EXPECT_THROW(nmse(g, DynamicImage(g.shape())), std::invalid_argument);
}

TEST(Nmse, ContinuousAtZero) {
  const auto g = phantom();
  double prev = 1.0;
  for (double eps : {1e-1, 1e-3, 1e-5, 1e-7}) {
    const double v = nmse(with_noise(g, eps, 3), g);
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_LT(prev, 1e-5);
}

TEST(Psnr, ClosedForms) {
  const auto g = phantom();
  EXPECT_EQ(psnr(g, g), std::numeric_limits<double>::infinity());
  // uniform magnitude error of peak / 10 on a non-negative real reference
  DynamicImage ref(Shape{8, 8, 2});
  for (std::size_t i = 0; i < ref.size(); ++i) ref[i] = 0.5 + 0.5 * (i % 3);
  DynamicImage off = ref;
  for (auto& z : off.values()) z += 0.15;
  EXPECT_NEAR(psnr(off, ref), 20.0, 1e-12);
  EXPECT_THROW(psnr(g, DynamicImage(g.shape())), std::invalid_argument);
}

TEST(Psnr, MatchesBruteForce) {
  const auto g = phantom();
  const auto x = with_noise(g, 0.05, 4);
  EXPECT_NEAR(psnr(x, g), brute_psnr(x, g), 1e-10);
}

TEST(Psnr, DecreasesWithNoise) {
  const auto g = phantom();
  double prev = std::numeric_limits<double>::infinity();
  for (double sigma : {0.001, 0.003, 0.01, 0.03, 0.1}) {
    const double v = psnr(with_noise(g, sigma, 5), g);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(Ssim, IdentityAndMagnitudeInvariance) {
  const auto g = phantom();
  EXPECT_NEAR(ssim(g, g), 1.0, 1e-12);
  EXPECT_NEAR(ssim(-1.0 * g, g), 1.0, 1e-12);
  EXPECT_THROW(ssim(g, DynamicImage(g.shape())), std::invalid_argument);
}

TEST(Ssim, MatchesStraightFromDefinition) {
  const auto g = phantom(24, 3, 2);
  const auto x = with_noise(g, 0.08, 6);
  EXPECT_NEAR(ssim(x, g), brute_ssim(x, g, 11, 1.5), 1e-8);
}

TEST(Ssim, WindowShrinksOnSmallFrames) {
  const auto g = random_image(Shape{8, 9, 2}, 1);
  const auto x = with_noise(g, 0.3, 2);
  EXPECT_NEAR(ssim(x, g), brute_ssim(x, g, 7, 1.5), 1e-8);
}

TEST(Ssim, StaysInRange) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = random_image(Shape{16, 16, 2}, seed);
    const auto x = random_image(Shape{16, 16, 2}, seed + 50);
    const double v = ssim(x, g);
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Hfen, ClosedForms) {
  const auto g = phantom();
  EXPECT_EQ(hfen(g, g), 0.0);
  // a constant offset on the magnitude image is invisible to a zero-mean filter
  DynamicImage ref(Shape{24, 24, 2});
  const auto mag = random_image(ref.shape(), 7);
  for (std::size_t i = 0; i < ref.size(); ++i) ref[i] = 1.0 + std::abs(mag[i]);
  DynamicImage off = ref;
  for (auto& z : off.values()) z += 0.3;
  EXPECT_LT(hfen(off, ref), 1e-12);
}

TEST(Hfen, MatchesBruteForce) {
  const auto g = phantom(24, 3, 3);
  const auto x = with_noise(g, 0.05, 8);
  EXPECT_NEAR(hfen(x, g), brute_hfen(x, g), 1e-10);
}

TEST(Hfen, FlatReferenceIsRejected) {
  DynamicImage flat(Shape{16, 16, 2});
  flat.fill({0.5, 0.0});
  EXPECT_THROW(hfen(random_image(flat.shape(), 1), flat), std::invalid_argument);
}

TEST(Metrics, FramePermutationEquivariance) {
  const auto g = phantom(24, 4, 4);
  const auto x = with_noise(g, 0.05, 9);
  const auto a = evaluate_metrics(x, g);
  const auto b = evaluate_metrics(reversed_frames(x), reversed_frames(g));
  EXPECT_NEAR(a.nmse, b.nmse, 1e-12);
  EXPECT_NEAR(a.psnr_db, b.psnr_db, 1e-10);
  EXPECT_NEAR(a.ssim, b.ssim, 1e-12);
  EXPECT_NEAR(a.hfen, b.hfen, 1e-12);
  EXPECT_GE(a.nmse, 0.0);
  EXPECT_GE(a.hfen, 0.0);
}

TEST(Metrics, KernelsAreNormalized) {
  const auto w = gaussian_window(11, 1.5);
  double sw = 0.0;
  for (double v : w) sw += v;
  EXPECT_NEAR(sw, 1.0, 1e-14);
  const auto k = log_kernel(15, 1.5);
  double sk = 0.0;
  for (double v : k) sk += v;
  EXPECT_NEAR(sk, 0.0, 1e-14);
  EXPECT_LT(k[7 * 15 + 7], 0.0);  // negative centre
}

TEST(Summary, SampleStdAndPsnrCap) {
  const std::vector<MetricReport> rows{{0.1, 30.0, 0.9, 0.2},
                                       {0.3, std::numeric_limits<double>::infinity(), 0.7, 0.4}};
  const auto s = summarize(rows);
  EXPECT_DOUBLE_EQ(s.mean.nmse, 0.2);
  EXPECT_DOUBLE_EQ(s.mean.psnr_db, 115.0);
  EXPECT_DOUBLE_EQ(s.mean.ssim, 0.8);
  EXPECT_NEAR(s.stddev.nmse, std::sqrt(0.02), 1e-15);
  EXPECT_NEAR(s.stddev.psnr_db, std::sqrt(2.0) * 85.0, 1e-12);
  const auto one = summarize(std::span<const MetricReport>(rows.data(), 1));
  EXPECT_EQ(one.stddev.ssim, 0.0);
  MetricConfig cfg;
  cfg.psnr_cap_db = 100.0;
  EXPECT_DOUBLE_EQ(summarize(rows, cfg).mean.psnr_db, 65.0);
}
