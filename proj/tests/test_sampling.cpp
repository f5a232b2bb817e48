#include <gtest/gtest.h>

#include <map>
#include <set>

#include "lantern/fft.hpp"
#include "lantern/metrics.hpp"
#include "lantern/phantom.hpp"
#include "lantern/sampling.hpp"
#include "support.hpp"

using namespace lantern;
using test::naive_dft;
using test::naive_idft;
using test::random_image;
using test::random_kspace;
using test::rel_diff;

namespace {

// Lines of frame t that are selected, checking each is whole along x.
std::set<int> selected_lines(const SamplingMask& m, int t) {
  std::set<int> lines;
  const Shape& s = m.shape();
  for (int y = 0; y < s.ny; ++y) {
    int on = 0;
    for (int x = 0; x < s.nx; ++x) on += m.sampled(x, y, t) ? 1 : 0;
    EXPECT_TRUE(on == 0 || on == s.nx) << "partial line " << y << " in frame " << t;
    if (on == s.nx) lines.insert(y);
  }
  return lines;
}

// Explicit (F_u^H F_u + rho I) x with the naive DFT standing in for F.
DynamicImage normal_operator(const DynamicImage& x, const SamplingMask& m, double rho) {
  KSpaceData k = naive_dft(x);
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (!m.sampled(i)) k[i] = 0.0;
  }
  DynamicImage back(x.shape());
  const auto inv = naive_idft(k);
  for (std::size_t i = 0; i < back.size(); ++i) back[i] = inv[i] + rho * x[i];
  return back;
}

SamplingMask random_bit_mask(Shape s, std::uint64_t seed, double p = 0.4) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution b(p);
  std::vector<std::uint8_t> bits(s.size());
  for (auto& v : bits) v = b(rng) ? 1 : 0;
  bits[0] = 1;
  return SamplingMask(s, bits, MaskKind::Full, 1.0);
}

}  // namespace

TEST(Fft, MatchesDirectDftOnOddSizes) {
  const auto x = random_image(Shape{5, 6, 2}, 1);
  EXPECT_LT(rel_diff(fft_frames(x), naive_dft(x)), 1e-13);
}

TEST(Fft, IsUnitary) {
  const auto x = random_image(Shape{16, 12, 3}, 2);
  const auto k = fft_frames(x);
  EXPECT_LT(rel_diff(ifft_frames(k), x), 1e-13);
  EXPECT_NEAR(squared_norm(k), squared_norm(x), 1e-12 * squared_norm(x));
}

TEST(Fft, FramesAreIndependent) {
  auto x = random_image(Shape{8, 8, 3}, 4);
  const auto k = fft_frames(x);
  for (auto& z : x.frame(1)) z *= 2.0;
  const auto k2 = fft_frames(x);
  for (std::size_t i = 0; i < 64; ++i) {
    EXPECT_EQ(k2.frame(0)[i], k.frame(0)[i]);
    EXPECT_NEAR(std::abs(k2.frame(1)[i] - 2.0 * k.frame(1)[i]), 0.0, 1e-12);
  }
}

TEST(OneDRandomMask, AccelOneIsFull) {
  const auto m = make_mask_1d_random(16, 16, 2, 1.0, 4, 0);
  EXPECT_EQ(m.count(), m.shape().size());
  EXPECT_DOUBLE_EQ(m.net_acceleration(), 1.0);
}

TEST(OneDRandomMask, SixteenLinesPerFrameAtFourX) {
  const auto m = make_mask_1d_random(64, 64, 8, 4.0, 4, 7);
  const std::set<int> center{62, 63, 0, 1};
  for (int t = 0; t < 8; ++t) {
    const auto lines = selected_lines(m, t);
    EXPECT_EQ(lines.size(), 16u);
    for (int c : center) EXPECT_TRUE(lines.count(c)) << "centre line " << c << " frame " << t;
  }
  EXPECT_DOUBLE_EQ(m.net_acceleration(), 4.0);
  EXPECT_EQ(m.kind(), MaskKind::OneDRandom);
}

TEST(OneDRandomMask, ElevenXIsTheSparsest) {
  const auto m = make_mask_1d_random(126, 126, 4, 11.0, 4, 1);
  for (int t = 0; t < 4; ++t) {
    EXPECT_EQ(selected_lines(m, t).size(), 11u);
    EXPECT_NEAR(static_cast<double>(m.frame_count(t)) / m.shape().frame_size(), 1.0 / 11.0,
                0.1 / 11.0);
  }
  EXPECT_NEAR(m.net_acceleration(), 11.0, 1.1);
}

TEST(OneDRandomMask, BudgetBelowCentreLinesFails) {
  EXPECT_THROW(make_mask_1d_random(64, 64, 2, 20.0, 4, 0), std::invalid_argument);
  EXPECT_THROW(make_mask_1d_random(64, 64, 2, 0.5, 4, 0), std::invalid_argument);
  EXPECT_THROW(make_mask_1d_random(64, 64, 2, 4.0, -1, 0), std::invalid_argument);
}

TEST(OneDRandomMask, DeterministicAndRedrawnPerFrame) {
  const auto a = make_mask_1d_random(32, 32, 6, 4.0, 4, 99);
  const auto b = make_mask_1d_random(32, 32, 6, 4.0, 4, 99);
  EXPECT_EQ(a.bits(), b.bits());
  EXPECT_NE(make_mask_1d_random(32, 32, 6, 4.0, 4, 100).bits(), a.bits());
  std::set<std::set<int>> distinct;
  for (int t = 0; t < 6; ++t) distinct.insert(selected_lines(a, t));
  EXPECT_GT(distinct.size(), 1u);
}

TEST(OneDRandomMask, OuterLinesAreDrawnUniformly) {
  // 12 of the 30 non-centre lines per draw: each should appear with p = 0.4.
  std::map<int, int> hits;
  const int draws = 2000;
  for (int s = 0; s < draws; ++s) {
    const auto m = make_mask_1d_random(4, 32, 1, 2.0, 4, static_cast<std::uint64_t>(s));
    for (int y : selected_lines(m, 0)) ++hits[y];
  }
  for (int y = 2; y < 30; ++y) {
    // 5 sigma band for a binomial(2000, 0.4)
    EXPECT_NEAR(hits[y] / static_cast<double>(draws), 0.4, 5.0 * std::sqrt(0.24 / draws))
        << "line " << y;
  }
}

TEST(RadialMask, DenseSpokesCoverTheGrid) {
  const auto m = make_mask_radial(32, 32, 4, 1.0, 5);
  EXPECT_GE(static_cast<double>(m.count()) / m.shape().size(), 0.9);
  for (int t = 0; t < 4; ++t) EXPECT_TRUE(m.sampled(0, 0, t));
}

TEST(RadialMask, EightXWithinTenPercentPerFrame) {
  const auto m = make_mask_radial(64, 64, 8, 8.0, 3);
  for (int t = 0; t < 8; ++t) {
    EXPECT_NEAR(static_cast<double>(m.frame_count(t)), 64.0 * 64.0 / 8.0, 0.1 * 64 * 64 / 8.0);
    EXPECT_TRUE(m.sampled(0, 0, t));
  }
  EXPECT_NEAR(m.net_acceleration(), 8.0, 0.8);
  EXPECT_EQ(m.kind(), MaskKind::Radial);
}

TEST(RadialMask, FifteenXOn126Grid) {
  SamplingMask m;
  ASSERT_NO_THROW(m = make_mask_radial(126, 126, 4, 15.0, 1));
  EXPECT_NEAR(m.net_acceleration(), 15.0, 1.5);
}

TEST(RadialMask, FramesRotateAndSeedsRepeat) {
  const auto a = make_mask_radial(64, 64, 3, 6.0, 8);
  EXPECT_EQ(a.bits(), make_mask_radial(64, 64, 3, 6.0, 8).bits());
  auto frame = [&](int t) {
    return std::vector<std::uint8_t>(a.bits().begin() + t * 4096, a.bits().begin() + (t + 1) * 4096);
  };
  EXPECT_NE(frame(0), frame(1));
}

TEST(RadialMask, SampledPointsLieOnLinesThroughTheCentre) {
  // every sampled point (centred coordinates) sits within half a pixel of the
  // diagonal-free line set, i.e. its angle matches one of the frame's spokes.
  const int n = 64;
  const auto m = make_mask_radial(n, n, 1, 10.0, 2);
  std::vector<double> angles;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      if (!m.sampled(x, y, 0)) continue;
      const int cx = (x + n / 2) % n - n / 2;
      const int cy = (y + n / 2) % n - n / 2;
      if (std::hypot(cx, cy) > 12.0) angles.push_back(std::atan2(cy, cx));
    }
  }
  ASSERT_FALSE(angles.empty());
  // the radial structure: points far from the centre cluster on few angles
  std::set<long> bins;
  for (double a : angles) bins.insert(std::lround(std::fmod(a + 2 * std::numbers::pi, std::numbers::pi) * 36 / std::numbers::pi));
  EXPECT_LT(bins.size(), angles.size() / 3);
}

TEST(RadialMask, GridTooSmallFails) {
  EXPECT_THROW(make_mask_radial(4, 4, 2, 15.0, 0), std::invalid_argument);
  EXPECT_THROW(make_mask_radial(16, 16, 2, 0.9, 0), std::invalid_argument);
}

TEST(ForwardUndersample, FullMaskIsInvertible) {
  const auto x = random_image(Shape{8, 8, 3}, 11);
  const auto y = forward_undersample(x, SamplingMask::full(x.shape()));
  EXPECT_LE(rel_diff(ifft_frames(y), x), 1e-12);
}

TEST(ForwardUndersample, ZeroedLineStaysZero) {
  const Shape s{8, 8, 2};
  std::vector<std::uint8_t> bits(s.size(), 1);
  for (int x = 0; x < 8; ++x) bits[s.index(x, 3, 1)] = 0;
  const SamplingMask m(s, bits, MaskKind::Full, 1.0);
  const auto y = forward_undersample(random_image(s, 2), m, 0.1, 5);
  for (int x = 0; x < 8; ++x) EXPECT_EQ(y.at(x, 3, 1), Complex{});
  EXPECT_NE(y.at(0, 3, 0), Complex{});
}

TEST(ForwardUndersample, ProjectionDoesNotGainEnergy) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Shape s{12, 10, 3};
    const auto x = random_image(s, seed);
    const auto y = forward_undersample(x, random_bit_mask(s, seed + 100));
    EXPECT_LE(squared_norm(y), squared_norm(x) * (1 + 1e-12));
  }
}

TEST(ForwardUndersample, NoiseHasRequestedSpread) {
  const Shape s{32, 32, 4};
  DynamicImage zero(s);
  const auto y = forward_undersample(zero, SamplingMask::full(s), 0.25, 3);
  double re2 = 0.0;
  double im2 = 0.0;
  for (const auto& z : y.values()) {
    re2 += z.real() * z.real();
    im2 += z.imag() * z.imag();
  }
  EXPECT_NEAR(std::sqrt(re2 / s.size()), 0.25, 0.01);
  EXPECT_NEAR(std::sqrt(im2 / s.size()), 0.25, 0.01);
  EXPECT_EQ(forward_undersample(zero, SamplingMask::full(s), 0.25, 3), y);
}

TEST(ForwardUndersample, RejectsBadInput) {
  const auto x = random_image(Shape{8, 8, 2}, 0);
  EXPECT_THROW(forward_undersample(x, SamplingMask::full(Shape{8, 8, 3})), ShapeError);
  EXPECT_THROW(forward_undersample(x, SamplingMask::full(x.shape()), -1.0), std::invalid_argument);
}

TEST(ZeroFilled, FullMaskIsExact) {
  const auto x = random_image(Shape{10, 8, 2}, 6);
  const auto m = SamplingMask::full(x.shape());
  EXPECT_LE(rel_diff(zero_filled_recon(forward_undersample(x, m), m), x), 1e-12);
}

TEST(ZeroFilled, ZeroDataGivesZero) {
  const Shape s{8, 8, 2};
  const auto m = make_mask_1d_random(8, 8, 2, 2.0, 2, 1);
  EXPECT_EQ(norm(zero_filled_recon(KSpaceData(s), m)), 0.0);
}

TEST(ZeroFilled, HigherAccelerationLosesQuality) {
  PhantomConfig cfg;
  cfg.seed = 12;
  const auto gt = generate_dynamic_phantom(cfg);
  const auto m2 = make_mask_1d_random(64, 64, 8, 2.0, 4, 1);
  const auto m4 = make_mask_1d_random(64, 64, 8, 4.0, 4, 1);
  const double p2 = psnr(zero_filled_recon(forward_undersample(gt, m2), m2), gt);
  const double p4 = psnr(zero_filled_recon(forward_undersample(gt, m4), m4), gt);
  EXPECT_LT(p4, p2);
}

TEST(Adjoint, UndersampledFourierPair) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Shape s{9, 8, 3};
    const auto m = random_bit_mask(s, seed);
    const auto a = random_image(s, seed + 10);
    const auto b = random_kspace(s, seed + 20);
    const Complex lhs = inner(forward_undersample(a, m), b);
    const Complex rhs = inner(a, zero_filled_recon(b, m));
    EXPECT_LE(std::abs(lhs - rhs), 1e-12 * std::abs(lhs));
  }
}

TEST(ReconUpdate, FullMaskWithoutPriorScalesData) {
  const Shape s{8, 8, 2};
  const auto y = random_kspace(s, 1);
  const DynamicImage zero(s);
  const double rho = 0.3;
  const auto x = recon_x_update(y, zero, zero, rho, SamplingMask::full(s));
  const auto expect = (1.0 / (1.0 + rho)) * ifft_frames(y);
  EXPECT_LE(rel_diff(x, expect), 1e-14);
}

TEST(ReconUpdate, GroundTruthIsAFixedPoint) {
  const Shape s{8, 8, 2};
  const auto gt = random_image(s, 3);
  const auto m = SamplingMask::full(s);
  const auto x = recon_x_update(forward_undersample(gt, m), gt, DynamicImage(s), 0.7, m);
  EXPECT_LE(rel_diff(x, gt), 1e-12);
}

TEST(ReconUpdate, SolvesNormalEquations) {
  const Shape s{8, 8, 2};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = random_bit_mask(s, seed, 0.3);
    const auto y = forward_undersample(random_image(s, seed + 1), m);
    const auto v = random_image(s, seed + 2);
    const auto beta = random_image(s, seed + 3, 0.3);
    const double rho = 0.05 + 0.4 * seed;
    const auto x = recon_x_update(y, v, beta, rho, m);
    // rhs = F_u^H y + rho (v - beta), with F_u^H from the naive DFT
    KSpaceData masked = y;
    for (std::size_t i = 0; i < masked.size(); ++i) {
      if (!m.sampled(i)) masked[i] = 0.0;
    }
    const auto fhy = naive_idft(masked);
    DynamicImage rhs(s);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = fhy[i] + rho * (v[i] - beta[i]);
    const auto lhs = normal_operator(x, m, rho);
    EXPECT_LT(norm(lhs - rhs) / norm(rhs), 1e-10);
  }
}

TEST(ReconUpdate, OutputMinimizesSubproblem) {
  const Shape s{8, 8, 2};
  const auto m = random_bit_mask(s, 8, 0.35);
  const auto y = forward_undersample(random_image(s, 1), m);
  const auto v = random_image(s, 2);
  const auto beta = random_image(s, 3, 0.2);
  const double rho = 0.2;
  auto objective = [&](const DynamicImage& x) {
    const auto r = forward_undersample(x, m) - y;
    return 0.5 * squared_norm(r) + 0.5 * rho * squared_norm(x + beta - v);
  };
  const auto x = recon_x_update(y, v, beta, rho, m);
  const double best = objective(x);
  for (std::uint64_t d = 0; d < 10; ++d) {
    auto dir = random_image(s, 50 + d, 1e-3);
    EXPECT_GT(objective(x + dir), best);
    EXPECT_GT(objective(x - dir), best);
  }
}

TEST(ReconUpdate, RejectsNonPositiveRho) {
  const Shape s{4, 4, 1};
  const DynamicImage z(s);
  EXPECT_THROW(recon_x_update(KSpaceData(s), z, z, 0.0, SamplingMask::full(s)),
               std::invalid_argument);
  EXPECT_THROW(recon_x_update(KSpaceData(s), z, z, -1.0, SamplingMask::full(s)),
               std::invalid_argument);
  EXPECT_THROW(recon_x_update(KSpaceData(s), DynamicImage(Shape{4, 4, 2}), z, 1.0,
                              SamplingMask::full(s)),
               ShapeError);
}
