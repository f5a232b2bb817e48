#include <gtest/gtest.h>

#include "lantern/phantom.hpp"
#include "lantern/sampling.hpp"
#include "lantern/transforms.hpp"
#include "support.hpp"

using namespace lantern;

TEST(Phantom, StaticWhenAmplitudeIsZero) {
  PhantomConfig cfg;
  cfg.contraction_amplitude = 0.0;
  cfg.seed = 3;
  const auto x = generate_dynamic_phantom(cfg);
  for (int t = 1; t < cfg.nt; ++t) {
    for (std::size_t i = 0; i < x.shape().frame_size(); ++i) {
      ASSERT_EQ(x.frame(t)[i], x.frame(0)[i]);
    }
  }
}

TEST(Phantom, NormalizedComplexAndFinite) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    PhantomConfig cfg;
    cfg.seed = seed;
    const auto x = generate_dynamic_phantom(cfg);
    EXPECT_TRUE(x.all_finite());
    double peak = 0.0;
    double imag = 0.0;
    for (const auto& z : x.values()) {
      peak = std::max(peak, std::abs(z));
      imag = std::max(imag, std::abs(z.imag()));
    }
    EXPECT_NEAR(peak, 1.0, 1e-15);
    EXPECT_GT(imag, 0.05);  // genuinely complex
  }
}

TEST(Phantom, TemporalMeanIsSmooth) {
  // mean absolute neighbour difference of the temporal mean magnitude, against
  // the same statistic for white noise of equal range
  PhantomConfig cfg;
  cfg.seed = 5;
  const auto x = generate_dynamic_phantom(cfg);
  const Shape& s = x.shape();
  auto roughness = [&](const std::vector<double>& img) {
    double acc = 0.0;
    for (int y = 0; y < s.ny; ++y)
      for (int i = 0; i + 1 < s.nx; ++i) acc += std::abs(img[y * s.nx + i + 1] - img[y * s.nx + i]);
    return acc / (s.ny * (s.nx - 1));
  };
  std::vector<double> mean(s.frame_size(), 0.0);
  for (int t = 0; t < s.nt; ++t)
    for (std::size_t i = 0; i < s.frame_size(); ++i) mean[i] += std::abs(x.frame(t)[i]) / s.nt;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> noise(s.frame_size());
  for (double& v : noise) v = u(rng);
  EXPECT_LT(roughness(mean), 0.15 * roughness(noise));
}

TEST(Phantom, TemporalDifferencesSitOnMovingBoundaries) {
  PhantomConfig cfg;
  cfg.seed = 7;
  const auto x = generate_dynamic_phantom(cfg);
  const auto ellipses = phantom_ellipses(cfg);
  ASSERT_EQ(ellipses.size(), static_cast<std::size_t>(cfg.n_ellipses));
  const auto tv = conv_apply(init_dct_tv(), x).back();
  std::size_t active = 0;
  std::size_t explained = 0;
  for (int t = 0; t < cfg.nt; ++t) {
    const int next = (t + 1) % cfg.nt;
    for (int y = 0; y < cfg.ny; ++y) {
      for (int i = 0; i < cfg.nx; ++i) {
        if (std::abs(tv.at(i, y, t)) < 1e-12) continue;
        ++active;
        bool changes = false;
        for (const auto& e : ellipses) {
          changes |= e.contains(i, y, t, cfg.nx, cfg.ny, cfg.nt, cfg.contraction_amplitude) !=
                     e.contains(i, y, next, cfg.nx, cfg.ny, cfg.nt, cfg.contraction_amplitude);
        }
        explained += changes ? 1 : 0;
      }
    }
  }
  ASSERT_GT(active, 0u);
  EXPECT_GE(static_cast<double>(explained) / active, 0.9);
}

TEST(Phantom, PeriodicOverTheCycle) {
  PhantomConfig cfg;
  cfg.nx = 32;
  cfg.ny = 32;
  cfg.nt = 6;
  cfg.seed = 2;
  const auto longer = render_phantom(cfg, 12);
  for (int t = 0; t < 6; ++t) {
    for (std::size_t i = 0; i < longer.shape().frame_size(); ++i) {
      EXPECT_NEAR(std::abs(longer.frame(t)[i] - longer.frame(t + 6)[i]), 0.0, 1e-12);
    }
  }
  const auto single = generate_dynamic_phantom(cfg);
  for (std::size_t i = 0; i < single.size(); ++i) EXPECT_EQ(single[i], longer[i]);
}

TEST(Phantom, DeterministicAndValidated) {
  PhantomConfig cfg;
  cfg.seed = 11;
  EXPECT_EQ(generate_dynamic_phantom(cfg), generate_dynamic_phantom(cfg));
  PhantomConfig other = cfg;
  other.seed = 12;
  EXPECT_NE(generate_dynamic_phantom(cfg), generate_dynamic_phantom(other));
  cfg.contraction_amplitude = 0.6;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.contraction_amplitude = -0.1;
  EXPECT_THROW(generate_dynamic_phantom(cfg), std::invalid_argument);
  const auto full = PhantomConfig::full_scale();
  EXPECT_EQ(full.nx, 126);
  EXPECT_EQ(full.ny, 126);
  EXPECT_EQ(full.nt, 16);
}

TEST(BuildDataset, LargeSetIsReproducible) {
  PhantomConfig cfg;
  cfg.nx = 16;
  cfg.ny = 16;
  cfg.nt = 4;
  MaskSpec spec;
  spec.center_lines = 2;
  const auto a = build_dataset(150, cfg, spec, 0.01, 9);
  ASSERT_EQ(a.size(), 150u);
  const auto b = build_dataset(150, cfg, spec, 0.01, 9);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].ground_truth, b[i].ground_truth);
    EXPECT_EQ(a[i].mask, b[i].mask);
    EXPECT_EQ(a[i].kspace, b[i].kspace);
  }
  EXPECT_NE(a[0].ground_truth, a[1].ground_truth);
  EXPECT_NE(a[0].mask, a[1].mask);
  // mask consistency, every sample
  for (const auto& s : a.samples()) {
    for (std::size_t i = 0; i < s.kspace.size(); ++i) {
      if (!s.mask.sampled(i)) ASSERT_EQ(s.kspace[i], Complex{});
    }
  }
}

TEST(BuildDataset, RadialAndErrors) {
  PhantomConfig cfg;
  cfg.nx = 64;
  cfg.ny = 64;
  cfg.nt = 4;
  MaskSpec spec;
  spec.kind = MaskKind::Radial;
  spec.accel = 6.0;
  const auto d = build_dataset(2, cfg, spec, 0.0, 1);
  EXPECT_EQ(d[0].mask.kind(), MaskKind::Radial);
  EXPECT_NEAR(d[0].mask.net_acceleration(), 6.0, 0.6);
  EXPECT_THROW(build_dataset(0, cfg, spec, 0.0, 1), std::invalid_argument);
  spec.accel = 0.5;
  EXPECT_THROW(build_dataset(1, cfg, spec, 0.0, 1), std::invalid_argument);
}
