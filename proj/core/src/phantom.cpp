#include "lantern/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "lantern/sampling.hpp"

namespace lantern {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

struct Wave {
  double fx, fy, phase, amp;
};

struct StaticField {
  std::vector<Wave> texture;
  double phase_u, phase_v, phase_uv;
};

StaticField static_field(const PhantomConfig& cfg) {
  std::mt19937_64 rng(derive_seed(cfg.seed, 2, 0));
  StaticField f;
  for (int m = 0; m < 4; ++m) {
    f.texture.push_back({uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0), uniform(rng, 0.0, kTwoPi),
                         uniform(rng, 0.5, 1.0)});
  }
  f.phase_u = uniform(rng, -1.0, 1.0);
  f.phase_v = uniform(rng, -1.0, 1.0);
  f.phase_uv = uniform(rng, -0.5, 0.5);
  return f;
}

double norm_coord(int i, int n) { return (i - n / 2.0) / (n / 2.0); }

}  // namespace

PhantomConfig PhantomConfig::full_scale() {
  PhantomConfig cfg;
  cfg.nx = 126;
  cfg.ny = 126;
  cfg.nt = 16;
  return cfg;
}

void PhantomConfig::validate() const {
  require_valid_shape(Shape{nx, ny, nt});
  if (n_ellipses < 0) throw std::invalid_argument("n_ellipses must be >= 0");
  if (!(contraction_amplitude >= 0.0 && contraction_amplitude <= 0.5)) {
    throw std::invalid_argument("contraction_amplitude must lie in [0, 0.5]");
  }
  if (!(background_texture_sigma >= 0.0)) {
    throw std::invalid_argument("background_texture_sigma must be >= 0");
  }
}

double PhantomEllipse::scale(int t, int period, double amplitude) const {
  return 1.0 + amplitude * std::sin(kTwoPi * (t % period) / period + cycle_phase);
}

bool PhantomEllipse::contains(int x, int y, int t, int nx, int ny, int period,
                              double amplitude) const {
  const double s = scale(t, period, amplitude);
  const double du = norm_coord(x, nx) - cx;
  const double dv = norm_coord(y, ny) - cy;
  const double c = std::cos(angle);
  const double sn = std::sin(angle);
  const double ru = (c * du + sn * dv) / (a * s);
  const double rv = (-sn * du + c * dv) / (b * s);
  return ru * ru + rv * rv <= 1.0;
}

std::vector<PhantomEllipse> phantom_ellipses(const PhantomConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(derive_seed(cfg.seed, 1, 0));
  std::vector<PhantomEllipse> out;
  for (int e = 0; e < cfg.n_ellipses; ++e) {
    PhantomEllipse el;
    const double r = uniform(rng, 0.0, 0.4);
    const double th = uniform(rng, 0.0, kTwoPi);
    el.cx = r * std::cos(th);
    el.cy = r * std::sin(th);
    el.a = uniform(rng, 0.12, 0.25);
    el.b = uniform(rng, 0.12, 0.25);
    el.angle = uniform(rng, 0.0, std::numbers::pi);
    el.intensity = uniform(rng, 0.3, 0.7);
    el.cycle_phase = uniform(rng, 0.0, kTwoPi);
    out.push_back(el);
  }
  return out;
}

DynamicImage render_phantom(const PhantomConfig& cfg, int frames) {
  cfg.validate();
  const Shape shape{cfg.nx, cfg.ny, frames};
  require_valid_shape(shape);
  const auto ellipses = phantom_ellipses(cfg);
  const StaticField field = static_field(cfg);

  DynamicImage img(shape);
  for (int y = 0; y < cfg.ny; ++y) {
    const double v = norm_coord(y, cfg.ny);
    for (int x = 0; x < cfg.nx; ++x) {
      const double u = norm_coord(x, cfg.nx);
      double base = 0.0;
      if ((u / 0.85) * (u / 0.85) + (v / 0.7) * (v / 0.7) <= 1.0) {
        base = 0.35;
        for (const auto& w : field.texture) {
          base += cfg.background_texture_sigma * w.amp *
                  std::cos(std::numbers::pi * (w.fx * u + w.fy * v) + w.phase);
        }
      }
      const double phi = 0.5 * std::numbers::pi *
                         (field.phase_u * u + field.phase_v * v + field.phase_uv * u * v);
      const Complex rot = std::polar(1.0, phi);
      for (int t = 0; t < frames; ++t) {
        double mag = base;
        for (const auto& el : ellipses) {
          if (el.contains(x, y, t, cfg.nx, cfg.ny, cfg.nt, cfg.contraction_amplitude)) {
            mag += el.intensity;
          }
        }
        img.at(x, y, t) = mag * rot;
      }
    }
  }

  // normalize over one cycle so longer renders share the scale
  double peak = 0.0;
  for (int t = 0; t < std::min(frames, cfg.nt); ++t) {
    for (const auto& z : img.frame(t)) peak = std::max(peak, std::abs(z));
  }
  if (peak > 0.0) img *= 1.0 / peak;
  return img;
}

DynamicImage generate_dynamic_phantom(const PhantomConfig& cfg) { return render_phantom(cfg, cfg.nt); }

SamplingMask make_mask(const MaskSpec& spec, const Shape& shape, std::uint64_t seed) {
  switch (spec.kind) {
    case MaskKind::OneDRandom:
      return make_mask_1d_random(shape.nx, shape.ny, shape.nt, spec.accel, spec.center_lines, seed);
    case MaskKind::Radial:
      return make_mask_radial(shape.nx, shape.ny, shape.nt, spec.accel, seed);
    case MaskKind::Full:
      return SamplingMask::full(shape);
  }
  throw std::invalid_argument("unknown mask kind");
}

Dataset build_dataset(int n_samples, const PhantomConfig& cfg_template, const MaskSpec& mask_spec,
                      double noise_sigma, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  cfg_template.validate();
  Dataset data;
  for (int i = 0; i < n_samples; ++i) {
    PhantomConfig cfg = cfg_template;
    cfg.seed = derive_seed(seed, 10, i);
    DynamicImage gt = generate_dynamic_phantom(cfg);
    SamplingMask mask = make_mask(mask_spec, gt.shape(), derive_seed(seed, 11, i));
    KSpaceData y = forward_undersample(gt, mask, noise_sigma, derive_seed(seed, 12, i));
    data.add(Sample{std::move(y), std::move(mask), std::move(gt)});
  }
  return data;
}

}  // namespace lantern
