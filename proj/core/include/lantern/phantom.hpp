#pragma once

#include <cstdint>
#include <vector>

#include "lantern/dataset.hpp"
#include "lantern/mask.hpp"
#include "lantern/seed.hpp"
#include "lantern/volume.hpp"

namespace lantern {

struct PhantomConfig {
  int nx = 64;
  int ny = 64;
  int nt = 8;
  int n_ellipses = 4;
  /// Peak relative change of the moving ellipses' radii, in [0, 0.5].
  double contraction_amplitude = 0.2;
  double background_texture_sigma = 0.05;
  std::uint64_t seed = 0;

  /// 126 x 126 x 16 volumes.
  static PhantomConfig full_scale();
  void validate() const;
};

/// One moving ellipse in normalized coordinates ([-1, 1] across the grid).
struct PhantomEllipse {
  double cx = 0.0;
  double cy = 0.0;
  double a = 0.1;
  double b = 0.1;
  double angle = 0.0;
  double intensity = 0.5;
  double cycle_phase = 0.0;

  /// Radius scale at frame t of a cycle lasting `period` frames.
  double scale(int t, int period, double amplitude) const;
  /// Whether grid point (x, y) lies inside the ellipse at frame t.
  bool contains(int x, int y, int t, int nx, int ny, int period, double amplitude) const;
};

/// Moving ellipses a phantom with this config is built from.
std::vector<PhantomEllipse> phantom_ellipses(const PhantomConfig& cfg);

/// Static torso and smooth background plus moving ellipses whose radii
/// follow one sinusoidal cycle per cfg.nt frames, times a smooth phase map.
/// Normalized so the largest magnitude is 1.
DynamicImage generate_dynamic_phantom(const PhantomConfig& cfg);

/// Same phantom rendered for `frames` frames (the cycle length stays cfg.nt).
DynamicImage render_phantom(const PhantomConfig& cfg, int frames);

struct MaskSpec {
  MaskKind kind = MaskKind::OneDRandom;
  double accel = 4.0;
  int center_lines = 4;
};

SamplingMask make_mask(const MaskSpec& spec, const Shape& shape, std::uint64_t seed);

/// n_samples phantoms with per-sample seeds derived from `seed`, each with a
/// freshly drawn mask and y = forward_undersample(x, mask, noise_sigma).
Dataset build_dataset(int n_samples, const PhantomConfig& cfg_template, const MaskSpec& mask_spec,
                      double noise_sigma, std::uint64_t seed);

}  // namespace lantern
