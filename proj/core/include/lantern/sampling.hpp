#pragma once

#include <cstdint>

#include "lantern/mask.hpp"
#include "lantern/volume.hpp"

namespace lantern {

/// Phase-encode lines (along y) drawn at random per frame, with the
/// `center_lines` lowest frequencies always kept. Each frame keeps
/// round(ny / accel) whole lines.
SamplingMask make_mask_1d_random(int nx, int ny, int nt, double accel, int center_lines,
                                 std::uint64_t seed);

/// Equiangular spokes through the k-space centre, rasterized to the nearest
/// Cartesian grid point. Successive frames rotate by the golden angle and the
/// spoke count is chosen by bisection so each frame hits the requested
/// acceleration within 10%.
SamplingMask make_mask_radial(int nx, int ny, int nt, double accel, std::uint64_t seed);

/// y = P (F x + noise); noise is complex Gaussian with per-component std
/// `noise_sigma` (zero gives the noiseless model).
KSpaceData forward_undersample(const DynamicImage& x, const SamplingMask& mask,
                               double noise_sigma = 0.0, std::uint64_t seed = 0);

/// Zeroes every k-space entry the mask does not select.
KSpaceData apply_mask(KSpaceData k, const SamplingMask& mask);

/// F^H P^H y.
DynamicImage zero_filled_recon(const KSpaceData& y, const SamplingMask& mask);

/// Recon layer output together with the k-space quantities the backward
/// pass needs: spectrum = F x and prior_spectrum = F (v - beta).
struct ReconResult {
  DynamicImage x;
  KSpaceData spectrum;
  KSpaceData prior_spectrum;
};

/// Closed-form minimizer of 1/2 ||F_u x - y||^2 + rho/2 ||x + beta - v||^2:
///   x = F^H D^-1 [P^H y + rho F (v - beta)],  D = diag(1 + rho on P, rho off P).
ReconResult recon_layer(const KSpaceData& y, const DynamicImage& v, const DynamicImage& beta,
                        double rho, const SamplingMask& mask);

inline DynamicImage recon_x_update(const KSpaceData& y, const DynamicImage& v,
                                   const DynamicImage& beta, double rho,
                                   const SamplingMask& mask) {
  return recon_layer(y, v, beta, rho, mask).x;
}

}  // namespace lantern
