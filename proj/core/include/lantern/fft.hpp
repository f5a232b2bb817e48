#pragma once

#include "lantern/volume.hpp"

namespace lantern {

/// Orthonormal 2D DFT of every frame (1/sqrt(nx*ny) scaling), so F is
/// unitary and F^H F = I. Output is in FFT-native order (DC at (0, 0)).
KSpaceData fft_frames(const DynamicImage& x);

/// Inverse of fft_frames (the adjoint F^H).
DynamicImage ifft_frames(const KSpaceData& k);

}  // namespace lantern
