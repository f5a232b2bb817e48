#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lantern/mask.hpp"
#include "lantern/transforms.hpp"
#include "lantern/volume.hpp"

namespace lantern {

/// Learnables of one prior-gradient substage (Addition, Conv1, Nonlinear, Conv2).
struct SubstageParams {
  double mu1 = 0.94;
  double mu2 = 0.06;
  FilterBank conv1;
  FilterBank conv2;
  PiecewiseLinear plf = PiecewiseLinear::identity();

  friend bool operator==(const SubstageParams&, const SubstageParams&) = default;
};

/// Learnables of one unrolled ADMM iteration.
struct StageParams {
  double rho = 0.2;
  double eta = 1.8;
  std::vector<SubstageParams> substages;

  friend bool operator==(const StageParams&, const StageParams&) = default;
};

struct LanternParams {
  std::vector<StageParams> stages;

  std::size_t stage_count() const { return stages.size(); }
  std::size_t substage_count() const {
    return stages.empty() ? 0 : stages.front().substages.size();
  }
  /// Throws std::invalid_argument unless N >= 1, K >= 1 everywhere, rho > 0,
  /// conv1/conv2 have equal L and every kernel fits inside `shape`.
  void validate(const Shape& shape) const;

  friend bool operator==(const LanternParams&, const LanternParams&) = default;
};

enum class InitMode { DctTv, DctOnly, RandomGauss };

std::string to_string(InitMode mode);
InitMode init_mode_from_string(const std::string& name);

struct NetworkLayout {
  int stages = 13;
  int substages = 1;
  int plf_points = 101;
  double plf_range = 1.0;
  /// Conv2 starts as this multiple of the Conv1 kernels (applied by correlation).
  double conv2_scale = 0.018;
};

/// Default initialization: rho = 0.2, eta = 1.8, mu1 = 0.94,
/// mu2 = 0.06, identity PLF, filters per `mode`.
LanternParams default_params(int nx, int ny, int nt, InitMode mode, std::uint64_t seed,
                             const NetworkLayout& layout = {});

struct SubstageTape {
  /// False for the very first substage, whose prior branch has no input.
  bool prior_active = false;
  FeatureStack c1;
  FeatureStack h;
  DynamicImage c2;
  DynamicImage v;
};

struct StageTape {
  DynamicImage x;
  KSpaceData spectrum;        // F x
  KSpaceData prior_spectrum;  // F (v_prev - beta_prev)
  std::vector<SubstageTape> substages;
  DynamicImage beta;
};

/// Every intermediate the backward pass reads.
struct ForwardTape {
  std::vector<StageTape> stages;
  /// Final Recon layer, driven by v and beta of the last stage.
  DynamicImage x_final;
  KSpaceData spectrum_final;
  KSpaceData prior_spectrum_final;
};

struct ForwardResult {
  DynamicImage x;
  std::optional<ForwardTape> tape;
};

/// Runs the unrolled network: N x (Recon -> K x (Conv1 -> PLF -> Conv2 ->
/// Addition) -> Multi), then a final Recon on (v^N, beta^N) with rho^N.
ForwardResult forward(const KSpaceData& y, const SamplingMask& mask, const LanternParams& params,
                      bool record_tape = true);

/// forward() without the tape.
inline DynamicImage reconstruct(const KSpaceData& y, const SamplingMask& mask,
                                const LanternParams& params) {
  return forward(y, mask, params, false).x;
}

/// Forward evaluations (network passes, Recon layers, PLF applications)
/// made on this thread; lets tests check that backward only reads the tape.
std::uint64_t forward_evaluation_count();

}  // namespace lantern
