#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lantern/network.hpp"

namespace lantern {

struct SubstageGrads {
  double mu1 = 0.0;
  double mu2 = 0.0;
  FilterBank conv1;
  FilterBank conv2;
  std::vector<double> q;
};

struct StageGrads {
  double rho = 0.0;
  double eta = 0.0;
  std::vector<SubstageGrads> substages;
};

/// dE/dtheta for every learnable, laid out like LanternParams. rho is
/// differentiated directly (not through any reparameterization).
struct ParamGrads {
  std::vector<StageGrads> stages;

  static ParamGrads zeros_like(const LanternParams& params);
  /// this += s * other
  void add_scaled(double s, const ParamGrads& other);
  void scale(double s);
  /// Same order as parameter_slots().
  std::vector<double> flatten() const;
};

struct LossResult {
  double value = 0.0;
  DynamicImage gradient;
};

/// E = ||x - x_gt|| / ||x_gt|| and dE/dx = (x - x_gt) / (||x_gt|| ||x - x_gt||),
/// with the gradient set to zero once ||x - x_gt|| < 1e-12 ||x_gt||.
/// Complex gradients are (dE/dRe + i dE/dIm).
LossResult loss_and_grad_x(const DynamicImage& x_rec, const DynamicImage& x_gt);

struct BackwardResult {
  ParamGrads grads;
  std::optional<KSpaceData> d_y;
};

/// Reverse pass through a recorded forward tape. Reads only the tape, the
/// measured data and the parameters.
BackwardResult backward(const ForwardTape& tape, const KSpaceData& y, const SamplingMask& mask,
                        const LanternParams& params, const DynamicImage& d_x_final,
                        bool want_d_y = false);

/// A learnable scalar in a flat view of LanternParams. `positive` marks
/// parameters an optimizer should update in log space.
struct ParamSlot {
  double* value;
  bool positive;
};

/// Stage by stage: rho, eta, then per substage mu1, mu2, conv1 taps,
/// conv1 biases, conv2 taps, conv2 biases, PLF values.
std::vector<ParamSlot> parameter_slots(LanternParams& params);
std::size_t parameter_count(const LanternParams& params);

enum class ParamClass { Rho, Eta, Mu1, Mu2, Conv1Tap, Conv1Bias, Conv2Tap, Conv2Bias, PlfValue };

std::string to_string(ParamClass cls);

/// Addresses one learnable scalar.
struct ParamSelector {
  ParamClass cls = ParamClass::Rho;
  int stage = 0;
  int substage = 0;
  int filter = 0;  // kernel/bias index for conv classes
  int index = 0;   // tap index or PLF control point

  std::string label() const;
};

double& param_ref(LanternParams& params, const ParamSelector& sel);
double grad_value(const ParamGrads& grads, const ParamSelector& sel);

struct FiniteDiffEntry {
  ParamSelector selector;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct FiniteDiffReport {
  std::vector<FiniteDiffEntry> entries;
  double max_rel_error = 0.0;
  double mean_rel_error = 0.0;
  std::vector<std::string> warnings;
};

/// |a - b| / max(|a|, |b|); zero when both are below 1e-14.
double relative_error(double a, double b);

/// Loss of one sample: forward, then loss_and_grad_x(...).value.
double sample_loss(const KSpaceData& y, const SamplingMask& mask, const DynamicImage& x_gt,
                   const LanternParams& params);

/// Central differences (E(theta + h) - E(theta - h)) / 2h for each selected
/// scalar, compared with backward(). Throws std::runtime_error when a
/// perturbed loss is not finite; warns when floating-point cancellation
/// likely dominates the estimate.
FiniteDiffReport finite_diff_check(const KSpaceData& y, const SamplingMask& mask,
                                   const DynamicImage& x_gt, const LanternParams& params,
                                   std::span<const ParamSelector> selectors, double h = 1e-5);

}  // namespace lantern
