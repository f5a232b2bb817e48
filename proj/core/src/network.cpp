#include "lantern/network.hpp"

#include <cmath>
#include <stdexcept>

#include "instrumentation.hpp"
#include "lantern/sampling.hpp"
#include "lantern/seed.hpp"

namespace lantern {

namespace {

thread_local std::uint64_t evaluations = 0;

FilterBank initial_bank(InitMode mode, std::uint64_t seed) {
  switch (mode) {
    case InitMode::DctTv:
      return init_dct_tv(8, 3, 3);
    case InitMode::DctOnly:
      return init_dct_only(8, 3, 3);
    case InitMode::RandomGauss: {
      // same architecture as DctTv; unit expected kernel norm
      FilterBank bank = init_random_gaussian(8, 3, 3, 1, 1.0 / 3.0, seed);
      bank.append(init_random_gaussian(1, 1, 1, 2, 1.0 / std::sqrt(2.0), derive_seed(seed, 1, 1)));
      return bank;
    }
  }
  throw std::invalid_argument("unknown init mode");
}

}  // namespace

namespace detail {
void note_forward_evaluation() { ++evaluations; }
}  // namespace detail

std::uint64_t forward_evaluation_count() { return evaluations; }

std::string to_string(InitMode mode) {
  switch (mode) {
    case InitMode::DctTv:
      return "dct_tv";
    case InitMode::DctOnly:
      return "dct";
    case InitMode::RandomGauss:
      return "gauss";
  }
  return "unknown";
}

InitMode init_mode_from_string(const std::string& name) {
  if (name == "dct_tv") return InitMode::DctTv;
  if (name == "dct") return InitMode::DctOnly;
  if (name == "gauss") return InitMode::RandomGauss;
  throw std::invalid_argument("unknown init mode '" + name + "'");
}

void LanternParams::validate(const Shape& shape) const {
  if (stages.empty()) throw std::invalid_argument("network needs at least one stage");
  for (std::size_t n = 0; n < stages.size(); ++n) {
    const auto& st = stages[n];
    const std::string where = "stage " + std::to_string(n);
    if (!(st.rho > 0.0) || !std::isfinite(st.rho)) throw std::invalid_argument(where + ": rho must be > 0");
    if (!std::isfinite(st.eta)) throw std::invalid_argument(where + ": eta not finite");
    if (st.substages.empty()) throw std::invalid_argument(where + ": needs at least one substage");
    for (const auto& sub : st.substages) {
      sub.conv1.validate();
      sub.conv2.validate();
      if (sub.conv1.size() != sub.conv2.size()) {
        throw std::invalid_argument(where + ": conv1 and conv2 filter counts differ");
      }
      for (const auto* bank : {&sub.conv1, &sub.conv2}) {
        for (const auto& k : bank->kernels) {
          if (k.kx > shape.nx || k.ky > shape.ny || k.kt > shape.nt) {
            throw std::invalid_argument(where + ": kernel larger than data " + to_string(shape));
          }
        }
      }
      if (!std::isfinite(sub.mu1) || !std::isfinite(sub.mu2)) {
        throw std::invalid_argument(where + ": mu not finite");
      }
    }
  }
}

LanternParams default_params(int nx, int ny, int nt, InitMode mode, std::uint64_t seed,
                             const NetworkLayout& layout) {
  require_valid_shape(Shape{nx, ny, nt});
  if (layout.stages < 1 || layout.substages < 1) {
    throw std::invalid_argument("stages and substages must be >= 1");
  }
  LanternParams params;
  for (int n = 0; n < layout.stages; ++n) {
    StageParams st;
    st.rho = 0.2;
    st.eta = 1.8;
    for (int k = 0; k < layout.substages; ++k) {
      SubstageParams sub;
      sub.mu2 = 0.2 * 0.3;
      sub.mu1 = 1.0 - sub.mu2;
      sub.conv1 = initial_bank(mode, derive_seed(seed, n, k));
      sub.conv2 = sub.conv1;
      for (auto& kern : sub.conv2.kernels) {
        for (double& w : kern.taps) w *= layout.conv2_scale;
      }
      sub.plf = PiecewiseLinear::identity(layout.plf_points, -layout.plf_range, layout.plf_range);
      st.substages.push_back(std::move(sub));
    }
    params.stages.push_back(std::move(st));
  }
  params.validate(Shape{nx, ny, nt});
  return params;
}

ForwardResult forward(const KSpaceData& y, const SamplingMask& mask, const LanternParams& params,
                      bool record_tape) {
  detail::note_forward_evaluation();
  const Shape& shape = y.shape();
  require_same_shape(mask.shape(), shape, "forward mask");
  params.validate(shape);

  ForwardResult result;
  if (record_tape) result.tape.emplace();

  DynamicImage v_prev(shape);
  DynamicImage beta_prev(shape);
  for (std::size_t n = 0; n < params.stages.size(); ++n) {
    const StageParams& st = params.stages[n];
    ReconResult recon = recon_layer(y, v_prev, beta_prev, st.rho, mask);
    const DynamicImage anchor = recon.x + beta_prev;

    StageTape stage_tape;
    DynamicImage v = v_prev;
    for (std::size_t k = 0; k < st.substages.size(); ++k) {
      const SubstageParams& sub = st.substages[k];
      SubstageTape sub_tape;
      sub_tape.prior_active = n > 0 || k > 0;
      DynamicImage c2(shape);
      if (sub_tape.prior_active) {
        FeatureStack c1 = conv_apply(sub.conv1, v);
        FeatureStack h;
        h.reserve(c1.size());
        for (const auto& c : c1) h.push_back(plf_apply(sub.plf, c));
        c2 = conv_adjoint(sub.conv2, h);
        double bias = 0.0;
        for (double b : sub.conv2.biases) bias += b;
        if (bias != 0.0) {
          for (auto& z : c2.values()) z += bias;
        }
        if (record_tape) {
          sub_tape.c1 = std::move(c1);
          sub_tape.h = std::move(h);
        }
      }
      DynamicImage v_next = sub.mu1 * std::move(v);
      v_next.add_scaled(sub.mu2, anchor);
      v_next -= c2;
      v = std::move(v_next);
      if (record_tape) {
        sub_tape.c2 = std::move(c2);
        sub_tape.v = v;
        stage_tape.substages.push_back(std::move(sub_tape));
      }
    }

    DynamicImage beta = beta_prev;
    for (std::size_t i = 0; i < beta.size(); ++i) beta[i] += st.eta * (recon.x[i] - v[i]);

    if (record_tape) {
      stage_tape.x = std::move(recon.x);
      stage_tape.spectrum = std::move(recon.spectrum);
      stage_tape.prior_spectrum = std::move(recon.prior_spectrum);
      stage_tape.beta = beta;
      result.tape->stages.push_back(std::move(stage_tape));
    }
    v_prev = std::move(v);
    beta_prev = std::move(beta);
  }

  ReconResult final_recon = recon_layer(y, v_prev, beta_prev, params.stages.back().rho, mask);
  result.x = final_recon.x;
  if (record_tape) {
    result.tape->x_final = std::move(final_recon.x);
    result.tape->spectrum_final = std::move(final_recon.spectrum);
    result.tape->prior_spectrum_final = std::move(final_recon.prior_spectrum);
  }
  return result;
}

}  // namespace lantern
