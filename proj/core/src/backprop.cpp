#include "lantern/backprop.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "lantern/fft.hpp"

namespace lantern {

namespace {

struct ReconGrads {
  double d_rho = 0.0;
  DynamicImage d_prior;  // cotangent of v_prev; beta_prev receives its negation
};

// x = F^H D^-1 [P^H y + rho u], u = F (v - beta), X = F x = D^-1 [...].
//   dx/drho = F^H D^-1 (u - X)      dx/dv = rho F^H D^-1 F = -dx/dbeta
ReconGrads recon_backward(const DynamicImage& cot, const KSpaceData& spectrum,
                          const KSpaceData& prior_spectrum, double rho, const SamplingMask& mask,
                          KSpaceData* d_y) {
  KSpaceData fc = fft_frames(cot);
  const double on = 1.0 / (1.0 + rho);
  const double off = 1.0 / rho;
  double d_rho = 0.0;
  for (std::size_t i = 0; i < fc.size(); ++i) {
    const double inv = mask.sampled(i) ? on : off;
    const Complex dX = inv * (prior_spectrum[i] - spectrum[i]);
    d_rho += fc[i].real() * dX.real() + fc[i].imag() * dX.imag();
    fc[i] *= inv;
    if (d_y != nullptr && mask.sampled(i)) (*d_y)[i] += fc[i];
    fc[i] *= rho;
  }
  return {d_rho, ifft_frames(fc)};
}

FilterBank& add_into(FilterBank& acc, const FilterBank& g) {
  for (std::size_t l = 0; l < acc.size(); ++l) {
    for (std::size_t j = 0; j < acc.kernels[l].size(); ++j) {
      acc.kernels[l].taps[j] += g.kernels[l].taps[j];
    }
    acc.biases[l] += g.biases[l];
  }
  return acc;
}

template <typename Fn>
void visit_bank(FilterBank& bank, Fn&& fn) {
  for (auto& k : bank.kernels) {
    for (double& w : k.taps) fn(w);
  }
  for (double& b : bank.biases) fn(b);
}

template <typename Fn>
void visit_bank(const FilterBank& bank, Fn&& fn) {
  for (const auto& k : bank.kernels) {
    for (double w : k.taps) fn(w);
  }
  for (double b : bank.biases) fn(b);
}

}  // namespace

ParamGrads ParamGrads::zeros_like(const LanternParams& params) {
  ParamGrads g;
  for (const auto& st : params.stages) {
    StageGrads sg;
    for (const auto& sub : st.substages) {
      SubstageGrads sub_g;
      sub_g.conv1 = sub.conv1.zeros_like();
      sub_g.conv2 = sub.conv2.zeros_like();
      sub_g.q.assign(sub.plf.count(), 0.0);
      sg.substages.push_back(std::move(sub_g));
    }
    g.stages.push_back(std::move(sg));
  }
  return g;
}

void ParamGrads::add_scaled(double s, const ParamGrads& other) {
  if (other.stages.size() != stages.size()) throw std::invalid_argument("gradient layout mismatch");
  for (std::size_t n = 0; n < stages.size(); ++n) {
    auto& a = stages[n];
    const auto& b = other.stages[n];
    a.rho += s * b.rho;
    a.eta += s * b.eta;
    for (std::size_t k = 0; k < a.substages.size(); ++k) {
      auto& sa = a.substages[k];
      const auto& sb = b.substages[k];
      sa.mu1 += s * sb.mu1;
      sa.mu2 += s * sb.mu2;
      for (auto [dst, src] : {std::pair{&sa.conv1, &sb.conv1}, std::pair{&sa.conv2, &sb.conv2}}) {
        for (std::size_t l = 0; l < dst->size(); ++l) {
          for (std::size_t j = 0; j < dst->kernels[l].size(); ++j) {
            dst->kernels[l].taps[j] += s * src->kernels[l].taps[j];
          }
          dst->biases[l] += s * src->biases[l];
        }
      }
      for (std::size_t i = 0; i < sa.q.size(); ++i) sa.q[i] += s * sb.q[i];
    }
  }
}

void ParamGrads::scale(double s) {
  for (auto& st : stages) {
    st.rho *= s;
    st.eta *= s;
    for (auto& sub : st.substages) {
      sub.mu1 *= s;
      sub.mu2 *= s;
      visit_bank(sub.conv1, [s](double& w) { w *= s; });
      visit_bank(sub.conv2, [s](double& w) { w *= s; });
      for (double& q : sub.q) q *= s;
    }
  }
}

std::vector<double> ParamGrads::flatten() const {
  std::vector<double> out;
  for (const auto& st : stages) {
    out.push_back(st.rho);
    out.push_back(st.eta);
    for (const auto& sub : st.substages) {
      out.push_back(sub.mu1);
      out.push_back(sub.mu2);
      visit_bank(sub.conv1, [&](double w) { out.push_back(w); });
      visit_bank(sub.conv2, [&](double w) { out.push_back(w); });
      out.insert(out.end(), sub.q.begin(), sub.q.end());
    }
  }
  return out;
}

LossResult loss_and_grad_x(const DynamicImage& x_rec, const DynamicImage& x_gt) {
  require_same_shape(x_rec.shape(), x_gt.shape(), "loss");
  const double ref = norm(x_gt);
  if (!(ref > 0.0)) throw std::invalid_argument("loss: ground truth has zero norm");
  DynamicImage diff = x_rec - x_gt;
  const double err = norm(diff);
  LossResult out;
  out.value = err / ref;
  if (err < 1e-12 * ref) {
    out.gradient = DynamicImage(x_rec.shape());
  } else {
    diff *= 1.0 / (ref * err);
    out.gradient = std::move(diff);
  }
  return out;
}

BackwardResult backward(const ForwardTape& tape, const KSpaceData& y, const SamplingMask& mask,
                        const LanternParams& params, const DynamicImage& d_x_final,
                        bool want_d_y) {
  const Shape& shape = y.shape();
  require_same_shape(d_x_final.shape(), shape, "backward cotangent");
  if (tape.stages.size() != params.stages.size()) {
    throw std::invalid_argument("tape has " + std::to_string(tape.stages.size()) +
                                " stages, parameters have " + std::to_string(params.stages.size()));
  }
  for (std::size_t n = 0; n < tape.stages.size(); ++n) {
    if (tape.stages[n].substages.size() != params.stages[n].substages.size()) {
      throw std::invalid_argument("tape/parameter substage mismatch at stage " + std::to_string(n));
    }
  }

  BackwardResult result;
  result.grads = ParamGrads::zeros_like(params);
  KSpaceData* d_y = nullptr;
  if (want_d_y) {
    result.d_y.emplace(shape);
    d_y = &*result.d_y;
  }
  const std::size_t N = params.stages.size();
  const DynamicImage zero(shape);

  // Final Recon layer, driven by v^N, beta^N with rho^N.
  ReconGrads fin = recon_backward(d_x_final, tape.spectrum_final, tape.prior_spectrum_final,
                                  params.stages[N - 1].rho, mask, d_y);
  result.grads.stages[N - 1].rho += fin.d_rho;
  DynamicImage g_v = fin.d_prior;             // cotangent of v^(n)
  DynamicImage g_beta = -1.0 * fin.d_prior;   // cotangent of beta^(n)

  for (std::size_t n = N; n-- > 0;) {
    const StageParams& st = params.stages[n];
    const StageTape& stt = tape.stages[n];
    StageGrads& sg = result.grads.stages[n];
    const DynamicImage& x = stt.x;
    const DynamicImage& v_out = stt.substages.back().v;
    const DynamicImage& beta_prev = n > 0 ? tape.stages[n - 1].beta : zero;
    const DynamicImage& v_prev = n > 0 ? tape.stages[n - 1].substages.back().v : zero;

    // Multi: beta^n = beta^(n-1) + eta (x^n - v^n)
    DynamicImage g_x(shape);
    sg.eta += real_inner(g_beta, x) - real_inner(g_beta, v_out);
    g_x.add_scaled(st.eta, g_beta);
    g_v.add_scaled(-st.eta, g_beta);
    DynamicImage g_beta_prev = g_beta;

    // Substages in reverse: v^(n,k) = mu1 v^(n,k-1) + mu2 (x^n + beta^(n-1)) - C2
    for (std::size_t k = st.substages.size(); k-- > 0;) {
      const SubstageParams& sub = st.substages[k];
      const SubstageTape& sbt = stt.substages[k];
      SubstageGrads& sub_g = sg.substages[k];
      const DynamicImage& v_in = k > 0 ? stt.substages[k - 1].v : v_prev;

      sub_g.mu1 += real_inner(g_v, v_in);
      sub_g.mu2 += real_inner(g_v, x) + real_inner(g_v, beta_prev);
      g_x.add_scaled(sub.mu2, g_v);
      g_beta_prev.add_scaled(sub.mu2, g_v);
      DynamicImage g_in = sub.mu1 * g_v;

      if (sbt.prior_active) {
        const DynamicImage g_c2 = -1.0 * g_v;
        add_into(sub_g.conv2, conv_adjoint_param_grad(sub.conv2, sbt.h, g_c2));
        const FeatureStack g_h = conv_apply(sub.conv2, g_c2, false);
        FeatureStack g_c1;
        g_c1.reserve(g_h.size());
        for (std::size_t l = 0; l < g_h.size(); ++l) {
          g_c1.push_back(plf_backward(sub.plf, sbt.c1[l], g_h[l], sub_g.q));
        }
        add_into(sub_g.conv1, conv_apply_param_grad(sub.conv1, v_in, g_c1));
        g_in += conv_adjoint(sub.conv1, g_c1);
      }
      g_v = std::move(g_in);
    }

    // Recon of stage n, fed by v^(n-1), beta^(n-1).
    ReconGrads rg = recon_backward(g_x, stt.spectrum, stt.prior_spectrum, st.rho, mask, d_y);
    sg.rho += rg.d_rho;
    g_v += rg.d_prior;
    g_beta_prev -= rg.d_prior;
    g_beta = std::move(g_beta_prev);
  }
  return result;
}

std::vector<ParamSlot> parameter_slots(LanternParams& params) {
  std::vector<ParamSlot> out;
  for (auto& st : params.stages) {
    out.push_back({&st.rho, true});
    out.push_back({&st.eta, false});
    for (auto& sub : st.substages) {
      out.push_back({&sub.mu1, false});
      out.push_back({&sub.mu2, false});
      visit_bank(sub.conv1, [&](double& w) { out.push_back({&w, false}); });
      visit_bank(sub.conv2, [&](double& w) { out.push_back({&w, false}); });
      for (double& q : sub.plf.values()) out.push_back({&q, false});
    }
  }
  return out;
}

std::size_t parameter_count(const LanternParams& params) {
  std::size_t count = 0;
  for (const auto& st : params.stages) {
    count += 2;
    for (const auto& sub : st.substages) {
      count += 2 + sub.plf.count();
      visit_bank(sub.conv1, [&](double) { ++count; });
      visit_bank(sub.conv2, [&](double) { ++count; });
    }
  }
  return count;
}

std::string to_string(ParamClass cls) {
  switch (cls) {
    case ParamClass::Rho:
      return "rho";
    case ParamClass::Eta:
      return "eta";
    case ParamClass::Mu1:
      return "mu1";
    case ParamClass::Mu2:
      return "mu2";
    case ParamClass::Conv1Tap:
      return "conv1.tap";
    case ParamClass::Conv1Bias:
      return "conv1.bias";
    case ParamClass::Conv2Tap:
      return "conv2.tap";
    case ParamClass::Conv2Bias:
      return "conv2.bias";
    case ParamClass::PlfValue:
      return "plf.q";
  }
  return "unknown";
}

std::string ParamSelector::label() const {
  std::string s = to_string(cls) + "[stage " + std::to_string(stage);
  switch (cls) {
    case ParamClass::Rho:
    case ParamClass::Eta:
      break;
    case ParamClass::Mu1:
    case ParamClass::Mu2:
      s += ", sub " + std::to_string(substage);
      break;
    case ParamClass::Conv1Tap:
    case ParamClass::Conv2Tap:
      s += ", sub " + std::to_string(substage) + ", filter " + std::to_string(filter) + ", tap " +
           std::to_string(index);
      break;
    case ParamClass::Conv1Bias:
    case ParamClass::Conv2Bias:
      s += ", sub " + std::to_string(substage) + ", filter " + std::to_string(filter);
      break;
    case ParamClass::PlfValue:
      s += ", sub " + std::to_string(substage) + ", q " + std::to_string(index);
      break;
  }
  return s + "]";
}

namespace {

template <typename SubT>
SubT& locate_sub(std::vector<SubT>& subs, const ParamSelector& sel) {
  if (sel.substage < 0 || static_cast<std::size_t>(sel.substage) >= subs.size()) {
    throw std::out_of_range("selector substage out of range: " + sel.label());
  }
  return subs[sel.substage];
}

double& bank_entry(FilterBank& bank, const ParamSelector& sel, bool bias) {
  if (sel.filter < 0 || static_cast<std::size_t>(sel.filter) >= bank.size()) {
    throw std::out_of_range("selector filter out of range: " + sel.label());
  }
  if (bias) return bank.biases[sel.filter];
  auto& taps = bank.kernels[sel.filter].taps;
  if (sel.index < 0 || static_cast<std::size_t>(sel.index) >= taps.size()) {
    throw std::out_of_range("selector tap out of range: " + sel.label());
  }
  return taps[sel.index];
}

template <typename StageT, typename SubT, typename BankOf, typename QOf>
double& select_scalar(std::vector<StageT>& stages, const ParamSelector& sel, BankOf bank_of,
                      QOf q_of) {
  if (sel.stage < 0 || static_cast<std::size_t>(sel.stage) >= stages.size()) {
    throw std::out_of_range("selector stage out of range: " + sel.label());
  }
  StageT& st = stages[sel.stage];
  if (sel.cls == ParamClass::Rho) return st.rho;
  if (sel.cls == ParamClass::Eta) return st.eta;
  SubT& sub = locate_sub(st.substages, sel);
  switch (sel.cls) {
    case ParamClass::Mu1:
      return sub.mu1;
    case ParamClass::Mu2:
      return sub.mu2;
    case ParamClass::Conv1Tap:
      return bank_entry(bank_of(sub, 1), sel, false);
    case ParamClass::Conv1Bias:
      return bank_entry(bank_of(sub, 1), sel, true);
    case ParamClass::Conv2Tap:
      return bank_entry(bank_of(sub, 2), sel, false);
    case ParamClass::Conv2Bias:
      return bank_entry(bank_of(sub, 2), sel, true);
    case ParamClass::PlfValue: {
      auto& q = q_of(sub);
      if (sel.index < 0 || static_cast<std::size_t>(sel.index) >= q.size()) {
        throw std::out_of_range("selector control point out of range: " + sel.label());
      }
      return q[sel.index];
    }
    default:
      break;
  }
  throw std::logic_error("unhandled parameter class");
}

}  // namespace

double& param_ref(LanternParams& params, const ParamSelector& sel) {
  return select_scalar<StageParams, SubstageParams>(
      params.stages, sel,
      [](SubstageParams& s, int which) -> FilterBank& { return which == 1 ? s.conv1 : s.conv2; },
      [](SubstageParams& s) -> std::vector<double>& { return s.plf.values(); });
}

double grad_value(const ParamGrads& grads, const ParamSelector& sel) {
  auto& mutable_grads = const_cast<ParamGrads&>(grads);
  return select_scalar<StageGrads, SubstageGrads>(
      mutable_grads.stages, sel,
      [](SubstageGrads& s, int which) -> FilterBank& { return which == 1 ? s.conv1 : s.conv2; },
      [](SubstageGrads& s) -> std::vector<double>& { return s.q; });
}

double relative_error(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale < 1e-14) return 0.0;
  return std::abs(a - b) / scale;
}

double sample_loss(const KSpaceData& y, const SamplingMask& mask, const DynamicImage& x_gt,
                   const LanternParams& params) {
  return loss_and_grad_x(reconstruct(y, mask, params), x_gt).value;
}

FiniteDiffReport finite_diff_check(const KSpaceData& y, const SamplingMask& mask,
                                   const DynamicImage& x_gt, const LanternParams& params,
                                   std::span<const ParamSelector> selectors, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  ForwardResult fwd = forward(y, mask, params, true);
  const LossResult loss = loss_and_grad_x(fwd.x, x_gt);
  const ParamGrads grads = backward(*fwd.tape, y, mask, params, loss.gradient).grads;

  FiniteDiffReport report;
  LanternParams probe = params;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (const auto& sel : selectors) {
    double& slot = param_ref(probe, sel);
    const double original = slot;
    slot = original + h;
    const double plus = sample_loss(y, mask, x_gt, probe);
    slot = original - h;
    const double minus = sample_loss(y, mask, x_gt, probe);
    slot = original;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw std::runtime_error("non-finite loss while perturbing " + sel.label());
    }
    FiniteDiffEntry e;
    e.selector = sel;
    e.analytic = grad_value(grads, sel);
    e.numeric = (plus - minus) / (2.0 * h);
    e.rel_error = relative_error(e.analytic, e.numeric);
    // rounding in E(theta +- h) is ~eps |E|; divided by 2h it swamps small slopes
    const double rounding = eps * std::max(std::abs(plus), std::abs(minus)) / h;
    if (rounding > 1e-3 * std::max(std::abs(e.numeric), 1e-300)) {
      report.warnings.push_back(sel.label() + ": step " + std::to_string(h) +
                                " is cancellation-dominated (rounding ~" +
                                std::to_string(rounding) + ")");
    }
    report.max_rel_error = std::max(report.max_rel_error, e.rel_error);
    report.mean_rel_error += e.rel_error;
    report.entries.push_back(e);
  }
  if (!report.entries.empty()) report.mean_rel_error /= static_cast<double>(report.entries.size());
  return report;
}

}  // namespace lantern
