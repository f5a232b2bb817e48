#include "lantern/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lantern {

namespace {

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double a : v) m = std::max(m, a);
  return m;
}

// 'valid' correlation of an ny x nx frame with a size x size window.
std::vector<double> filter_valid(const double* img, int nx, int ny, const std::vector<double>& w,
                                 int size) {
  const int ox = nx - size + 1;
  const int oy = ny - size + 1;
  std::vector<double> out(static_cast<std::size_t>(ox) * oy, 0.0);
  for (int y = 0; y < oy; ++y) {
    for (int x = 0; x < ox; ++x) {
      double acc = 0.0;
      for (int j = 0; j < size; ++j) {
        const double* row = img + static_cast<std::size_t>(y + j) * nx + x;
        const double* wr = w.data() + static_cast<std::size_t>(j) * size;
        for (int i = 0; i < size; ++i) acc += wr[i] * row[i];
      }
      out[static_cast<std::size_t>(y) * ox + x] = acc;
    }
  }
  return out;
}

// 'same' correlation with edge replication.
std::vector<double> filter_replicate(const double* img, int nx, int ny,
                                     const std::vector<double>& w, int size) {
  const int r = size / 2;
  std::vector<double> out(static_cast<std::size_t>(nx) * ny, 0.0);
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      double acc = 0.0;
      for (int j = 0; j < size; ++j) {
        const int sy = std::clamp(y + j - r, 0, ny - 1);
        for (int i = 0; i < size; ++i) {
          const int sx = std::clamp(x + i - r, 0, nx - 1);
          acc += w[static_cast<std::size_t>(j) * size + i] * img[static_cast<std::size_t>(sy) * nx + sx];
        }
      }
      out[static_cast<std::size_t>(y) * nx + x] = acc;
    }
  }
  return out;
}

}  // namespace

double nmse(const DynamicImage& x, const DynamicImage& x_gt) {
  require_same_shape(x.shape(), x_gt.shape(), "nmse");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double g = std::abs(x_gt[i]);
    const double d = std::abs(x[i]) - g;
    num += d * d;
    den += g * g;
  }
  if (!(den > 0.0)) throw std::invalid_argument("nmse: zero reference");
  return std::sqrt(num / den);
}

double psnr(const DynamicImage& x, const DynamicImage& x_gt) {
  require_same_shape(x.shape(), x_gt.shape(), "psnr");
  double peak = 0.0;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double g = std::abs(x_gt[i]);
    const double d = std::abs(x[i]) - g;
    peak = std::max(peak, g);
    sse += d * d;
  }
  if (!(peak > 0.0)) throw std::invalid_argument("psnr: zero reference");
  const double mse = sse / static_cast<double>(x.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> w(static_cast<std::size_t>(size) * size);
  const double c = (size - 1) / 2.0;
  double total = 0.0;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double r2 = (x - c) * (x - c) + (y - c) * (y - c);
      total += w[static_cast<std::size_t>(y) * size + x] = std::exp(-r2 / (2.0 * sigma * sigma));
    }
  }
  for (double& a : w) a /= total;
  return w;
}

std::vector<double> log_kernel(int size, double sigma) {
  std::vector<double> g = gaussian_window(size, sigma);
  const double c = (size - 1) / 2.0;
  const double s2 = sigma * sigma;
  double total = 0.0;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double r2 = (x - c) * (x - c) + (y - c) * (y - c);
      double& v = g[static_cast<std::size_t>(y) * size + x];
      v *= (r2 - 2.0 * s2) / (s2 * s2);
      total += v;
    }
  }
  const double mean = total / static_cast<double>(g.size());
  for (double& v : g) v -= mean;
  return g;
}

double ssim(const DynamicImage& x, const DynamicImage& x_gt, const MetricConfig& cfg) {
  const Shape& s = x.shape();
  require_same_shape(s, x_gt.shape(), "ssim");
  const auto a = magnitude(x);
  const auto b = magnitude(x_gt);
  const double range = max_of(b);
  if (!(range > 0.0)) throw std::invalid_argument("ssim: constant-zero reference");
  int size = std::min({cfg.ssim_window, s.nx, s.ny});
  if (size % 2 == 0) --size;
  const auto w = gaussian_window(size, cfg.ssim_sigma);
  const double c1 = (cfg.ssim_k1 * range) * (cfg.ssim_k1 * range);
  const double c2 = (cfg.ssim_k2 * range) * (cfg.ssim_k2 * range);

  const std::size_t fs = s.frame_size();
  std::vector<double> aa(fs), bb(fs), ab(fs);
  double total = 0.0;
  for (int t = 0; t < s.nt; ++t) {
    const double* fa = a.data() + t * fs;
    const double* fb = b.data() + t * fs;
    for (std::size_t i = 0; i < fs; ++i) {
      aa[i] = fa[i] * fa[i];
      bb[i] = fb[i] * fb[i];
      ab[i] = fa[i] * fb[i];
    }
    const auto mu_a = filter_valid(fa, s.nx, s.ny, w, size);
    const auto mu_b = filter_valid(fb, s.nx, s.ny, w, size);
    const auto e_aa = filter_valid(aa.data(), s.nx, s.ny, w, size);
    const auto e_bb = filter_valid(bb.data(), s.nx, s.ny, w, size);
    const auto e_ab = filter_valid(ab.data(), s.nx, s.ny, w, size);
    double frame = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
      const double va = e_aa[i] - mu_a[i] * mu_a[i];
      const double vb = e_bb[i] - mu_b[i] * mu_b[i];
      const double cov = e_ab[i] - mu_a[i] * mu_b[i];
      frame += ((2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2)) /
               ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2));
    }
    total += frame / static_cast<double>(mu_a.size());
  }
  return total / s.nt;
}

double hfen(const DynamicImage& x, const DynamicImage& x_gt, const MetricConfig& cfg) {
  const Shape& s = x.shape();
  require_same_shape(s, x_gt.shape(), "hfen");
  const auto a = magnitude(x);
  const auto b = magnitude(x_gt);
  const auto k = log_kernel(cfg.log_size, cfg.log_sigma);
  const std::size_t fs = s.frame_size();
  double total = 0.0;
  for (int t = 0; t < s.nt; ++t) {
    const auto la = filter_replicate(a.data() + t * fs, s.nx, s.ny, k, cfg.log_size);
    const auto lb = filter_replicate(b.data() + t * fs, s.nx, s.ny, k, cfg.log_size);
    double num = 0.0;
    double den = 0.0;
    double energy = 0.0;
    for (std::size_t i = 0; i < fs; ++i) {
      num += (la[i] - lb[i]) * (la[i] - lb[i]);
      den += lb[i] * lb[i];
      energy += b[t * fs + i] * b[t * fs + i];
    }
    // a flat frame leaves only rounding residue after the zero-mean filter
    if (!(den > 1e-20 * energy) || !(den > 0.0)) {
      throw std::invalid_argument("hfen: reference frame " + std::to_string(t) +
                                  " has no high-frequency content");
    }
    total += std::sqrt(num / den);
  }
  return total / s.nt;
}

MetricReport evaluate_metrics(const DynamicImage& x, const DynamicImage& x_gt,
                              const MetricConfig& cfg) {
  return {nmse(x, x_gt), psnr(x, x_gt), ssim(x, x_gt, cfg), hfen(x, x_gt, cfg)};
}

MetricSummary summarize(std::span<const MetricReport> reports, const MetricConfig& cfg) {
  MetricSummary out;
  if (reports.empty()) return out;
  const double n = static_cast<double>(reports.size());
  auto capped = [&](const MetricReport& r) { return std::min(r.psnr_db, cfg.psnr_cap_db); };
  for (const auto& r : reports) {
    out.mean.nmse += r.nmse / n;
    out.mean.psnr_db += capped(r) / n;
    out.mean.ssim += r.ssim / n;
    out.mean.hfen += r.hfen / n;
  }
  if (reports.size() > 1) {
    for (const auto& r : reports) {
      out.stddev.nmse += std::pow(r.nmse - out.mean.nmse, 2);
      out.stddev.psnr_db += std::pow(capped(r) - out.mean.psnr_db, 2);
      out.stddev.ssim += std::pow(r.ssim - out.mean.ssim, 2);
      out.stddev.hfen += std::pow(r.hfen - out.mean.hfen, 2);
    }
    out.stddev.nmse = std::sqrt(out.stddev.nmse / (n - 1));
    out.stddev.psnr_db = std::sqrt(out.stddev.psnr_db / (n - 1));
    out.stddev.ssim = std::sqrt(out.stddev.ssim / (n - 1));
    out.stddev.hfen = std::sqrt(out.stddev.hfen / (n - 1));
  }
  return out;
}

}  // namespace lantern
