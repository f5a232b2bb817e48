#pragma once

#include <span>
#include <vector>

#include "lantern/volume.hpp"

namespace lantern {

/// Constants behind the metrics; defaults follow common CS-MRI practice.
struct MetricConfig {
  int ssim_window = 11;
  double ssim_sigma = 1.5;
  double ssim_k1 = 0.01;
  double ssim_k2 = 0.03;
  int log_size = 15;
  double log_sigma = 1.5;
  /// PSNR of identical inputs is +inf; aggregation replaces it with this.
  double psnr_cap_db = 200.0;
};

struct MetricReport {
  double nmse = 0.0;
  double psnr_db = 0.0;
  double ssim = 0.0;
  double hfen = 0.0;
};

/// || |x| - |x_gt| ||_2 / || |x_gt| ||_2 over the whole volume.
double nmse(const DynamicImage& x, const DynamicImage& x_gt);

/// 10 log10(peak^2 / MSE) on magnitudes, peak = max |x_gt|. Identical
/// magnitudes give +infinity.
double psnr(const DynamicImage& x, const DynamicImage& x_gt);

/// Gaussian-window SSIM on magnitude frames, averaged over frames. Only
/// windows fully inside the frame are scored; the window shrinks to the
/// largest odd size that fits when a frame is smaller than ssim_window.
double ssim(const DynamicImage& x, const DynamicImage& x_gt, const MetricConfig& cfg = {});

/// Per-frame || LoG(|x|) - LoG(|x_gt|) || / || LoG(|x_gt|) ||, averaged over
/// frames. The filter replicates edge pixels so constants map to zero.
double hfen(const DynamicImage& x, const DynamicImage& x_gt, const MetricConfig& cfg = {});

MetricReport evaluate_metrics(const DynamicImage& x, const DynamicImage& x_gt,
                              const MetricConfig& cfg = {});

/// Zero-mean Laplacian-of-Gaussian kernel, size x size, row-major.
std::vector<double> log_kernel(int size, double sigma);

/// Normalized 2D Gaussian window, size x size, row-major.
std::vector<double> gaussian_window(int size, double sigma);

struct MetricSummary {
  MetricReport mean;
  MetricReport stddev;  // sample standard deviation; zero for one report
};

/// PSNR entries are capped at cfg.psnr_cap_db before averaging.
MetricSummary summarize(std::span<const MetricReport> reports, const MetricConfig& cfg = {});

}  // namespace lantern
