#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "lantern/io.hpp"
#include "lantern/metrics.hpp"
#include "lantern/network.hpp"
#include "lantern/phantom.hpp"
#include "lantern/sampling.hpp"
#include "lantern/training.hpp"

namespace lantern::cli {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

ComplexDtype dtype_from(const std::string& precision) {
  if (precision == "64") return ComplexDtype::C128;
  if (precision == "32") return ComplexDtype::C64;
  throw UsageError("--precision must be 64 or 32");
}

void ensure_dir(const fs::path& dir) {
  if (dir.empty()) throw UsageError("--out is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void require_dir(const fs::path& dir, const char* flag) {
  if (dir.empty()) throw UsageError(std::string(flag) + " is required");
  if (!fs::is_directory(dir)) throw IoError(dir.string() + " is not a directory");
}

}  // namespace

std::string sample_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sample_%04d", index);
  return buf;
}

std::vector<std::string> list_sample_ids(const fs::path& dir, const std::string& suffix) {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("sample_", 0) == 0 && name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      ids.push_back(name.substr(0, name.size() - suffix.size()));
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

Dataset load_data_dir(const fs::path& dir) {
  require_dir(dir, "--data");
  const auto ids = list_sample_ids(dir, "_gt.cvol");
  if (ids.empty()) throw std::runtime_error("no samples found in " + dir.string());
  Dataset data;
  for (const auto& id : ids) {
    data.add(Sample{load_kspace(dir / (id + "_y.cvol")), load_mask(dir / (id + ".cmask")),
                    load_volume(dir / (id + "_gt.cvol"))});
  }
  return data;
}

RunManifest run_gen_data(const GenDataOptions& opt) {
  const auto start = Clock::now();
  if (opt.n < 1) throw UsageError("--n must be >= 1");
  if (!(opt.accel >= 1.0)) throw UsageError("--accel must be >= 1");
  if (!(opt.noise >= 0.0)) throw UsageError("--noise must be >= 0");
  const ComplexDtype dtype = dtype_from(opt.precision);

  PhantomConfig cfg;
  cfg.nx = opt.nx;
  cfg.ny = opt.ny;
  cfg.nt = opt.nt;
  cfg.n_ellipses = opt.ellipses;
  MaskSpec spec;
  try {
    cfg.validate();
    spec.kind = mask_kind_from_string(opt.mask);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (spec.kind == MaskKind::Full) throw UsageError("--mask must be 1drandom or radial");
  spec.accel = opt.accel;
  spec.center_lines = opt.center_lines;

  const Dataset data = build_dataset(opt.n, cfg, spec, opt.noise, opt.seed);

  ensure_dir(opt.out);
  RunManifest m;
  m.command = "gen-data";
  m.config = {{"n", opt.n},         {"nx", opt.nx},
              {"ny", opt.ny},       {"nt", opt.nt},
              {"mask", opt.mask},   {"accel", opt.accel},
              {"center_lines", opt.center_lines},
              {"noise", opt.noise}, {"ellipses", opt.ellipses},
              {"precision", opt.precision},
              {"out", opt.out.generic_string()}};
  m.seeds = {{"seed", opt.seed}};
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::string id = sample_id(static_cast<int>(i));
    const auto gt = opt.out / (id + "_gt.cvol");
    const auto y = opt.out / (id + "_y.cvol");
    const auto mk = opt.out / (id + ".cmask");
    save_volume(gt, data[i].ground_truth, dtype);
    save_volume(y, data[i].kspace, dtype);
    save_mask(mk, data[i].mask);
    m.add_output(gt);
    m.add_output(y);
    m.add_output(mk);
  }
  m.wall_time_s = seconds_since(start);
  m.write(opt.out / "manifest.json");
  return m;
}

RunManifest run_train(const TrainOptions& opt) {
  const auto start = Clock::now();
  TrainConfig tc;
  InitMode mode;
  try {
    mode = init_mode_from_string(opt.init);
    tc.optimizer = optimizer_from_string(opt.optimizer);
    tc.lr_schedule = lr_schedule_from_string(opt.lr_schedule);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (opt.stages < 1 || opt.substages < 1) throw UsageError("--stages and --substages must be >= 1");
  tc.learning_rate = opt.lr;
  tc.epochs = opt.epochs;
  tc.batch_size = opt.batch_size;
  tc.validation_fraction = opt.val_fraction;
  tc.clip_gradients = opt.clip;
  tc.clip_norm = opt.clip_norm;
  tc.seed = opt.seed;
  try {
    tc.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const Dataset data = load_data_dir(opt.data);
  const Shape shape = data.shape();
  NetworkLayout layout;
  layout.stages = opt.stages;
  layout.substages = opt.substages;
  const LanternParams init = default_params(shape.nx, shape.ny, shape.nt, mode, opt.seed, layout);

  const TrainResult result = train(data, init, tc, nullptr, [](const EpochStats& e) {
    std::fprintf(stderr, "epoch %d  train %.6g  val %.6g\n", e.epoch, e.train_loss, e.val_loss);
  });

  ensure_dir(opt.out);
  const auto ckpt = opt.out / "model.lckpt";
  const auto csv = opt.out / "loss_history.csv";
  save_checkpoint(ckpt, result.params, tc, result.report, shape);
  write_loss_csv(csv, result.report);

  RunManifest m;
  m.command = "train";
  m.config = {{"data", opt.data.generic_string()},
              {"init", opt.init},
              {"stages", opt.stages},
              {"substages", opt.substages},
              {"epochs", opt.epochs},
              {"lr", opt.lr},
              {"lr_schedule", opt.lr_schedule},
              {"optimizer", opt.optimizer},
              {"batch_size", opt.batch_size},
              {"val_fraction", opt.val_fraction},
              {"clip", opt.clip},
              {"clip_norm", opt.clip_norm},
              {"out", opt.out.generic_string()}};
  m.seeds = {{"seed", opt.seed}};
  for (const auto& id : list_sample_ids(opt.data, "_gt.cvol")) {
    m.add_input(opt.data / (id + "_gt.cvol"));
    m.add_input(opt.data / (id + "_y.cvol"));
    m.add_input(opt.data / (id + ".cmask"));
  }
  m.add_output(ckpt);
  m.add_output(csv);
  m.wall_time_s = seconds_since(start);
  m.write(opt.out / "manifest.json");
  return m;
}

RunManifest run_reconstruct(const ReconstructOptions& opt) {
  const auto start = Clock::now();
  const ComplexDtype dtype = dtype_from(opt.precision);
  const bool zero_filled = opt.method == "zero_filled";
  if (!zero_filled && opt.method != "lantern") {
    throw UsageError("--method must be lantern or zero_filled");
  }
  if (!zero_filled && opt.checkpoint.empty()) throw UsageError("--checkpoint is required");
  require_dir(opt.data, "--data");
  const auto ids = list_sample_ids(opt.data, "_y.cvol");
  if (ids.empty()) throw std::runtime_error("no samples found in " + opt.data.string());

  Checkpoint ck;
  if (!zero_filled) ck = load_checkpoint(opt.checkpoint);

  ensure_dir(opt.out);
  RunManifest m;
  m.command = "reconstruct";
  m.config = {{"checkpoint", opt.checkpoint.generic_string()},
              {"data", opt.data.generic_string()},
              {"method", opt.method},
              {"export_frames", opt.export_frames},
              {"precision", opt.precision},
              {"out", opt.out.generic_string()}};
  if (!zero_filled) m.add_input(opt.checkpoint);

  for (const auto& id : ids) {
    const auto y_path = opt.data / (id + "_y.cvol");
    const auto mask_path = opt.data / (id + ".cmask");
    const KSpaceData y = load_kspace(y_path);
    const SamplingMask mask = load_mask(mask_path);
    m.add_input(y_path);
    m.add_input(mask_path);
    DynamicImage x;
    if (zero_filled) {
      x = zero_filled_recon(y, mask);
    } else {
      if (ck.shape && !(*ck.shape == y.shape())) {
        throw ShapeError("checkpoint was trained on " + to_string(*ck.shape) + " but " + id +
                         " is " + to_string(y.shape()));
      }
      x = reconstruct(y, mask, ck.params);
    }
    const auto out = opt.out / (id + "_rec.cvol");
    save_volume(out, x, dtype);
    m.add_output(out);
    if (opt.export_frames) {
      double peak = 0.0;
      for (const auto& z : x.values()) peak = std::max(peak, std::abs(z));
      for (int t = 0; t < x.shape().nt; ++t) {
        char name[64];
        std::snprintf(name, sizeof name, "_rec_t%02d.pgm", t);
        const auto frame = opt.out / (id + name);
        write_pgm_frame(frame, x, t, peak);
        m.add_output(frame);
      }
    }
  }
  m.wall_time_s = seconds_since(start);
  m.write(opt.out / "manifest.json");
  return m;
}

RunManifest run_evaluate(const EvaluateOptions& opt) {
  const auto start = Clock::now();
  require_dir(opt.data, "--data");
  require_dir(opt.recon, "--recon");
  if (opt.out.empty()) throw UsageError("--out is required");
  const auto gt_ids = list_sample_ids(opt.data, "_gt.cvol");
  const auto rec_ids = list_sample_ids(opt.recon, "_rec.cvol");
  if (gt_ids.empty()) throw std::runtime_error("no ground truth found in " + opt.data.string());
  if (gt_ids != rec_ids) {
    throw std::runtime_error("sample sets differ: " + std::to_string(gt_ids.size()) +
                             " ground-truth volumes vs " + std::to_string(rec_ids.size()) +
                             " reconstructions, or ids do not match");
  }

  RunManifest m;
  m.command = "evaluate";
  m.config = {{"data", opt.data.generic_string()},
              {"recon", opt.recon.generic_string()},
              {"out", opt.out.generic_string()}};

  const MetricConfig mc;
  std::vector<MetricReport> rows;
  for (const auto& id : gt_ids) {
    const auto gt_path = opt.data / (id + "_gt.cvol");
    const auto rec_path = opt.recon / (id + "_rec.cvol");
    MetricReport r = evaluate_metrics(load_volume(rec_path), load_volume(gt_path), mc);
    // rows carry the same capped PSNR the footer averages
    r.psnr_db = std::min(r.psnr_db, mc.psnr_cap_db);
    rows.push_back(r);
    m.add_input(gt_path);
    m.add_input(rec_path);
  }
  const MetricSummary summary = summarize(rows, mc);

  if (opt.out.has_parent_path()) ensure_dir(opt.out.parent_path());
  std::FILE* f = std::fopen(opt.out.string().c_str(), "w");
  if (f == nullptr) throw IoError("cannot write " + opt.out.string());
  auto row = [f](const std::string& label, const MetricReport& r) {
    std::fprintf(f, "%s,%.17g,%.17g,%.17g,%.17g\n", label.c_str(), r.nmse, r.psnr_db, r.ssim,
                 r.hfen);
  };
  std::fprintf(f, "sample_id,nmse,psnr_db,ssim,hfen\n");
  for (std::size_t i = 0; i < rows.size(); ++i) row(gt_ids[i], rows[i]);
  row("mean", summary.mean);
  row("std", summary.stddev);
  const bool ok = std::ferror(f) == 0;
  if (std::fclose(f) != 0 || !ok) throw IoError("failed writing " + opt.out.string());

  m.add_output(opt.out);
  m.wall_time_s = seconds_since(start);
  m.write(fs::path(opt.out).replace_extension(".manifest.json"));
  return m;
}

}  // namespace lantern::cli
