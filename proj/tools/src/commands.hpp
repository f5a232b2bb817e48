#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "lantern/dataset.hpp"
#include "manifest.hpp"

namespace lantern::cli {

/// Bad flag values or combinations; main() prints usage and exits with 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct GenDataOptions {
  int n = 20;
  int nx = 64;
  int ny = 64;
  int nt = 8;
  std::string mask = "1drandom";
  double accel = 4.0;
  int center_lines = 4;
  double noise = 0.0;
  int ellipses = 4;
  std::uint64_t seed = 0;
  std::string precision = "64";
  std::filesystem::path out;
};

struct TrainOptions {
  std::filesystem::path data;
  std::string init = "dct_tv";
  int stages = 13;
  int substages = 1;
  int epochs = 400;
  double lr = 0.01;
  std::string optimizer = "gd";
  std::string lr_schedule = "constant";
  int batch_size = 1;
  double val_fraction = 0.1;
  bool clip = false;
  double clip_norm = 1e3;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};

struct ReconstructOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path data;
  std::filesystem::path out;
  std::string method = "lantern";
  bool export_frames = false;
  std::string precision = "64";
};

struct EvaluateOptions {
  std::filesystem::path data;
  std::filesystem::path recon;
  std::filesystem::path out;
};

// Data directory layout, one triple per sample:
//   sample_0000_gt.cvol  sample_0000_y.cvol  sample_0000.cmask
// Reconstructions are sample_0000_rec.cvol.
std::string sample_id(int index);
std::vector<std::string> list_sample_ids(const std::filesystem::path& dir,
                                         const std::string& suffix);
Dataset load_data_dir(const std::filesystem::path& dir);

RunManifest run_gen_data(const GenDataOptions& opt);
RunManifest run_train(const TrainOptions& opt);
RunManifest run_reconstruct(const ReconstructOptions& opt);
RunManifest run_evaluate(const EvaluateOptions& opt);

}  // namespace lantern::cli
