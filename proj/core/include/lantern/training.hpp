#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lantern/dataset.hpp"
#include "lantern/network.hpp"

namespace lantern {

enum class OptimizerKind { GradientDescent, Adam };

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(const std::string& name);

/// Per-epoch learning rate. Cosine anneals from learning_rate towards zero
/// over the run: lr_e = lr * (1 + cos(pi * e / epochs)) / 2.
enum class LrSchedule { Constant, Cosine };

std::string to_string(LrSchedule schedule);
LrSchedule lr_schedule_from_string(const std::string& name);

struct TrainConfig {
  double learning_rate = 0.01;
  int epochs = 400;
  int batch_size = 1;
  OptimizerKind optimizer = OptimizerKind::GradientDescent;
  LrSchedule lr_schedule = LrSchedule::Constant;
  std::uint64_t seed = 0;
  /// Fraction of the dataset held out for validation when no explicit
  /// validation set is passed to train().
  double validation_fraction = 0.1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  /// Global-norm gradient clipping; off unless enabled.
  bool clip_gradients = false;
  double clip_norm = 1e3;

  void validate() const;
  /// Learning rate used during `epoch` (0-based).
  double learning_rate_at(int epoch) const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct TrainReport {
  std::vector<double> train_loss;  // mean loss over each epoch's updates
  std::vector<double> val_loss;    // after each epoch; NaN without a validation set
  double initial_train_loss = 0.0;
  double initial_val_loss = 0.0;
  double wall_time_s = 0.0;
};

/// Raised when a loss turns non-finite; names the epoch and sample.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch, std::size_t sample, const std::string& what)
      : std::runtime_error(what), epoch_(epoch), sample_(sample) {}
  int epoch() const { return epoch_; }
  std::size_t sample() const { return sample_; }

 private:
  int epoch_;
  std::size_t sample_;
};

/// Updates parameters from flat gradients. Slots flagged positive (rho) are
/// stepped in log space, so they stay positive.
class Optimizer {
 public:
  explicit Optimizer(const TrainConfig& cfg) : cfg_(cfg) {}
  void step(LanternParams& params, const std::vector<double>& grads);
  void set_learning_rate(double lr) { cfg_.learning_rate = lr; }

 private:
  TrainConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  long steps_ = 0;
};

struct EpochStats {
  int epoch;
  double train_loss;
  double val_loss;
};

struct TrainResult {
  LanternParams params;
  TrainReport report;
};

/// Mean sample loss of `params` over `data` (NaN for an empty set).
double mean_loss(const Dataset& data, const LanternParams& params);

/// Sample-shuffled minibatch training. With `validation` null the last
/// floor(validation_fraction * n) samples are held out. Deterministic for a
/// fixed seed.
TrainResult train(const Dataset& dataset, const LanternParams& init, const TrainConfig& cfg,
                  const Dataset* validation = nullptr,
                  const std::function<void(const EpochStats&)>& on_epoch = {});

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class CheckpointVersionError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class CorruptCheckpointError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  LanternParams params;
  TrainConfig config;
  TrainReport report;
  std::optional<Shape> shape;  // data shape the model was trained on
};

/// `.lckpt`: one JSON manifest line (dims, N, K, L, N_c, config, tensor
/// table with byte offsets) followed by the little-endian float64 payload.
void save_checkpoint(const std::filesystem::path& path, const LanternParams& params,
                     const TrainConfig& cfg, const TrainReport& report,
                     std::optional<Shape> shape = std::nullopt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// epoch,train_loss,val_loss
void write_loss_csv(const std::filesystem::path& path, const TrainReport& report);

}  // namespace lantern
