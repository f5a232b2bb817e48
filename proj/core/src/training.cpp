#include "lantern/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "byte_order.hpp"
#include "json.hpp"
#include "lantern/backprop.hpp"
#include "lantern/seed.hpp"

namespace lantern {

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::Adam ? "adam" : "gd";
}

OptimizerKind optimizer_from_string(const std::string& name) {
  if (name == "gd" || name == "sgd") return OptimizerKind::GradientDescent;
  if (name == "adam") return OptimizerKind::Adam;
  throw std::invalid_argument("unknown optimizer '" + name + "'");
}

std::string to_string(LrSchedule schedule) {
  return schedule == LrSchedule::Cosine ? "cosine" : "constant";
}

LrSchedule lr_schedule_from_string(const std::string& name) {
  if (name == "constant") return LrSchedule::Constant;
  if (name == "cosine") return LrSchedule::Cosine;
  throw std::invalid_argument("unknown learning-rate schedule '" + name + "'");
}

double TrainConfig::learning_rate_at(int epoch) const {
  if (lr_schedule == LrSchedule::Constant) return learning_rate;
  return learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * epoch / epochs));
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning rate must be a finite value >= 0");
  }
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("validation fraction must lie in [0, 1)");
  }
  if (clip_gradients && !(clip_norm > 0.0)) throw std::invalid_argument("clip norm must be > 0");
}

void Optimizer::step(LanternParams& params, const std::vector<double>& grads) {
  auto slots = parameter_slots(params);
  if (slots.size() != grads.size()) throw std::invalid_argument("gradient length mismatch");
  const double lr = cfg_.learning_rate;
  if (cfg_.optimizer == OptimizerKind::Adam && m_.empty()) {
    m_.assign(slots.size(), 0.0);
    v_.assign(slots.size(), 0.0);
  }
  ++steps_;
  const double bc1 = 1.0 - std::pow(cfg_.adam_beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(cfg_.adam_beta2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < slots.size(); ++i) {
    double& p = *slots[i].value;
    // d/d(log p) = p d/dp
    const double g = slots[i].positive ? grads[i] * p : grads[i];
    double delta = lr * g;
    if (cfg_.optimizer == OptimizerKind::Adam) {
      m_[i] = cfg_.adam_beta1 * m_[i] + (1.0 - cfg_.adam_beta1) * g;
      v_[i] = cfg_.adam_beta2 * v_[i] + (1.0 - cfg_.adam_beta2) * g * g;
      delta = lr * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + cfg_.adam_epsilon);
    }
    if (slots[i].positive) {
      p *= std::exp(-delta);
    } else {
      p -= delta;
    }
  }
}

double mean_loss(const Dataset& data, const LanternParams& params) {
  if (data.empty()) return std::numeric_limits<double>::quiet_NaN();
  double total = 0.0;
  for (const auto& s : data.samples()) {
    total += sample_loss(s.kspace, s.mask, s.ground_truth, params);
  }
  return total / static_cast<double>(data.size());
}

TrainResult train(const Dataset& dataset, const LanternParams& init, const TrainConfig& cfg,
                  const Dataset* validation,
                  const std::function<void(const EpochStats&)>& on_epoch) {
  cfg.validate();
  if (dataset.empty()) throw std::invalid_argument("training set is empty");
  init.validate(dataset.shape());
  const auto started = std::chrono::steady_clock::now();

  Dataset train_set = dataset;
  Dataset val_set;
  if (validation != nullptr) {
    val_set = *validation;
    if (!val_set.empty()) require_same_shape(val_set.shape(), dataset.shape(), "validation set");
  } else {
    const auto n = dataset.size();
    const auto held = std::min<std::size_t>(
        static_cast<std::size_t>(std::floor(cfg.validation_fraction * static_cast<double>(n))),
        n - 1);
    train_set = dataset.slice(0, n - held);
    val_set = dataset.slice(n - held, held);
  }

  TrainResult result{init, {}};
  LanternParams& params = result.params;
  TrainReport& report = result.report;
  report.initial_train_loss = mean_loss(train_set, params);
  report.initial_val_loss = mean_loss(val_set, params);

  Optimizer optimizer(cfg);
  std::vector<std::size_t> order(train_set.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    optimizer.set_learning_rate(cfg.learning_rate_at(epoch));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(derive_seed(cfg.seed, 20, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) {
      // portable Fisher-Yates; 2^64 % i bias is negligible for dataset sizes
      std::swap(order[i - 1], order[rng() % i]);
    }

    double epoch_loss = 0.0;
    for (std::size_t first = 0; first < order.size(); first += cfg.batch_size) {
      const std::size_t last = std::min(order.size(), first + cfg.batch_size);
      const double weight = 1.0 / static_cast<double>(last - first);
      ParamGrads batch = ParamGrads::zeros_like(params);
      for (std::size_t j = first; j < last; ++j) {
        const Sample& s = train_set[order[j]];
        ForwardResult fwd = forward(s.kspace, s.mask, params, true);
        LossResult loss = loss_and_grad_x(fwd.x, s.ground_truth);
        if (!std::isfinite(loss.value)) {
          throw TrainingDiverged(epoch, order[j],
                                 "non-finite loss at epoch " + std::to_string(epoch) +
                                     ", sample " + std::to_string(order[j]));
        }
        epoch_loss += loss.value;
        const BackwardResult back =
            backward(*fwd.tape, s.kspace, s.mask, params, loss.gradient);
        batch.add_scaled(weight, back.grads);
      }
      std::vector<double> flat = batch.flatten();
      if (cfg.clip_gradients) {
        double sq = 0.0;
        for (double g : flat) sq += g * g;
        const double gnorm = std::sqrt(sq);
        if (gnorm > cfg.clip_norm) {
          for (double& g : flat) g *= cfg.clip_norm / gnorm;
        }
      }
      optimizer.step(params, flat);
    }
    report.train_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    report.val_loss.push_back(mean_loss(val_set, params));
    if (val_set.size() > 0 && !std::isfinite(report.val_loss.back())) {
      throw TrainingDiverged(epoch, 0, "non-finite validation loss at epoch " + std::to_string(epoch));
    }
    if (on_epoch) on_epoch({epoch, report.train_loss.back(), report.val_loss.back()});
  }
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

namespace {

using nlohmann::json;

struct TensorWriter {
  std::string payload;
  json table = json::array();

  void add(const std::string& name, const std::vector<double>& values, json extra = json::object()) {
    extra["name"] = name;
    extra["offset"] = payload.size();
    extra["count"] = values.size();
    for (double v : values) detail::put_f64(payload, v);
    table.push_back(std::move(extra));
  }
};

json config_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"optimizer", to_string(c.optimizer)},
          {"lr_schedule", to_string(c.lr_schedule)},
          {"seed", c.seed},
          {"validation_fraction", c.validation_fraction},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_epsilon", c.adam_epsilon},
          {"clip_gradients", c.clip_gradients},
          {"clip_norm", c.clip_norm}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.optimizer = optimizer_from_string(j.at("optimizer").get<std::string>());
  c.lr_schedule = lr_schedule_from_string(j.at("lr_schedule").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validation_fraction = j.at("validation_fraction").get<double>();
  c.adam_beta1 = j.at("adam_beta1").get<double>();
  c.adam_beta2 = j.at("adam_beta2").get<double>();
  c.adam_epsilon = j.at("adam_epsilon").get<double>();
  c.clip_gradients = j.at("clip_gradients").get<bool>();
  c.clip_norm = j.at("clip_norm").get<double>();
  return c;
}

std::string prefix(std::size_t n, std::size_t k) {
  return "stage" + std::to_string(n) + ".sub" + std::to_string(k) + ".";
}

void write_bank(TensorWriter& w, const std::string& name, const FilterBank& bank) {
  for (std::size_t l = 0; l < bank.size(); ++l) {
    const Kernel& k = bank.kernels[l];
    w.add(name + ".kernel" + std::to_string(l), k.taps, {{"extent", {k.kx, k.ky, k.kt}}});
  }
  w.add(name + ".bias", bank.biases);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const LanternParams& params,
                     const TrainConfig& cfg, const TrainReport& report, std::optional<Shape> shape) {
  if (params.stages.empty()) throw std::invalid_argument("cannot checkpoint an empty network");
  TensorWriter w;
  for (std::size_t n = 0; n < params.stages.size(); ++n) {
    const auto& st = params.stages[n];
    const std::string sp = "stage" + std::to_string(n) + ".";
    w.add(sp + "rho", {st.rho});
    w.add(sp + "eta", {st.eta});
    for (std::size_t k = 0; k < st.substages.size(); ++k) {
      const auto& sub = st.substages[k];
      const std::string p = prefix(n, k);
      w.add(p + "mu1", {sub.mu1});
      w.add(p + "mu2", {sub.mu2});
      write_bank(w, p + "conv1", sub.conv1);
      write_bank(w, p + "conv2", sub.conv2);
      w.add(p + "plf.p", sub.plf.positions());
      w.add(p + "plf.q", sub.plf.values());
    }
  }
  w.add("report.train_loss", report.train_loss);
  w.add("report.val_loss", report.val_loss);
  // wall time stays out so identical runs give identical bytes
  w.add("report.summary", {report.initial_train_loss, report.initial_val_loss});

  const auto& first = params.stages.front().substages.front();
  json manifest = {{"format", "lantern-checkpoint"},
                   {"version", kCheckpointVersion},
                   {"byte_order", "little"},
                   {"dtype", "f64"},
                   {"stages", params.stages.size()},
                   {"substages", params.substage_count()},
                   {"filters", first.conv1.size()},
                   {"plf_points", first.plf.count()},
                   {"config", config_json(cfg)},
                   {"epochs_recorded", report.train_loss.size()},
                   {"payload_bytes", w.payload.size()},
                   {"tensors", w.table}};
  manifest["dims"] = shape ? json{shape->nx, shape->ny, shape->nt} : json(nullptr);

  std::string bytes = manifest.dump();
  bytes.push_back('\n');
  bytes += w.payload;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("write failed for '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = std::move(buf).str();
  const auto newline = bytes.find('\n');
  if (newline == std::string::npos) throw CorruptCheckpointError("'" + path.string() + "': no manifest");

  json manifest;
  try {
    manifest = json::parse(bytes.substr(0, newline));
  } catch (const json::exception& e) {
    throw CorruptCheckpointError("'" + path.string() + "': malformed manifest: " + e.what());
  }
  if (manifest.value("format", std::string()) != "lantern-checkpoint") {
    throw CorruptCheckpointError("'" + path.string() + "' is not a lantern checkpoint");
  }
  const int version = manifest.value("version", -1);
  if (version != kCheckpointVersion) {
    throw CheckpointVersionError("'" + path.string() + "': checkpoint version " +
                                 std::to_string(version) + ", expected " +
                                 std::to_string(kCheckpointVersion));
  }
  const std::string_view payload = std::string_view(bytes).substr(newline + 1);

  try {
    if (payload.size() != manifest.at("payload_bytes").get<std::size_t>()) {
      throw CorruptCheckpointError("'" + path.string() + "': payload is " +
                                   std::to_string(payload.size()) + " bytes, manifest says " +
                                   std::to_string(manifest.at("payload_bytes").get<std::size_t>()));
    }
    std::map<std::string, json> table;
    for (const auto& t : manifest.at("tensors")) table[t.at("name").get<std::string>()] = t;
    auto tensor = [&](const std::string& name) {
      auto it = table.find(name);
      if (it == table.end()) throw CorruptCheckpointError("missing tensor '" + name + "'");
      const auto offset = it->second.at("offset").get<std::size_t>();
      const auto count = it->second.at("count").get<std::size_t>();
      if (offset + count * 8 > payload.size()) {
        throw CorruptCheckpointError("tensor '" + name + "' runs past the payload");
      }
      std::vector<double> out(count);
      for (std::size_t i = 0; i < count; ++i) out[i] = detail::get_f64(payload.data() + offset + 8 * i);
      return out;
    };
    auto scalar = [&](const std::string& name) {
      auto v = tensor(name);
      if (v.size() != 1) throw CorruptCheckpointError("tensor '" + name + "' is not a scalar");
      return v[0];
    };
    auto read_bank = [&](const std::string& name, std::size_t filters) {
      FilterBank bank;
      for (std::size_t l = 0; l < filters; ++l) {
        const std::string kname = name + ".kernel" + std::to_string(l);
        if (!table.count(kname)) throw CorruptCheckpointError("missing tensor '" + kname + "'");
        const auto& ext = table[kname].at("extent");
        Kernel k(ext.at(0).get<int>(), ext.at(1).get<int>(), ext.at(2).get<int>());
        k.taps = tensor(kname);
        if (k.taps.size() != static_cast<std::size_t>(k.kx) * k.ky * k.kt) {
          throw CorruptCheckpointError("kernel '" + kname + "' size disagrees with its extent");
        }
        bank.kernels.push_back(std::move(k));
      }
      bank.biases = tensor(name + ".bias");
      bank.validate();
      return bank;
    };

    Checkpoint ck;
    const auto stages = manifest.at("stages").get<std::size_t>();
    const auto substages = manifest.at("substages").get<std::size_t>();
    const auto filters = manifest.at("filters").get<std::size_t>();
    for (std::size_t n = 0; n < stages; ++n) {
      StageParams st;
      const std::string sp = "stage" + std::to_string(n) + ".";
      st.rho = scalar(sp + "rho");
      st.eta = scalar(sp + "eta");
      for (std::size_t k = 0; k < substages; ++k) {
        const std::string p = prefix(n, k);
        SubstageParams sub;
        sub.mu1 = scalar(p + "mu1");
        sub.mu2 = scalar(p + "mu2");
        sub.conv1 = read_bank(p + "conv1", filters);
        sub.conv2 = read_bank(p + "conv2", filters);
        sub.plf = PiecewiseLinear(tensor(p + "plf.p"), tensor(p + "plf.q"));
        st.substages.push_back(std::move(sub));
      }
      ck.params.stages.push_back(std::move(st));
    }
    ck.config = config_from_json(manifest.at("config"));
    ck.report.train_loss = tensor("report.train_loss");
    ck.report.val_loss = tensor("report.val_loss");
    const auto summary = tensor("report.summary");
    if (summary.size() != 2) throw CorruptCheckpointError("bad report summary");
    ck.report.initial_train_loss = summary[0];
    ck.report.initial_val_loss = summary[1];
    if (!manifest.at("dims").is_null()) {
      const auto& d = manifest.at("dims");
      ck.shape = Shape{d.at(0).get<int>(), d.at(1).get<int>(), d.at(2).get<int>()};
    }
    return ck;
  } catch (const json::exception& e) {
    throw CorruptCheckpointError("'" + path.string() + "': bad manifest field: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw CorruptCheckpointError("'" + path.string() + "': " + e.what());
  }
}

void write_loss_csv(const std::filesystem::path& path, const TrainReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << "epoch,train_loss,val_loss\n";
  char line[128];
  for (std::size_t e = 0; e < report.train_loss.size(); ++e) {
    const double val = e < report.val_loss.size() ? report.val_loss[e]
                                                   : std::numeric_limits<double>::quiet_NaN();
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g\n", e + 1, report.train_loss[e], val);
    out << line;
  }
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace lantern
