#include <cstdio>
#include <exception>
#include <limits>

#include "CLI11.hpp"
#include "commands.hpp"
#include "lantern/training.hpp"

using namespace lantern::cli;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitFailure = 1;
constexpr int kExitDiverged = 3;

void add_config(CLI::App* sub, std::string& path) {
  sub->add_option("--config", path, "key=value file; explicit flags take precedence")
      ->check(CLI::ExistingFile);
}

// Fills options the command line left unset from a key=value file. CLI11 only
// reads config files at the top level, so subcommands apply theirs here.
void apply_config(CLI::App* sub, const std::string& path) {
  if (path.empty()) return;
  for (const auto& item : CLI::ConfigINI().from_file(path)) {
    if (item.name == "config") continue;
    CLI::Option* opt = nullptr;
    try {
      opt = sub->get_option("--" + item.name);
    } catch (const CLI::OptionNotFound&) {
      throw CLI::ConfigError::Extras(item.name);
    }
    if (opt->count() > 0) continue;
    for (const auto& v : item.inputs) opt->add_result(v);
    opt->run_callback();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lantern: unrolled ADMM reconstruction for dynamic MRI"};
  app.require_subcommand(1);

  GenDataOptions gen;
  auto* g = app.add_subcommand("gen-data", "Synthesize phantoms, masks and k-space");
  std::string g_config;
  add_config(g, g_config);
  g->add_option("--n", gen.n, "Number of samples")->check(CLI::PositiveNumber);
  g->add_option("--nx", gen.nx)->check(CLI::PositiveNumber);
  g->add_option("--ny", gen.ny)->check(CLI::PositiveNumber);
  g->add_option("--nt", gen.nt)->check(CLI::PositiveNumber);
  g->add_option("--mask", gen.mask)->check(CLI::IsMember({"1drandom", "radial"}));
  g->add_option("--accel", gen.accel, "Acceleration factor (>= 1)")
      ->check(CLI::Range(1.0, std::numeric_limits<double>::max()));
  g->add_option("--center-lines", gen.center_lines)->check(CLI::NonNegativeNumber);
  g->add_option("--noise", gen.noise, "Complex Gaussian noise sigma")
      ->check(CLI::NonNegativeNumber);
  g->add_option("--ellipses", gen.ellipses)->check(CLI::NonNegativeNumber);
  g->add_option("--precision", gen.precision)->check(CLI::IsMember({"64", "32"}));
  g->add_option("--seed", gen.seed);
  g->add_option("--out", gen.out, "Output directory")->required();

  TrainOptions tr;
  auto* t = app.add_subcommand("train", "Train a network on a data directory");
  std::string t_config;
  add_config(t, t_config);
  t->add_option("--data", tr.data, "Directory written by gen-data")->required();
  t->add_option("--init", tr.init)->check(CLI::IsMember({"dct_tv", "dct", "gauss"}));
  t->add_option("--stages", tr.stages)->check(CLI::PositiveNumber);
  t->add_option("--substages", tr.substages)->check(CLI::PositiveNumber);
  t->add_option("--epochs", tr.epochs)->check(CLI::PositiveNumber);
  t->add_option("--lr", tr.lr)->check(CLI::NonNegativeNumber);
  t->add_option("--lr-schedule", tr.lr_schedule)->check(CLI::IsMember({"constant", "cosine"}));
  t->add_option("--optimizer", tr.optimizer)->check(CLI::IsMember({"gd", "sgd", "adam"}));
  t->add_option("--batch-size", tr.batch_size)->check(CLI::PositiveNumber);
  t->add_option("--val-fraction", tr.val_fraction)->check(CLI::Range(0.0, 0.999999));
  t->add_flag("--clip", tr.clip, "Clip the global gradient norm");
  t->add_option("--clip-norm", tr.clip_norm)->check(CLI::PositiveNumber);
  t->add_option("--seed", tr.seed);
  t->add_option("--out", tr.out, "Output directory")->required();

  ReconstructOptions rc;
  auto* r = app.add_subcommand("reconstruct", "Reconstruct every sample in a data directory");
  std::string r_config;
  add_config(r, r_config);
  r->add_option("--checkpoint", rc.checkpoint, "Trained model (.lckpt)");
  r->add_option("--data", rc.data)->required();
  r->add_option("--out", rc.out)->required();
  r->add_option("--method", rc.method)->check(CLI::IsMember({"lantern", "zero_filled"}));
  r->add_flag("--export-frames", rc.export_frames, "Also write per-frame PGM magnitude images");
  r->add_option("--precision", rc.precision)->check(CLI::IsMember({"64", "32"}));

  EvaluateOptions ev;
  auto* e = app.add_subcommand("evaluate", "Score reconstructions against ground truth");
  std::string e_config;
  add_config(e, e_config);
  e->add_option("--data", ev.data, "Directory with *_gt.cvol")->required();
  e->add_option("--recon", ev.recon, "Directory with *_rec.cvol")->required();
  e->add_option("--out", ev.out, "Metrics CSV path")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    apply_config(g, g_config);
    apply_config(t, t_config);
    apply_config(r, r_config);
    apply_config(e, e_config);
  } catch (const CLI::Error& err) {
    return app.exit(err);
  }

  try {
    if (*g) run_gen_data(gen);
    if (*t) run_train(tr);
    if (*r) run_reconstruct(rc);
    if (*e) run_evaluate(ev);
  } catch (const UsageError& err) {
    std::fprintf(stderr, "error: %s\n\n%s", err.what(), app.get_subcommands().front()->help().c_str());
    return kExitUsage;
  } catch (const lantern::TrainingDiverged& err) {
    std::fprintf(stderr, "training diverged at epoch %d, sample %zu: %s\n", err.epoch(),
                 err.sample(), err.what());
    return kExitDiverged;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitFailure;
  }
  return 0;
}
