// Command-line front end for the asymmetric-loss experiments.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "asl/commands.hpp"

namespace {

void add_data_flags(CLI::App* cmd, asl::SyntheticSpec& spec) {
  cmd->add_option("--labels", spec.num_labels, "Number of labels K")->capture_default_str();
  cmd->add_option("--dim", spec.feature_dim, "Feature dimension D")->capture_default_str();
  cmd->add_option("--train", spec.num_train, "Training samples")->capture_default_str();
  cmd->add_option("--test", spec.num_test, "Test samples")->capture_default_str();
  cmd->add_option("--positive-rate", spec.positive_rate, "Per-label positive probability")->capture_default_str();
  cmd->add_option("--noise", spec.noise_sigma, "Feature noise sigma")->capture_default_str();
  cmd->add_option("--mislabel-rate", spec.mislabel_rate, "Training positives flipped to negative")
      ->capture_default_str();
  cmd->add_option("--data-seed", spec.seed, "Dataset seed")->capture_default_str();
}

struct TrainingFlags {
  int epochs = 10;
  int batch_size = 128;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::uint64_t shuffle_seed = 0;
  double threshold = 0.5;
};

void add_training_flags(CLI::App* cmd, TrainingFlags& t) {
  cmd->add_option("--epochs", t.epochs)->capture_default_str();
  cmd->add_option("--batch-size", t.batch_size)->capture_default_str();
  cmd->add_option("--lr", t.learning_rate, "SGD learning rate")->capture_default_str();
  cmd->add_option("--momentum", t.momentum)->capture_default_str();
  cmd->add_option("--shuffle-seed", t.shuffle_seed)->capture_default_str();
  cmd->add_option("--threshold", t.threshold, "Decision threshold p_th")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = asl::cli;

  CLI::App app{"Asymmetric loss experiments: loss/gradient tables, synthetic training, adaptive asymmetry"};
  app.require_subcommand(1);
  std::optional<std::string> out_flag;
  app.add_option("--out", out_flag, std::string("Output directory (default: $") + cli::kOutputDirEnv + " or .)");

  cli::LossTableOptions loss_opts;
  auto* loss_cmd = app.add_subcommand("loss-table", "Negative-branch loss curves for CE, focal and ASL");
  loss_cmd->add_option("--gamma", loss_opts.focal_gamma, "Focal loss gamma")->capture_default_str();
  loss_cmd->add_option("--gamma-neg", loss_opts.gamma_neg, "ASL negative focusing")->capture_default_str();
  loss_cmd->add_option("--margin", loss_opts.margin, "ASL probability margin")->capture_default_str();
  loss_cmd->add_option("--points", loss_opts.points, "Grid points on [0, 1]")->capture_default_str();

  cli::GradTableOptions grad_opts;
  auto* grad_cmd = app.add_subcommand("grad-table", "Negative-branch gradients for CE, CE+PS, AF and ASL");
  grad_cmd->add_option("--gamma-neg", grad_opts.gamma_neg)->capture_default_str();
  grad_cmd->add_option("--margin", grad_opts.margin)->capture_default_str();
  grad_cmd->add_option("--points", grad_opts.points, "Interior grid points")->capture_default_str();

  cli::TrainFlags train_flags;
  TrainingFlags train_common;
  auto* train_cmd = app.add_subcommand("train", "Train a linear model on synthetic data and report metrics");
  train_cmd->add_option("--loss", train_flags.loss, "bce | focal | asl")->capture_default_str();
  train_cmd->add_option("--gamma", train_flags.gamma, "Focal gamma (default 2)");
  train_cmd->add_option("--gamma-pos", train_flags.gamma_pos, "ASL gamma+ (default 0)");
  train_cmd->add_option("--gamma-neg", train_flags.gamma_neg, "ASL gamma- (default 4)");
  train_cmd->add_option("--margin", train_flags.margin, "ASL margin m (default 0.05)");
  train_cmd->add_option("--alpha", train_flags.alpha, "Linear weight on positives, (0, 1)");
  train_cmd->add_flag("--adaptive", train_flags.adaptive, "Adapt gamma- toward --target-gap");
  train_cmd->add_option("--target-gap", train_flags.target_gap);
  train_cmd->add_option("--lambda", train_flags.lambda, "Adaptive step size (default 0.01)");
  train_cmd->add_flag("--sign-flip", train_flags.sign_flip, "Negate the gamma- update direction");
  train_cmd->add_option("--sweep-gamma", train_flags.sweep_gamma, "Focal gamma values to sweep")->delimiter(',');
  train_cmd->add_option("--top-k", train_flags.top_k, "Restrict predictions to each sample's top k");
  add_data_flags(train_cmd, train_flags.data);
  add_training_flags(train_cmd, train_common);

  cli::AdaptiveOptions adaptive_opts;
  TrainingFlags adaptive_common;
  double adaptive_gamma_pos = 0.0, adaptive_margin = 0.05;
  auto* adaptive_cmd = app.add_subcommand("adaptive", "Adaptive gamma- runs for a list of target gaps");
  adaptive_cmd->add_option("--targets", adaptive_opts.targets, "Target gaps")->delimiter(',')->capture_default_str();
  adaptive_cmd->add_option("--lambda", adaptive_opts.controller.lambda)->capture_default_str();
  adaptive_cmd->add_option("--gamma-neg", adaptive_opts.controller.gamma_neg, "Initial gamma-")->capture_default_str();
  adaptive_cmd->add_option("--gamma-max", adaptive_opts.controller.gamma_max)->capture_default_str();
  adaptive_cmd->add_option("--ema-decay", adaptive_opts.controller.ema_decay, "Gap smoothing, 0 disables")
      ->capture_default_str();
  adaptive_cmd->add_flag("--sign-flip", adaptive_opts.controller.sign_flip, "Negate the gamma- update direction");
  adaptive_cmd->add_option("--gamma-pos", adaptive_gamma_pos)->capture_default_str();
  adaptive_cmd->add_option("--margin", adaptive_margin)->capture_default_str();
  add_data_flags(adaptive_cmd, adaptive_opts.data);
  add_training_flags(adaptive_cmd, adaptive_common);

  asl::SyntheticSpec gen_spec;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic train/test split as binary files");
  add_data_flags(gen_cmd, gen_spec);

  std::string manifest_path;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run the command recorded in a manifest.json");
  replay_cmd->add_option("manifest", manifest_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and friends exit 0; every real parse failure is a usage error.
    return app.exit(e) == 0 ? 0 : 2;
  }

  const auto out = cli::resolve_output_dir(out_flag);
  auto copy_training = [](const TrainingFlags& src, asl::TrainConfig& dst) {
    dst.epochs = src.epochs;
    dst.batch_size = src.batch_size;
    dst.learning_rate = src.learning_rate;
    dst.momentum = src.momentum;
    dst.shuffle_seed = src.shuffle_seed;
    dst.threshold = src.threshold;
  };

  try {
    if (*loss_cmd) {
      cli::run_loss_table(loss_opts, out);
    } else if (*grad_cmd) {
      cli::run_grad_table(grad_opts, out);
    } else if (*train_cmd) {
      train_flags.epochs = train_common.epochs;
      train_flags.batch_size = train_common.batch_size;
      train_flags.learning_rate = train_common.learning_rate;
      train_flags.momentum = train_common.momentum;
      train_flags.shuffle_seed = train_common.shuffle_seed;
      train_flags.threshold = train_common.threshold;
      cli::run_train(cli::resolve_train_flags(train_flags), out);
    } else if (*adaptive_cmd) {
      copy_training(adaptive_common, adaptive_opts.train);
      adaptive_opts.train.loss = asl::LossConfigd::asymmetric(adaptive_gamma_pos, adaptive_opts.controller.gamma_neg,
                                                              adaptive_margin);
      cli::run_adaptive(adaptive_opts, out);
    } else if (*gen_cmd) {
      cli::run_gen_data(gen_spec, out);
    } else if (*replay_cmd) {
      cli::replay(manifest_path, out);
    }
  } catch (const cli::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}
