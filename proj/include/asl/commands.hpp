#ifndef ASL_COMMANDS_HPP
#define ASL_COMMANDS_HPP

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "asl/csv.hpp"
#include "asl/metrics.hpp"
#include "asl/synth.hpp"
#include "asl/trainer.hpp"

// Experiment commands behind the asl_cli front end. Every command writes its
// CSV outputs plus a manifest.json that is enough to re-run it byte for byte.
namespace asl::cli {

inline constexpr const char* kArtifactVersion = "0.1.0";
inline constexpr int kCsvSchemaVersion = 1;
inline constexpr const char* kOutputDirEnv = "ASL_OUTPUT_DIR";

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Explicit flag, else $ASL_OUTPUT_DIR, else the working directory.
std::filesystem::path resolve_output_dir(const std::optional<std::string>& flag);

struct LossTableOptions {
  double focal_gamma = 2.0;
  double gamma_neg = 2.0;
  double margin = 0.2;
  int points = 1001;
};

struct GradTableOptions {
  double gamma_neg = 2.0;
  double margin = 0.2;
  int points = 999;
};

// Negative-branch loss for CE, focal and ASL on p = 0, 1/(n-1), ..., 1.
// Columns: p, ce, fl, asl.
CsvTable loss_table(const LossTableOptions& opts);

// Negative-branch logit gradients on the interior grid p = i/(n+1), i = 1..n.
// Columns: p, ce, ce_ps, af, asl, asl_norm (asl divided by its maximum).
CsvTable grad_table(const GradTableOptions& opts);

/// Raw train-command flags as typed by the user; unset optionals were not given.
struct TrainFlags {
  std::string loss = "asl";
  std::optional<double> gamma;
  std::optional<double> gamma_pos;
  std::optional<double> gamma_neg;
  std::optional<double> margin;
  std::optional<double> alpha;
  bool adaptive = false;
  std::optional<double> target_gap;
  std::optional<double> lambda;
  bool sign_flip = false;
  std::vector<double> sweep_gamma;
  std::optional<int> top_k;
  SyntheticSpec data;
  int epochs = 10;
  int batch_size = 128;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::uint64_t shuffle_seed = 0;
  double threshold = 0.5;
};

struct ExperimentOptions {
  std::string loss_family;  // bce, focal or asl
  SyntheticSpec data;
  TrainConfig train;
  std::optional<int> top_k;
  std::vector<double> sweep_gammas;  // focal gamma values; empty for a single run
};

/// Resolves loss-family defaults (focal gamma = 2; ASL gamma_pos = 0,
/// gamma_neg = 4, margin = 0.05) and rejects contradictory flag sets.
ExperimentOptions resolve_train_flags(const TrainFlags& flags);

struct ExperimentResult {
  TrainResult training;
  MetricReport metrics;
};

ExperimentResult run_experiment(const SyntheticSplit& data, const TrainConfig& train, std::optional<int> top_k);

// Columns: iter, loss, pt_pos, pt_neg, gap, gamma_neg.
CsvTable train_log_table(const std::vector<IterationLog>& log);
// Columns: map, cp, cr, cf1, op, or, of1, top_k.
CsvTable summary_table(const MetricReport& report);

struct AdaptiveOptions {
  SyntheticSpec data;
  TrainConfig train;               // loss gives gamma_pos and margin
  AdaptiveController controller;   // initial state; target_gap is overridden per target
  std::vector<double> targets = {0.0, 0.1, 0.2};
};

// Writes <out>/loss_table.csv and manifest.json.
void run_loss_table(const LossTableOptions& opts, const std::filesystem::path& out);
// Writes <out>/grad_table.csv and manifest.json.
void run_grad_table(const GradTableOptions& opts, const std::filesystem::path& out);
// Single run: train_log.csv, summary.csv, model.bin. Sweep: sweep.csv. Both: manifest.json.
void run_train(const ExperimentOptions& opts, const std::filesystem::path& out);
// adaptive.csv (target, iter, gamma_neg, gap), adaptive_summary.csv and manifest.json.
void run_adaptive(const AdaptiveOptions& opts, const std::filesystem::path& out);
// train.asld, test.asld and manifest.json.
void run_gen_data(const SyntheticSpec& spec, const std::filesystem::path& out);

/// Re-runs the command recorded in a manifest into `out`. Returns the command name.
std::string replay(const std::filesystem::path& manifest, const std::filesystem::path& out);

}  // namespace asl::cli

#endif  // ASL_COMMANDS_HPP
