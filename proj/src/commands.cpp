#include "asl/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "asl/io.hpp"
#include "asl/loss.hpp"

using json = nlohmann::ordered_json;

namespace asl {

// JSON mappings used by the run manifest. Controller smoothing state is not
// serialized: every run starts from an empty average.

void to_json(json& j, const LossConfigd& c) {
  j = json{{"gamma_pos", c.gamma_pos}, {"gamma_neg", c.gamma_neg}, {"margin", c.margin},
           {"alpha", c.alpha ? json(*c.alpha) : json(nullptr)}, {"eps", c.eps}};
}

void from_json(const json& j, LossConfigd& c) {
  j.at("gamma_pos").get_to(c.gamma_pos);
  j.at("gamma_neg").get_to(c.gamma_neg);
  j.at("margin").get_to(c.margin);
  c.alpha = j.at("alpha").is_null() ? std::nullopt : std::optional<double>(j.at("alpha").get<double>());
  j.at("eps").get_to(c.eps);
}

void to_json(json& j, const AdaptiveController& c) {
  j = json{{"gamma_neg", c.gamma_neg}, {"lambda", c.lambda},       {"target_gap", c.target_gap},
           {"gamma_min", c.gamma_min}, {"gamma_max", c.gamma_max}, {"ema_decay", c.ema_decay},
           {"sign_flip", c.sign_flip}};
}

void from_json(const json& j, AdaptiveController& c) {
  j.at("gamma_neg").get_to(c.gamma_neg);
  j.at("lambda").get_to(c.lambda);
  j.at("target_gap").get_to(c.target_gap);
  j.at("gamma_min").get_to(c.gamma_min);
  j.at("gamma_max").get_to(c.gamma_max);
  j.at("ema_decay").get_to(c.ema_decay);
  j.at("sign_flip").get_to(c.sign_flip);
  c.smoothed_gap.reset();
}

void to_json(json& j, const SyntheticSpec& s) {
  j = json{{"num_labels", s.num_labels},       {"feature_dim", s.feature_dim}, {"num_train", s.num_train},
           {"num_test", s.num_test},           {"positive_rate", s.positive_rate},
           {"noise_sigma", s.noise_sigma},     {"mislabel_rate", s.mislabel_rate},
           {"seed", s.seed}};
}

void from_json(const json& j, SyntheticSpec& s) {
  j.at("num_labels").get_to(s.num_labels);
  j.at("feature_dim").get_to(s.feature_dim);
  j.at("num_train").get_to(s.num_train);
  j.at("num_test").get_to(s.num_test);
  j.at("positive_rate").get_to(s.positive_rate);
  j.at("noise_sigma").get_to(s.noise_sigma);
  j.at("mislabel_rate").get_to(s.mislabel_rate);
  j.at("seed").get_to(s.seed);
}

void to_json(json& j, const TrainConfig& t) {
  j = json{{"epochs", t.epochs},
           {"batch_size", t.batch_size},
           {"learning_rate", t.learning_rate},
           {"momentum", t.momentum},
           {"shuffle_seed", t.shuffle_seed},
           {"threshold", t.threshold},
           {"loss", t.loss},
           {"adaptive", t.adaptive ? json(*t.adaptive) : json(nullptr)}};
}

void from_json(const json& j, TrainConfig& t) {
  j.at("epochs").get_to(t.epochs);
  j.at("batch_size").get_to(t.batch_size);
  j.at("learning_rate").get_to(t.learning_rate);
  j.at("momentum").get_to(t.momentum);
  j.at("shuffle_seed").get_to(t.shuffle_seed);
  j.at("threshold").get_to(t.threshold);
  j.at("loss").get_to(t.loss);
  if (j.at("adaptive").is_null()) {
    t.adaptive.reset();
  } else {
    t.adaptive = j.at("adaptive").get<AdaptiveController>();
  }
}

namespace cli {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

json manifest_header(const std::string& command) {
  return json{{"artifact_version", kArtifactVersion},
              {"command", command},
              {"csv_schema_version", kCsvSchemaVersion}};
}

const char* sign_name(bool flipped) { return flipped ? "flipped" : "as_printed"; }

json metric_policy() {
  return json{{"ap_interpolation", "none"},
              {"ap_tie_break", "stable_by_original_index"},
              {"zero_denominator", "class_excluded_from_average"},
              {"overall_zero_denominator", "zero"}};
}

void write_manifest(const std::filesystem::path& out, json manifest, std::vector<std::string> outputs) {
  manifest["outputs"] = std::move(outputs);
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
}

void prepare(const std::filesystem::path& out) { std::filesystem::create_directories(out); }

std::string format_top_k(const std::optional<int>& top_k) { return top_k ? std::to_string(*top_k) : std::string(); }

std::vector<std::string> metric_cells(const MetricReport& r) {
  return {format_number(r.map), format_number(r.cp),  format_number(r.cr), format_number(r.cf1),
          format_number(r.op),  format_number(r.or_), format_number(r.of1), format_top_k(r.top_k)};
}

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

template <typename... Configs>
void validate_all(const Configs&... configs) {
  try {
    (configs.validate(), ...);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

}  // namespace

std::filesystem::path resolve_output_dir(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return ".";
}

CsvTable loss_table(const LossTableOptions& opts) {
  require(opts.points >= 2, "loss table needs at least 2 points");
  const auto ce = LossConfigd::bce();
  const auto fl = LossConfigd::focal(opts.focal_gamma);
  const auto asl_cfg = LossConfigd::asymmetric(0.0, opts.gamma_neg, opts.margin);
  validate_all(fl, asl_cfg);

  CsvTable table({"p", "ce", "fl", "asl"});
  for (int i = 0; i < opts.points; ++i) {
    const double p = static_cast<double>(i) / static_cast<double>(opts.points - 1);
    table.add_row({format_number(p), format_number(loss_negative(p, ce)), format_number(loss_negative(p, fl)),
                   format_number(loss_negative(p, asl_cfg))});
  }
  return table;
}

CsvTable grad_table(const GradTableOptions& opts) {
  require(opts.points >= 1, "gradient table needs at least 1 point");
  require(opts.margin > 0, "gradient table needs margin > 0 to separate CE+PS from CE");
  require(opts.gamma_neg > 0, "gradient table needs gamma_neg > 0 to separate AF from CE");
  const auto ce = LossConfigd::bce();
  const auto ce_ps = LossConfigd::asymmetric(0.0, 0.0, opts.margin);
  const auto af = LossConfigd::asymmetric(0.0, opts.gamma_neg, 0.0);
  const auto asl_cfg = LossConfigd::asymmetric(0.0, opts.gamma_neg, opts.margin);
  validate_all(asl_cfg);

  std::vector<double> ps, asl_col;
  for (int i = 1; i <= opts.points; ++i) {
    const double p = static_cast<double>(i) / static_cast<double>(opts.points + 1);
    ps.push_back(p);
    asl_col.push_back(grad_negative_z(p, asl_cfg));
  }
  const double peak = *std::max_element(asl_col.begin(), asl_col.end());

  CsvTable table({"p", "ce", "ce_ps", "af", "asl", "asl_norm"});
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double p = ps[i];
    table.add_row({format_number(p), format_number(grad_negative_z(p, ce)), format_number(grad_negative_z(p, ce_ps)),
                   format_number(grad_negative_z(p, af)), format_number(asl_col[i]),
                   format_number(peak > 0 ? asl_col[i] / peak : 0.0)});
  }
  return table;
}

ExperimentOptions resolve_train_flags(const TrainFlags& flags) {
  ExperimentOptions opts;
  opts.loss_family = flags.loss;
  opts.data = flags.data;
  opts.top_k = flags.top_k;
  opts.sweep_gammas = flags.sweep_gamma;

  LossConfigd loss;
  if (flags.loss == "bce") {
    require(!flags.gamma && !flags.gamma_pos && !flags.gamma_neg && !flags.margin,
            "--loss bce takes no --gamma, --gamma-pos, --gamma-neg or --margin");
  } else if (flags.loss == "focal") {
    require(!flags.gamma_pos && !flags.gamma_neg && !flags.margin,
            "--loss focal uses --gamma; --gamma-pos, --gamma-neg and --margin belong to --loss asl");
    loss = LossConfigd::focal(flags.gamma.value_or(2.0));
  } else if (flags.loss == "asl") {
    require(!flags.gamma, "--gamma belongs to --loss focal; use --gamma-pos / --gamma-neg");
    const auto defaults = LossConfigd::asl_default();
    loss = LossConfigd::asymmetric(flags.gamma_pos.value_or(defaults.gamma_pos),
                                   flags.gamma_neg.value_or(defaults.gamma_neg),
                                   flags.margin.value_or(defaults.margin));
  } else {
    throw UsageError("--loss must be one of bce, focal, asl");
  }
  loss.alpha = flags.alpha;

  if (!flags.sweep_gamma.empty()) {
    require(flags.loss == "focal", "--sweep-gamma requires --loss focal");
    require(!flags.gamma, "--sweep-gamma conflicts with a fixed --gamma");
    require(!flags.adaptive, "--sweep-gamma conflicts with --adaptive");
    for (double g : flags.sweep_gamma) require(g >= 0, "--sweep-gamma values must be >= 0");
  }

  if (flags.adaptive) {
    require(flags.loss == "asl", "--adaptive requires --loss asl");
  } else {
    require(!flags.target_gap && !flags.lambda && !flags.sign_flip,
            "--target-gap, --lambda and --sign-flip require --adaptive");
  }
  if (flags.top_k) require(*flags.top_k >= 1, "--top-k must be >= 1");

  opts.train.epochs = flags.epochs;
  opts.train.batch_size = flags.batch_size;
  opts.train.learning_rate = flags.learning_rate;
  opts.train.momentum = flags.momentum;
  opts.train.shuffle_seed = flags.shuffle_seed;
  opts.train.threshold = flags.threshold;
  opts.train.loss = loss;
  if (flags.adaptive) {
    AdaptiveController ctrl;
    ctrl.gamma_neg = loss.gamma_neg;
    ctrl.lambda = flags.lambda.value_or(ctrl.lambda);
    ctrl.target_gap = flags.target_gap.value_or(0.0);
    ctrl.sign_flip = flags.sign_flip;
    opts.train.adaptive = ctrl;
  }

  validate_all(opts.data, opts.train);
  return opts;
}

ExperimentResult run_experiment(const SyntheticSplit& data, const TrainConfig& train_cfg, std::optional<int> top_k) {
  const auto k_count = data.train.labels.cols();
  const auto dim = data.train.features.cols();
  ExperimentResult result;
  result.training = train(LinearModel::zeros(k_count, dim), data.train, train_cfg);
  const RowMatrixXd probs = predict_proba(result.training.model, data.test.features);
  result.metrics = evaluate(probs, data.test.labels, train_cfg.threshold, top_k);
  return result;
}

CsvTable train_log_table(const std::vector<IterationLog>& log) {
  CsvTable table({"iter", "loss", "pt_pos", "pt_neg", "gap", "gamma_neg"});
  for (const auto& row : log) {
    table.add_row({std::to_string(row.probe.iteration), format_number(row.loss), format_number(row.probe.pt_pos),
                   format_number(row.probe.pt_neg), format_number(row.probe.gap), format_number(row.gamma_neg)});
  }
  return table;
}

CsvTable summary_table(const MetricReport& report) {
  CsvTable table({"map", "cp", "cr", "cf1", "op", "or", "of1", "top_k"});
  table.add_row(metric_cells(report));
  return table;
}

void run_loss_table(const LossTableOptions& opts, const std::filesystem::path& out) {
  const auto table = loss_table(opts);
  prepare(out);
  write_text(out / "loss_table.csv", table.str());
  json m = manifest_header("loss-table");
  m["config"] = json{{"focal_gamma", opts.focal_gamma},
                     {"gamma_neg", opts.gamma_neg},
                     {"margin", opts.margin},
                     {"points", opts.points}};
  write_manifest(out, std::move(m), {"loss_table.csv"});
}

void run_grad_table(const GradTableOptions& opts, const std::filesystem::path& out) {
  const auto table = grad_table(opts);
  prepare(out);
  write_text(out / "grad_table.csv", table.str());
  json m = manifest_header("grad-table");
  m["config"] = json{{"gamma_neg", opts.gamma_neg}, {"margin", opts.margin}, {"points", opts.points}};
  write_manifest(out, std::move(m), {"grad_table.csv"});
}

void run_train(const ExperimentOptions& opts, const std::filesystem::path& out) {
  prepare(out);
  const auto data = generate(opts.data);

  json m = manifest_header("train");
  m["config"] = json{{"loss_family", opts.loss_family},
                     {"data", opts.data},
                     {"train", opts.train},
                     {"top_k", opts.top_k ? json(*opts.top_k) : json(nullptr)},
                     {"sweep_gammas", opts.sweep_gammas}};
  m["gamma_update_sign"] = opts.train.adaptive ? json(sign_name(opts.train.adaptive->sign_flip)) : json(nullptr);
  m["metric_policy"] = metric_policy();
  m["warnings"] = data.warnings;

  if (opts.sweep_gammas.empty()) {
    const auto result = run_experiment(data, opts.train, opts.top_k);
    write_text(out / "train_log.csv", train_log_table(result.training.log).str());
    write_text(out / "summary.csv", summary_table(result.metrics).str());
    write_model(out / "model.bin", result.training.model);
    write_manifest(out, std::move(m), {"train_log.csv", "summary.csv", "model.bin"});
    return;
  }

  CsvTable sweep({"gamma", "map", "cp", "cr", "cf1", "op", "or", "of1", "top_k"});
  for (double gamma : opts.sweep_gammas) {
    TrainConfig cfg = opts.train;
    const auto alpha = cfg.loss.alpha;
    cfg.loss = LossConfigd::focal(gamma);
    cfg.loss.alpha = alpha;
    const auto result = run_experiment(data, cfg, opts.top_k);
    auto cells = metric_cells(result.metrics);
    cells.insert(cells.begin(), format_number(gamma));
    sweep.add_row(std::move(cells));
  }
  write_text(out / "sweep.csv", sweep.str());
  write_manifest(out, std::move(m), {"sweep.csv"});
}

void run_adaptive(const AdaptiveOptions& opts, const std::filesystem::path& out) {
  require(!opts.targets.empty(), "adaptive needs at least one target");
  validate_all(opts.data, opts.train, opts.controller);
  prepare(out);
  const auto data = generate(opts.data);

  CsvTable trajectory({"target", "iter", "gamma_neg", "gap"});
  CsvTable summary({"target", "final_gamma_neg", "mean_abs_gap_error", "map"});
  for (double target : opts.targets) {
    TrainConfig cfg = opts.train;
    AdaptiveController ctrl = opts.controller;
    ctrl.target_gap = target;
    cfg.loss.gamma_neg = ctrl.gamma_neg;
    cfg.adaptive = ctrl;
    const auto result = run_experiment(data, cfg, std::nullopt);
    const auto& log = result.training.log;

    double error_sum = 0;
    int error_count = 0;
    const std::size_t tail = log.size() - log.size() / 10;
    for (std::size_t i = 0; i < log.size(); ++i) {
      const auto& row = log[i];
      trajectory.add_row({format_number(target), std::to_string(row.probe.iteration), format_number(row.gamma_neg),
                          format_number(row.probe.gap)});
      if (i >= tail && row.probe.gap) {
        error_sum += std::abs(*row.probe.gap - target);
        ++error_count;
      }
    }
    const double final_gamma = result.training.adaptive ? result.training.adaptive->gamma_neg : cfg.loss.gamma_neg;
    summary.add_row({format_number(target), format_number(final_gamma),
                     format_number(error_count ? std::optional<double>(error_sum / error_count) : std::nullopt),
                     format_number(result.metrics.map)});
  }
  write_text(out / "adaptive.csv", trajectory.str());
  write_text(out / "adaptive_summary.csv", summary.str());

  json m = manifest_header("adaptive");
  m["config"] = json{{"data", opts.data}, {"train", opts.train}, {"controller", opts.controller},
                     {"targets", opts.targets}};
  m["gamma_update_sign"] = sign_name(opts.controller.sign_flip);
  m["metric_policy"] = metric_policy();
  m["warnings"] = data.warnings;
  write_manifest(out, std::move(m), {"adaptive.csv", "adaptive_summary.csv"});
}

void run_gen_data(const SyntheticSpec& spec, const std::filesystem::path& out) {
  validate_all(spec);
  prepare(out);
  const auto data = generate(spec);
  write_dataset(out / "train.asld", data.train, spec);
  write_dataset(out / "test.asld", data.test, spec);
  json m = manifest_header("gen-data");
  m["config"] = json{{"data", spec}};
  m["warnings"] = data.warnings;
  write_manifest(out, std::move(m), {"train.asld", "test.asld"});
}

std::string replay(const std::filesystem::path& manifest_path, const std::filesystem::path& out) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest " + manifest_path.string());
  const json m = json::parse(in);
  const auto command = m.at("command").get<std::string>();
  const auto& c = m.at("config");

  if (command == "loss-table") {
    LossTableOptions opts;
    c.at("focal_gamma").get_to(opts.focal_gamma);
    c.at("gamma_neg").get_to(opts.gamma_neg);
    c.at("margin").get_to(opts.margin);
    c.at("points").get_to(opts.points);
    run_loss_table(opts, out);
  } else if (command == "grad-table") {
    GradTableOptions opts;
    c.at("gamma_neg").get_to(opts.gamma_neg);
    c.at("margin").get_to(opts.margin);
    c.at("points").get_to(opts.points);
    run_grad_table(opts, out);
  } else if (command == "train") {
    ExperimentOptions opts;
    c.at("loss_family").get_to(opts.loss_family);
    c.at("data").get_to(opts.data);
    c.at("train").get_to(opts.train);
    if (!c.at("top_k").is_null()) opts.top_k = c.at("top_k").get<int>();
    c.at("sweep_gammas").get_to(opts.sweep_gammas);
    run_train(opts, out);
  } else if (command == "adaptive") {
    AdaptiveOptions opts;
    c.at("data").get_to(opts.data);
    c.at("train").get_to(opts.train);
    c.at("controller").get_to(opts.controller);
    c.at("targets").get_to(opts.targets);
    run_adaptive(opts, out);
  } else if (command == "gen-data") {
    run_gen_data(c.at("data").get<SyntheticSpec>(), out);
  } else {
    throw UsageError("manifest names unknown command '" + command + "'");
  }
  return command;
}

}  // namespace cli
}  // namespace asl
