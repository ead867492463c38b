#include "asl/trainer.hpp"

#include <cmath>
#include <numeric>

#include "asl/random.hpp"

namespace asl {

namespace {

constexpr std::uint64_t kShuffleStream = 100;

std::vector<Eigen::Index> shuffled_order(Eigen::Index n, Xoshiro256& rng) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

RowMatrixXd sigmoid_of(const RowMatrixXd& logits) {
  RowMatrixXd probs(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.size(); ++i) probs.data()[i] = sigmoid(logits.data()[i]);
  return probs;
}

Eigen::Index first_nonfinite_column(const RowMatrixXd& m) {
  for (Eigen::Index k = 0; k < m.cols(); ++k) {
    if (!m.col(k).allFinite()) return k;
  }
  return 0;
}

BatchGradient gradient_from_logits(const RowMatrixXd& logits, const RowMatrixXd& x, const LabelMatrix& y,
                                   const LossConfigd& cfg) {
  BatchGradient grad;
  grad.probs = sigmoid_of(logits);
  const Eigen::Index b = x.rows();
  double loss = 0;
  for (Eigen::Index r = 0; r < b; ++r) {
    for (Eigen::Index k = 0; k < logits.cols(); ++k) loss += per_label_loss(grad.probs(r, k), y(r, k), cfg);
  }
  const double inv_b = 1.0 / static_cast<double>(b);
  grad.loss = loss * inv_b;
  const RowMatrixXd g = logit_gradients(grad.probs, y, cfg);
  grad.weights = inv_b * (g.transpose() * x);
  grad.bias = inv_b * g.colwise().sum().transpose();
  return grad;
}

}  // namespace

BatchGradient batch_gradient(const LinearModel& model, const RowMatrixXd& features, const LabelMatrix& labels,
                             const LossConfigd& cfg) {
  if (labels.rows() != features.rows() || labels.cols() != model.num_labels()) {
    throw ShapeError("batch_gradient: label shape mismatch");
  }
  if (features.rows() == 0) throw ShapeError("batch_gradient: empty batch");
  const RowMatrixXd logits = forward(model, features);
  if (!logits.allFinite()) throw std::domain_error("batch_gradient: non-finite logits");
  return gradient_from_logits(logits, features, labels, cfg);
}

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(learning_rate > 0)) throw std::invalid_argument("learning_rate must be > 0");
  if (!(momentum >= 0 && momentum < 1)) throw std::invalid_argument("momentum must lie in [0, 1)");
  if (!(threshold > 0 && threshold < 1)) throw std::invalid_argument("threshold must lie in (0, 1)");
  loss.validate();
  if (adaptive) adaptive->validate();
}

RowMatrixXd logit_gradients(const RowMatrixXd& probs, const LabelMatrix& labels, const LossConfigd& cfg) {
  if (probs.rows() != labels.rows() || probs.cols() != labels.cols()) {
    throw ShapeError("logit_gradients: probability and label shapes differ");
  }
  RowMatrixXd grad(probs.rows(), probs.cols());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    for (Eigen::Index k = 0; k < probs.cols(); ++k) {
      // Saturated sigmoids sit on the boundary; nudge them inside (0, 1).
      const double p = detail::clamp_probability(probs(i, k), cfg.eps);
      grad(i, k) = per_label_grad_z(p, labels(i, k), cfg);
    }
  }
  return grad;
}

RowMatrixXd predict_proba(const LinearModel& model, const RowMatrixXf& features) {
  return sigmoid_of(forward(model, features));
}

TrainResult train(LinearModel model, const LabeledBatch& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.features.cols() != model.feature_dim()) throw ShapeError("train: feature dimension mismatch");
  if (data.labels.cols() != model.num_labels() || data.labels.rows() != data.rows()) {
    throw ShapeError("train: label shape mismatch");
  }

  TrainResult result;
  result.adaptive = cfg.adaptive;
  LossConfigd loss_cfg = cfg.loss;

  RowMatrixXd weight_velocity = RowMatrixXd::Zero(model.num_labels(), model.feature_dim());
  Eigen::VectorXd bias_velocity = Eigen::VectorXd::Zero(model.num_labels());

  auto rng = Xoshiro256::stream(cfg.shuffle_seed, kShuffleStream);
  const Eigen::Index n = data.rows();
  const Eigen::Index k_count = model.num_labels();
  std::int64_t iteration = 0;

  RowMatrixXd x;
  LabelMatrix y;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = shuffled_order(n, rng);
    double epoch_sum = 0;
    int epoch_batches = 0;

    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index b = std::min<Eigen::Index>(cfg.batch_size, n - start);
      x.resize(b, model.feature_dim());
      y.resize(b, k_count);
      for (Eigen::Index r = 0; r < b; ++r) {
        const Eigen::Index src = order[static_cast<std::size_t>(start + r)];
        x.row(r) = data.features.row(src).cast<double>();
        y.row(r) = data.labels.row(src);
      }

      if (result.adaptive) loss_cfg.gamma_neg = result.adaptive->gamma_neg;

      const RowMatrixXd logits = forward(model, x);
      if (!logits.allFinite()) {
        const auto bad = first_nonfinite_column(logits);
        throw TrainingError("non-finite logit at iteration " + std::to_string(iteration) + ", label " +
                                std::to_string(bad),
                            iteration, bad);
      }
      const BatchGradient grad = gradient_from_logits(logits, x, y, loss_cfg);
      if (!std::isfinite(grad.loss)) {
        RowMatrixXd losses(b, k_count);
        for (Eigen::Index r = 0; r < b; ++r) {
          for (Eigen::Index k = 0; k < k_count; ++k) losses(r, k) = per_label_loss(grad.probs(r, k), y(r, k), loss_cfg);
        }
        const auto bad = first_nonfinite_column(losses);
        throw TrainingError("non-finite loss at iteration " + std::to_string(iteration) + ", label " +
                                std::to_string(bad),
                            iteration, bad);
      }

      weight_velocity = cfg.momentum * weight_velocity + grad.weights;
      bias_velocity = cfg.momentum * bias_velocity + grad.bias;
      model.weights -= cfg.learning_rate * weight_velocity;
      model.bias -= cfg.learning_rate * bias_velocity;

      if (!model.weights.allFinite() || !model.bias.allFinite()) {
        RowMatrixXd params(model.feature_dim() + 1, k_count);
        params.topRows(model.feature_dim()) = model.weights.transpose();
        params.bottomRows(1) = model.bias.transpose();
        const auto bad = first_nonfinite_column(params);
        throw TrainingError("non-finite parameters at iteration " + std::to_string(iteration) + ", label " +
                                std::to_string(bad),
                            iteration, bad);
      }

      IterationLog entry;
      entry.probe = batch_probe(grad.probs, y, iteration);
      entry.loss = grad.loss;
      entry.gamma_neg = loss_cfg.gamma_neg;
      if (result.adaptive) result.adaptive = update(*result.adaptive, entry.probe);
      result.log.push_back(entry);

      epoch_sum += grad.loss;
      ++epoch_batches;
      ++iteration;
    }
    result.epoch_loss.push_back(epoch_batches > 0 ? epoch_sum / epoch_batches : 0.0);
  }

  result.model = std::move(model);
  return result;
}

}  // namespace asl
