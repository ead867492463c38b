#ifndef ASL_TRAINER_HPP
#define ASL_TRAINER_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "asl/adaptive.hpp"
#include "asl/loss.hpp"
#include "asl/model.hpp"
#include "asl/probe.hpp"
#include "asl/synth.hpp"

namespace asl {

struct TrainConfig {
  int epochs = 10;
  int batch_size = 128;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::uint64_t shuffle_seed = 0;
  double threshold = 0.5;
  LossConfigd loss;
  // When set, gamma_neg of `loss` is replaced by the controller's value each batch.
  std::optional<AdaptiveController> adaptive;

  void validate() const;
};

struct IterationLog {
  ProbeRecord probe;
  double loss = 0;       // batch loss: summed over labels, averaged over samples
  double gamma_neg = 0;  // value used for this batch
};

struct TrainResult {
  LinearModel model;
  std::vector<IterationLog> log;
  std::vector<double> epoch_loss;  // mean of batch losses per epoch
  std::optional<AdaptiveController> adaptive;
};

class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, std::int64_t iteration, Eigen::Index label)
      : std::runtime_error(what), iteration_(iteration), label_(label) {}

  std::int64_t iteration() const { return iteration_; }
  Eigen::Index label() const { return label_; }

 private:
  std::int64_t iteration_;
  Eigen::Index label_;
};

/// Per-entry dL/dz for a block of logits under `cfg`.
RowMatrixXd logit_gradients(const RowMatrixXd& probs, const LabelMatrix& labels, const LossConfigd& cfg);

struct BatchGradient {
  RowMatrixXd weights;   // K x D
  Eigen::VectorXd bias;  // K
  RowMatrixXd probs;     // B x K
  double loss = 0;       // summed over labels, averaged over samples
};

/// Loss and parameter gradient of one batch at the current model. Logits
/// must be finite.
BatchGradient batch_gradient(const LinearModel& model, const RowMatrixXd& features, const LabelMatrix& labels,
                             const LossConfigd& cfg);

/// Elementwise sigmoid of the model's logits.
RowMatrixXd predict_proba(const LinearModel& model, const RowMatrixXf& features);

/// Mini-batch SGD with momentum on a linear multi-label model.
///
/// Each epoch visits the rows in a Fisher-Yates order drawn from
/// shuffle_seed; the final batch of an epoch may be short. For each batch the
/// parameter gradient is G^T X / B (and the column mean of G for the bias),
/// with G the per-entry logit gradient. Momentum follows v <- mu v + grad,
/// theta <- theta - lr v. The probe is taken on the batch probabilities before
/// the step, and the adaptive controller (if any) is updated right after it.
/// Throws TrainingError on a non-finite logit, loss or parameter.
TrainResult train(LinearModel model, const LabeledBatch& data, const TrainConfig& cfg);

}  // namespace asl

#endif  // ASL_TRAINER_HPP
