#ifndef ASL_MODEL_HPP
#define ASL_MODEL_HPP

#include "asl/types.hpp"

namespace asl {

// One logit per label: z = W x + b.
struct LinearModel {
  RowMatrixXd weights;  // K x D
  Eigen::VectorXd bias;  // K

  static LinearModel zeros(Eigen::Index num_labels, Eigen::Index feature_dim) {
    return {RowMatrixXd::Zero(num_labels, feature_dim), Eigen::VectorXd::Zero(num_labels)};
  }

  Eigen::Index num_labels() const { return weights.rows(); }
  Eigen::Index feature_dim() const { return weights.cols(); }
};

/// B x K logits for a B x D feature block.
template <typename Derived>
RowMatrixXd forward(const LinearModel& model, const Eigen::MatrixBase<Derived>& features) {
  if (features.cols() != model.feature_dim()) throw ShapeError("forward: feature dimension mismatch");
  if (model.bias.size() != model.num_labels()) throw ShapeError("forward: bias length mismatch");
  RowMatrixXd logits = features.template cast<double>() * model.weights.transpose();
  logits.rowwise() += model.bias.transpose();
  return logits;
}

}  // namespace asl

#endif  // ASL_MODEL_HPP
