#ifndef ASL_METRICS_HPP
#define ASL_METRICS_HPP

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "asl/types.hpp"

namespace asl {

/// Non-interpolated average precision: the mean, over positive entries, of
/// the precision at that entry's rank. Ranks come from a stable descending
/// sort, so tied scores keep their original order. Empty when no label is
/// positive.
std::optional<double> average_precision(const Eigen::Ref<const Eigen::VectorXd>& scores,
                                        const Eigen::Ref<const LabelVector>& labels);

struct MetricReport {
  std::vector<std::optional<double>> per_class_ap;
  double map = 0;
  double cp = 0, cr = 0, cf1 = 0;
  double op = 0, or_ = 0, of1 = 0;
  std::optional<int> top_k;
};

/// Multi-label metric suite.
///
/// An entry is predicted positive when its probability exceeds threshold and,
/// if top_k is set, it is among the sample's top_k scores (ties go to the
/// lower class index). Per-class precision is left out of CP when the class
/// has no predicted positives; per-class recall is left out of CR when the
/// class has no positives. Overall ratios with an empty denominator are 0, as
/// are averages over an empty set.
MetricReport evaluate(const Eigen::Ref<const RowMatrixXd>& probs, const Eigen::Ref<const LabelMatrix>& labels,
                      double threshold, std::optional<int> top_k = std::nullopt);

}  // namespace asl

#endif  // ASL_METRICS_HPP
