#ifndef ASL_PROBE_HPP
#define ASL_PROBE_HPP

#include <cstdint>
#include <optional>

#include <Eigen/Core>

#include "asl/types.hpp"

namespace asl {

/// Mean confidence of positives and negatives over one batch.
///
/// pt_pos is the mean of p over positive entries, pt_neg the mean of 1 - p
/// over negative entries, and gap = pt_pos - pt_neg. A field is empty when
/// the batch has no entries of that kind; gap is then empty as well.
struct ProbeRecord {
  std::int64_t iteration = 0;
  std::optional<double> pt_pos;
  std::optional<double> pt_neg;
  std::optional<double> gap;
};

template <typename ProbDerived, typename LabelDerived>
ProbeRecord batch_probe(const Eigen::DenseBase<ProbDerived>& probs,
                        const Eigen::DenseBase<LabelDerived>& labels, std::int64_t iteration) {
  if (probs.rows() != labels.rows() || probs.cols() != labels.cols()) {
    throw ShapeError("batch_probe: probability and label shapes differ");
  }
  double pos_sum = 0, neg_sum = 0;
  std::int64_t pos_count = 0, neg_count = 0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    for (Eigen::Index k = 0; k < probs.cols(); ++k) {
      const double p = static_cast<double>(probs.derived().coeff(i, k));
      if (labels.derived().coeff(i, k) != 0) {
        pos_sum += p;
        ++pos_count;
      } else {
        neg_sum += 1.0 - p;
        ++neg_count;
      }
    }
  }

  ProbeRecord record;
  record.iteration = iteration;
  if (pos_count > 0) record.pt_pos = pos_sum / static_cast<double>(pos_count);
  if (neg_count > 0) record.pt_neg = neg_sum / static_cast<double>(neg_count);
  if (record.pt_pos && record.pt_neg) record.gap = *record.pt_pos - *record.pt_neg;
  return record;
}

}  // namespace asl

#endif  // ASL_PROBE_HPP
