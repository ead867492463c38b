#include "asl/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace asl {

namespace {

double f1(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0 ? 2.0 * precision * recall / denom : 0.0;
}

double mean_or_zero(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace

std::optional<double> average_precision(const Eigen::Ref<const Eigen::VectorXd>& scores,
                                        const Eigen::Ref<const LabelVector>& labels) {
  if (scores.size() != labels.size()) throw ShapeError("average_precision: scores and labels differ in length");
  if (scores.size() == 0) throw ShapeError("average_precision: empty input");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return scores(a) > scores(b); });

  double hits = 0, precision_sum = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (labels(order[rank]) != 0) {
      hits += 1;
      precision_sum += hits / static_cast<double>(rank + 1);
    }
  }
  if (hits == 0) return std::nullopt;
  return precision_sum / hits;
}

MetricReport evaluate(const Eigen::Ref<const RowMatrixXd>& probs, const Eigen::Ref<const LabelMatrix>& labels,
                      double threshold, std::optional<int> top_k) {
  if (probs.rows() != labels.rows() || probs.cols() != labels.cols()) {
    throw ShapeError("evaluate: probability and label shapes differ");
  }
  if (!(threshold > 0 && threshold < 1)) throw std::invalid_argument("evaluate: threshold must lie in (0, 1)");
  if (top_k && *top_k < 1) throw std::invalid_argument("evaluate: top_k must be >= 1");

  const Eigen::Index n = probs.rows();
  const Eigen::Index k_count = probs.cols();

  LabelMatrix predicted = (probs.array() > threshold).cast<std::uint8_t>();
  if (top_k && *top_k < k_count) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(k_count));
    for (Eigen::Index i = 0; i < n; ++i) {
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](Eigen::Index a, Eigen::Index b) { return probs(i, a) > probs(i, b); });
      for (std::size_t r = static_cast<std::size_t>(*top_k); r < order.size(); ++r) predicted(i, order[r]) = 0;
    }
  }

  MetricReport report;
  report.top_k = top_k;
  report.per_class_ap.reserve(static_cast<std::size_t>(k_count));

  std::vector<double> precisions, recalls, aps;
  long long tp_total = 0, pred_total = 0, pos_total = 0;
  for (Eigen::Index k = 0; k < k_count; ++k) {
    long long tp = 0, pred = 0, pos = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool y = labels(i, k) != 0;
      const bool yhat = predicted(i, k) != 0;
      tp += (y && yhat);
      pred += yhat;
      pos += y;
    }
    if (pred > 0) precisions.push_back(static_cast<double>(tp) / static_cast<double>(pred));
    if (pos > 0) recalls.push_back(static_cast<double>(tp) / static_cast<double>(pos));
    tp_total += tp;
    pred_total += pred;
    pos_total += pos;

    const auto ap = n > 0 ? average_precision(probs.col(k), labels.col(k)) : std::nullopt;
    report.per_class_ap.push_back(ap);
    if (ap) aps.push_back(*ap);
  }

  report.map = mean_or_zero(aps);
  report.cp = mean_or_zero(precisions);
  report.cr = mean_or_zero(recalls);
  report.cf1 = f1(report.cp, report.cr);
  report.op = pred_total > 0 ? static_cast<double>(tp_total) / static_cast<double>(pred_total) : 0.0;
  report.or_ = pos_total > 0 ? static_cast<double>(tp_total) / static_cast<double>(pos_total) : 0.0;
  report.of1 = f1(report.op, report.or_);
  return report;
}

}  // namespace asl
