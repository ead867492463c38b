#ifndef ASL_REGIME_HPP
#define ASL_REGIME_HPP

#include <cmath>
#include <optional>
#include <vector>

#include "asl/loss.hpp"

namespace asl {

enum class RegimeTag { HardThreshold, SoftThreshold, MislabeledRejection };

inline const char* to_string(RegimeTag tag) {
  switch (tag) {
    case RegimeTag::HardThreshold: return "hard_threshold";
    case RegimeTag::SoftThreshold: return "soft_threshold";
    case RegimeTag::MislabeledRejection: return "mislabeled_rejection";
  }
  return "unknown";
}

template <typename Scalar = double>
struct GradientRegime {
  RegimeTag tag;
  Scalar margin;
  std::optional<Scalar> turning_point;
};

/// Probability p* in (margin, 1) where the negative-branch gradient peaks.
///
/// A grid scan with step 1e-4 locates the peak, then ternary search narrows
/// the bracketing cell to 1e-8. Empty when the scan maximum sits at the
/// right end of the grid, i.e. the gradient never turns down.
template <typename Scalar>
std::optional<Scalar> find_turning_point(const LossConfig<Scalar>& cfg) {
  const Scalar step = Scalar(1e-4);
  const Scalar lo = cfg.margin;
  const Scalar hi = Scalar(1) - cfg.eps;

  std::vector<Scalar> grid;
  for (long i = 1;; ++i) {
    const Scalar p = lo + step * Scalar(i);
    if (p >= hi) break;
    grid.push_back(p);
  }
  grid.push_back(hi);

  std::size_t best = 0;
  Scalar best_value = grad_negative_z(grid[0], cfg);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const Scalar g = grad_negative_z(grid[i], cfg);
    if (g > best_value) {
      best_value = g;
      best = i;
    }
  }
  if (best + 1 == grid.size()) return std::nullopt;

  Scalar a = best == 0 ? lo : grid[best - 1];
  Scalar b = grid[best + 1];
  while (b - a > Scalar(1e-8)) {
    const Scalar m1 = a + (b - a) / 3;
    const Scalar m2 = b - (b - a) / 3;
    if (grad_negative_z(m1, cfg) < grad_negative_z(m2, cfg)) {
      a = m1;
    } else {
      b = m2;
    }
  }
  return (a + b) / 2;
}

template <typename Scalar>
GradientRegime<Scalar> classify_regime(Scalar p, const LossConfig<Scalar>& cfg,
                                       std::optional<Scalar> turning_point) {
  detail::require_open_unit(p, "classify_regime");
  if (p < cfg.margin) return {RegimeTag::HardThreshold, cfg.margin, turning_point};
  if (turning_point && p > *turning_point) {
    return {RegimeTag::MislabeledRejection, cfg.margin, turning_point};
  }
  return {RegimeTag::SoftThreshold, cfg.margin, turning_point};
}

// Computes p* on every call; pass it explicitly when classifying many points.
template <typename Scalar>
GradientRegime<Scalar> classify_regime(Scalar p, const LossConfig<Scalar>& cfg) {
  return classify_regime(p, cfg, find_turning_point(cfg));
}

}  // namespace asl

#endif  // ASL_REGIME_HPP
