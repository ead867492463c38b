#ifndef ASL_ADAPTIVE_HPP
#define ASL_ADAPTIVE_HPP

#include <algorithm>
#include <optional>
#include <stdexcept>

#include "asl/probe.hpp"

namespace asl {

/// Feedback state for steering gamma_neg toward a target probability gap.
///
/// Each update moves gamma_neg by lambda * (gap - target_gap), where gap is
/// the exponentially smoothed batch gap (ema_decay = 0 disables smoothing).
/// With sign_flip set the step is negated: gamma_neg then rises while the gap
/// is below target. The result is clamped to [gamma_min, gamma_max].
struct AdaptiveController {
  double gamma_neg = 4.0;
  double lambda = 0.01;
  double target_gap = 0.0;
  double gamma_min = 0.0;
  double gamma_max = 20.0;
  double ema_decay = 0.99;
  bool sign_flip = false;
  std::optional<double> smoothed_gap;

  void validate() const {
    if (!(lambda >= 0)) throw std::invalid_argument("lambda must be >= 0");
    if (!(gamma_min == 0)) throw std::invalid_argument("gamma_min must be 0");
    if (!(gamma_max > 0)) throw std::invalid_argument("gamma_max must be > 0");
    if (!(gamma_neg >= gamma_min && gamma_neg <= gamma_max)) {
      throw std::invalid_argument("gamma_neg must start inside [gamma_min, gamma_max]");
    }
    if (!(ema_decay >= 0 && ema_decay < 1)) throw std::invalid_argument("ema_decay must lie in [0, 1)");
  }
};

// Records without a gap leave the controller untouched.
inline AdaptiveController update(AdaptiveController ctrl, const ProbeRecord& record) {
  if (!record.gap) return ctrl;
  // The first observation seeds the average so early steps are not biased toward zero.
  ctrl.smoothed_gap = ctrl.smoothed_gap
                          ? ctrl.ema_decay * *ctrl.smoothed_gap + (1.0 - ctrl.ema_decay) * *record.gap
                          : *record.gap;
  const double direction = ctrl.sign_flip ? -1.0 : 1.0;
  const double step = direction * ctrl.lambda * (*ctrl.smoothed_gap - ctrl.target_gap);
  ctrl.gamma_neg = std::clamp(ctrl.gamma_neg + step, ctrl.gamma_min, ctrl.gamma_max);
  return ctrl;
}

}  // namespace asl

#endif  // ASL_ADAPTIVE_HPP
