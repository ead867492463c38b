#ifndef ASL_LOSS_HPP
#define ASL_LOSS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "asl/types.hpp"

namespace asl {

/// Parameters of the asymmetric loss family.
///
/// gamma_pos / gamma_neg are the focusing exponents of the positive and
/// negative branches, margin is the probability shift applied to negatives,
/// and alpha (when set) is a static linear weight: positives are scaled by
/// alpha, negatives by 1 - alpha. With everything zero and no alpha the
/// configuration is plain binary cross-entropy.
template <typename Scalar = double>
struct LossConfig {
  Scalar gamma_pos = 0;
  Scalar gamma_neg = 0;
  Scalar margin = 0;
  std::optional<Scalar> alpha;
  Scalar eps = Scalar(1e-8);

  static LossConfig bce() { return {}; }

  static LossConfig focal(Scalar gamma) {
    LossConfig cfg;
    cfg.gamma_pos = gamma;
    cfg.gamma_neg = gamma;
    return cfg;
  }

  static LossConfig asymmetric(Scalar gamma_pos, Scalar gamma_neg, Scalar margin) {
    LossConfig cfg;
    cfg.gamma_pos = gamma_pos;
    cfg.gamma_neg = gamma_neg;
    cfg.margin = margin;
    return cfg;
  }

  // gamma_pos = 0, gamma_neg = 4, margin = 0.05
  static LossConfig asl_default() { return asymmetric(0, 4, Scalar(0.05)); }

  bool is_bce() const {
    return gamma_pos == 0 && gamma_neg == 0 && margin == 0 && !alpha;
  }

  void validate() const {
    if (!(gamma_pos >= 0)) throw std::invalid_argument("gamma_pos must be >= 0");
    if (!(gamma_neg >= 0)) throw std::invalid_argument("gamma_neg must be >= 0");
    if (!(margin >= 0 && margin < 1)) throw std::invalid_argument("margin must lie in [0, 1)");
    if (!(eps > 0 && eps <= Scalar(1e-3))) throw std::invalid_argument("eps must lie in (0, 1e-3]");
    if (alpha && !(*alpha > 0 && *alpha < 1)) throw std::invalid_argument("alpha must lie in (0, 1)");
  }
};

using LossConfigd = LossConfig<double>;

namespace detail {

template <typename Scalar>
Scalar clamp_probability(Scalar p, Scalar eps) {
  // 1 - eps may round to 1 for narrow scalars.
  const Scalar upper = std::min<Scalar>(Scalar(1) - eps, std::nextafter(Scalar(1), Scalar(0)));
  return std::clamp(p, eps, upper);
}

template <typename Scalar>
void require_open_unit(Scalar p, const char* what) {
  if (!(p > 0 && p < 1)) {
    throw std::domain_error(std::string(what) + ": probability must lie in (0, 1)");
  }
}

}  // namespace detail

/// Logistic function, stable for large |z|.
template <typename Scalar>
Scalar sigmoid(Scalar z) {
  if (!std::isfinite(z)) throw std::domain_error("sigmoid: non-finite logit");
  if (z >= 0) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

template <typename Scalar>
Scalar shift_probability(Scalar p, Scalar margin) {
  return std::max(p - margin, Scalar(0));
}

/// -(1 - p)^gamma_pos * log(p), scaled by alpha when set.
template <typename Scalar>
Scalar loss_positive(Scalar p, const LossConfig<Scalar>& cfg) {
  const Scalar pc = detail::clamp_probability(p, cfg.eps);
  const Scalar value = -std::pow(Scalar(1) - pc, cfg.gamma_pos) * std::log(pc);
  return cfg.alpha ? *cfg.alpha * value : value;
}

/// -(p_m)^gamma_neg * log(1 - p_m) with p_m = max(p - margin, 0), scaled by
/// 1 - alpha when set. Zero on p <= margin. pow(0, 0) is 1, so gamma_neg = 0
/// gives cross-entropy on the shifted probability.
template <typename Scalar>
Scalar loss_negative(Scalar p, const LossConfig<Scalar>& cfg) {
  const Scalar pc = detail::clamp_probability(p, cfg.eps);
  const Scalar pm = shift_probability(pc, cfg.margin);
  if (pm == 0) return Scalar(0);
  const Scalar one_minus = std::max(Scalar(1) - pm, cfg.eps);
  const Scalar value = -std::pow(pm, cfg.gamma_neg) * std::log(one_minus);
  return cfg.alpha ? (Scalar(1) - *cfg.alpha) * value : value;
}

template <typename Scalar>
Scalar per_label_loss(Scalar p, int label, const LossConfig<Scalar>& cfg) {
  if (label == 1) return loss_positive(p, cfg);
  if (label == 0) return loss_negative(p, cfg);
  throw std::domain_error("per_label_loss: label must be 0 or 1");
}

/// Sum of per-label losses over one sample's logits, in index order.
template <typename LogitDerived, typename LabelDerived>
typename LogitDerived::Scalar total_loss(const Eigen::DenseBase<LogitDerived>& logits,
                                         const Eigen::DenseBase<LabelDerived>& labels,
                                         const LossConfig<typename LogitDerived::Scalar>& cfg) {
  using Scalar = typename LogitDerived::Scalar;
  if (logits.size() != labels.size()) throw ShapeError("total_loss: logits and labels differ in length");
  if (logits.size() == 0) throw ShapeError("total_loss: need at least one label");
  Scalar sum = 0;
  for (Eigen::Index k = 0; k < logits.size(); ++k) {
    sum += per_label_loss(sigmoid(logits.derived().coeff(k)), static_cast<int>(labels.derived().coeff(k)), cfg);
  }
  return sum;
}

/// Derivative of the negative-branch loss with respect to the logit:
///   (p_m)^g * [1/(1 - p_m) - g * log(1 - p_m) / p_m] * p(1 - p).
/// Returns 0 whenever p_m = 0, including the kink at p = margin.
template <typename Scalar>
Scalar grad_negative_z(Scalar p, const LossConfig<Scalar>& cfg) {
  detail::require_open_unit(p, "grad_negative_z");
  const Scalar pm = shift_probability(p, cfg.margin);
  if (pm == 0) return Scalar(0);
  const Scalar g = cfg.gamma_neg;
  const Scalar focus = std::pow(pm, g);
  // log1p(-pm) / pm stays bounded as pm -> 0, which keeps 0 < g < 1 finite.
  Scalar bracket = focus / (Scalar(1) - pm);
  if (g != 0) bracket -= g * focus * (std::log1p(-pm) / pm);
  const Scalar value = bracket * p * (Scalar(1) - p);
  return cfg.alpha ? (Scalar(1) - *cfg.alpha) * value : value;
}

/// Derivative of the positive-branch loss with respect to the logit:
///   (1 - p)^g * [g * p * log(p) - (1 - p)].
template <typename Scalar>
Scalar grad_positive_z(Scalar p, const LossConfig<Scalar>& cfg) {
  detail::require_open_unit(p, "grad_positive_z");
  const Scalar g = cfg.gamma_pos;
  const Scalar q = Scalar(1) - p;
  Scalar inner = -q;
  if (g != 0) inner += g * p * std::log(p);
  const Scalar value = std::pow(q, g) * inner;
  return cfg.alpha ? *cfg.alpha * value : value;
}

template <typename Scalar>
Scalar per_label_grad_z(Scalar p, int label, const LossConfig<Scalar>& cfg) {
  if (label == 1) return grad_positive_z(p, cfg);
  if (label == 0) return grad_negative_z(p, cfg);
  throw std::domain_error("per_label_grad_z: label must be 0 or 1");
}

}  // namespace asl

#endif  // ASL_LOSS_HPP
