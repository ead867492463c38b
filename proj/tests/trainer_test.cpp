#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "asl/trainer.hpp"
#include "oracles.hpp"

namespace asl {
namespace {

LabeledBatch make_batch(const RowMatrixXf& x, const LabelMatrix& y) { return {x, y, y}; }

TEST(Forward, ZeroModelGivesHalf) {
  const auto model = LinearModel::zeros(3, 4);
  RowMatrixXf x = RowMatrixXf::Random(5, 4);
  const auto z = forward(model, x);
  EXPECT_TRUE(z.isZero());
  const auto p = predict_proba(model, x);
  EXPECT_TRUE((p.array() == 0.5).all());
}

TEST(Forward, ScalarExample) {
  LinearModel model{RowMatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Constant(1, -1.0)};
  RowMatrixXd x = RowMatrixXd::Constant(1, 1, 1.0);
  EXPECT_DOUBLE_EQ(forward(model, x)(0, 0), 1.0);
}

TEST(Forward, MatchesNaiveProduct) {
  oracle::TestRng rng(7);
  RowMatrixXd x(9, 6), w(4, 6);
  Eigen::VectorXd b(4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-2, 2);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-1, 1);
  for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.uniform(-1, 1);
  const auto z = forward(LinearModel{w, b}, x);
  const auto expected = oracle::naive_logits(x, w, b);
  EXPECT_LT((z - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Forward, ShapeMismatchThrows) {
  const auto model = LinearModel::zeros(2, 3);
  EXPECT_THROW(forward(model, RowMatrixXd::Zero(1, 4)), ShapeError);
}

TEST(Train, ZeroGradientBatchLeavesParametersUnchanged) {
  // Every label negative and far below the margin: ASL gives exactly zero gradient.
  RowMatrixXf x = RowMatrixXf::Random(16, 3);
  LabelMatrix y = LabelMatrix::Zero(16, 2);
  LinearModel model = LinearModel::zeros(2, 3);
  model.bias.setConstant(-30.0);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 4;
  cfg.loss = LossConfigd::asymmetric(0, 4, 0.05);
  const auto result = train(model, make_batch(x, y), cfg);
  EXPECT_EQ(result.model.weights, model.weights);
  EXPECT_EQ(result.model.bias, model.bias);
  for (const auto& entry : result.log) EXPECT_EQ(entry.loss, 0.0);
}

TEST(Train, SingleBceStepMatchesHandUpdate) {
  RowMatrixXf x(1, 2);
  x << 1.5f, -2.0f;
  LabelMatrix y = LabelMatrix::Constant(1, 1, 1);
  LinearModel model{RowMatrixXd(1, 2), Eigen::VectorXd::Constant(1, 0.3)};
  model.weights << 0.1, 0.2;
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 1;
  cfg.learning_rate = 0.5;
  cfg.momentum = 0.0;
  cfg.loss = LossConfigd::bce();
  const auto result = train(model, make_batch(x, y), cfg);

  const double z = 0.1 * 1.5 + 0.2 * -2.0 + 0.3;
  const double p = 1.0 / (1.0 + std::exp(-z));
  EXPECT_NEAR(result.model.weights(0, 0), 0.1 - 0.5 * (p - 1) * 1.5, 1e-14);
  EXPECT_NEAR(result.model.weights(0, 1), 0.2 - 0.5 * (p - 1) * -2.0, 1e-14);
  EXPECT_NEAR(result.model.bias(0), 0.3 - 0.5 * (p - 1), 1e-14);
  ASSERT_EQ(result.log.size(), 1u);
  EXPECT_NEAR(result.log[0].loss, -std::log(p), 1e-14);
}

TEST(Train, MomentumAccumulatesVelocity) {
  // Constant-gradient case: z stays hugely negative, p clamps to eps, and the
  // BCE gradient on a positive is -(1 - eps) x each step.
  RowMatrixXf x = RowMatrixXf::Constant(1, 1, 1.0f);
  LabelMatrix y = LabelMatrix::Constant(1, 1, 1);
  LinearModel model{RowMatrixXd::Zero(1, 1), Eigen::VectorXd::Constant(1, -100.0)};
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 1;
  cfg.learning_rate = 0.1;
  cfg.momentum = 0.5;
  cfg.loss = LossConfigd::bce();
  const auto result = train(model, make_batch(x, y), cfg);
  // v1 = -g, v2 = -1.5 g; w = 0.1 * (1 + 1.5) g
  EXPECT_NEAR(result.model.weights(0, 0), 0.25 * (1 - 1e-8), 1e-15);
}

TEST(Train, DeterministicForFixedSeeds) {
  SyntheticSpec spec;
  spec.num_labels = 6;
  spec.feature_dim = 8;
  spec.num_train = 500;
  spec.num_test = 10;
  spec.positive_rate = 0.2;
  const auto data = generate(spec);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 32;
  cfg.shuffle_seed = 3;
  cfg.loss = LossConfigd::asl_default();
  const auto a = train(LinearModel::zeros(6, 8), data.train, cfg);
  const auto b = train(LinearModel::zeros(6, 8), data.train, cfg);
  EXPECT_EQ(a.model.weights, b.model.weights);
  EXPECT_EQ(a.model.bias, b.model.bias);

  cfg.shuffle_seed = 4;
  const auto c = train(LinearModel::zeros(6, 8), data.train, cfg);
  EXPECT_NE(a.model.weights, c.model.weights);
}

TEST(Train, EpochLossNonIncreasingOnSeparableData) {
  SyntheticSpec spec;
  spec.num_labels = 5;
  spec.feature_dim = 16;
  spec.num_train = 1000;
  spec.num_test = 10;
  spec.positive_rate = 0.2;
  spec.noise_sigma = 0.0;
  const auto data = generate(spec);
  TrainConfig cfg;
  cfg.epochs = 8;
  cfg.batch_size = 50;
  cfg.learning_rate = 0.01;
  cfg.momentum = 0.0;
  cfg.loss = LossConfigd::bce();
  const auto result = train(LinearModel::zeros(5, 16), data.train, cfg);
  ASSERT_EQ(result.epoch_loss.size(), 8u);
  for (std::size_t e = 1; e < result.epoch_loss.size(); ++e) {
    EXPECT_LE(result.epoch_loss[e], result.epoch_loss[e - 1] + 1e-12) << "epoch " << e;
  }
}

TEST(Train, LogHasOneEntryPerBatch) {
  RowMatrixXf x = RowMatrixXf::Random(10, 2);
  LabelMatrix y = LabelMatrix::Zero(10, 1);
  y(0, 0) = 1;
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 4;  // 4 + 4 + 2
  const auto result = train(LinearModel::zeros(1, 2), make_batch(x, y), cfg);
  ASSERT_EQ(result.log.size(), 6u);
  for (std::size_t i = 0; i < result.log.size(); ++i) EXPECT_EQ(result.log[i].probe.iteration, std::int64_t(i));
}

// Central differences of the mean batch loss with respect to every weight and bias.
TEST(BatchGradient, MatchesFiniteDifferences) {
  oracle::TestRng rng(11);
  const Eigen::Index b = 12, k = 3, d = 4;
  const std::vector<LossConfigd> configs = {LossConfigd::bce(), LossConfigd::focal(2),
                                            LossConfigd::asymmetric(1, 4, 0.05), LossConfigd::asymmetric(0, 2, 0.2)};
  for (int trial = 0; trial < 20; ++trial) {
    const auto& cfg = configs[trial % configs.size()];
    RowMatrixXd x(b, d);
    LabelMatrix y(b, k);
    LinearModel model = LinearModel::zeros(k, d);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1, 1);
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = static_cast<std::uint8_t>(rng.bit());
    for (Eigen::Index i = 0; i < model.weights.size(); ++i) model.weights.data()[i] = rng.uniform(-1.5, 1.5);
    for (Eigen::Index i = 0; i < k; ++i) model.bias(i) = rng.uniform(-1, 1);

    auto mean_loss = [&](const LinearModel& m) {
      const RowMatrixXd z = forward(m, x);
      double sum = 0;
      for (Eigen::Index r = 0; r < b; ++r) sum += total_loss(z.row(r), y.row(r).cast<double>(), cfg);
      return sum / static_cast<double>(b);
    };

    const auto grad = batch_gradient(model, x, y, cfg);
    EXPECT_NEAR(grad.loss, mean_loss(model), 1e-12);
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < model.weights.size(); ++i) {
      LinearModel up = model, down = model;
      up.weights.data()[i] += h;
      down.weights.data()[i] -= h;
      const double fd = (mean_loss(up) - mean_loss(down)) / (2 * h);
      const double analytic = grad.weights.data()[i];
      EXPECT_LE(std::abs(fd - analytic), 1e-5 * std::max(1.0, std::abs(analytic)))
          << "trial " << trial << " weight " << i;
    }
    for (Eigen::Index i = 0; i < k; ++i) {
      LinearModel up = model, down = model;
      up.bias(i) += h;
      down.bias(i) -= h;
      const double fd = (mean_loss(up) - mean_loss(down)) / (2 * h);
      EXPECT_LE(std::abs(fd - grad.bias(i)), 1e-5 * std::max(1.0, std::abs(grad.bias(i))))
          << "trial " << trial << " bias " << i;
    }
  }
}

TEST(BatchGradient, ShapeErrors) {
  const auto model = LinearModel::zeros(2, 3);
  EXPECT_THROW(batch_gradient(model, RowMatrixXd::Zero(4, 3), LabelMatrix::Zero(4, 1), LossConfigd::bce()),
               ShapeError);
  EXPECT_THROW(batch_gradient(model, RowMatrixXd::Zero(0, 3), LabelMatrix::Zero(0, 2), LossConfigd::bce()),
               ShapeError);
}

TEST(Train, NonFiniteFeaturesAbortWithLocation) {
  RowMatrixXf x = RowMatrixXf::Ones(4, 2);
  x(2, 1) = std::numeric_limits<float>::quiet_NaN();
  LabelMatrix y = LabelMatrix::Zero(4, 3);
  LinearModel model = LinearModel::zeros(3, 2);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 4;
  try {
    train(model, make_batch(x, y), cfg);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_EQ(e.iteration(), 0);
    EXPECT_EQ(e.label(), 0);
  }
}

TEST(Train, DivergingParametersAbort) {
  RowMatrixXf x = RowMatrixXf::Constant(2, 1, 1e30f);
  LabelMatrix y = LabelMatrix::Ones(2, 1);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 1;
  cfg.learning_rate = 1e300;
  cfg.loss = LossConfigd::bce();
  EXPECT_THROW(train(LinearModel::zeros(1, 1), make_batch(x, y), cfg), TrainingError);
}

TEST(Train, ShapeMismatchThrows) {
  RowMatrixXf x = RowMatrixXf::Zero(3, 2);
  LabelMatrix y = LabelMatrix::Zero(3, 2);
  EXPECT_THROW(train(LinearModel::zeros(2, 3), make_batch(x, y), TrainConfig{}), ShapeError);
  EXPECT_THROW(train(LinearModel::zeros(3, 2), make_batch(x, y), TrainConfig{}), ShapeError);
}

TEST(Train, InvalidConfigThrows) {
  TrainConfig cfg;
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.momentum = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.learning_rate = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Train, AdaptiveGammaIsLoggedPerBatch) {
  SyntheticSpec spec;
  spec.num_labels = 8;
  spec.feature_dim = 8;
  spec.num_train = 640;
  spec.num_test = 10;
  spec.positive_rate = 0.1;
  const auto data = generate(spec);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 64;
  cfg.loss = LossConfigd::asl_default();
  AdaptiveController ctrl;
  ctrl.lambda = 0.0;
  cfg.adaptive = ctrl;
  const auto frozen = train(LinearModel::zeros(8, 8), data.train, cfg);
  for (const auto& entry : frozen.log) EXPECT_EQ(entry.gamma_neg, 4.0);

  ctrl.lambda = 0.5;
  ctrl.ema_decay = 0.0;
  cfg.adaptive = ctrl;
  const auto moving = train(LinearModel::zeros(8, 8), data.train, cfg);
  EXPECT_EQ(moving.log.front().gamma_neg, 4.0);
  // The first logged gamma is the initial one; each later entry reflects the previous batch's gap.
  const auto after_first = update(ctrl, moving.log.front().probe);
  EXPECT_DOUBLE_EQ(moving.log[1].gamma_neg, after_first.gamma_neg);
}

// Under plain CE the scarce positives end up with lower confidence than the
// abundant negatives; ASL moves the gap up.
TEST(Train, AsymmetryRaisesProbabilityGap) {
  SyntheticSpec spec;
  spec.num_labels = 40;
  spec.feature_dim = 32;
  spec.num_train = 10000;
  spec.num_test = 10;
  const auto data = generate(spec);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.learning_rate = 0.003;
  auto mean_gap = [&](const LossConfigd& loss) {
    cfg.loss = loss;
    const auto result = train(LinearModel::zeros(40, 32), data.train, cfg);
    double sum = 0;
    int n = 0;
    for (std::size_t i = result.log.size() * 2 / 3; i < result.log.size(); ++i) {
      if (result.log[i].probe.gap) {
        sum += *result.log[i].probe.gap;
        ++n;
      }
    }
    return sum / n;
  };
  const double ce = mean_gap(LossConfigd::bce());
  const double asl = mean_gap(LossConfigd::asl_default());
  EXPECT_LT(ce, 0.0);
  EXPECT_GT(asl, ce);
}

}  // namespace
}  // namespace asl
