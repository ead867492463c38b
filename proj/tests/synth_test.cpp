#include <cmath>

#include <gtest/gtest.h>

#include "asl/random.hpp"
#include "asl/synth.hpp"

namespace asl {
namespace {

TEST(Random, SplitMixReferenceSequence) {
  std::uint64_t state = 1234567;
  EXPECT_EQ(splitmix64(state), 6457827717110365317ULL);
  EXPECT_EQ(splitmix64(state), 3203168211198807973ULL);
}

TEST(Random, XoshiroReferenceSequence) {
  auto rng = Xoshiro256::from_state({1, 2, 3, 4});
  EXPECT_EQ(rng.next(), 11520ULL);
  EXPECT_EQ(rng.next(), 0ULL);
  EXPECT_EQ(rng.next(), 1509978240ULL);
  EXPECT_EQ(rng.next(), 1215971899390074240ULL);
}

TEST(Random, NormalMoments) {
  Xoshiro256 rng(99);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.01);
}

TEST(Random, BelowStaysInRange) {
  Xoshiro256 rng(5);
  for (int i = 0; i < 10000; ++i) EXPECT_LT(rng.below(7), 7u);
}

SyntheticSpec small_spec() {
  SyntheticSpec s;
  s.num_labels = 10;
  s.feature_dim = 6;
  s.num_train = 300;
  s.num_test = 100;
  s.positive_rate = 0.2;
  s.seed = 17;
  return s;
}

TEST(Generate, CleanWhenNoMislabeling) {
  const auto split = generate(small_spec());
  EXPECT_EQ(split.train.labels, split.train.clean_labels);
  EXPECT_EQ(split.train.rows(), 300);
  EXPECT_EQ(split.test.rows(), 100);
  EXPECT_EQ(split.train.features.cols(), 6);
  EXPECT_TRUE(split.warnings.empty());
}

TEST(Generate, Deterministic) {
  auto spec = small_spec();
  spec.mislabel_rate = 0.3;
  const auto a = generate(spec);
  const auto b = generate(spec);
  EXPECT_EQ(a.train.features, b.train.features);
  EXPECT_EQ(a.train.labels, b.train.labels);
  EXPECT_EQ(a.test.features, b.test.features);
  EXPECT_EQ(a.test.labels, b.test.labels);

  spec.seed += 1;
  EXPECT_NE(generate(spec).train.features, a.train.features);
}

TEST(Generate, CorruptionOnlyFlipsTrainingPositives) {
  auto spec = small_spec();
  spec.mislabel_rate = 0.4;
  const auto split = generate(spec);
  const auto& t = split.train;
  int flips = 0;
  for (Eigen::Index i = 0; i < t.labels.size(); ++i) {
    const auto noisy = t.labels.data()[i];
    const auto clean = t.clean_labels.data()[i];
    ASSERT_TRUE(noisy == clean || (clean == 1 && noisy == 0));
    flips += noisy != clean;
  }
  EXPECT_GT(flips, 0);
  EXPECT_EQ(split.test.labels, split.test.clean_labels);

  // Corruption draws do not disturb features or clean labels.
  spec.mislabel_rate = 0.0;
  const auto clean_split = generate(spec);
  EXPECT_EQ(clean_split.train.features, t.features);
  EXPECT_EQ(clean_split.train.clean_labels, t.clean_labels);
}

TEST(Generate, NoiselessFeaturesAreSumsOfPrototypes) {
  auto spec = small_spec();
  spec.noise_sigma = 0;
  const auto split = generate(spec);
  // Rows with identical label sets have identical features.
  const auto& t = split.train;
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < t.rows(); ++j) {
      if (t.clean_labels.row(i) == t.clean_labels.row(j)) EXPECT_EQ(t.features.row(i), t.features.row(j));
    }
    if (t.clean_labels.row(i).cast<int>().sum() == 0) EXPECT_TRUE(t.features.row(i).isZero(0));
  }
}

TEST(Generate, ImbalanceMatchesTargetRatio) {
  SyntheticSpec spec;
  spec.feature_dim = 2;
  spec.num_train = 100000;
  spec.num_test = 0;
  spec.seed = 3;
  const auto split = generate(spec);
  const double positives = split.train.labels.cast<double>().sum();
  const double entries = static_cast<double>(split.train.labels.size());
  const double per_sample = positives / spec.num_train;
  const double ratio = positives / (entries - positives);
  EXPECT_NEAR(per_sample, 1.44, 0.05 * 1.44);
  EXPECT_NEAR(ratio, 0.036 / 0.964, 0.05 * 0.0374);
  EXPECT_NEAR(ratio, 0.0376, 0.05 * 0.0376);
}

TEST(Generate, FlipFractionConvergesToRate) {
  SyntheticSpec spec;
  spec.feature_dim = 2;
  spec.num_train = 100000;
  spec.num_test = 0;
  spec.mislabel_rate = 0.1;
  spec.seed = 4;
  const auto split = generate(spec);
  const double flips = (split.train.clean_labels.cast<int>() - split.train.labels.cast<int>()).cast<double>().sum();
  const double fraction = flips / static_cast<double>(split.train.labels.size());
  EXPECT_NEAR(fraction, 0.1 * 0.036, 0.1 * 0.1 * 0.036);
}

TEST(Generate, WarnsOnVerySparseLabels) {
  auto spec = small_spec();
  spec.num_labels = 2;
  spec.positive_rate = 0.01;
  EXPECT_FALSE(generate(spec).warnings.empty());
}

TEST(Generate, RejectsInvalidSpec) {
  auto spec = small_spec();
  spec.positive_rate = 0.5;
  EXPECT_THROW(generate(spec), std::invalid_argument);
  spec = small_spec();
  spec.mislabel_rate = 1.0;
  EXPECT_THROW(generate(spec), std::invalid_argument);
  spec = small_spec();
  spec.noise_sigma = -1;
  EXPECT_THROW(generate(spec), std::invalid_argument);
  spec = small_spec();
  spec.num_labels = 0;
  EXPECT_THROW(generate(spec), std::invalid_argument);
}

}  // namespace
}  // namespace asl
