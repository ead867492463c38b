#include "asl/synth.hpp"

#include <stdexcept>

#include "asl/random.hpp"

namespace asl {

namespace {

enum Stream : std::uint64_t {
  kPrototypes = 0,
  kTrainLabels = 1,
  kTrainNoise = 2,
  kTrainCorruption = 3,
  kTestLabels = 4,
  kTestNoise = 5,
};

LabeledBatch draw_batch(const SyntheticSpec& spec, const RowMatrixXd& prototypes, int rows, Xoshiro256& label_rng,
                        Xoshiro256& noise_rng, Xoshiro256* corruption_rng) {
  const int k_count = spec.num_labels;
  const int dim = spec.feature_dim;

  LabeledBatch batch;
  batch.features.resize(rows, dim);
  batch.clean_labels.resize(rows, k_count);

  Eigen::VectorXd x(dim);
  for (int i = 0; i < rows; ++i) {
    x.setZero();
    for (int k = 0; k < k_count; ++k) {
      const bool positive = label_rng.uniform() < spec.positive_rate;
      batch.clean_labels(i, k) = positive ? 1 : 0;
      if (positive) x += prototypes.row(k).transpose();
    }
    for (int d = 0; d < dim; ++d) x(d) += spec.noise_sigma * noise_rng.normal();
    batch.features.row(i) = x.cast<float>().transpose();
  }

  batch.labels = batch.clean_labels;
  if (corruption_rng) {
    // One draw per clean positive, in row-major order.
    for (int i = 0; i < rows; ++i) {
      for (int k = 0; k < k_count; ++k) {
        if (batch.clean_labels(i, k) != 0 && corruption_rng->uniform() < spec.mislabel_rate) batch.labels(i, k) = 0;
      }
    }
  }
  return batch;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (num_labels < 1) throw std::invalid_argument("num_labels must be >= 1");
  if (feature_dim < 1) throw std::invalid_argument("feature_dim must be >= 1");
  if (num_train < 0 || num_test < 0) throw std::invalid_argument("sample counts must be >= 0");
  if (!(positive_rate > 0 && positive_rate < 0.5)) throw std::invalid_argument("positive_rate must lie in (0, 0.5)");
  if (!(noise_sigma >= 0)) throw std::invalid_argument("noise_sigma must be >= 0");
  if (!(mislabel_rate >= 0 && mislabel_rate < 1)) throw std::invalid_argument("mislabel_rate must lie in [0, 1)");
}

SyntheticSplit generate(const SyntheticSpec& spec) {
  spec.validate();

  SyntheticSplit split;
  if (spec.positive_rate * spec.num_labels < 0.1) {
    split.warnings.push_back("expected positives per sample below 0.1; batches may contain no positives");
  }

  auto proto_rng = Xoshiro256::stream(spec.seed, kPrototypes);
  RowMatrixXd prototypes(spec.num_labels, spec.feature_dim);
  for (int k = 0; k < spec.num_labels; ++k) {
    for (int d = 0; d < spec.feature_dim; ++d) prototypes(k, d) = proto_rng.normal();
  }

  auto train_labels = Xoshiro256::stream(spec.seed, kTrainLabels);
  auto train_noise = Xoshiro256::stream(spec.seed, kTrainNoise);
  auto train_corruption = Xoshiro256::stream(spec.seed, kTrainCorruption);
  split.train = draw_batch(spec, prototypes, spec.num_train, train_labels, train_noise,
                           spec.mislabel_rate > 0 ? &train_corruption : nullptr);

  auto test_labels = Xoshiro256::stream(spec.seed, kTestLabels);
  auto test_noise = Xoshiro256::stream(spec.seed, kTestNoise);
  split.test = draw_batch(spec, prototypes, spec.num_test, test_labels, test_noise, nullptr);
  return split;
}

}  // namespace asl
