#ifndef ASL_SYNTH_HPP
#define ASL_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "asl/types.hpp"

namespace asl {

struct SyntheticSpec {
  int num_labels = 40;
  int feature_dim = 64;
  int num_train = 20000;
  int num_test = 5000;
  double positive_rate = 0.036;
  double noise_sigma = 1.0;
  double mislabel_rate = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Features plus (possibly corrupted) training labels and the clean labels
/// they were derived from. Corruption only ever turns a 1 into a 0.
struct LabeledBatch {
  RowMatrixXf features;
  LabelMatrix labels;
  LabelMatrix clean_labels;

  Eigen::Index rows() const { return features.rows(); }
};

struct SyntheticSplit {
  LabeledBatch train;
  LabeledBatch test;
  std::vector<std::string> warnings;
};

/// Additive-prototype generator.
///
/// K prototype vectors with standard normal entries are drawn first. Each
/// sample activates every label independently with probability
/// positive_rate, and its features are the sum of the active prototypes plus
/// noise_sigma * N(0, I). Training positives are flipped to 0 with
/// probability mislabel_rate; test labels stay clean. Prototypes, labels,
/// noise and corruption use separate xoshiro256** streams derived from the
/// seed, so for instance changing mislabel_rate leaves features untouched.
SyntheticSplit generate(const SyntheticSpec& spec);

}  // namespace asl

#endif  // ASL_SYNTH_HPP
