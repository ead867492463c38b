#include "asl/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace asl {

namespace {

constexpr std::array<char, 8> kDatasetMagic = {'A', 'S', 'L', 'D', 'A', 'T', 'A', '\0'};
constexpr std::array<char, 8> kModelMagic = {'A', 'S', 'L', 'M', 'O', 'D', 'E', 'L'};
constexpr std::uint32_t kDatasetVersion = 1;
constexpr std::uint32_t kModelVersion = 1;

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  }

  void bytes(const char* data, std::size_t n) { out_.write(data, static_cast<std::streamsize>(n)); }

  template <typename T>
  void le(T value) {
    std::array<unsigned char, sizeof(T)> raw;
    std::memcpy(raw.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
    bytes(reinterpret_cast<const char*>(raw.data()), raw.size());
  }

  void finish() {
    out_.flush();
    if (!out_) throw std::runtime_error("write failed");
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw std::runtime_error("cannot open " + path.string());
  }

  void bytes(char* data, std::size_t n) {
    in_.read(data, static_cast<std::streamsize>(n));
    if (!in_) throw std::runtime_error("unexpected end of file");
  }

  template <typename T>
  T le() {
    std::array<unsigned char, sizeof(T)> raw;
    bytes(reinterpret_cast<char*>(raw.data()), raw.size());
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
    T value;
    std::memcpy(&value, raw.data(), sizeof(T));
    return value;
  }

 private:
  std::ifstream in_;
};

void write_bits(Writer& w, const LabelMatrix& labels) {
  std::vector<unsigned char> packed((static_cast<std::size_t>(labels.size()) + 7) / 8, 0);
  std::size_t bit = 0;
  for (Eigen::Index i = 0; i < labels.rows(); ++i) {
    for (Eigen::Index k = 0; k < labels.cols(); ++k, ++bit) {
      if (labels(i, k) != 0) packed[bit / 8] |= static_cast<unsigned char>(1u << (bit % 8));
    }
  }
  w.bytes(reinterpret_cast<const char*>(packed.data()), packed.size());
}

LabelMatrix read_bits(Reader& r, Eigen::Index rows, Eigen::Index cols) {
  std::vector<unsigned char> packed((static_cast<std::size_t>(rows * cols) + 7) / 8);
  r.bytes(reinterpret_cast<char*>(packed.data()), packed.size());
  LabelMatrix labels(rows, cols);
  std::size_t bit = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k, ++bit) labels(i, k) = (packed[bit / 8] >> (bit % 8)) & 1u;
  }
  return labels;
}

template <std::size_t N>
void expect_magic(Reader& r, const std::array<char, N>& magic, const char* what) {
  std::array<char, N> got;
  r.bytes(got.data(), N);
  if (got != magic) throw std::runtime_error(std::string("not a ") + what + " file");
}

}  // namespace

void write_dataset(const std::filesystem::path& path, const LabeledBatch& batch, const SyntheticSpec& spec) {
  if (batch.labels.rows() != batch.rows() || batch.clean_labels.rows() != batch.rows() ||
      batch.labels.cols() != batch.clean_labels.cols()) {
    throw ShapeError("write_dataset: inconsistent batch shapes");
  }
  Writer w(path);
  w.bytes(kDatasetMagic.data(), kDatasetMagic.size());
  w.le<std::uint32_t>(kDatasetVersion);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(batch.labels.cols()));
  w.le<std::uint32_t>(static_cast<std::uint32_t>(batch.features.cols()));
  w.le<std::uint64_t>(static_cast<std::uint64_t>(batch.rows()));
  w.le<std::uint64_t>(spec.seed);
  w.le<std::uint64_t>(static_cast<std::uint64_t>(spec.num_train));
  w.le<std::uint64_t>(static_cast<std::uint64_t>(spec.num_test));
  w.le<double>(spec.positive_rate);
  w.le<double>(spec.noise_sigma);
  w.le<double>(spec.mislabel_rate);
  for (Eigen::Index i = 0; i < batch.features.rows(); ++i) {
    for (Eigen::Index d = 0; d < batch.features.cols(); ++d) w.le<float>(batch.features(i, d));
  }
  write_bits(w, batch.labels);
  write_bits(w, batch.clean_labels);
  w.finish();
}

DatasetFile read_dataset(const std::filesystem::path& path) {
  Reader r(path);
  expect_magic(r, kDatasetMagic, "dataset");
  if (r.le<std::uint32_t>() != kDatasetVersion) throw std::runtime_error("unsupported dataset version");

  DatasetFile file;
  const auto k_count = static_cast<Eigen::Index>(r.le<std::uint32_t>());
  const auto dim = static_cast<Eigen::Index>(r.le<std::uint32_t>());
  const auto rows = static_cast<Eigen::Index>(r.le<std::uint64_t>());
  file.spec.num_labels = static_cast<int>(k_count);
  file.spec.feature_dim = static_cast<int>(dim);
  file.spec.seed = r.le<std::uint64_t>();
  file.spec.num_train = static_cast<int>(r.le<std::uint64_t>());
  file.spec.num_test = static_cast<int>(r.le<std::uint64_t>());
  file.spec.positive_rate = r.le<double>();
  file.spec.noise_sigma = r.le<double>();
  file.spec.mislabel_rate = r.le<double>();

  file.batch.features.resize(rows, dim);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index d = 0; d < dim; ++d) file.batch.features(i, d) = r.le<float>();
  }
  file.batch.labels = read_bits(r, rows, k_count);
  file.batch.clean_labels = read_bits(r, rows, k_count);
  return file;
}

void write_model(const std::filesystem::path& path, const LinearModel& model) {
  Writer w(path);
  w.bytes(kModelMagic.data(), kModelMagic.size());
  w.le<std::uint32_t>(kModelVersion);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(model.num_labels()));
  w.le<std::uint32_t>(static_cast<std::uint32_t>(model.feature_dim()));
  for (Eigen::Index k = 0; k < model.num_labels(); ++k) {
    for (Eigen::Index d = 0; d < model.feature_dim(); ++d) w.le<double>(model.weights(k, d));
  }
  for (Eigen::Index k = 0; k < model.num_labels(); ++k) w.le<double>(model.bias(k));
  w.finish();
}

LinearModel read_model(const std::filesystem::path& path) {
  Reader r(path);
  expect_magic(r, kModelMagic, "model");
  if (r.le<std::uint32_t>() != kModelVersion) throw std::runtime_error("unsupported model version");
  const auto k_count = static_cast<Eigen::Index>(r.le<std::uint32_t>());
  const auto dim = static_cast<Eigen::Index>(r.le<std::uint32_t>());
  LinearModel model = LinearModel::zeros(k_count, dim);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    for (Eigen::Index d = 0; d < dim; ++d) model.weights(k, d) = r.le<double>();
  }
  for (Eigen::Index k = 0; k < k_count; ++k) model.bias(k) = r.le<double>();
  return model;
}

}  // namespace asl
