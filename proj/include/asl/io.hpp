#ifndef ASL_IO_HPP
#define ASL_IO_HPP

#include <filesystem>

#include "asl/model.hpp"
#include "asl/synth.hpp"

namespace asl {

// Layouts are described in docs/file_formats.md. All integers and floats are little-endian.

struct DatasetFile {
  SyntheticSpec spec;  // echo of the generating spec
  LabeledBatch batch;
};

void write_dataset(const std::filesystem::path& path, const LabeledBatch& batch, const SyntheticSpec& spec);
DatasetFile read_dataset(const std::filesystem::path& path);

void write_model(const std::filesystem::path& path, const LinearModel& model);
LinearModel read_model(const std::filesystem::path& path);

}  // namespace asl

#endif  // ASL_IO_HPP
