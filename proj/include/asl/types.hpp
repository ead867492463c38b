#ifndef ASL_TYPES_HPP
#define ASL_TYPES_HPP

#include <cstdint>
#include <stdexcept>

#include <Eigen/Core>

namespace asl {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using RowMatrixXd = RowMatrix<double>;
using RowMatrixXf = RowMatrix<float>;

// Binary labels, one row per sample, one column per label. Entries are 0 or 1.
using LabelMatrix = RowMatrix<std::uint8_t>;
using LabelVector = Vector<std::uint8_t>;

// Thrown when operands disagree in size.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace asl

#endif  // ASL_TYPES_HPP
