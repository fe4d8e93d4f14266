#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tabshapley {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Per-cell non-negative reconstruction errors, n records x m attributes.
using ErrorMatrix = Matrix<double>;

/// Per-cell labels; kPA marks a potential anomaly, kNA a non-anomalous cell.
using LabelMatrix = Matrix<std::uint8_t>;
inline constexpr std::uint8_t kNA = 0;
inline constexpr std::uint8_t kPA = 1;

/// Boolean mask of cells that may not take part in a rectangle.
using ExclusionMask = Matrix<bool>;

using Permutation = std::vector<Eigen::Index>;

enum class ErrorCode {
  kMissingCell,
  kDuplicateAttributeName,
  kEmptyTable,
  kUnparseableValue,
  kUnparseableLabel,
  kDimensionMismatch,
  kNegativeError,
  kNonFiniteError,
  kInvalidSchema,
  kIo,
  kTooManyPlayers,
  kInvalidGame,
  kInvalidAlpha,
  kInvalidK,
  kMatrixTooLarge,
  kBlockTooLarge,
  kLengthMismatch,
  kInvalidArgument,
  kMalformedReport,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tabshapley
