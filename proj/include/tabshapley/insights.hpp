#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "tabshapley/core.hpp"
#include "tabshapley/shapley.hpp"

namespace tabshapley {

struct Reordering {
  Permutation row_perm;  // row_perm[i] = original record shown at position i
  Permutation col_perm;
  LabelMatrix reordered_labels;
};

Reordering Reorder(const LabelMatrix& labels, const ShapleyScores& scores);
Reordering Reorder(const LabelMatrix& labels, Permutation row_perm, Permutation col_perm);

/// Maps a reordered matrix back to original coordinates.
LabelMatrix RestoreOrder(const Reordering& reordering);

template <typename Derived>
Matrix<typename Derived::Scalar> PermuteMatrix(const Eigen::MatrixBase<Derived>& m, const Permutation& row_perm,
                                               const Permutation& col_perm) {
  Matrix<typename Derived::Scalar> out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out(i, j) = m(row_perm[static_cast<std::size_t>(i)], col_perm[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

inline constexpr double kDefaultAlpha = 0.2;

/// PA cells score 1 - i*j/(n*m); NA cells score alpha*(i*j/(n*m) - 1), with
/// 0-based coordinates in the reordered matrix.
struct ScoreMatrix {
  Matrix<double> scores;
  double alpha = kDefaultAlpha;
  ExclusionMask excluded;
};

ScoreMatrix BuildScoreMatrix(const Reordering& reordering, double alpha);
ScoreMatrix BuildScoreMatrix(const LabelMatrix& reordered_labels, double alpha);

struct Rect {
  Eigen::Index top = 0;
  Eigen::Index left = 0;
  Eigen::Index bottom = 0;  // inclusive
  Eigen::Index right = 0;   // inclusive

  Eigen::Index rows() const { return bottom - top + 1; }
  Eigen::Index cols() const { return right - left + 1; }
  Eigen::Index area() const { return rows() * cols(); }
  bool contains(Eigen::Index i, Eigen::Index j) const { return i >= top && i <= bottom && j >= left && j <= right; }
  bool overlaps(const Rect& o) const {
    return top <= o.bottom && o.top <= bottom && left <= o.right && o.left <= right;
  }
  auto key() const { return std::tuple{top, left, bottom, right}; }
  bool operator==(const Rect&) const = default;
};

template <typename Scalar>
struct RectMatch {
  Rect rect;
  Scalar sum{};
};

namespace detail {

template <typename Scalar>
bool Better(const Scalar& sum, const Rect& rect, const std::optional<RectMatch<Scalar>>& best) {
  return !best || sum > best->sum || (sum == best->sum && rect.key() < best->rect.key());
}

}  // namespace detail

/// Maximum-sum rectangle that avoids every excluded cell, in O(m^2 n): for
/// each column pair the row sums feed a 1-D Kadane scan that restarts at
/// blocked rows. Equal sums resolve to the lexicographically smallest
/// (top, left, bottom, right). Empty when every cell is excluded.
template <typename Derived>
std::optional<RectMatch<typename Derived::Scalar>> KadaneMaxRect(const Eigen::MatrixBase<Derived>& scores,
                                                                 const ExclusionMask& excluded) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = scores.rows();
  const Eigen::Index m = scores.cols();
  if (excluded.rows() != n || excluded.cols() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "exclusion mask does not match the score matrix");
  }
  std::optional<RectMatch<Scalar>> best;
  std::vector<Scalar> row_sums(static_cast<std::size_t>(n));
  std::vector<char> blocked(static_cast<std::size_t>(n));
  for (Eigen::Index left = 0; left < m; ++left) {
    std::fill(row_sums.begin(), row_sums.end(), Scalar{});
    std::fill(blocked.begin(), blocked.end(), 0);
    for (Eigen::Index right = left; right < m; ++right) {
      for (Eigen::Index i = 0; i < n; ++i) {
        row_sums[static_cast<std::size_t>(i)] += scores(i, right);
        blocked[static_cast<std::size_t>(i)] |= excluded(i, right) ? 1 : 0;
      }
      bool open = false;
      Scalar running{};
      Eigen::Index start = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (blocked[static_cast<std::size_t>(i)]) {
          open = false;
          continue;
        }
        const Scalar value = row_sums[static_cast<std::size_t>(i)];
        // Extending on a zero running sum keeps the earlier start.
        if (open && running >= Scalar{}) {
          running += value;
        } else {
          running = value;
          start = i;
          open = true;
        }
        const Rect rect{start, left, i, right};
        if (detail::Better(running, rect, best)) best = RectMatch<Scalar>{rect, running};
      }
    }
  }
  return best;
}

inline constexpr Eigen::Index kMaxBruteForceCells = 400;

/// Exhaustive O(n^2 m^2) reference with the same tie-break as KadaneMaxRect.
template <typename Derived>
std::optional<RectMatch<typename Derived::Scalar>> BruteForceMaxRect(const Eigen::MatrixBase<Derived>& scores,
                                                                     const ExclusionMask& excluded) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = scores.rows();
  const Eigen::Index m = scores.cols();
  if (n * m > kMaxBruteForceCells) {
    throw Error(ErrorCode::kMatrixTooLarge, std::to_string(n) + "x" + std::to_string(m) + " exceeds " +
                                                std::to_string(kMaxBruteForceCells) + " cells");
  }
  if (excluded.rows() != n || excluded.cols() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "exclusion mask does not match the score matrix");
  }
  std::optional<RectMatch<Scalar>> best;
  for (Eigen::Index top = 0; top < n; ++top) {
    for (Eigen::Index left = 0; left < m; ++left) {
      for (Eigen::Index bottom = top; bottom < n; ++bottom) {
        for (Eigen::Index right = left; right < m; ++right) {
          if (excluded.block(top, left, bottom - top + 1, right - left + 1).any()) continue;
          Scalar sum{};
          for (Eigen::Index i = top; i <= bottom; ++i) {
            for (Eigen::Index j = left; j <= right; ++j) sum += scores(i, j);
          }
          const Rect rect{top, left, bottom, right};
          if (detail::Better(sum, rect, best)) best = RectMatch<Scalar>{rect, sum};
        }
      }
    }
  }
  return best;
}

std::optional<RectMatch<double>> KadaneMaxRect(const ScoreMatrix& s);
std::optional<RectMatch<double>> BruteForceMaxRect(const ScoreMatrix& s);

/// Original record ids and attribute names, indexed in original order.
struct AxisNames {
  std::vector<std::string> record_ids;
  std::vector<std::string> attribute_names;
};

/// "0".."n-1" for records and "a0".."a{m-1}" for attributes.
AxisNames DefaultAxisNames(Eigen::Index n, Eigen::Index m);

struct Insight {
  int rank = 0;  // 1-based
  Rect rect;     // reordered coordinates
  double score_sum = 0.0;
  std::vector<std::string> record_ids;
  std::vector<std::string> attribute_names;
  Eigen::Index pa_count = 0;
  Eigen::Index na_count = 0;
};

inline constexpr int kDefaultTopK = 3;

/// Greedy top-k disjoint rectangles. Stops early once no rectangle is left
/// or the best remaining sum is <= 0.
std::vector<Insight> ExtractTopK(const Reordering& reordering, int k, double alpha, const AxisNames& names);
std::vector<Insight> ExtractTopK(const Reordering& reordering, int k, double alpha);

/// Sum over the NA cells of `rect` of (1 - i*j/(n*m)), i.e. the NA penalty
/// before scaling by alpha.
double WeightedNaPenalty(const LabelMatrix& reordered_labels, const Rect& rect);

}  // namespace tabshapley
