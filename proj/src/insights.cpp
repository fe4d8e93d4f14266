#include "tabshapley/insights.hpp"

#include <cmath>
#include <numeric>

namespace tabshapley {

namespace {

void CheckPermutation(const Permutation& perm, Eigen::Index size, const char* what) {
  if (static_cast<Eigen::Index>(perm.size()) != size) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(what) + " permutation has the wrong length");
  }
  std::vector<bool> seen(static_cast<std::size_t>(size), false);
  for (const auto p : perm) {
    if (p < 0 || p >= size || seen[static_cast<std::size_t>(p)]) {
      throw Error(ErrorCode::kInvalidArgument, std::string(what) + " permutation is not a permutation");
    }
    seen[static_cast<std::size_t>(p)] = true;
  }
}

void CheckAlpha(double alpha) {
  if (!(alpha > 0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::kInvalidAlpha, "alpha must be finite and > 0, got " + std::to_string(alpha));
  }
}

}  // namespace

Reordering Reorder(const LabelMatrix& labels, Permutation row_perm, Permutation col_perm) {
  CheckPermutation(row_perm, labels.rows(), "row");
  CheckPermutation(col_perm, labels.cols(), "column");
  Reordering r;
  r.reordered_labels = PermuteMatrix(labels, row_perm, col_perm);
  r.row_perm = std::move(row_perm);
  r.col_perm = std::move(col_perm);
  return r;
}

Reordering Reorder(const LabelMatrix& labels, const ShapleyScores& scores) {
  if (scores.record_values.size() != labels.rows() || scores.attribute_values.size() != labels.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "Shapley scores do not match the label matrix");
  }
  return Reorder(labels, RankAscending(scores.record_values), RankAscending(scores.attribute_values));
}

LabelMatrix RestoreOrder(const Reordering& reordering) {
  const auto& reordered = reordering.reordered_labels;
  LabelMatrix out(reordered.rows(), reordered.cols());
  for (Eigen::Index i = 0; i < reordered.rows(); ++i) {
    for (Eigen::Index j = 0; j < reordered.cols(); ++j) {
      out(reordering.row_perm[static_cast<std::size_t>(i)], reordering.col_perm[static_cast<std::size_t>(j)]) =
          reordered(i, j);
    }
  }
  return out;
}

ScoreMatrix BuildScoreMatrix(const LabelMatrix& reordered_labels, double alpha) {
  CheckAlpha(alpha);
  const Eigen::Index n = reordered_labels.rows();
  const Eigen::Index m = reordered_labels.cols();
  const double area = static_cast<double>(n) * static_cast<double>(m);
  ScoreMatrix s;
  s.alpha = alpha;
  s.scores.resize(n, m);
  s.excluded = ExclusionMask::Constant(n, m, false);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double decay = static_cast<double>(i) * static_cast<double>(j) / area;
      s.scores(i, j) = reordered_labels(i, j) == kPA ? 1.0 - decay : alpha * (decay - 1.0);
    }
  }
  return s;
}

ScoreMatrix BuildScoreMatrix(const Reordering& reordering, double alpha) {
  return BuildScoreMatrix(reordering.reordered_labels, alpha);
}

std::optional<RectMatch<double>> KadaneMaxRect(const ScoreMatrix& s) { return KadaneMaxRect(s.scores, s.excluded); }

std::optional<RectMatch<double>> BruteForceMaxRect(const ScoreMatrix& s) {
  return BruteForceMaxRect(s.scores, s.excluded);
}

AxisNames DefaultAxisNames(Eigen::Index n, Eigen::Index m) {
  AxisNames names;
  for (Eigen::Index i = 0; i < n; ++i) names.record_ids.push_back(std::to_string(i));
  for (Eigen::Index j = 0; j < m; ++j) names.attribute_names.push_back("a" + std::to_string(j));
  return names;
}

std::vector<Insight> ExtractTopK(const Reordering& reordering, int k, double alpha, const AxisNames& names) {
  if (k < 1) throw Error(ErrorCode::kInvalidK, "k must be >= 1, got " + std::to_string(k));
  const auto& labels = reordering.reordered_labels;
  if (static_cast<Eigen::Index>(names.record_ids.size()) != labels.rows() ||
      static_cast<Eigen::Index>(names.attribute_names.size()) != labels.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "axis names do not match the label matrix");
  }
  ScoreMatrix s = BuildScoreMatrix(reordering, alpha);
  std::vector<Insight> insights;
  for (int rank = 1; rank <= k; ++rank) {
    const auto best = KadaneMaxRect(s);
    if (!best || best->sum <= 0.0) break;
    const Rect& rect = best->rect;
    Insight insight;
    insight.rank = rank;
    insight.rect = rect;
    insight.score_sum = best->sum;
    for (Eigen::Index i = rect.top; i <= rect.bottom; ++i) {
      insight.record_ids.push_back(names.record_ids[static_cast<std::size_t>(reordering.row_perm[static_cast<std::size_t>(i)])]);
    }
    for (Eigen::Index j = rect.left; j <= rect.right; ++j) {
      insight.attribute_names.push_back(
          names.attribute_names[static_cast<std::size_t>(reordering.col_perm[static_cast<std::size_t>(j)])]);
    }
    const auto block = labels.block(rect.top, rect.left, rect.rows(), rect.cols());
    insight.pa_count = (block.array() == kPA).count();
    insight.na_count = rect.area() - insight.pa_count;
    s.excluded.block(rect.top, rect.left, rect.rows(), rect.cols()).setConstant(true);
    insights.push_back(std::move(insight));
  }
  return insights;
}

std::vector<Insight> ExtractTopK(const Reordering& reordering, int k, double alpha) {
  return ExtractTopK(reordering, k, alpha,
                     DefaultAxisNames(reordering.reordered_labels.rows(), reordering.reordered_labels.cols()));
}

double WeightedNaPenalty(const LabelMatrix& reordered_labels, const Rect& rect) {
  const double area = static_cast<double>(reordered_labels.rows()) * static_cast<double>(reordered_labels.cols());
  double penalty = 0.0;
  for (Eigen::Index i = rect.top; i <= rect.bottom; ++i) {
    for (Eigen::Index j = rect.left; j <= rect.right; ++j) {
      if (reordered_labels(i, j) == kNA) penalty += 1.0 - static_cast<double>(i) * static_cast<double>(j) / area;
    }
  }
  return penalty;
}

}  // namespace tabshapley
