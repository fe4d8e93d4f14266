#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tabshapley/core.hpp"
#include "tabshapley/insights.hpp"
#include "tabshapley/shapley.hpp"
#include "tabshapley/table.hpp"

namespace tabshapley {

struct CaptureReport {
  std::vector<int> block_sizes;
  std::vector<Eigen::Index> counts;  // PA cells in the top-left k x k block, per k
  Eigen::Index total_anomalies = 0;
};

/// `matrix` must already be in the ordering under evaluation.
CaptureReport TopLeftCapture(const LabelMatrix& matrix, std::span<const int> block_sizes);

/// Rows by descending PA count, ties by index.
Permutation FrequencyRowOrder(const LabelMatrix& labels);

/// Sample Pearson correlation. Empty when fewer than two points or when
/// either input is constant.
template <typename DerivedX, typename DerivedY>
std::optional<double> Pearson(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "pearson inputs have lengths " + std::to_string(x.size()) + " and " + std::to_string(y.size()));
  }
  if (x.size() < 2) return std::nullopt;
  const auto xc = (x.template cast<double>().array() - x.template cast<double>().mean()).eval();
  const auto yc = (y.template cast<double>().array() - y.template cast<double>().mean()).eval();
  const double sxx = xc.square().sum();
  const double syy = yc.square().sum();
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  const double r = (xc * yc).sum() / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

std::optional<double> Pearson(std::span<const double> x, std::span<const double> y);

struct CriteriaCorrelations {
  std::optional<double> r1;   // against evidence set sizes
  std::optional<double> r2a;  // against records found in no other evidence set
  std::optional<double> r2b;  // against deduplicated evidence set sizes (equals r1)
};

CriteriaCorrelations ComputeCriteriaCorrelations(const ShapleyScores& scores, const EvidenceSets& evidence);

struct AlphaSweepPoint {
  double alpha = 0.0;
  bool has_insight = false;
  Eigen::Index na_cells = 0;
  double na_fraction = 0.0;
  double weighted_na_penalty = 0.0;
};

std::vector<AlphaSweepPoint> AlphaSweep(const Reordering& reordering, std::span<const double> alphas);

struct SyntheticSpec {
  Eigen::Index n = 10;
  Eigen::Index m = 8;
  Eigen::Index block_rows = 3;
  Eigen::Index block_cols = 2;
  double noise_rate = 0.0;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  Table table;
  LabelMatrix ground_truth;
  std::vector<Eigen::Index> block_records;  // sorted
  std::vector<Eigen::Index> block_attributes;
};

inline constexpr double kSyntheticShift = 4.0;

/// Standard-normal table with a seed-chosen record x attribute block shifted
/// by +4. The ground truth marks the block PA, then flips each label
/// independently with probability noise_rate. Pure in the spec.
SyntheticData GenerateSynthetic(const SyntheticSpec& spec);

/// True in planted-block cells, before noise.
LabelMatrix PlantedBlock(const SyntheticData& data);

}  // namespace tabshapley
