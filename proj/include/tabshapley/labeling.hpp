#pragma once

#include <span>
#include <vector>

#include "tabshapley/core.hpp"
#include "tabshapley/table.hpp"

namespace tabshapley {

// Cell labeling: error matrix -> record flags -> per-cell PA/NA labels.
//
// Both thresholding stages use the same deterministic two-cluster 1-D
// k-means, seeded at (min, max). A point equidistant from both centroids
// goes to the low cluster, and an input whose values are all equal is
// treated as carrying no anomaly signal.

struct KMeans2Result {
  std::vector<bool> high;  // true for points in the higher-centroid cluster
  double centroid_low = 0.0;
  double centroid_high = 0.0;
  double threshold = 0.0;  // midpoint of the centroids
  int iterations = 0;
};

inline constexpr int kDefaultKMeansIterations = 100;

KMeans2Result KMeans2(std::span<const double> values, int max_iters = kDefaultKMeansIterations);

struct RecordLossVector {
  Vector<double> losses;
  std::vector<bool> predictions;  // empty until LabelRecords runs
};

/// Continuous columns are standardized and shifted so their minimum is 0;
/// categorical columns are divided by their maximum.
ErrorMatrix NormalizeErrors(const ErrorMatrix& errors, const std::vector<AttributeSchema>& schema);

/// Same as above with every column treated as continuous.
ErrorMatrix NormalizeErrors(const ErrorMatrix& errors);

RecordLossVector RecordLosses(const ErrorMatrix& errors);

RecordLossVector LabelRecords(RecordLossVector losses, int max_iters = kDefaultKMeansIterations);

LabelMatrix LabelCells(const ErrorMatrix& errors, const std::vector<bool>& predictions,
                       int max_iters = kDefaultKMeansIterations);

/// Built-in stand-in for a learned reconstruction model. Continuous cells get
/// the squared standardized residual from the column mean; categorical cells
/// get -log of the add-one smoothed category frequency.
ErrorMatrix BaselineErrors(const Table& table);

/// NormalizeErrors -> RecordLosses -> LabelRecords -> LabelCells.
struct LabelingResult {
  ErrorMatrix normalized;
  RecordLossVector records;
  LabelMatrix labels;
};

LabelingResult LabelFromErrors(const ErrorMatrix& errors, const std::vector<AttributeSchema>& schema);
LabelingResult LabelFromErrors(const ErrorMatrix& errors);

}  // namespace tabshapley
