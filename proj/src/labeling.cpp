#include "tabshapley/labeling.hpp"

#include <algorithm>
#include <cmath>

namespace tabshapley {

namespace {

void StandardizeAndShift(Eigen::Ref<Vector<double>> column) {
  const Eigen::Index n = column.size();
  if (n <= 1) {
    column.setZero();
    return;
  }
  const double mean = column.mean();
  const double variance = (column.array() - mean).square().sum() / static_cast<double>(n - 1);
  column = (column.array() - mean) / std::max(std::sqrt(variance), 1e-12);
  column.array() -= column.minCoeff();
}

}  // namespace

KMeans2Result KMeans2(std::span<const double> values, int max_iters) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "kmeans2 needs at least one value");
  KMeans2Result result;
  result.high.assign(values.size(), false);
  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  result.centroid_low = *min_it;
  result.centroid_high = *max_it;
  if (result.centroid_low == result.centroid_high) {
    result.threshold = result.centroid_low;
    return result;
  }

  auto assign = [&](std::vector<bool>& high) {
    bool changed = false;
    for (std::size_t i = 0; i < values.size(); ++i) {
      // Strictly nearer to the high centroid; ties stay low.
      const bool is_high = std::abs(values[i] - result.centroid_high) < std::abs(values[i] - result.centroid_low);
      changed = changed || is_high != high[i];
      high[i] = is_high;
    }
    return changed;
  };

  assign(result.high);
  for (int iter = 0; iter < max_iters; ++iter) {
    result.iterations = iter + 1;
    double sum_low = 0.0, sum_high = 0.0;
    std::size_t count_low = 0, count_high = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (result.high[i]) {
        sum_high += values[i];
        ++count_high;
      } else {
        sum_low += values[i];
        ++count_low;
      }
    }
    // The min point always stays low and the max point high, so neither
    // cluster empties.
    result.centroid_low = sum_low / static_cast<double>(count_low);
    result.centroid_high = sum_high / static_cast<double>(count_high);
    if (!assign(result.high)) break;
  }
  result.threshold = 0.5 * (result.centroid_low + result.centroid_high);
  return result;
}

ErrorMatrix NormalizeErrors(const ErrorMatrix& errors, const std::vector<AttributeSchema>& schema) {
  if (static_cast<Eigen::Index>(schema.size()) != errors.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "error matrix has " + std::to_string(errors.cols()) +
                                                   " columns, schema has " + std::to_string(schema.size()));
  }
  ErrorMatrix out = errors;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    if (schema[static_cast<std::size_t>(j)].kind == AttributeKind::kContinuous) {
      Vector<double> column = out.col(j);
      StandardizeAndShift(column);
      out.col(j) = column;
    } else {
      const double max = out.col(j).maxCoeff();
      if (max > 0) {
        out.col(j) /= max;
      } else {
        out.col(j).setZero();
      }
    }
  }
  return out;
}

ErrorMatrix NormalizeErrors(const ErrorMatrix& errors) {
  std::vector<AttributeSchema> schema(static_cast<std::size_t>(errors.cols()));
  return NormalizeErrors(errors, schema);
}

RecordLossVector RecordLosses(const ErrorMatrix& errors) {
  RecordLossVector out;
  out.losses = errors.rowwise().mean();
  return out;
}

RecordLossVector LabelRecords(RecordLossVector losses, int max_iters) {
  const auto& v = losses.losses;
  const auto clusters = KMeans2(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())), max_iters);
  losses.predictions = clusters.high;
  return losses;
}

LabelMatrix LabelCells(const ErrorMatrix& errors, const std::vector<bool>& predictions, int max_iters) {
  if (static_cast<Eigen::Index>(predictions.size()) != errors.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "prediction count differs from error matrix rows");
  }
  LabelMatrix labels = LabelMatrix::Constant(errors.rows(), errors.cols(), kNA);
  std::vector<double> row(static_cast<std::size_t>(errors.cols()));
  for (Eigen::Index i = 0; i < errors.rows(); ++i) {
    if (!predictions[static_cast<std::size_t>(i)]) continue;
    for (Eigen::Index j = 0; j < errors.cols(); ++j) row[static_cast<std::size_t>(j)] = errors(i, j);
    const auto clusters = KMeans2(row, max_iters);
    for (Eigen::Index j = 0; j < errors.cols(); ++j) {
      if (clusters.high[static_cast<std::size_t>(j)]) labels(i, j) = kPA;
    }
  }
  return labels;
}

ErrorMatrix BaselineErrors(const Table& table) {
  const Eigen::Index n = table.rows();
  ErrorMatrix out(n, table.cols());
  const Table standardized = StandardizeContinuous(table);
  for (Eigen::Index j = 0; j < table.cols(); ++j) {
    const auto& attr = table.schema()[static_cast<std::size_t>(j)];
    if (attr.kind == AttributeKind::kContinuous) {
      out.col(j) = standardized.values().col(j).array().square();
      continue;
    }
    std::vector<double> counts(attr.categories.size(), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) counts[static_cast<std::size_t>(table.values()(i, j))] += 1.0;
    const double denom = static_cast<double>(n) + static_cast<double>(attr.categories.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      const double count = counts[static_cast<std::size_t>(table.values()(i, j))];
      out(i, j) = -std::log((count + 1.0) / denom);
    }
  }
  return out;
}

LabelingResult LabelFromErrors(const ErrorMatrix& errors, const std::vector<AttributeSchema>& schema) {
  LabelingResult result;
  result.normalized = NormalizeErrors(errors, schema);
  result.records = LabelRecords(RecordLosses(result.normalized));
  result.labels = LabelCells(result.normalized, result.records.predictions);
  return result;
}

LabelingResult LabelFromErrors(const ErrorMatrix& errors) {
  std::vector<AttributeSchema> schema(static_cast<std::size_t>(errors.cols()));
  return LabelFromErrors(errors, schema);
}

}  // namespace tabshapley
