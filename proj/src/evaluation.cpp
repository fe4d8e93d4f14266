#include "tabshapley/evaluation.hpp"

#include <algorithm>
#include <numbers>
#include <numeric>
#include <random>

namespace tabshapley {

CaptureReport TopLeftCapture(const LabelMatrix& matrix, std::span<const int> block_sizes) {
  CaptureReport report;
  report.total_anomalies = (matrix.array() == kPA).count();
  const Eigen::Index limit = std::min(matrix.rows(), matrix.cols());
  for (const int k : block_sizes) {
    if (k < 1 || k > limit) {
      throw Error(ErrorCode::kBlockTooLarge,
                  "block size " + std::to_string(k) + " not in [1, " + std::to_string(limit) + "]");
    }
    report.block_sizes.push_back(k);
    report.counts.push_back((matrix.topLeftCorner(k, k).array() == kPA).count());
  }
  return report;
}

Permutation FrequencyRowOrder(const LabelMatrix& labels) {
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(labels.rows()));
  for (Eigen::Index i = 0; i < labels.rows(); ++i) counts[static_cast<std::size_t>(i)] = (labels.row(i).array() == kPA).count();
  Permutation order(counts.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return counts[static_cast<std::size_t>(a)] > counts[static_cast<std::size_t>(b)];
  });
  return order;
}

std::optional<double> Pearson(std::span<const double> x, std::span<const double> y) {
  const Eigen::Map<const Vector<double>> xs(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::Map<const Vector<double>> ys(y.data(), static_cast<Eigen::Index>(y.size()));
  return Pearson(xs, ys);
}

CriteriaCorrelations ComputeCriteriaCorrelations(const ShapleyScores& scores, const EvidenceSets& evidence) {
  const Eigen::Index m = evidence.attributes();
  if (m < 2) throw Error(ErrorCode::kInvalidArgument, "criteria correlations need at least two attributes");
  if (scores.attribute_values.size() != m) throw Error(ErrorCode::kLengthMismatch, "scores do not match evidence sets");
  Vector<double> sizes(m), exclusive(m), unique_sizes(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& set = evidence.attribute_sets[static_cast<std::size_t>(j)];
    sizes(j) = static_cast<double>(set.size());
    exclusive(j) = static_cast<double>(std::count_if(set.begin(), set.end(), [&](Eigen::Index i) {
      return evidence.record_na_count[static_cast<std::size_t>(i)] == 1;
    }));
    std::vector<Eigen::Index> dedup(set);
    std::sort(dedup.begin(), dedup.end());
    unique_sizes(j) = static_cast<double>(std::unique(dedup.begin(), dedup.end()) - dedup.begin());
  }
  return {Pearson(scores.attribute_values, sizes), Pearson(scores.attribute_values, exclusive),
          Pearson(scores.attribute_values, unique_sizes)};
}

std::vector<AlphaSweepPoint> AlphaSweep(const Reordering& reordering, std::span<const double> alphas) {
  std::vector<AlphaSweepPoint> out;
  for (const double alpha : alphas) {
    AlphaSweepPoint point;
    point.alpha = alpha;
    const auto insights = ExtractTopK(reordering, 1, alpha);
    if (!insights.empty()) {
      const auto& top = insights.front();
      point.has_insight = true;
      point.na_cells = top.na_count;
      point.na_fraction = static_cast<double>(top.na_count) / static_cast<double>(top.rect.area());
      point.weighted_na_penalty = WeightedNaPenalty(reordering.reordered_labels, top.rect);
    }
    out.push_back(point);
  }
  return out;
}

namespace {

// The standard distributions are implementation-defined, so draws are built
// from raw mt19937_64 output to stay reproducible across toolchains.
class SyntheticRng {
 public:
  explicit SyntheticRng(std::uint64_t seed) : engine_(seed) {}

  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  Eigen::Index Below(Eigen::Index bound) {
    return static_cast<Eigen::Index>(Uniform() * static_cast<double>(bound));
  }

  double Normal() {
    if (spare_) {
      const double v = *spare_;
      spare_.reset();
      return v;
    }
    double u1 = Uniform();
    while (u1 <= 0.0) u1 = Uniform();
    const double u2 = Uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    return radius * std::cos(angle);
  }

  std::vector<Eigen::Index> Subset(Eigen::Index size, Eigen::Index count) {
    std::vector<Eigen::Index> pool(static_cast<std::size_t>(size));
    std::iota(pool.begin(), pool.end(), Eigen::Index{0});
    for (Eigen::Index k = 0; k < count; ++k) {
      const Eigen::Index pick = k + Below(size - k);
      std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(pick)]);
    }
    pool.resize(static_cast<std::size_t>(count));
    std::sort(pool.begin(), pool.end());
    return pool;
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace

SyntheticData GenerateSynthetic(const SyntheticSpec& spec) {
  if (spec.n < 1 || spec.m < 1) throw Error(ErrorCode::kInvalidArgument, "synthetic table needs n, m >= 1");
  if (spec.block_rows < 0 || spec.block_cols < 0 || spec.block_rows > spec.n || spec.block_cols > spec.m) {
    throw Error(ErrorCode::kInvalidArgument, "planted block does not fit the table");
  }
  if (!(spec.noise_rate >= 0.0 && spec.noise_rate < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "noise_rate must lie in [0, 1)");
  }
  SyntheticRng rng(spec.seed);
  auto rows = rng.Subset(spec.n, spec.block_rows);
  auto cols = rng.Subset(spec.m, spec.block_cols);
  std::vector<bool> in_rows(static_cast<std::size_t>(spec.n), false), in_cols(static_cast<std::size_t>(spec.m), false);
  for (auto i : rows) in_rows[static_cast<std::size_t>(i)] = true;
  for (auto j : cols) in_cols[static_cast<std::size_t>(j)] = true;

  Matrix<double> values(spec.n, spec.m);
  LabelMatrix truth(spec.n, spec.m);
  for (Eigen::Index i = 0; i < spec.n; ++i) {
    for (Eigen::Index j = 0; j < spec.m; ++j) {
      const bool planted = in_rows[static_cast<std::size_t>(i)] && in_cols[static_cast<std::size_t>(j)];
      values(i, j) = rng.Normal() + (planted ? kSyntheticShift : 0.0);
      truth(i, j) = planted ? kPA : kNA;
    }
  }
  if (spec.noise_rate > 0.0) {
    for (Eigen::Index i = 0; i < spec.n; ++i) {
      for (Eigen::Index j = 0; j < spec.m; ++j) {
        if (rng.Uniform() < spec.noise_rate) truth(i, j) = truth(i, j) == kPA ? kNA : kPA;
      }
    }
  }
  std::vector<AttributeSchema> schema(static_cast<std::size_t>(spec.m));
  for (Eigen::Index j = 0; j < spec.m; ++j) schema[static_cast<std::size_t>(j)].name = "x" + std::to_string(j);
  return {Table(std::move(schema), std::move(values)), std::move(truth), std::move(rows), std::move(cols)};
}

LabelMatrix PlantedBlock(const SyntheticData& data) {
  LabelMatrix out = LabelMatrix::Constant(data.table.rows(), data.table.cols(), kNA);
  for (auto i : data.block_records) {
    for (auto j : data.block_attributes) out(i, j) = kPA;
  }
  return out;
}

}  // namespace tabshapley
