#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "tabshapley/labeling.hpp"

using namespace tabshapley;
namespace ts = tabshapley::testing;

namespace {

ErrorMatrix RandomErrors(std::mt19937_64& rng, Eigen::Index n, Eigen::Index m) {
  std::exponential_distribution<double> exp(1.0);
  ErrorMatrix e(n, m);
  for (Eigen::Index k = 0; k < e.size(); ++k) e.data()[k] = exp(rng);
  return e;
}

}  // namespace

TEST_CASE("kmeans2 examples") {
  SUBCASE("two well separated pairs") {
    const std::vector<double> v{0, 0.1, 0.9, 1.0};
    const auto r = KMeans2(v);
    CHECK(r.high == std::vector<bool>{false, false, true, true});
    CHECK(r.threshold == doctest::Approx(0.5));
    CHECK(r.centroid_low == doctest::Approx(0.05));
    CHECK(r.centroid_high == doctest::Approx(0.95));
    CHECK(ts::PartitionCost(v, r.high) == doctest::Approx(ts::BestTwoPartitionCost(v)));
  }
  SUBCASE("all equal") {
    const auto r = KMeans2(std::vector<double>{5, 5, 5});
    CHECK(r.high == std::vector<bool>{false, false, false});
    CHECK(r.threshold == 5.0);
    CHECK(r.centroid_high == r.centroid_low);
  }
  SUBCASE("two points") {
    CHECK(KMeans2(std::vector<double>{0, 10}).high == std::vector<bool>{false, true});
  }
  SUBCASE("midpoint ties go low") {
    // Centroids settle at 0 and 2 with the point at 1 exactly between them.
    const auto r = KMeans2(std::vector<double>{0, 1, 2}, 0);
    CHECK(r.high == std::vector<bool>{false, false, true});
  }
  SUBCASE("empty input is rejected") {
    CHECK_THROWS_AS(KMeans2(std::vector<double>{}), Error);
  }
}

TEST_CASE("property: kmeans2 separates by value and never beats the exhaustive optimum") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto size = std::uniform_int_distribution<std::size_t>(1, 20)(rng);
    std::vector<double> v(size);
    std::uniform_real_distribution<double> u(0, 10);
    for (auto& x : v) x = std::round(u(rng) * 4) / 4;  // coarse grid produces ties
    const auto r = KMeans2(v);
    CHECK(r.centroid_low <= r.centroid_high);
    double max_low = -INFINITY, min_high = INFINITY;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (r.high[i]) {
        min_high = std::min(min_high, v[i]);
      } else {
        max_low = std::max(max_low, v[i]);
      }
      const double d_low = std::abs(v[i] - r.centroid_low), d_high = std::abs(v[i] - r.centroid_high);
      CHECK(r.high[i] == (d_high < d_low));
    }
    CHECK(min_high > max_low);
    CHECK(ts::PartitionCost(v, r.high) >= ts::BestTwoPartitionCost(v) - 1e-9);
    // No worse than the assignment induced by the (min, max) seeds.
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    std::vector<bool> seeded(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) seeded[i] = std::abs(v[i] - *hi) < std::abs(v[i] - *lo);
    CHECK(ts::PartitionCost(v, r.high) <= ts::PartitionCost(v, seeded) + 1e-9);
    CHECK(KMeans2(v).high == r.high);
  }
}

TEST_CASE("normalize errors") {
  SUBCASE("categorical divides by the column max") {
    ErrorMatrix e(2, 1);
    e << 2, 4;
    const auto out = NormalizeErrors(e, {{"c", AttributeKind::kCategorical, {"x"}}});
    CHECK(out(0, 0) == 0.5);
    CHECK(out(1, 0) == 1.0);
  }
  SUBCASE("categorical all-zero column stays zero") {
    const auto out = NormalizeErrors(ErrorMatrix::Zero(2, 1), {{"c", AttributeKind::kCategorical, {"x"}}});
    CHECK(out.isZero());
  }
  SUBCASE("continuous is standardized then shifted to start at zero") {
    ErrorMatrix e(2, 1);
    e << 1, 3;
    const auto out = NormalizeErrors(e, {{"a"}});
    CHECK(out(0, 0) == 0.0);
    CHECK(out(1, 0) > 0.0);
    // Direct computation: mean 2, sample std sqrt(2), so (3-2)/sqrt(2) - (1-2)/sqrt(2).
    CHECK(out(1, 0) == doctest::Approx(2.0 / std::sqrt(2.0)).epsilon(1e-14));
  }
  SUBCASE("order preserved and non-negative on random input") {
    std::mt19937_64 rng(3);
    const auto e = RandomErrors(rng, 30, 4);
    const auto out = NormalizeErrors(e);
    CHECK(out.minCoeff() >= 0.0);
    CHECK(out.allFinite());
    for (Eigen::Index j = 0; j < e.cols(); ++j) {
      for (Eigen::Index a = 0; a < e.rows(); ++a) {
        for (Eigen::Index b = 0; b < e.rows(); ++b) {
          if (e(a, j) < e(b, j)) CHECK(out(a, j) < out(b, j));
        }
      }
    }
  }
  SUBCASE("schema length mismatch") {
    CHECK_THROWS_AS(NormalizeErrors(ErrorMatrix::Zero(2, 2), {{"a"}}), Error);
  }
}

TEST_CASE("record losses are row means") {
  CHECK(RecordLosses(ErrorMatrix::Zero(2, 2)).losses.isZero());
  ErrorMatrix e(2, 2);
  e << 1, 3, 2, 2;
  const auto losses = RecordLosses(e).losses;
  CHECK(losses(0) == 2.0);
  CHECK(losses(1) == 2.0);

  std::mt19937_64 rng(5);
  const auto r = RandomErrors(rng, 5, 4);
  const auto got = RecordLosses(r).losses;
  for (Eigen::Index i = 0; i < 5; ++i) {
    double sum = 0;
    for (Eigen::Index j = 0; j < 4; ++j) sum += r(i, j);
    CHECK(std::abs(got(i) - sum / 4) <= 1e-12);
  }
}

TEST_CASE("label records") {
  auto flags = [](std::vector<double> v) {
    RecordLossVector r;
    r.losses = Eigen::Map<Vector<double>>(v.data(), static_cast<Eigen::Index>(v.size()));
    return LabelRecords(r).predictions;
  };
  CHECK(flags({0.1, 0.1, 0.9}) == std::vector<bool>{false, false, true});
  CHECK(flags({0.4, 0.4, 0.4}) == std::vector<bool>{false, false, false});
  CHECK(flags({7.0}) == std::vector<bool>{false});
}

TEST_CASE("label cells") {
  ErrorMatrix e(3, 4);
  e << 0.1, 0.1, 0.9, 0.8,  //
      5.0, 0.0, 0.0, 0.0,   //
      0.3, 0.3, 0.3, 0.3;
  const auto labels = LabelCells(e, {true, false, true});
  CHECK(labels.row(0) == (Eigen::Matrix<std::uint8_t, 1, 4>() << kNA, kNA, kPA, kPA).finished());
  CHECK((labels.row(1).array() == kNA).all());
  CHECK((labels.row(2).array() == kNA).all());
  CHECK_THROWS_AS(LabelCells(e, {true}), Error);
}

TEST_CASE("property: gating, separation and record-order equivariance") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = std::uniform_int_distribution<Eigen::Index>(1, 15)(rng);
    const Eigen::Index m = std::uniform_int_distribution<Eigen::Index>(1, 7)(rng);
    const auto e = RandomErrors(rng, n, m);
    const auto result = LabelFromErrors(e);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!result.records.predictions[static_cast<std::size_t>(i)]) {
        CHECK((result.labels.row(i).array() == kNA).all());
        continue;
      }
      double min_pa = INFINITY, max_na = -INFINITY;
      for (Eigen::Index j = 0; j < m; ++j) {
        const double v = result.normalized(i, j);
        if (result.labels(i, j) == kPA) min_pa = std::min(min_pa, v);
        else max_na = std::max(max_na, v);
      }
      if (std::isfinite(min_pa) && std::isfinite(max_na)) CHECK(min_pa > max_na);
    }

    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    ErrorMatrix shuffled(n, m);
    for (Eigen::Index i = 0; i < n; ++i) shuffled.row(i) = e.row(perm[static_cast<std::size_t>(i)]);
    const auto permuted = LabelFromErrors(shuffled);
    for (Eigen::Index i = 0; i < n; ++i) {
      CHECK(permuted.records.predictions[static_cast<std::size_t>(i)] ==
            result.records.predictions[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
      CHECK(permuted.labels.row(i) == result.labels.row(perm[static_cast<std::size_t>(i)]));
    }
  }
}

TEST_CASE("baseline errors") {
  SUBCASE("cell at the column mean has zero error") {
    const Table t(std::vector<AttributeSchema>{{"a"}}, (Matrix<double>(3, 1) << 1, 2, 3).finished());
    CHECK(BaselineErrors(t)(1, 0) == 0.0);
  }
  SUBCASE("rarer category has larger error") {
    const Table t = ParseTable("c\nx\nx\nx\ny\n");
    const auto e = BaselineErrors(t);
    CHECK(e(3, 0) > e(0, 0));
  }
  SUBCASE("matches a direct recomputation of both formulas") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> normal(5, 3);
    std::uniform_int_distribution<int> cat(0, 3);
    const Eigen::Index n = 20;
    Matrix<double> v(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      v(i, 0) = normal(rng);
      v(i, 1) = i < 4 ? i : cat(rng);  // every category present
    }
    const Table t({{"num"}, {"cat", AttributeKind::kCategorical, {"p", "q", "r", "s"}}}, v);
    const auto e = BaselineErrors(t);
    double mean = 0;
    for (Eigen::Index i = 0; i < n; ++i) mean += v(i, 0);
    mean /= n;
    double ss = 0;
    for (Eigen::Index i = 0; i < n; ++i) ss += (v(i, 0) - mean) * (v(i, 0) - mean);
    const double sd = std::sqrt(ss / (n - 1));
    std::vector<int> counts(4, 0);
    for (Eigen::Index i = 0; i < n; ++i) counts[static_cast<std::size_t>(v(i, 1))]++;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double z = (v(i, 0) - mean) / sd;
      CHECK(std::abs(e(i, 0) - z * z) <= 1e-12);
      const double freq = (counts[static_cast<std::size_t>(v(i, 1))] + 1.0) / (n + 4.0);
      CHECK(std::abs(e(i, 1) + std::log(freq)) <= 1e-12);
    }
    CHECK(e.minCoeff() >= 0.0);
  }
}
