#include "tabshapley/shapley.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace tabshapley {

namespace {

double UnionSize(std::uint64_t subset, const std::vector<std::vector<Eigen::Index>>& sets, Eigen::Index universe) {
  std::vector<bool> covered(static_cast<std::size_t>(universe), false);
  double count = 0.0;
  for (std::size_t j = 0; j < sets.size() && subset >> j; ++j) {
    if (!((subset >> j) & 1u)) continue;
    for (const auto member : sets[j]) {
      if (!covered[static_cast<std::size_t>(member)]) {
        covered[static_cast<std::size_t>(member)] = true;
        count += 1.0;
      }
    }
  }
  return count;
}

void CheckSubsetWidth(std::size_t players) {
  if (players > 64) throw Error(ErrorCode::kTooManyPlayers, "bitmask subsets support at most 64 players");
}

}  // namespace

double PairwiseSum(std::span<const double> values) {
  constexpr std::size_t kBlock = 8;
  if (values.size() <= kBlock) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum;
  }
  const std::size_t half = values.size() / 2;
  return PairwiseSum(values.first(half)) + PairwiseSum(values.subspan(half));
}

EvidenceSets BuildEvidenceSets(const LabelMatrix& labels) {
  const auto n = static_cast<std::size_t>(labels.rows());
  const auto m = static_cast<std::size_t>(labels.cols());
  EvidenceSets ev;
  ev.attribute_sets.resize(m);
  ev.record_sets.resize(n);
  ev.record_na_count.assign(n, 0);
  ev.attribute_na_count.assign(m, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (labels(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != kNA) continue;
      ev.attribute_sets[j].push_back(static_cast<Eigen::Index>(i));
      ev.record_sets[i].push_back(static_cast<Eigen::Index>(j));
    }
  }
  for (std::size_t i = 0; i < n; ++i) ev.record_na_count[i] = static_cast<Eigen::Index>(ev.record_sets[i].size());
  for (std::size_t j = 0; j < m; ++j) ev.attribute_na_count[j] = static_cast<Eigen::Index>(ev.attribute_sets[j].size());
  return ev;
}

double CharacteristicAttributes(std::uint64_t subset, const EvidenceSets& evidence) {
  CheckSubsetWidth(evidence.attribute_sets.size());
  return UnionSize(subset, evidence.attribute_sets, evidence.records());
}

double CharacteristicAttributes(std::span<const Eigen::Index> subset, const EvidenceSets& evidence) {
  std::vector<bool> covered(static_cast<std::size_t>(evidence.records()), false);
  double count = 0.0;
  for (const auto j : subset) {
    if (j < 0 || j >= evidence.attributes()) throw Error(ErrorCode::kInvalidArgument, "attribute index out of range");
    for (const auto i : evidence.attribute_sets[static_cast<std::size_t>(j)]) {
      if (!covered[static_cast<std::size_t>(i)]) {
        covered[static_cast<std::size_t>(i)] = true;
        count += 1.0;
      }
    }
  }
  return count;
}

double CharacteristicRecords(std::uint64_t subset, const EvidenceSets& evidence) {
  CheckSubsetWidth(evidence.record_sets.size());
  return UnionSize(subset, evidence.record_sets, evidence.attributes());
}

Vector<double> ShapleyAttributes(const EvidenceSets& evidence) {
  Vector<double> out(evidence.attributes());
  std::vector<double> terms;
  for (std::size_t j = 0; j < evidence.attribute_sets.size(); ++j) {
    terms.clear();
    for (const auto i : evidence.attribute_sets[j]) {
      terms.push_back(1.0 / static_cast<double>(evidence.record_na_count[static_cast<std::size_t>(i)]));
    }
    out(static_cast<Eigen::Index>(j)) = PairwiseSum(terms);
  }
  return out;
}

Vector<double> ShapleyRecords(const EvidenceSets& evidence) {
  Vector<double> out(evidence.records());
  std::vector<double> terms;
  for (std::size_t i = 0; i < evidence.record_sets.size(); ++i) {
    terms.clear();
    for (const auto j : evidence.record_sets[i]) {
      const auto count = evidence.attribute_na_count[static_cast<std::size_t>(j)];
      if (count > 0) terms.push_back(1.0 / static_cast<double>(count));
    }
    out(static_cast<Eigen::Index>(i)) = PairwiseSum(terms);
  }
  return out;
}

Vector<double> ShapleyAttributesWeighted(const EvidenceSets& evidence, const ErrorMatrix& errors) {
  if (errors.rows() != evidence.records() || errors.cols() != evidence.attributes()) {
    throw Error(ErrorCode::kDimensionMismatch, "error matrix does not match the label matrix");
  }
  // Per-record total error over its NA cells.
  std::vector<double> denominators(evidence.record_sets.size());
  std::vector<double> terms;
  for (std::size_t i = 0; i < evidence.record_sets.size(); ++i) {
    terms.clear();
    for (const auto j : evidence.record_sets[i]) terms.push_back(errors(static_cast<Eigen::Index>(i), j));
    denominators[i] = PairwiseSum(terms);
  }
  Vector<double> out(evidence.attributes());
  for (std::size_t j = 0; j < evidence.attribute_sets.size(); ++j) {
    terms.clear();
    for (const auto i : evidence.attribute_sets[j]) {
      const double denom = denominators[static_cast<std::size_t>(i)];
      if (denom > 0) terms.push_back(errors(i, static_cast<Eigen::Index>(j)) / denom);
    }
    out(static_cast<Eigen::Index>(j)) = PairwiseSum(terms);
  }
  return out;
}

Vector<double> ShapleyRecordsWeighted(const EvidenceSets& evidence, const ErrorMatrix& errors) {
  if (errors.rows() != evidence.records() || errors.cols() != evidence.attributes()) {
    throw Error(ErrorCode::kDimensionMismatch, "error matrix does not match the label matrix");
  }
  std::vector<double> denominators(evidence.attribute_sets.size());
  std::vector<double> terms;
  for (std::size_t j = 0; j < evidence.attribute_sets.size(); ++j) {
    terms.clear();
    for (const auto i : evidence.attribute_sets[j]) terms.push_back(errors(i, static_cast<Eigen::Index>(j)));
    denominators[j] = PairwiseSum(terms);
  }
  Vector<double> out(evidence.records());
  for (std::size_t i = 0; i < evidence.record_sets.size(); ++i) {
    terms.clear();
    for (const auto j : evidence.record_sets[i]) {
      const double denom = denominators[static_cast<std::size_t>(j)];
      if (denom > 0) terms.push_back(errors(static_cast<Eigen::Index>(i), j) / denom);
    }
    out(static_cast<Eigen::Index>(i)) = PairwiseSum(terms);
  }
  return out;
}

ShapleyScores ComputeShapleyScores(const EvidenceSets& evidence) {
  return {ShapleyAttributes(evidence), ShapleyRecords(evidence), false};
}

ShapleyScores ComputeShapleyScores(const EvidenceSets& evidence, const ErrorMatrix& errors) {
  return {ShapleyAttributesWeighted(evidence, errors), ShapleyRecordsWeighted(evidence, errors), true};
}

GameOracle AttributeGame(const EvidenceSets& evidence) {
  return {static_cast<int>(evidence.attributes()),
          [&evidence](std::uint64_t subset) { return CharacteristicAttributes(subset, evidence); }};
}

GameOracle RecordGame(const EvidenceSets& evidence) {
  return {static_cast<int>(evidence.records()),
          [&evidence](std::uint64_t subset) { return CharacteristicRecords(subset, evidence); }};
}

namespace {

std::vector<double> TabulateGame(const GameOracle& game) {
  if (game.player_count < 0) throw Error(ErrorCode::kInvalidGame, "negative player count");
  if (game.player_count > kMaxBruteForcePlayers) {
    throw Error(ErrorCode::kTooManyPlayers, std::to_string(game.player_count) + " players exceeds the cap of " +
                                                std::to_string(kMaxBruteForcePlayers));
  }
  if (!game.characteristic) throw Error(ErrorCode::kInvalidGame, "missing characteristic function");
  const std::uint64_t subsets = std::uint64_t{1} << game.player_count;
  std::vector<double> values(subsets);
  for (std::uint64_t s = 0; s < subsets; ++s) values[s] = game.characteristic(s);
  if (values[0] != 0.0) throw Error(ErrorCode::kInvalidGame, "v(empty set) must be 0");
  return values;
}

}  // namespace

Vector<double> ShapleyBruteForce(const GameOracle& game) {
  const std::vector<double> values = TabulateGame(game);
  const int players = game.player_count;
  // 12! fits comfortably in 64 bits, so the weights are exact integers over N!.
  std::vector<std::int64_t> factorial(static_cast<std::size_t>(players) + 1, 1);
  for (int k = 1; k <= players; ++k) factorial[static_cast<std::size_t>(k)] = factorial[static_cast<std::size_t>(k) - 1] * k;

  Vector<double> out = Vector<double>::Zero(players);
  for (int p = 0; p < players; ++p) {
    const std::uint64_t bit = std::uint64_t{1} << p;
    long double acc = 0.0L;
    for (std::uint64_t s = 0; s < values.size(); ++s) {
      if (s & bit) continue;
      const int size = std::popcount(s);
      const std::int64_t weight =
          factorial[static_cast<std::size_t>(size)] * factorial[static_cast<std::size_t>(players - size - 1)];
      acc += static_cast<long double>(weight) * static_cast<long double>(values[s | bit] - values[s]);
    }
    out(p) = static_cast<double>(acc / static_cast<long double>(factorial[static_cast<std::size_t>(players)]));
  }
  return out;
}

bool VerifySuperadditive(const GameOracle& game) { return !FindSuperadditivityViolation(game); }

std::optional<std::pair<std::uint64_t, std::uint64_t>> FindSuperadditivityViolation(const GameOracle& game) {
  const std::vector<double> values = TabulateGame(game);
  const std::uint64_t full = values.size() - 1;
  for (std::uint64_t s = 1; s <= full; ++s) {
    const std::uint64_t rest = full & ~s;
    // Every non-empty submask r of the complement of s.
    for (std::uint64_t r = rest; r != 0; r = (r - 1) & rest) {
      if (values[s | r] < values[s] + values[r]) return std::pair{s, r};
    }
  }
  return std::nullopt;
}

Permutation RankAscending(std::span<const double> scores) {
  Permutation order(scores.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return scores[static_cast<std::size_t>(a)] < scores[static_cast<std::size_t>(b)];
  });
  return order;
}

Permutation RankAscending(const Vector<double>& scores) {
  return RankAscending(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())));
}

}  // namespace tabshapley
