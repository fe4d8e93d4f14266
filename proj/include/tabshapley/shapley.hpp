#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <span>
#include <vector>

#include "tabshapley/core.hpp"

namespace tabshapley {

/// Evidence of normality. attribute_sets[j] lists the records whose cell in
/// attribute j is NA; record_sets[i] lists the attributes whose cell in
/// record i is NA. Both are sorted ascending.
struct EvidenceSets {
  std::vector<std::vector<Eigen::Index>> attribute_sets;
  std::vector<std::vector<Eigen::Index>> record_sets;
  std::vector<Eigen::Index> record_na_count;
  std::vector<Eigen::Index> attribute_na_count;

  Eigen::Index records() const { return static_cast<Eigen::Index>(record_sets.size()); }
  Eigen::Index attributes() const { return static_cast<Eigen::Index>(attribute_sets.size()); }
};

EvidenceSets BuildEvidenceSets(const LabelMatrix& labels);

/// |union of E_{a_j} for j in subset|. Bit j of `subset` selects attribute j.
double CharacteristicAttributes(std::uint64_t subset, const EvidenceSets& evidence);
double CharacteristicAttributes(std::span<const Eigen::Index> subset, const EvidenceSets& evidence);

/// Same union game over records.
double CharacteristicRecords(std::uint64_t subset, const EvidenceSets& evidence);

/// Closed-form Shapley values of the union game: each record in E_{a_j}
/// contributes 1 / (number of evidence sets holding it).
Vector<double> ShapleyAttributes(const EvidenceSets& evidence);

/// Transposed game: each attribute in E_{X_i} contributes 1 / |E_{a_j}|.
Vector<double> ShapleyRecords(const EvidenceSets& evidence);

/// Error-weighted variants. A record (attribute) whose NA-cell errors sum to
/// zero contributes nothing.
Vector<double> ShapleyAttributesWeighted(const EvidenceSets& evidence, const ErrorMatrix& errors);
Vector<double> ShapleyRecordsWeighted(const EvidenceSets& evidence, const ErrorMatrix& errors);

struct ShapleyScores {
  Vector<double> attribute_values;
  Vector<double> record_values;
  bool weighted = false;
};

ShapleyScores ComputeShapleyScores(const EvidenceSets& evidence);
ShapleyScores ComputeShapleyScores(const EvidenceSets& evidence, const ErrorMatrix& errors);

/// A characteristic-function game given by a value for every player subset
/// (bit i of the mask selects player i). v(empty) must be 0.
struct GameOracle {
  int player_count = 0;
  std::function<double(std::uint64_t)> characteristic;
};

inline constexpr int kMaxBruteForcePlayers = 12;

// The returned games refer to `evidence`, which must outlive them.
GameOracle AttributeGame(const EvidenceSets& evidence);
GameOracle RecordGame(const EvidenceSets& evidence);

/// Exact Shapley values by enumerating every coalition with the
/// |C|!(N-|C|-1)!/N! weights. Throws TooManyPlayers above 12 players.
Vector<double> ShapleyBruteForce(const GameOracle& game);

/// Exhaustive check of v(S u R) >= v(S) + v(R) over disjoint S, R.
bool VerifySuperadditive(const GameOracle& game);

/// First disjoint pair (S, R) with v(S u R) < v(S) + v(R), if any. Note that
/// the evidence-set union game is subadditive, so this finds a pair as soon
/// as two evidence sets overlap.
std::optional<std::pair<std::uint64_t, std::uint64_t>> FindSuperadditivityViolation(const GameOracle& game);

/// Indices sorted by ascending score, ties by index.
Permutation RankAscending(std::span<const double> scores);
Permutation RankAscending(const Vector<double>& scores);

/// Pairwise (cascade) summation.
double PairwiseSum(std::span<const double> values);

}  // namespace tabshapley
