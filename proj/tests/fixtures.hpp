#pragma once

// Shared fixtures and independent reference computations for the tests.
// Nothing here calls into the code paths it is used to check.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "tabshapley/core.hpp"

namespace tabshapley::testing {

// Worked example: 6 records R1..R6, 5 attributes C_1..C_5, NA exactly where
// the record belongs to the attribute's evidence set.
//   E_C1 = {R1,R2,R4,R5}  E_C2 = {R2,R3,R6}  E_C3 = {R1,R3,R4,R5,R6}
//   E_C4 = {R1,R2,R5,R6}  E_C5 = {R1,R3,R5}
inline LabelMatrix WorkedExampleLabels() {
  const std::vector<std::vector<int>> evidence = {
      {0, 1, 3, 4}, {1, 2, 5}, {0, 2, 3, 4, 5}, {0, 1, 4, 5}, {0, 2, 4}};
  LabelMatrix labels = LabelMatrix::Constant(6, 5, kPA);
  for (std::size_t j = 0; j < evidence.size(); ++j) {
    for (int i : evidence[j]) labels(i, static_cast<Eigen::Index>(j)) = kNA;
  }
  return labels;
}

inline LabelMatrix RandomLabels(std::mt19937_64& rng, Eigen::Index n, Eigen::Index m, double pa_rate) {
  std::bernoulli_distribution pa(pa_rate);
  LabelMatrix labels(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) labels(i, j) = pa(rng) ? kPA : kNA;
  }
  return labels;
}

// Shapley value by averaging marginal contributions over all player orders.
inline std::vector<double> PermutationShapley(int players, const std::function<double(std::uint64_t)>& v) {
  std::vector<int> order(static_cast<std::size_t>(players));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> total(static_cast<std::size_t>(players), 0.0);
  double count = 0.0;
  do {
    std::uint64_t coalition = 0;
    for (int p : order) {
      const std::uint64_t next = coalition | (std::uint64_t{1} << p);
      total[static_cast<std::size_t>(p)] += v(next) - v(coalition);
      coalition = next;
    }
    count += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  for (auto& t : total) t /= count;
  return total;
}

// Union size of the NA sets of the selected columns, straight from labels.
inline double UnionOfColumns(const LabelMatrix& labels, std::uint64_t subset) {
  double count = 0;
  for (Eigen::Index i = 0; i < labels.rows(); ++i) {
    for (Eigen::Index j = 0; j < labels.cols(); ++j) {
      if (((subset >> j) & 1u) && labels(i, j) == kNA) {
        count += 1;
        break;
      }
    }
  }
  return count;
}

inline double UnionOfRows(const LabelMatrix& labels, std::uint64_t subset) {
  double count = 0;
  for (Eigen::Index j = 0; j < labels.cols(); ++j) {
    for (Eigen::Index i = 0; i < labels.rows(); ++i) {
      if (((subset >> i) & 1u) && labels(i, j) == kNA) {
        count += 1;
        break;
      }
    }
  }
  return count;
}

// Optimal two-cluster split of 1-D data by exhaustive search over the
// sorted cut points. Returns the within-cluster sum of squares.
inline double BestTwoPartitionCost(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  auto sse = [](auto first, auto last) {
    if (first == last) return 0.0;
    const double mean = std::accumulate(first, last, 0.0) / static_cast<double>(last - first);
    double s = 0;
    for (auto it = first; it != last; ++it) s += (*it - mean) * (*it - mean);
    return s;
  };
  double best = sse(values.begin(), values.end());
  for (std::size_t cut = 1; cut < values.size(); ++cut) {
    best = std::min(best, sse(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(cut)) +
                              sse(values.begin() + static_cast<std::ptrdiff_t>(cut), values.end()));
  }
  return best;
}

inline double PartitionCost(const std::vector<double>& values, const std::vector<bool>& high) {
  double sum[2] = {0, 0}, count[2] = {0, 0};
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum[high[i]] += values[i];
    count[high[i]] += 1;
  }
  double cost = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double mean = sum[high[i]] / count[high[i]];
    cost += (values[i] - mean) * (values[i] - mean);
  }
  return cost;
}

}  // namespace tabshapley::testing

#include <filesystem>
#include <fstream>
#include <string_view>

namespace tabshapley::testing {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("tabshapley_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

  std::filesystem::path Write(const std::string& name, std::string_view contents) const {
    const auto file = path_ / name;
    std::ofstream(file, std::ios::binary) << contents;
    return file;
  }

 private:
  std::filesystem::path path_;
};

}  // namespace tabshapley::testing
