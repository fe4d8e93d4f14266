#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tabshapley/core.hpp"

namespace tabshapley {

enum class AttributeKind { kContinuous, kCategorical };

struct AttributeSchema {
  std::string name;
  AttributeKind kind = AttributeKind::kContinuous;
  // First-appearance order; empty for continuous attributes.
  std::vector<std::string> categories;

  bool operator==(const AttributeSchema&) const = default;
};

/// Forces the kind of named columns; unnamed columns fall back to inference.
using SchemaSpec = std::map<std::string, AttributeKind>;

/// An n x m table. Continuous cells hold reals, categorical cells hold the
/// category index as a double. Immutable once built.
class Table {
 public:
  Table(std::vector<AttributeSchema> schema, Matrix<double> values,
        std::vector<std::string> record_ids = {});

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }

  const std::vector<AttributeSchema>& schema() const { return schema_; }
  const Matrix<double>& values() const { return values_; }
  const std::vector<std::string>& record_ids() const { return record_ids_; }

  std::vector<std::string> attribute_names() const;

  bool operator==(const Table&) const;

 private:
  std::vector<AttributeSchema> schema_;
  Matrix<double> values_;
  std::vector<std::string> record_ids_;
};

struct ParsedText {
  char delimiter = ',';
  std::vector<std::vector<std::string>> rows;
};

/// Splits delimiter-separated text into fields. Double-quoted fields may
/// contain the delimiter and doubled quotes. Blank lines are skipped.
ParsedText ParseDelimited(std::string_view text, std::optional<char> delimiter = std::nullopt);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view contents);

Table ParseTable(std::string_view text, const SchemaSpec& schema_spec = {},
                 std::string_view source = "<memory>");
Table LoadTable(const std::filesystem::path& path, const SchemaSpec& schema_spec = {});

/// Serializes with full round-trip precision. Loading the result with
/// LoadTable reproduces the table.
std::string FormatTable(const Table& table);
void WriteTable(const std::filesystem::path& path, const Table& table);

/// Continuous columns to mean 0 and sample standard deviation 1. A constant
/// column (or n = 1) becomes all zeros.
Table StandardizeContinuous(const Table& table);

ErrorMatrix ParseErrorMatrix(std::string_view text, std::pair<Eigen::Index, Eigen::Index> expected_dims,
                             std::string_view source = "<memory>");
ErrorMatrix LoadErrorMatrix(const std::filesystem::path& path,
                            std::pair<Eigen::Index, Eigen::Index> expected_dims);

/// Reads a numeric matrix without knowing its dimensions up front.
ErrorMatrix LoadErrorMatrix(const std::filesystem::path& path);

LabelMatrix ParseLabelMatrix(std::string_view text, std::optional<std::pair<Eigen::Index, Eigen::Index>> expected_dims,
                             std::string_view source = "<memory>");
LabelMatrix LoadLabelMatrix(const std::filesystem::path& path,
                            std::optional<std::pair<Eigen::Index, Eigen::Index>> expected_dims = std::nullopt);

std::string FormatMatrix(const ErrorMatrix& values);
std::string FormatMatrix(const LabelMatrix& labels);

/// Shortest decimal that parses back to the same double.
std::string FormatReal(double value);

}  // namespace tabshapley
