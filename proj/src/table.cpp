#include "tabshapley/table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace tabshapley {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingCell: return "MissingCell";
    case ErrorCode::kDuplicateAttributeName: return "DuplicateAttributeName";
    case ErrorCode::kEmptyTable: return "EmptyTable";
    case ErrorCode::kUnparseableValue: return "UnparseableValue";
    case ErrorCode::kUnparseableLabel: return "UnparseableLabel";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNegativeError: return "NegativeError";
    case ErrorCode::kNonFiniteError: return "NonFiniteError";
    case ErrorCode::kInvalidSchema: return "InvalidSchema";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kTooManyPlayers: return "TooManyPlayers";
    case ErrorCode::kInvalidGame: return "InvalidGame";
    case ErrorCode::kInvalidAlpha: return "InvalidAlpha";
    case ErrorCode::kInvalidK: return "InvalidK";
    case ErrorCode::kMatrixTooLarge: return "MatrixTooLarge";
    case ErrorCode::kBlockTooLarge: return "BlockTooLarge";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMalformedReport: return "MalformedReport";
  }
  return "Unknown";
}

namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> ParseReal(std::string_view field) {
  field = Trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  if (field.empty()) return std::nullopt;
  double value = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::string Location(std::string_view source, std::size_t row, std::size_t col) {
  std::ostringstream os;
  os << source << ": row " << row << ", column " << col;
  return os.str();
}

bool NeedsQuoting(std::string_view field) {
  return field.find_first_of(",\t\"\n\r") != std::string_view::npos ||
         (!field.empty() && (field.front() == ' ' || field.back() == ' '));
}

void AppendField(std::string& out, std::string_view field) {
  if (!NeedsQuoting(field)) {
    out += field;
    return;
  }
  out += '"';
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

template <typename Cell, typename Convert>
Matrix<Cell> ParseNumericMatrix(std::string_view text,
                                std::optional<std::pair<Eigen::Index, Eigen::Index>> expected_dims,
                                std::string_view source, Convert convert) {
  const ParsedText parsed = ParseDelimited(text, ',');
  if (parsed.rows.empty()) throw Error(ErrorCode::kEmptyTable, std::string(source) + ": no rows");
  const auto n = static_cast<Eigen::Index>(parsed.rows.size());
  const auto m = static_cast<Eigen::Index>(parsed.rows.front().size());
  for (std::size_t i = 0; i < parsed.rows.size(); ++i) {
    if (static_cast<Eigen::Index>(parsed.rows[i].size()) != m) {
      std::ostringstream os;
      os << source << ": row " << i << " has " << parsed.rows[i].size() << " fields, expected " << m;
      throw Error(ErrorCode::kDimensionMismatch, os.str());
    }
  }
  if (expected_dims && (expected_dims->first != n || expected_dims->second != m)) {
    std::ostringstream os;
    os << source << ": matrix is " << n << "x" << m << ", expected " << expected_dims->first << "x"
       << expected_dims->second;
    throw Error(ErrorCode::kDimensionMismatch, os.str());
  }
  Matrix<Cell> out(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto& field = parsed.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      out(i, j) = convert(field, Location(source, static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
    }
  }
  return out;
}

}  // namespace

Table::Table(std::vector<AttributeSchema> schema, Matrix<double> values,
             std::vector<std::string> record_ids)
    : schema_(std::move(schema)), values_(std::move(values)), record_ids_(std::move(record_ids)) {
  if (values_.rows() < 1 || values_.cols() < 1) throw Error(ErrorCode::kEmptyTable, "table needs n >= 1 and m >= 1");
  if (static_cast<Eigen::Index>(schema_.size()) != values_.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "schema length differs from column count");
  }
  std::set<std::string> seen;
  for (std::size_t j = 0; j < schema_.size(); ++j) {
    const auto& attr = schema_[j];
    if (attr.name.empty()) throw Error(ErrorCode::kInvalidSchema, "attribute " + std::to_string(j) + " has an empty name");
    if (!seen.insert(attr.name).second) throw Error(ErrorCode::kDuplicateAttributeName, attr.name);
    const bool categorical = attr.kind == AttributeKind::kCategorical;
    if (categorical && attr.categories.empty()) {
      throw Error(ErrorCode::kInvalidSchema, attr.name + ": categorical attribute without categories");
    }
    if (!categorical && !attr.categories.empty()) {
      throw Error(ErrorCode::kInvalidSchema, attr.name + ": continuous attribute with categories");
    }
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
      const double v = values_(i, static_cast<Eigen::Index>(j));
      if (!std::isfinite(v)) throw Error(ErrorCode::kUnparseableValue, Location("table", i, j) + ": non-finite");
      if (categorical && (v < 0 || v != std::floor(v) || v >= static_cast<double>(attr.categories.size()))) {
        throw Error(ErrorCode::kUnparseableValue, Location("table", i, j) + ": category index out of range");
      }
    }
  }
  if (record_ids_.empty()) {
    record_ids_.reserve(static_cast<std::size_t>(values_.rows()));
    for (Eigen::Index i = 0; i < values_.rows(); ++i) record_ids_.push_back(std::to_string(i));
  } else {
    if (static_cast<Eigen::Index>(record_ids_.size()) != values_.rows()) {
      throw Error(ErrorCode::kDimensionMismatch, "record id count differs from row count");
    }
    std::set<std::string> ids(record_ids_.begin(), record_ids_.end());
    if (ids.size() != record_ids_.size()) throw Error(ErrorCode::kInvalidSchema, "record ids are not unique");
  }
}

std::vector<std::string> Table::attribute_names() const {
  std::vector<std::string> names;
  names.reserve(schema_.size());
  for (const auto& attr : schema_) names.push_back(attr.name);
  return names;
}

bool Table::operator==(const Table& other) const {
  return schema_ == other.schema_ && record_ids_ == other.record_ids_ && values_.rows() == other.values_.rows() &&
         values_.cols() == other.values_.cols() && values_ == other.values_;
}

ParsedText ParseDelimited(std::string_view text, std::optional<char> delimiter) {
  ParsedText out;
  if (delimiter) {
    out.delimiter = *delimiter;
  } else {
    const auto header = text.substr(0, text.find('\n'));
    out.delimiter = header.find('\t') != std::string_view::npos && header.find(',') == std::string_view::npos ? '\t' : ',';
  }
  const char delim = out.delimiter;

  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool row_has_content = false;
  auto end_row = [&] {
    if (row_has_content || !row.empty()) {
      row.push_back(std::move(field));
      // A line holding only whitespace counts as blank.
      if (!(row.size() == 1 && Trim(row.front()).empty())) out.rows.push_back(std::move(row));
    }
    row.clear();
    field.clear();
    row_has_content = false;
  };
  for (std::size_t k = 0; k < text.size(); ++k) {
    const char c = text[k];
    if (in_quotes) {
      if (c == '"') {
        if (k + 1 < text.size() && text[k + 1] == '"') {
          field += '"';
          ++k;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      row_has_content = true;
    } else if (c == delim) {
      row.push_back(std::move(field));
      field.clear();
      row_has_content = true;
    } else if (c == '\n') {
      end_row();
    } else if (c != '\r') {
      field += c;
      row_has_content = true;
    }
  }
  end_row();
  return out;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

Table ParseTable(std::string_view text, const SchemaSpec& schema_spec, std::string_view source) {
  const ParsedText parsed = ParseDelimited(text);
  if (parsed.rows.empty()) throw Error(ErrorCode::kEmptyTable, std::string(source) + ": no header");
  const auto& header = parsed.rows.front();
  const std::size_t m = header.size();
  const std::size_t n = parsed.rows.size() - 1;
  if (n == 0) throw Error(ErrorCode::kEmptyTable, std::string(source) + ": no records");

  std::vector<AttributeSchema> schema(m);
  std::set<std::string> seen;
  for (std::size_t j = 0; j < m; ++j) {
    schema[j].name = std::string(Trim(header[j]));
    if (schema[j].name.empty()) {
      throw Error(ErrorCode::kInvalidSchema, std::string(source) + ": column " + std::to_string(j) + " has no name");
    }
    if (!seen.insert(schema[j].name).second) {
      throw Error(ErrorCode::kDuplicateAttributeName, std::string(source) + ": " + schema[j].name);
    }
  }
  for (const auto& [name, kind] : schema_spec) {
    if (!seen.count(name)) throw Error(ErrorCode::kInvalidSchema, std::string(source) + ": schema names unknown column " + name);
  }

  // Rows are validated for shape before any typing so the first missing cell
  // is reported regardless of column kinds.
  for (std::size_t i = 1; i <= n; ++i) {
    const auto& row = parsed.rows[i];
    if (row.size() > m) {
      throw Error(ErrorCode::kUnparseableValue, Location(source, i - 1, m) + ": extra field");
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (j >= row.size() || Trim(row[j]).empty()) throw Error(ErrorCode::kMissingCell, Location(source, i - 1, j));
    }
  }

  Matrix<double> values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<std::optional<double>> reals(n);
    bool all_real = true;
    for (std::size_t i = 0; i < n; ++i) {
      reals[i] = ParseReal(parsed.rows[i + 1][j]);
      if (reals[i] && !std::isfinite(*reals[i])) reals[i].reset();
      all_real = all_real && reals[i].has_value();
    }
    const auto forced = schema_spec.find(schema[j].name);
    AttributeKind kind = all_real ? AttributeKind::kContinuous : AttributeKind::kCategorical;
    if (forced != schema_spec.end()) kind = forced->second;
    schema[j].kind = kind;

    if (kind == AttributeKind::kContinuous) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!reals[i]) {
          throw Error(ErrorCode::kUnparseableValue,
                      Location(source, i, j) + ": '" + parsed.rows[i + 1][j] + "' is not a real number");
        }
        values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = *reals[i];
      }
    } else {
      std::unordered_map<std::string, std::size_t> index;
      for (std::size_t i = 0; i < n; ++i) {
        std::string value(Trim(parsed.rows[i + 1][j]));
        auto [it, inserted] = index.emplace(value, schema[j].categories.size());
        if (inserted) schema[j].categories.push_back(std::move(value));
        values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<double>(it->second);
      }
    }
  }
  return Table(std::move(schema), std::move(values));
}

Table LoadTable(const std::filesystem::path& path, const SchemaSpec& schema_spec) {
  return ParseTable(ReadFile(path), schema_spec, path.string());
}

std::string FormatReal(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

std::string FormatTable(const Table& table) {
  std::string out;
  const auto& schema = table.schema();
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (j) out += ',';
    AppendField(out, schema[j].name);
  }
  out += '\n';
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.cols(); ++j) {
      if (j) out += ',';
      const auto& attr = schema[static_cast<std::size_t>(j)];
      const double v = table.values()(i, j);
      if (attr.kind == AttributeKind::kCategorical) {
        AppendField(out, attr.categories[static_cast<std::size_t>(v)]);
      } else {
        out += FormatReal(v);
      }
    }
    out += '\n';
  }
  return out;
}

void WriteTable(const std::filesystem::path& path, const Table& table) { WriteFile(path, FormatTable(table)); }

Table StandardizeContinuous(const Table& table) {
  Matrix<double> values = table.values();
  const Eigen::Index n = values.rows();
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    if (table.schema()[static_cast<std::size_t>(j)].kind != AttributeKind::kContinuous) continue;
    if (n == 1) {
      values.col(j).setZero();
      continue;
    }
    const double mean = values.col(j).mean();
    const double variance = (values.col(j).array() - mean).square().sum() / static_cast<double>(n - 1);
    const double scale = std::max(std::sqrt(variance), 1e-12);
    values.col(j) = (values.col(j).array() - mean) / scale;
  }
  return Table(table.schema(), std::move(values), table.record_ids());
}

ErrorMatrix ParseErrorMatrix(std::string_view text, std::pair<Eigen::Index, Eigen::Index> expected_dims,
                             std::string_view source) {
  return ParseNumericMatrix<double>(text, expected_dims, source, [](const std::string& field, const std::string& where) {
    const auto value = ParseReal(field);
    if (!value) {
      const auto trimmed = Trim(field);
      if (trimmed.empty()) throw Error(ErrorCode::kMissingCell, where);
      throw Error(ErrorCode::kUnparseableValue, where + ": '" + field + "'");
    }
    if (!std::isfinite(*value)) throw Error(ErrorCode::kNonFiniteError, where);
    if (*value < 0) throw Error(ErrorCode::kNegativeError, where + ": " + field);
    return *value;
  });
}

ErrorMatrix LoadErrorMatrix(const std::filesystem::path& path, std::pair<Eigen::Index, Eigen::Index> expected_dims) {
  return ParseErrorMatrix(ReadFile(path), expected_dims, path.string());
}

ErrorMatrix LoadErrorMatrix(const std::filesystem::path& path) {
  const std::string text = ReadFile(path);
  const ParsedText parsed = ParseDelimited(text, ',');
  if (parsed.rows.empty()) throw Error(ErrorCode::kEmptyTable, path.string() + ": no rows");
  const auto dims = std::pair{static_cast<Eigen::Index>(parsed.rows.size()),
                              static_cast<Eigen::Index>(parsed.rows.front().size())};
  return ParseErrorMatrix(text, dims, path.string());
}

LabelMatrix ParseLabelMatrix(std::string_view text, std::optional<std::pair<Eigen::Index, Eigen::Index>> expected_dims,
                             std::string_view source) {
  return ParseNumericMatrix<std::uint8_t>(
      text, expected_dims, source, [](const std::string& field, const std::string& where) -> std::uint8_t {
        const auto trimmed = Trim(field);
        if (trimmed == "1") return kPA;
        if (trimmed == "0") return kNA;
        if (trimmed.empty()) throw Error(ErrorCode::kMissingCell, where);
        throw Error(ErrorCode::kUnparseableLabel, where + ": '" + field + "' is not 0 or 1");
      });
}

LabelMatrix LoadLabelMatrix(const std::filesystem::path& path,
                            std::optional<std::pair<Eigen::Index, Eigen::Index>> expected_dims) {
  return ParseLabelMatrix(ReadFile(path), expected_dims, path.string());
}

std::string FormatMatrix(const ErrorMatrix& values) {
  std::string out;
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (j) out += ',';
      out += FormatReal(values(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string FormatMatrix(const LabelMatrix& labels) {
  std::string out;
  for (Eigen::Index i = 0; i < labels.rows(); ++i) {
    for (Eigen::Index j = 0; j < labels.cols(); ++j) {
      if (j) out += ',';
      out += labels(i, j) == kPA ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

}  // namespace tabshapley
