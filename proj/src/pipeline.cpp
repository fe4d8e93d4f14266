#include "tabshapley/pipeline.hpp"

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>

namespace tabshapley {

namespace {

int LogLevel() {
  static const int level = [] {
    const char* env = std::getenv("TABSHAPLEY_LOG");
    if (!env) return 0;
    const std::string value(env);
    if (value == "debug" || value == "2") return 2;
    if (value == "info" || value == "1") return 1;
    return 0;
  }();
  return level;
}

void Log(int level, const std::string& message) {
  if (LogLevel() >= level) std::cerr << "[tabshapley] " << message << '\n';
}

std::string Dims(Eigen::Index n, Eigen::Index m) { return std::to_string(n) + "x" + std::to_string(m); }

const char* SourceName(LabelSource source) {
  switch (source) {
    case LabelSource::kLabels: return "labels";
    case LabelSource::kErrors: return "errors";
    case LabelSource::kEstimator: return "estimator";
  }
  return "unknown";
}

Json OptionalReal(const std::optional<double>& value) { return value ? Json(*value) : Json(nullptr); }

Json CaptureJson(const CaptureReport& capture) {
  Json out;
  out["block_sizes"] = capture.block_sizes;
  out["counts"] = capture.counts;
  out["total_anomalies"] = capture.total_anomalies;
  return out;
}

std::vector<Eigen::Index> RanksFromOrder(const Permutation& order) {
  std::vector<Eigen::Index> ranks(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) ranks[static_cast<std::size_t>(order[pos])] = static_cast<Eigen::Index>(pos) + 1;
  return ranks;
}

Json ScoresJson(const ShapleyScores& scores, const EvidenceSets& evidence, const AxisNames& names) {
  Json out;
  out["weighted"] = scores.weighted;
  const auto attribute_ranks = RanksFromOrder(RankAscending(scores.attribute_values));
  Json attributes = Json::array();
  for (Eigen::Index j = 0; j < scores.attribute_values.size(); ++j) {
    Json entry;
    entry["name"] = names.attribute_names[static_cast<std::size_t>(j)];
    entry["shapley"] = scores.attribute_values(j);
    entry["rank"] = attribute_ranks[static_cast<std::size_t>(j)];
    entry["evidence_size"] = evidence.attribute_na_count[static_cast<std::size_t>(j)];
    attributes.push_back(std::move(entry));
  }
  out["attributes"] = std::move(attributes);
  const auto record_ranks = RanksFromOrder(RankAscending(scores.record_values));
  Json records = Json::array();
  for (Eigen::Index i = 0; i < scores.record_values.size(); ++i) {
    Json entry;
    entry["id"] = names.record_ids[static_cast<std::size_t>(i)];
    entry["shapley"] = scores.record_values(i);
    entry["rank"] = record_ranks[static_cast<std::size_t>(i)];
    entry["evidence_size"] = evidence.record_na_count[static_cast<std::size_t>(i)];
    records.push_back(std::move(entry));
  }
  out["records"] = std::move(records);
  return out;
}

Json ConfigJson(const PipelineConfig& cfg) {
  Json out;
  auto path_or_null = [](const std::optional<std::filesystem::path>& p) {
    return p ? Json(p->filename().string()) : Json(nullptr);
  };
  out["input"] = path_or_null(cfg.input_table);
  out["errors"] = path_or_null(cfg.external_errors);
  out["labels"] = path_or_null(cfg.external_labels);
  out["ground_truth"] = path_or_null(cfg.ground_truth);
  out["alpha"] = cfg.alpha;
  out["k"] = cfg.k;
  out["block_sizes"] = cfg.block_sizes;
  out["weighted"] = cfg.weighted;
  out["seed"] = cfg.seed;
  return out;
}

Json OrderingJson(const Analysis& analysis, const AxisNames& names) {
  Json out;
  Json rows = Json::array();
  for (auto i : analysis.reordering.row_perm) rows.push_back(names.record_ids[static_cast<std::size_t>(i)]);
  Json cols = Json::array();
  for (auto j : analysis.reordering.col_perm) cols.push_back(names.attribute_names[static_cast<std::size_t>(j)]);
  out["rows"] = std::move(rows);
  out["columns"] = std::move(cols);
  Json grid = Json::array();
  const auto& labels = analysis.reordering.reordered_labels;
  for (Eigen::Index i = 0; i < labels.rows(); ++i) {
    std::string line(static_cast<std::size_t>(labels.cols()), '0');
    for (Eigen::Index j = 0; j < labels.cols(); ++j) {
      if (labels(i, j) == kPA) line[static_cast<std::size_t>(j)] = '1';
    }
    grid.push_back(std::move(line));
  }
  out["reordered_labels"] = std::move(grid);
  return out;
}

Json InsightsJson(const std::vector<Insight>& insights) {
  Json out = Json::array();
  for (const auto& insight : insights) {
    Json entry;
    entry["rank"] = insight.rank;
    entry["rows"] = {insight.rect.top, insight.rect.bottom};
    entry["cols"] = {insight.rect.left, insight.rect.right};
    entry["score_sum"] = insight.score_sum;
    entry["pa_count"] = insight.pa_count;
    entry["na_count"] = insight.na_count;
    entry["record_ids"] = insight.record_ids;
    entry["attribute_names"] = insight.attribute_names;
    out.push_back(std::move(entry));
  }
  return out;
}

Json CorrelationsJson(const Analysis& analysis) {
  Json out;
  if (analysis.evidence.attributes() < 2) {
    out["r1"] = nullptr;
    out["r2a"] = nullptr;
    out["r2b"] = nullptr;
    return out;
  }
  const auto c = ComputeCriteriaCorrelations(analysis.scores, analysis.evidence);
  out["r1"] = OptionalReal(c.r1);
  out["r2a"] = OptionalReal(c.r2a);
  out["r2b"] = OptionalReal(c.r2b);
  return out;
}

Json Header(const PipelineInputs& inputs) {
  Json out;
  out["schema_version"] = kReportSchemaVersion;
  out["tool"] = {{"name", "tabshapley"}, {"version", kToolVersion}};
  out["dataset"] = {{"records", inputs.labels.rows()},
                    {"attributes", inputs.labels.cols()},
                    {"content_hash", inputs.content_hash}};
  return out;
}

void EnsureOutputDir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create output directory " + dir.string() + ": " + ec.message());
}

void WriteReport(const PipelineConfig& cfg, const std::string& stem, const Json& report) {
  EnsureOutputDir(cfg.output_dir);
  if (cfg.format == ReportFormat::kText) {
    WriteFile(cfg.output_dir / (stem + ".txt"), FormatKeyValue(report));
  } else {
    WriteFile(cfg.output_dir / (stem + ".json"), report.dump(2) + "\n");
  }
}

void FlattenInto(const Json& node, const std::string& path, std::string& out) {
  if (node.is_object()) {
    for (const auto& [key, value] : node.items()) FlattenInto(value, path.empty() ? key : path + "." + key, out);
  } else if (node.is_array()) {
    if (node.empty()) out += path + "=\n";
    for (std::size_t k = 0; k < node.size(); ++k) FlattenInto(node[k], path + "." + std::to_string(k), out);
  } else if (node.is_string()) {
    out += path + "=" + node.get<std::string>() + "\n";
  } else {
    out += path + "=" + node.dump() + "\n";
  }
}

LabelMatrix LoadGroundTruth(const PipelineConfig& cfg, const LabelMatrix& labels) {
  if (!cfg.ground_truth) throw ConfigError("--ground-truth is required");
  return LoadLabelMatrix(*cfg.ground_truth, std::pair{labels.rows(), labels.cols()});
}

std::string Describe(const std::filesystem::path& path) { return path.string(); }

}  // namespace

std::string Fnv1aHex(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

void ValidateConfig(const PipelineConfig& cfg) {
  if (!cfg.input_table && !cfg.external_errors && !cfg.external_labels) {
    throw ConfigError("one of --input, --errors or --labels is required");
  }
  if (!(cfg.alpha > 0) || !std::isfinite(cfg.alpha)) throw ConfigError("--alpha must be finite and > 0");
  if (cfg.k < 1) throw ConfigError("--k must be >= 1");
  for (const int b : cfg.block_sizes) {
    if (b < 1) throw ConfigError("--block-sizes entries must be >= 1");
  }
  if (cfg.weighted && !cfg.external_errors && !cfg.input_table) {
    throw ConfigError("--weighted needs reconstruction errors (--errors or --input)");
  }
}

PipelineInputs LoadInputs(const PipelineConfig& cfg) {
  ValidateConfig(cfg);
  PipelineInputs inputs;
  std::string fingerprint_bytes;
  std::optional<Table> table;
  if (cfg.input_table) {
    const std::string text = ReadFile(*cfg.input_table);
    fingerprint_bytes += "table\n" + text;
    table = ParseTable(text, {}, Describe(*cfg.input_table));
    Log(1, "loaded table " + Dims(table->rows(), table->cols()));
  }
  std::optional<std::pair<Eigen::Index, Eigen::Index>> dims;
  if (table) dims = std::pair{table->rows(), table->cols()};

  std::optional<ErrorMatrix> raw_errors;
  if (cfg.external_errors) {
    const std::string text = ReadFile(*cfg.external_errors);
    fingerprint_bytes += "errors\n" + text;
    if (!dims) {
      const ParsedText parsed = ParseDelimited(text, ',');
      if (parsed.rows.empty()) throw Error(ErrorCode::kEmptyTable, Describe(*cfg.external_errors) + ": no rows");
      dims = std::pair{static_cast<Eigen::Index>(parsed.rows.size()),
                       static_cast<Eigen::Index>(parsed.rows.front().size())};
    }
    raw_errors = ParseErrorMatrix(text, *dims, Describe(*cfg.external_errors));
  }

  if (cfg.external_labels) {
    const std::string text = ReadFile(*cfg.external_labels);
    fingerprint_bytes += "labels\n" + text;
    inputs.labels = ParseLabelMatrix(text, dims, Describe(*cfg.external_labels));
    inputs.source = LabelSource::kLabels;
    for (Eigen::Index i = 0; i < inputs.labels.rows(); ++i) {
      if ((inputs.labels.row(i).array() == kPA).any()) ++inputs.anomalous_records;
    }
  }

  const bool need_errors = !cfg.external_labels || cfg.weighted;
  if (need_errors) {
    ErrorMatrix errors = raw_errors ? *raw_errors : BaselineErrors(*table);
    const auto labeling = table ? LabelFromErrors(errors, table->schema()) : LabelFromErrors(errors);
    inputs.errors = labeling.normalized;
    if (!cfg.external_labels) {
      inputs.labels = labeling.labels;
      inputs.source = raw_errors ? LabelSource::kErrors : LabelSource::kEstimator;
      inputs.anomalous_records = static_cast<Eigen::Index>(
          std::count(labeling.records.predictions.begin(), labeling.records.predictions.end(), true));
    }
  }

  const Eigen::Index n = inputs.labels.rows();
  const Eigen::Index m = inputs.labels.cols();
  if (table) {
    inputs.names.record_ids = table->record_ids();
    inputs.names.attribute_names = table->attribute_names();
  } else {
    inputs.names = DefaultAxisNames(n, m);
  }
  inputs.content_hash = Fnv1aHex(fingerprint_bytes);
  Log(1, std::string("labels from ") + SourceName(inputs.source) + ", " + Dims(n, m) + ", " +
             std::to_string((inputs.labels.array() == kPA).count()) + " PA cells");
  return inputs;
}

Analysis Analyze(const LabelMatrix& labels, const AxisNames& names, double alpha, int k, const ErrorMatrix* weights) {
  Analysis analysis;
  analysis.evidence = BuildEvidenceSets(labels);
  analysis.scores = weights ? ComputeShapleyScores(analysis.evidence, *weights) : ComputeShapleyScores(analysis.evidence);
  analysis.reordering = Reorder(labels, analysis.scores);
  analysis.insights = ExtractTopK(analysis.reordering, k, alpha, names);
  Log(2, "extracted " + std::to_string(analysis.insights.size()) + " insights");
  return analysis;
}

std::vector<int> UsableBlockSizes(std::span<const int> block_sizes, Eigen::Index n, Eigen::Index m) {
  std::vector<int> out;
  const Eigen::Index limit = std::min(n, m);
  for (const int b : block_sizes) {
    if (b >= 1 && b <= limit) {
      out.push_back(b);
    } else {
      Log(1, "skipping block size " + std::to_string(b) + " for a " + Dims(n, m) + " matrix");
    }
  }
  return out;
}

EvaluationResult EvaluateAgainstTruth(const LabelMatrix& labels, const Reordering& reordering,
                                      const LabelMatrix& ground_truth, std::span<const int> block_sizes) {
  if (ground_truth.rows() != labels.rows() || ground_truth.cols() != labels.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "ground truth is " + Dims(ground_truth.rows(), ground_truth.cols()) +
                                                   ", labels are " + Dims(labels.rows(), labels.cols()));
  }
  EvaluationResult result;
  result.tab_shapley = TopLeftCapture(PermuteMatrix(ground_truth, reordering.row_perm, reordering.col_perm), block_sizes);
  result.baseline_row_perm = FrequencyRowOrder(labels);
  result.frequency_baseline =
      TopLeftCapture(PermuteMatrix(ground_truth, result.baseline_row_perm, reordering.col_perm), block_sizes);
  return result;
}

Json BuildReport(const PipelineConfig& cfg, const PipelineInputs& inputs, const Analysis& analysis,
                 const std::optional<EvaluationResult>& evaluation) {
  Json report = Header(inputs);
  report["config"] = ConfigJson(cfg);
  report["labeling"] = {{"source", SourceName(inputs.source)},
                        {"pa_cells", (inputs.labels.array() == kPA).count()},
                        {"anomalous_records", inputs.anomalous_records}};
  report["scores"] = ScoresJson(analysis.scores, analysis.evidence, inputs.names);
  report["ordering"] = OrderingJson(analysis, inputs.names);
  report["insights"] = InsightsJson(analysis.insights);
  const auto sizes = UsableBlockSizes(cfg.block_sizes, inputs.labels.rows(), inputs.labels.cols());
  report["capture"] = CaptureJson(TopLeftCapture(analysis.reordering.reordered_labels, sizes));
  report["criteria_correlations"] = CorrelationsJson(analysis);
  if (evaluation) {
    report["evaluation"] = {{"tab_shapley", CaptureJson(evaluation->tab_shapley)},
                            {"frequency_baseline", CaptureJson(evaluation->frequency_baseline)}};
  }
  return report;
}

std::string FormatKeyValue(const Json& report) {
  std::string out;
  FlattenInto(report, "", out);
  return out;
}

Json RunPipeline(const PipelineConfig& cfg) {
  const PipelineInputs inputs = LoadInputs(cfg);
  const ErrorMatrix* weights = cfg.weighted ? &*inputs.errors : nullptr;
  const Analysis analysis = Analyze(inputs.labels, inputs.names, cfg.alpha, cfg.k, weights);
  std::optional<EvaluationResult> evaluation;
  if (cfg.ground_truth) {
    const auto truth = LoadGroundTruth(cfg, inputs.labels);
    const auto sizes = UsableBlockSizes(cfg.block_sizes, truth.rows(), truth.cols());
    evaluation = EvaluateAgainstTruth(inputs.labels, analysis.reordering, truth, sizes);
  }
  Json report = BuildReport(cfg, inputs, analysis, evaluation);
  WriteReport(cfg, "report", report);
  return report;
}

void RunLabel(const PipelineConfig& cfg) {
  if (cfg.external_labels) throw ConfigError("label derives labels; pass --input and/or --errors, not --labels");
  const PipelineInputs inputs = LoadInputs(cfg);
  EnsureOutputDir(cfg.output_dir);
  WriteFile(cfg.output_dir / "labels.csv", FormatMatrix(inputs.labels));
  WriteFile(cfg.output_dir / "errors_normalized.csv", FormatMatrix(*inputs.errors));
}

Json RunScore(const PipelineConfig& cfg) {
  const PipelineInputs inputs = LoadInputs(cfg);
  const EvidenceSets evidence = BuildEvidenceSets(inputs.labels);
  const ShapleyScores scores =
      cfg.weighted ? ComputeShapleyScores(evidence, *inputs.errors) : ComputeShapleyScores(evidence);
  Json report = Header(inputs);
  report["config"] = ConfigJson(cfg);
  report["scores"] = ScoresJson(scores, evidence, inputs.names);
  WriteReport(cfg, "scores", report);
  return report;
}

Json RunInsights(const PipelineConfig& cfg) {
  const PipelineInputs inputs = LoadInputs(cfg);
  const ErrorMatrix* weights = cfg.weighted ? &*inputs.errors : nullptr;
  const Analysis analysis = Analyze(inputs.labels, inputs.names, cfg.alpha, cfg.k, weights);
  Json report = Header(inputs);
  report["config"] = ConfigJson(cfg);
  report["ordering"] = OrderingJson(analysis, inputs.names);
  report["insights"] = InsightsJson(analysis.insights);
  WriteReport(cfg, "insights", report);
  return report;
}

Json RunEval(const PipelineConfig& cfg) {
  if (!cfg.ground_truth) throw ConfigError("eval needs --ground-truth");
  const PipelineInputs inputs = LoadInputs(cfg);
  const ErrorMatrix* weights = cfg.weighted ? &*inputs.errors : nullptr;
  const Analysis analysis = Analyze(inputs.labels, inputs.names, cfg.alpha, cfg.k, weights);
  const auto truth = LoadGroundTruth(cfg, inputs.labels);
  const auto sizes = UsableBlockSizes(cfg.block_sizes, truth.rows(), truth.cols());
  const auto evaluation = EvaluateAgainstTruth(inputs.labels, analysis.reordering, truth, sizes);
  Json report = Header(inputs);
  report["config"] = ConfigJson(cfg);
  report["evaluation"] = {{"tab_shapley", CaptureJson(evaluation.tab_shapley)},
                          {"frequency_baseline", CaptureJson(evaluation.frequency_baseline)}};
  report["criteria_correlations"] = CorrelationsJson(analysis);
  WriteReport(cfg, "eval", report);
  return report;
}

std::string RenderSvg(const Json& report, const RenderStyle& style) {
  const auto fail = [](const std::string& why) { throw Error(ErrorCode::kMalformedReport, why); };
  if (!report.is_object() || !report.contains("ordering") || !report["ordering"].contains("reordered_labels")) {
    fail("report has no ordering.reordered_labels");
  }
  const auto& grid = report["ordering"]["reordered_labels"];
  if (!grid.is_array() || grid.empty()) fail("reordered_labels must be a non-empty array");
  std::vector<std::string> rows;
  for (const auto& line : grid) {
    if (!line.is_string()) fail("reordered_labels rows must be strings");
    rows.push_back(line.get<std::string>());
    if (rows.back().size() != rows.front().size() || rows.back().empty()) fail("reordered_labels rows differ in length");
    if (rows.back().find_first_not_of("01") != std::string::npos) fail("reordered_labels rows must be 0/1");
  }
  if (style.cell_size < 1) throw ConfigError("--cell-size must be >= 1");
  const long long n = static_cast<long long>(rows.size());
  const long long m = static_cast<long long>(rows.front().size());
  const long long cs = style.cell_size;

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << m * cs << "\" height=\"" << n * cs
     << "\" viewBox=\"0 0 " << m * cs << ' ' << n * cs << "\">\n";
  os << "<g class=\"grid\" stroke=\"#ffffff\" stroke-width=\"1\">\n";
  for (long long i = 0; i < n; ++i) {
    for (long long j = 0; j < m; ++j) {
      const bool pa = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] == '1';
      os << "<rect class=\"cell " << (pa ? "pa" : "na") << "\" x=\"" << j * cs << "\" y=\"" << i * cs
         << "\" width=\"" << cs << "\" height=\"" << cs << "\" fill=\"" << (pa ? style.pa_color : style.na_color)
         << "\"/>\n";
    }
  }
  os << "</g>\n";
  os << "<g class=\"insights\" fill=\"" << style.insight_color << "\" fill-opacity=\"0.3\" stroke=\""
     << style.insight_color << "\" stroke-width=\"2\">\n";
  if (report.contains("insights")) {
    const auto& insights = report["insights"];
    if (!insights.is_array()) fail("insights must be an array");
    for (const auto& insight : insights) {
      try {
        const long long top = insight.at("rows").at(0).get<long long>();
        const long long bottom = insight.at("rows").at(1).get<long long>();
        const long long left = insight.at("cols").at(0).get<long long>();
        const long long right = insight.at("cols").at(1).get<long long>();
        if (top < 0 || left < 0 || bottom < top || right < left || bottom >= n || right >= m) {
          fail("insight rectangle out of bounds");
        }
        os << "<rect class=\"insight\" data-rank=\"" << insight.at("rank").get<long long>() << "\" x=\""
           << left * cs << "\" y=\"" << top * cs << "\" width=\"" << (right - left + 1) * cs << "\" height=\""
           << (bottom - top + 1) * cs << "\"/>\n";
      } catch (const nlohmann::json::exception& e) {
        fail(std::string("malformed insight: ") + e.what());
      }
    }
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

void RunRender(const std::filesystem::path& report_path, const std::filesystem::path& output, const RenderStyle& style) {
  const std::string text = ReadFile(report_path);
  Json report;
  try {
    report = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedReport, report_path.string() + ": " + e.what());
  }
  const std::string svg = RenderSvg(report, style);
  if (output.has_parent_path()) EnsureOutputDir(output.parent_path());
  WriteFile(output, svg);
}

}  // namespace tabshapley
