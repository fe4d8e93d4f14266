#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabshapley/evaluation.hpp"
#include "tabshapley/insights.hpp"
#include "tabshapley/labeling.hpp"
#include "tabshapley/shapley.hpp"
#include "tabshapley/table.hpp"

namespace tabshapley {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

/// Bad flag values or flag combinations (exit code 3). Input problems are
/// reported through Error (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ReportFormat { kJson, kText };

struct PipelineConfig {
  std::optional<std::filesystem::path> input_table;
  std::optional<std::filesystem::path> external_errors;
  std::optional<std::filesystem::path> external_labels;
  std::optional<std::filesystem::path> ground_truth;
  double alpha = kDefaultAlpha;
  int k = kDefaultTopK;
  std::vector<int> block_sizes{2, 4, 6};
  bool weighted = false;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = ".";
  ReportFormat format = ReportFormat::kJson;
};

void ValidateConfig(const PipelineConfig& cfg);

enum class LabelSource { kLabels, kErrors, kEstimator };

struct PipelineInputs {
  LabelSource source = LabelSource::kEstimator;
  LabelMatrix labels;
  std::optional<ErrorMatrix> errors;  // normalized errors when available
  AxisNames names;
  std::string content_hash;
  Eigen::Index anomalous_records = 0;
};

/// Loads whichever of labels / errors / table drives labeling (in that
/// priority) and labels the cells.
PipelineInputs LoadInputs(const PipelineConfig& cfg);

struct Analysis {
  EvidenceSets evidence;
  ShapleyScores scores;
  Reordering reordering;
  std::vector<Insight> insights;
};

/// Evidence sets -> Shapley scores -> reordering -> top-k insights. When
/// `weights` is given the scores use the error-weighted variant.
Analysis Analyze(const LabelMatrix& labels, const AxisNames& names, double alpha, int k,
                 const ErrorMatrix* weights = nullptr);

struct EvaluationResult {
  CaptureReport tab_shapley;
  CaptureReport frequency_baseline;
  Permutation baseline_row_perm;
};

/// Capture of `ground_truth` under the Tab-Shapley ordering and under the
/// frequency baseline (rows by PA count of `labels`, same column order).
EvaluationResult EvaluateAgainstTruth(const LabelMatrix& labels, const Reordering& reordering,
                                      const LabelMatrix& ground_truth, std::span<const int> block_sizes);

/// Block sizes that fit an n x m matrix, in the given order.
std::vector<int> UsableBlockSizes(std::span<const int> block_sizes, Eigen::Index n, Eigen::Index m);

using Json = nlohmann::ordered_json;

Json BuildReport(const PipelineConfig& cfg, const PipelineInputs& inputs, const Analysis& analysis,
                 const std::optional<EvaluationResult>& evaluation);

/// Flattens a report into path=value lines, in report order.
std::string FormatKeyValue(const Json& report);

/// Full pipeline; writes report.json or report.txt into cfg.output_dir and
/// returns the report.
Json RunPipeline(const PipelineConfig& cfg);

/// Standalone stages. Each writes its artifact into cfg.output_dir.
void RunLabel(const PipelineConfig& cfg);
Json RunScore(const PipelineConfig& cfg);
Json RunInsights(const PipelineConfig& cfg);
Json RunEval(const PipelineConfig& cfg);

struct RenderStyle {
  int cell_size = 16;
  std::string pa_color = "#1f2937";
  std::string na_color = "#f3f4f6";
  std::string insight_color = "#2563eb";
};

/// SVG heatmap of the reordered labels with insight rectangles outlined.
std::string RenderSvg(const Json& report, const RenderStyle& style = {});
void RunRender(const std::filesystem::path& report_path, const std::filesystem::path& output,
               const RenderStyle& style = {});

std::string Fnv1aHex(std::string_view bytes);

}  // namespace tabshapley
