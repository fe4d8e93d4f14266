// tabshapley: label -> score -> reorder -> extract -> evaluate.
//
// Exit codes: 0 success, 2 input error, 3 configuration error.

#include <CLI11.hpp>

#include <iostream>

#include "tabshapley/evaluation.hpp"
#include "tabshapley/pipeline.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;

struct Options {
  std::string input, errors, labels, ground_truth;
  double alpha = tabshapley::kDefaultAlpha;
  int k = tabshapley::kDefaultTopK;
  std::vector<int> block_sizes{2, 4, 6};
  bool weighted = false;
  std::uint64_t seed = 0;
  std::string output_dir = ".";
  std::string format = "json";
};

void AddPipelineFlags(CLI::App* cmd, Options& o) {
  cmd->add_option("--input", o.input, "Delimiter-separated table with a header row");
  cmd->add_option("--errors", o.errors, "Per-cell reconstruction error matrix (no header)");
  cmd->add_option("--labels", o.labels, "Per-cell 0/1 label matrix, 1 = potential anomaly");
  cmd->add_option("--ground-truth", o.ground_truth, "0/1 ground-truth anomaly matrix");
  cmd->add_option("--alpha", o.alpha, "NA penalty scale for insight extraction")->capture_default_str();
  cmd->add_option("--k", o.k, "Number of insights to extract")->capture_default_str();
  cmd->add_option("--block-sizes", o.block_sizes, "Top-left capture block sizes")->delimiter(',')->capture_default_str();
  cmd->add_flag("--weighted", o.weighted, "Weight Shapley contributions by reconstruction error");
  cmd->add_option("--seed", o.seed, "Seed for synthetic data")->capture_default_str();
  cmd->add_option("--output-dir", o.output_dir, "Directory for reports and artifacts")->capture_default_str();
  cmd->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "text"}))->capture_default_str();
}

tabshapley::PipelineConfig ToConfig(const Options& o) {
  tabshapley::PipelineConfig cfg;
  if (!o.input.empty()) cfg.input_table = o.input;
  if (!o.errors.empty()) cfg.external_errors = o.errors;
  if (!o.labels.empty()) cfg.external_labels = o.labels;
  if (!o.ground_truth.empty()) cfg.ground_truth = o.ground_truth;
  cfg.alpha = o.alpha;
  cfg.k = o.k;
  cfg.block_sizes = o.block_sizes;
  cfg.weighted = o.weighted;
  cfg.seed = o.seed;
  cfg.output_dir = o.output_dir;
  cfg.format = o.format == "text" ? tabshapley::ReportFormat::kText : tabshapley::ReportFormat::kJson;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-quality insights from cell-level anomaly labels"};
  app.require_subcommand(1);

  Options options;
  auto* pipeline = app.add_subcommand("pipeline", "Run labeling, scoring, reordering, extraction and evaluation");
  auto* label = app.add_subcommand("label", "Derive PA/NA cell labels from a table or error matrix");
  auto* score = app.add_subcommand("score", "Shapley scores for attributes and records");
  auto* insights = app.add_subcommand("insights", "Reorder and extract the top-k insights");
  auto* eval = app.add_subcommand("eval", "Top-left capture against ground truth, with the frequency baseline");
  for (auto* cmd : {pipeline, label, score, insights, eval}) AddPipelineFlags(cmd, options);

  std::string report_path, svg_path;
  tabshapley::RenderStyle style;
  auto* render = app.add_subcommand("render", "SVG heatmap of a pipeline or insights report");
  render->add_option("--report", report_path, "report.json produced by pipeline or insights")->required();
  render->add_option("--output", svg_path, "SVG path (default: <output-dir>/heatmap.svg)");
  render->add_option("--output-dir", options.output_dir, "Directory for the SVG")->capture_default_str();
  render->add_option("--cell-size", style.cell_size, "Cell edge in pixels")->capture_default_str();

  tabshapley::SyntheticSpec synth_spec;
  auto* synth = app.add_subcommand("synth", "Write a planted-block synthetic table and its ground truth");
  synth->add_option("--rows", synth_spec.n)->capture_default_str();
  synth->add_option("--cols", synth_spec.m)->capture_default_str();
  synth->add_option("--block-rows", synth_spec.block_rows)->capture_default_str();
  synth->add_option("--block-cols", synth_spec.block_cols)->capture_default_str();
  synth->add_option("--noise", synth_spec.noise_rate)->capture_default_str();
  synth->add_option("--seed", synth_spec.seed)->capture_default_str();
  synth->add_option("--output-dir", options.output_dir)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    const auto cfg = ToConfig(options);
    if (pipeline->parsed()) {
      tabshapley::RunPipeline(cfg);
    } else if (label->parsed()) {
      tabshapley::RunLabel(cfg);
    } else if (score->parsed()) {
      tabshapley::RunScore(cfg);
    } else if (insights->parsed()) {
      tabshapley::RunInsights(cfg);
    } else if (eval->parsed()) {
      tabshapley::RunEval(cfg);
    } else if (render->parsed()) {
      const std::filesystem::path out =
          svg_path.empty() ? std::filesystem::path(options.output_dir) / "heatmap.svg" : std::filesystem::path(svg_path);
      tabshapley::RunRender(report_path, out, style);
    } else if (synth->parsed()) {
      std::optional<tabshapley::SyntheticData> data;
      try {
        data = tabshapley::GenerateSynthetic(synth_spec);
      } catch (const tabshapley::Error& e) {
        throw tabshapley::ConfigError(e.what());
      }
      std::filesystem::create_directories(options.output_dir);
      tabshapley::WriteTable(std::filesystem::path(options.output_dir) / "table.csv", data->table);
      tabshapley::WriteFile(std::filesystem::path(options.output_dir) / "ground_truth.csv",
                            tabshapley::FormatMatrix(data->ground_truth));
    }
  } catch (const tabshapley::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const tabshapley::Error& e) {
    const bool config = e.code() == tabshapley::ErrorCode::kInvalidAlpha || e.code() == tabshapley::ErrorCode::kInvalidK;
    std::cerr << (config ? "config error: " : "input error: ") << e.what() << '\n';
    return config ? kExitConfig : kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  }
  return 0;
}
