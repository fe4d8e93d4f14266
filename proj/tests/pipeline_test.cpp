#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <regex>

#include "fixtures.hpp"
#include "tabshapley/pipeline.hpp"

using namespace tabshapley;
namespace ts = tabshapley::testing;

namespace {

std::filesystem::path WriteLabels(const ts::TempDir& dir, const std::string& name, const LabelMatrix& labels) {
  return dir.Write(name, FormatMatrix(labels));
}

std::size_t CountOf(const std::string& haystack, const std::string& needle) {
  std::size_t count = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++count;
  return count;
}

struct CliResult {
  int code;
  std::string err;
};

CliResult RunCli(const ts::TempDir& dir, const std::string& args) {
  const auto err_file = dir.path() / "stderr.txt";
  const std::string command = std::string("\"") + TABSHAPLEY_CLI + "\" " + args + " 2> \"" + err_file.string() + "\"";
  const int status = std::system(command.c_str());
  REQUIRE(WIFEXITED(status));
  return {WEXITSTATUS(status), ReadFile(err_file)};
}

}  // namespace

TEST_CASE("pipeline on the worked example labels") {
  ts::TempDir dir;
  PipelineConfig cfg;
  cfg.external_labels = WriteLabels(dir, "example.csv", ts::WorkedExampleLabels());
  cfg.output_dir = dir.path() / "out";
  const Json report = RunPipeline(cfg);
  CHECK(std::filesystem::exists(cfg.output_dir / "report.json"));
  CHECK(report["schema_version"] == kReportSchemaVersion);
  CHECK(report["labeling"]["source"] == "labels");
  CHECK(report["dataset"]["records"] == 6);
  const std::vector<double> expected{4.0 / 3, 1.0, 5.0 / 3, 7.0 / 6, 5.0 / 6};
  const auto& attributes = report["scores"]["attributes"];
  REQUIRE(attributes.size() == 5);
  for (std::size_t j = 0; j < 5; ++j) {
    CHECK(attributes[j]["shapley"].get<double>() == doctest::Approx(expected[j]).epsilon(1e-12));
  }
  CHECK(attributes[4]["rank"] == 1);
  CHECK(attributes[2]["rank"] == 5);
  CHECK(report["ordering"]["columns"] == Json::array({"a4", "a1", "a3", "a0", "a2"}));
  CHECK(report["ordering"]["rows"] == Json::array({"3", "5", "1", "2", "0", "4"}));
  // Only block size 2 fits a 6x5 matrix among the defaults.
  CHECK(report["capture"]["block_sizes"] == Json::array({2, 4}));
  CHECK(report["insights"].size() >= 1);
  CHECK_FALSE(report.contains("evaluation"));
}

TEST_CASE("pipeline on a planted-block synthetic table with default settings") {
  ts::TempDir dir;
  const auto data = GenerateSynthetic({10, 8, 3, 2, 0.0, 0});
  PipelineConfig cfg;
  cfg.input_table = dir.path() / "table.csv";
  WriteTable(*cfg.input_table, data.table);
  cfg.ground_truth = dir.Write("truth.csv", FormatMatrix(data.ground_truth));
  cfg.output_dir = dir.path();
  const Json report = RunPipeline(cfg);
  CHECK(report["labeling"]["source"] == "estimator");
  REQUIRE_FALSE(report["insights"].empty());
  const auto& top = report["insights"][0];
  int covered = 0;
  for (const auto& id : top["record_ids"]) {
    for (const auto& name : top["attribute_names"]) {
      const auto i = std::stol(id.get<std::string>());
      const auto j = std::stol(name.get<std::string>().substr(1));
      covered += PlantedBlock(data)(i, j) == kPA;
    }
  }
  CHECK(covered >= 0.9 * 6);
  CHECK(report["evaluation"]["tab_shapley"]["block_sizes"] == Json::array({2, 4, 6}));
  CHECK(report["evaluation"].contains("frequency_baseline"));
}

TEST_CASE("perfect labels put the whole planted block in the top-left corner") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ts::TempDir dir;
    const auto data = GenerateSynthetic({10, 8, 3, 3, 0.0, seed});
    PipelineConfig cfg;
    cfg.external_labels = WriteLabels(dir, "labels.csv", data.ground_truth);
    cfg.ground_truth = WriteLabels(dir, "truth.csv", data.ground_truth);
    cfg.block_sizes = {3};
    cfg.output_dir = dir.path();
    const Json report = RunEval(cfg);
    CHECK(report["evaluation"]["tab_shapley"]["counts"] == Json::array({9}));
    CHECK(report["evaluation"]["frequency_baseline"]["total_anomalies"] == 9);
  }
}

TEST_CASE("eval reports both orderings and handles all-NA truth") {
  ts::TempDir dir;
  PipelineConfig cfg;
  cfg.external_labels = WriteLabels(dir, "labels.csv", ts::WorkedExampleLabels());
  cfg.ground_truth = WriteLabels(dir, "truth.csv", LabelMatrix::Constant(6, 5, kNA));
  cfg.block_sizes = {2, 3};
  cfg.output_dir = dir.path();
  const Json report = RunEval(cfg);
  CHECK(std::filesystem::exists(dir.path() / "eval.json"));
  for (const char* which : {"tab_shapley", "frequency_baseline"}) {
    CHECK(report["evaluation"][which]["counts"] == Json::array({0, 0}));
  }

  cfg.ground_truth = WriteLabels(dir, "small.csv", LabelMatrix::Constant(3, 5, kNA));
  try {
    RunEval(cfg);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimensionMismatch);
  }
  cfg.ground_truth.reset();
  CHECK_THROWS_AS(RunEval(cfg), ConfigError);
}

TEST_CASE("reports are byte-identical across runs") {
  ts::TempDir dir;
  const auto data = GenerateSynthetic({12, 7, 3, 2, 0.05, 11});
  WriteTable(dir.path() / "table.csv", data.table);
  for (const auto format : {ReportFormat::kJson, ReportFormat::kText}) {
    PipelineConfig cfg;
    cfg.input_table = dir.path() / "table.csv";
    cfg.weighted = true;
    cfg.format = format;
    cfg.output_dir = dir.path() / "a";
    RunPipeline(cfg);
    cfg.output_dir = dir.path() / "b";
    RunPipeline(cfg);
    const std::string file = format == ReportFormat::kJson ? "report.json" : "report.txt";
    const std::string first = ReadFile(dir.path() / "a" / file);
    CHECK(first == ReadFile(dir.path() / "b" / file));
    CHECK(first.find(dir.path().string()) == std::string::npos);
  }
  const std::string text = ReadFile(dir.path() / "a" / "report.txt");
  CHECK(text.rfind("schema_version=1\n", 0) == 0);
  CHECK(text.find("scores.weighted=true\n") != std::string::npos);
}

TEST_CASE("standalone stages write their artifacts") {
  ts::TempDir dir;
  const auto data = GenerateSynthetic({9, 6, 2, 2, 0.0, 3});
  PipelineConfig cfg;
  cfg.input_table = dir.path() / "table.csv";
  WriteTable(*cfg.input_table, data.table);
  cfg.output_dir = dir.path() / "out";
  RunLabel(cfg);
  const auto labels = LoadLabelMatrix(cfg.output_dir / "labels.csv", std::pair<Eigen::Index, Eigen::Index>{9, 6});
  const auto errors = LoadErrorMatrix(cfg.output_dir / "errors_normalized.csv");
  CHECK(errors.rows() == 9);
  CHECK(errors.minCoeff() >= 0.0);

  PipelineConfig from_labels;
  from_labels.external_labels = cfg.output_dir / "labels.csv";
  from_labels.output_dir = cfg.output_dir;
  const Json scores = RunScore(from_labels);
  CHECK(std::filesystem::exists(cfg.output_dir / "scores.json"));
  const auto ev = BuildEvidenceSets(labels);
  const auto expected = ShapleyAttributes(ev);
  for (Eigen::Index j = 0; j < 6; ++j) {
    CHECK(scores["scores"]["attributes"][static_cast<std::size_t>(j)]["shapley"].get<double>() == expected(j));
  }
  const Json insights = RunInsights(cfg);
  CHECK(std::filesystem::exists(cfg.output_dir / "insights.json"));
  const Json full = RunPipeline(cfg);
  CHECK(insights["insights"] == full["insights"]);

  cfg.external_labels = from_labels.external_labels;
  CHECK_THROWS_AS(RunLabel(cfg), ConfigError);
}

TEST_CASE("config validation") {
  PipelineConfig cfg;
  CHECK_THROWS_AS(ValidateConfig(cfg), ConfigError);
  cfg.external_labels = "x.csv";
  CHECK_NOTHROW(ValidateConfig(cfg));
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(ValidateConfig(cfg), ConfigError);
  cfg.alpha = 0.2;
  cfg.k = 0;
  CHECK_THROWS_AS(ValidateConfig(cfg), ConfigError);
  cfg.k = 1;
  cfg.weighted = true;
  CHECK_THROWS_AS(ValidateConfig(cfg), ConfigError);
  cfg.weighted = false;
  cfg.block_sizes = {2, 0};
  CHECK_THROWS_AS(ValidateConfig(cfg), ConfigError);
}

TEST_CASE("render") {
  ts::TempDir dir;
  PipelineConfig cfg;
  cfg.external_labels = WriteLabels(dir, "example.csv", ts::WorkedExampleLabels());
  cfg.output_dir = dir.path();
  const Json report = RunPipeline(cfg);
  const std::string svg = RenderSvg(report);
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(CountOf(svg, "class=\"cell ") == 30);
  CHECK(CountOf(svg, "class=\"cell pa\"") == 11);
  CHECK(CountOf(svg, "class=\"insight\"") == report["insights"].size());
  CHECK(CountOf(svg, "class=\"insight\"") >= 1);

  RunRender(dir.path() / "report.json", dir.path() / "one.svg");
  RunRender(dir.path() / "report.json", dir.path() / "two.svg");
  CHECK(ReadFile(dir.path() / "one.svg") == ReadFile(dir.path() / "two.svg"));
  CHECK(ReadFile(dir.path() / "one.svg") == svg);

  Json bare = report;
  bare["insights"] = Json::array();
  const std::string grid_only = RenderSvg(bare);
  CHECK(CountOf(grid_only, "class=\"cell ") == 30);
  CHECK(CountOf(grid_only, "class=\"insight\"") == 0);

  Json broken = report;
  broken["ordering"]["reordered_labels"][0] = "01";
  CHECK_THROWS_AS(RenderSvg(broken), Error);
  dir.Write("bad.json", "{not json");
  try {
    RunRender(dir.path() / "bad.json", dir.path() / "bad.svg");
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMalformedReport);
  }
}

TEST_CASE("cli exit codes") {
  ts::TempDir dir;
  const auto labels = WriteLabels(dir, "example.csv", ts::WorkedExampleLabels());
  const std::string out = " --output-dir \"" + (dir.path() / "out").string() + "\"";

  const auto ok = RunCli(dir, "pipeline --labels \"" + labels.string() + "\"" + out);
  CHECK(ok.code == 0);
  CHECK(ok.err.empty());
  CHECK(std::filesystem::exists(dir.path() / "out" / "report.json"));

  const auto missing = dir.path() / "nope.csv";
  const auto input_error = RunCli(dir, "pipeline --input \"" + missing.string() + "\"" + out);
  CHECK(input_error.code == 2);
  CHECK(input_error.err.find(missing.string()) != std::string::npos);

  CHECK(RunCli(dir, "pipeline --labels \"" + labels.string() + "\" --alpha 0" + out).code == 3);
  CHECK(RunCli(dir, "pipeline --labels \"" + labels.string() + "\" --k 0" + out).code == 3);
  CHECK(RunCli(dir, "pipeline --labels \"" + labels.string() + "\" --format yaml" + out).code == 3);
  CHECK(RunCli(dir, "pipeline" + out).code == 3);
  CHECK(RunCli(dir, "frobnicate").code == 3);

  const auto bad = dir.Write("bad.csv", "1,0\n0,x\n");
  const auto bad_labels = RunCli(dir, "score --labels \"" + bad.string() + "\"" + out);
  CHECK(bad_labels.code == 2);
  CHECK(std::regex_search(bad_labels.err, std::regex("row 1, column 1")));

  CHECK(RunCli(dir, "render --report \"" + (dir.path() / "out" / "report.json").string() + "\"" + out).code == 0);
  CHECK(std::filesystem::exists(dir.path() / "out" / "heatmap.svg"));
  CHECK(RunCli(dir, "render --report \"" + missing.string() + "\"" + out).code == 2);

  const auto synth_dir = dir.path() / "synth";
  CHECK(RunCli(dir, "synth --seed 4 --output-dir \"" + synth_dir.string() + "\"").code == 0);
  CHECK(LoadTable(synth_dir / "table.csv", {}).rows() == 10);
  CHECK(RunCli(dir, "synth --block-rows 20 --output-dir \"" + synth_dir.string() + "\"").code == 3);
}
