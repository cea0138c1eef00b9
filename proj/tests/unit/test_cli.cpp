// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "chart.hpp"
#include "commands.hpp"
#include "experiment.hpp"
#include "megtext/data/manifest.hpp"
#include "megtext/error.hpp"

using namespace megtext;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("megtext_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json toy_config() {
  return nlohmann::json::parse(R"({
    "dataset": {"toy": {"sentences": 4, "repeats": 5, "channels": 3, "rate_hz": 200, "seed": 2},
                "split": {"strategy": "random_pairs", "ratios": [3, 1, 1], "seed": 5}},
    "train": {"max_epochs": 1},
    "output_dir": "out"
  })");
}

fs::path write_config(const fs::path& dir, const nlohmann::json& j) {
  const auto path = dir / "config.json";
  std::ofstream(path) << j.dump(2);
  return path;
}

}  // namespace

TEST(ExperimentConfig, RejectsUnknownKeysInAnySection) {
  EXPECT_NO_THROW(toy_config().get<cli::ExperimentConfig>());
  for (const char* section : {"", "/dataset", "/dataset/toy", "/dataset/split", "/train"}) {
    auto j = toy_config();
    j[nlohmann::json::json_pointer(std::string(section))]["surprise"] = 1;
    EXPECT_THROW(j.get<cli::ExperimentConfig>(), SchemaError) << section;
  }
}

TEST(ExperimentConfig, DatasetNeedsExactlyOneSource) {
  auto both = toy_config();
  both["dataset"]["manifest"] = "m.jsonl";
  EXPECT_ANY_THROW(both.get<cli::ExperimentConfig>());
  auto neither = toy_config();
  neither["dataset"].erase("toy");
  EXPECT_ANY_THROW(neither.get<cli::ExperimentConfig>());
}

TEST(ExperimentConfig, WrittenFormSpellsOutDefaultsAndReparses) {
  const auto cfg = toy_config().get<cli::ExperimentConfig>();
  const nlohmann::json full = cfg;
  for (const char* key : {"dataset", "preprocess", "augmentation", "model", "train", "eval", "output_dir"})
    EXPECT_TRUE(full.contains(key)) << key;
  EXPECT_EQ(full["train"]["batch_size"], 64);
  EXPECT_EQ(full["train"]["max_epochs"], 1);
  const nlohmann::json again = full.get<cli::ExperimentConfig>();
  EXPECT_EQ(again, full);
}

TEST(ExperimentConfig, SeedOverrideReachesEverySection) {
  auto cfg = toy_config().get<cli::ExperimentConfig>();
  cfg.set_seed(99);
  EXPECT_EQ(cfg.train.seed, 99u);
  EXPECT_EQ(cfg.model.seed, 99u);
  EXPECT_EQ(cfg.eval.seed, 99u);
}

TEST(Commands, OutputDirResolvesAgainstTheConfigFile) {
  const auto dir = fresh_dir("ctx");
  cli::GlobalOptions opts;
  opts.config = write_config(dir, toy_config());
  const auto ctx = cli::make_context(opts);
  EXPECT_EQ(fs::weakly_canonical(ctx.output_dir), fs::weakly_canonical(dir / "out"));
  opts.seed = 4;
  EXPECT_EQ(cli::make_context(opts).config.train.seed, 4u);
}

TEST(Commands, SplitWritesPartitionsAndReport) {
  const auto dir = fresh_dir("split");
  cli::GlobalOptions opts;
  opts.config = write_config(dir, toy_config());
  const auto ctx = cli::make_context(opts);
  ASSERT_EQ(cli::cmd_split(ctx), 0);

  std::size_t total = 0;
  for (const char* part : {"train", "val", "test"}) {
    const auto path = ctx.output_dir / "split" / (std::string(part) + ".jsonl");
    ASSERT_TRUE(fs::exists(path)) << part;
    total += data::parse_manifest(path).size();
  }
  EXPECT_EQ(total, 20u);
  const auto report = nlohmann::json::parse(slurp(ctx.output_dir / "split" / "split_report.json"));
  EXPECT_EQ(report["strategy"], "random_pairs");
  EXPECT_EQ(report["seed"], 5);
  EXPECT_EQ(report["counts"]["train"].get<int>() + report["counts"]["val"].get<int>() +
                report["counts"]["test"].get<int>(),
            20);
}

TEST(Commands, ToyGenWritesManifestAndSignals) {
  const auto dir = fresh_dir("toygen");
  cli::GlobalOptions opts;
  opts.config = write_config(dir, toy_config());
  const auto ctx = cli::make_context(opts);
  ASSERT_EQ(cli::cmd_toy_gen(ctx, dir / "toy"), 0);
  const auto entries = data::parse_manifest(dir / "toy" / "manifest.jsonl");
  EXPECT_EQ(entries.size(), 20u);
  for (const auto& e : entries) EXPECT_TRUE(fs::exists(data::resolve_signal_path(e, dir / "toy"))) << e.signal_path;
}

TEST(Commands, EvaluateWithoutCheckpointFails) {
  const auto dir = fresh_dir("eval");
  cli::GlobalOptions opts;
  opts.config = write_config(dir, toy_config());
  const auto ctx = cli::make_context(opts);
  EXPECT_THROW(cli::cmd_evaluate(ctx, {}), ConfigError);
}

TEST(Sweeps, NamesParseAndLabelsAreReadable) {
  for (auto s : {cli::Sweep::scaling, cli::Sweep::augmentation, cli::Sweep::data_ratio, cli::Sweep::layers})
    EXPECT_EQ(cli::parse_sweep(cli::to_string(s)), s);
  EXPECT_ANY_THROW(cli::parse_sweep("everything"));

  const auto grid = cli::default_augmentation_grid(1.0);
  ASSERT_FALSE(grid.empty());
  std::set<std::string> labels;
  for (const auto& spec : grid) {
    EXPECT_NO_THROW(spec.validate());
    labels.insert(cli::describe(spec));
  }
  EXPECT_EQ(labels.size(), grid.size());
  EXPECT_TRUE(labels.count("noise 0dB p0.5"));
}

TEST(Chart, CsvAndSvgReferenceEachOther) {
  const auto dir = fresh_dir("chart");
  std::vector<train::SweepRow> rows(2);
  rows[0].setting = "desk-tiny";
  rows[0].bleu1 = 81.5;
  rows[0].effective_epochs = 12;
  rows[1].setting = "a, b";
  rows[1].error = "out of memory";
  cli::write_sweep_csv(dir / "scaling.csv", rows);
  std::istringstream csv(slurp(dir / "scaling.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "setting,bleu1,effective_epochs,error");
  std::getline(csv, line);
  EXPECT_EQ(line, "desk-tiny,81.5,12,");
  std::getline(csv, line);
  EXPECT_EQ(line.rfind("\"a, b\",", 0), 0u) << line;

  cli::ChartSpec spec;
  spec.title = "Scaling";
  spec.x_label = "backbone";
  spec.annotate_epochs = true;
  const auto svg = cli::render_chart(spec, rows, "scaling.csv");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("data-source=\"scaling.csv\""), std::string::npos);
  EXPECT_NE(svg.find("failed"), std::string::npos);
  EXPECT_NE(svg.find("desk-tiny"), std::string::npos);
}
