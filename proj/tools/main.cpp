// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>
#include <iostream>
#include <spdlog/spdlog.h>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace megtext::cli;
  CLI::App app{"megtext: neural-signal to text experiments"};
  app.require_subcommand(1);

  GlobalOptions global;
  std::optional<std::string> output_dir, cache_dir;
  std::string log_level = "info";
  app.add_option("--config", global.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", global.seed, "override train, model and decoding seeds");
  app.add_option("--output-dir", output_dir, "override output_dir");
  app.add_option("--cache-dir", cache_dir, "backbone weight cache");
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off");

  auto* toy = app.add_subcommand("toy-gen", "write the configured toy corpus as npy files plus manifest.jsonl");
  std::optional<std::string> toy_out;
  toy->add_option("--out", toy_out, "target directory (default <output>/toy)");

  auto* pre = app.add_subcommand("preprocess", "segment, preprocess and window every manifest entry");
  auto* split = app.add_subcommand("split", "write train/val/test manifests and a split report");

  auto* train = app.add_subcommand("train", "train the adapted model");
  bool resume = false;
  train->add_flag("--resume", resume, "continue from <output>/run/checkpoints/last");

  auto* evaluate = app.add_subcommand("evaluate", "decode the test split and write reports");
  EvaluateOptions eval_opts;
  std::optional<std::string> checkpoint;
  evaluate->add_option("--checkpoint", checkpoint, "checkpoint directory (default <output>/run/checkpoints/best)");
  evaluate->add_option("--mode", eval_opts.modes, "free_run and/or tf (default both)")
      ->check(CLI::IsMember({"free_run", "tf", "teacher_forcing"}));
  evaluate->add_option("--baseline", eval_opts.baseline, "add a noise-input baseline report")
      ->check(CLI::IsMember({"noise"}));

  auto* ablate = app.add_subcommand("ablate", "run a sweep and write a CSV table plus SVG chart");
  AblateOptions ab;
  std::string sweep;
  ablate->add_option("--sweep", sweep, "scaling|augmentation|data_ratio|layers")
      ->required()
      ->check(CLI::IsMember({"scaling", "augmentation", "data_ratio", "layers"}));
  ablate->add_option("--sizes", ab.sizes, "backbones for the scaling sweep")->delimiter(',');
  ablate->add_option("--batches", ab.batches, "batch size per backbone")->delimiter(',');
  ablate->add_option("--ratios", ab.ratios, "data ratios")->delimiter(',');
  ablate->add_option("--layers", ab.layers, "top-k trainable encoder layers")->delimiter(',');
  ablate->add_option("--epoch-cap", ab.epoch_cap, "cap on epochs per grid point");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));
  if (output_dir) global.output_dir = *output_dir;
  if (cache_dir) global.cache_dir = *cache_dir;

  try {
    const Context ctx = make_context(global);
    if (*toy) return cmd_toy_gen(ctx, toy_out ? std::optional<std::filesystem::path>(*toy_out) : std::nullopt);
    if (*pre) return cmd_preprocess(ctx);
    if (*split) return cmd_split(ctx);
    if (*train) return cmd_train(ctx, resume);
    if (*evaluate) {
      if (checkpoint) eval_opts.checkpoint = *checkpoint;
      return cmd_evaluate(ctx, eval_opts);
    }
    if (*ablate) {
      ab.sweep = parse_sweep(sweep);
      return cmd_ablate(ctx, ab);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
