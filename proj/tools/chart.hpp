// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "megtext/train/trainer.hpp"

namespace megtext::cli {

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label = "BLEU-1";
  bool bars = false;             // categorical bars instead of a line
  bool annotate_epochs = false;  // effective epochs printed above each point
};

/// Static SVG rendering of a sweep table. The chart names its source CSV.
std::string render_chart(const ChartSpec& spec, const std::vector<train::SweepRow>& rows, const std::string& csv_name);

void write_sweep_csv(const std::filesystem::path& path, const std::vector<train::SweepRow>& rows);

}  // namespace megtext::cli
