// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <vector>

#include "megtext/data/manifest.hpp"

namespace megtext::data {

enum class SplitStrategy { random_pairs, holdout_session, holdout_story, holdout_sentences };

std::string to_string(SplitStrategy s);
SplitStrategy parse_split_strategy(std::string_view name);

struct SplitSpec {
  SplitStrategy strategy = SplitStrategy::random_pairs;
  std::array<double, 3> ratios{8.0, 1.0, 1.0};  // train, val, test
  std::optional<std::string> holdout_key;       // session or story id
  double holdout_fraction = 0.1;                // share of unique sentences for holdout_sentences
  std::uint64_t seed = 0;

  void validate() const;
};

void to_json(nlohmann::json& j, const SplitSpec& s);
void from_json(const nlohmann::json& j, SplitSpec& s);

struct DatasetSplit {
  std::vector<ManifestEntry> train, val, test;
};

/// Largest-remainder apportionment of n items. Equal remainders favour the later
/// slot, so 29174 at 8:1:1 gives 23339/2917/2918.
std::vector<std::size_t> largest_remainder(std::size_t n, const std::vector<double>& ratios);

/// Case-folded, punctuation-stripped sentence used for overlap checks.
std::string sentence_key(const ManifestEntry& e);

/// Partitions entries. Within each split, entries keep their input order.
///  - random_pairs: shuffled pairs cut at largest-remainder sizes.
///  - holdout_session: test = every entry of the named session.
///  - holdout_story: test = the named story plus any entry sharing one of its sentences.
///  - holdout_sentences: test = all entries of a random holdout_fraction of unique sentences.
/// For holdout strategies the rest is divided train:val by ratios[0]:ratios[1].
DatasetSplit split_dataset(const std::vector<ManifestEntry>& entries, const SplitSpec& spec);

nlohmann::json split_report(const SplitSpec& spec, const DatasetSplit& split);

}  // namespace megtext::data
