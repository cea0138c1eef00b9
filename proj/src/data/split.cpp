// SPDX-License-Identifier: Apache-2.0
#include "megtext/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>
#include <set>

#include "megtext/data/text.hpp"
#include "megtext/error.hpp"

namespace megtext::data {
namespace {

std::vector<std::size_t> shuffled(std::vector<std::size_t> idx, std::mt19937_64& rng) {
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

// Cuts `order` into consecutive chunks of the given sizes; each chunk is re-sorted
// so output keeps input order.
std::vector<std::vector<std::size_t>> cut(const std::vector<std::size_t>& order, const std::vector<std::size_t>& sizes) {
  std::vector<std::vector<std::size_t>> parts;
  std::size_t pos = 0;
  for (std::size_t s : sizes) {
    std::vector<std::size_t> part(order.begin() + static_cast<std::ptrdiff_t>(pos),
                                  order.begin() + static_cast<std::ptrdiff_t>(pos + s));
    std::sort(part.begin(), part.end());
    parts.push_back(std::move(part));
    pos += s;
  }
  return parts;
}

std::vector<ManifestEntry> gather(const std::vector<ManifestEntry>& entries, const std::vector<std::size_t>& idx) {
  std::vector<ManifestEntry> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(entries[i]);
  return out;
}

// Splits `rest` train:val and attaches the given test indices.
DatasetSplit holdout(const std::vector<ManifestEntry>& entries, std::vector<std::size_t> rest,
                     std::vector<std::size_t> test, const SplitSpec& spec, std::mt19937_64& rng) {
  if (test.empty()) throw ConfigError("holdout selects no entries");
  const auto sizes = largest_remainder(rest.size(), {spec.ratios[0], spec.ratios[1]});
  const auto parts = cut(shuffled(std::move(rest), rng), sizes);
  std::sort(test.begin(), test.end());
  return {gather(entries, parts[0]), gather(entries, parts[1]), gather(entries, test)};
}

}  // namespace

std::string to_string(SplitStrategy s) {
  switch (s) {
    case SplitStrategy::random_pairs: return "random_pairs";
    case SplitStrategy::holdout_session: return "holdout_session";
    case SplitStrategy::holdout_story: return "holdout_story";
    case SplitStrategy::holdout_sentences: return "holdout_sentences";
  }
  return "?";
}

SplitStrategy parse_split_strategy(std::string_view name) {
  for (auto s : {SplitStrategy::random_pairs, SplitStrategy::holdout_session, SplitStrategy::holdout_story,
                 SplitStrategy::holdout_sentences}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown split strategy '" + std::string(name) + "'");
}

void SplitSpec::validate() const {
  for (double r : ratios) {
    if (!(r > 0.0)) throw ConfigError("split ratios must be positive");
  }
  if ((strategy == SplitStrategy::holdout_session || strategy == SplitStrategy::holdout_story) &&
      (!holdout_key || holdout_key->empty())) {
    throw ConfigError(to_string(strategy) + " requires a holdout key");
  }
  if (strategy == SplitStrategy::holdout_sentences && !(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
    throw ConfigError("holdout_fraction must lie in (0, 1)");
  }
}

void to_json(nlohmann::json& j, const SplitSpec& s) {
  j = {{"strategy", to_string(s.strategy)},
       {"ratios", s.ratios},
       {"holdout_key", s.holdout_key ? nlohmann::json(*s.holdout_key) : nlohmann::json(nullptr)},
       {"holdout_fraction", s.holdout_fraction},
       {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, SplitSpec& s) {
  for (const auto& [key, value] : j.items()) {
    if (key == "strategy") s.strategy = parse_split_strategy(value.get<std::string>());
    else if (key == "ratios") s.ratios = value.get<std::array<double, 3>>();
    else if (key == "holdout_key") s.holdout_key = value.is_null() ? std::nullopt : std::optional(value.get<std::string>());
    else if (key == "holdout_fraction") s.holdout_fraction = value.get<double>();
    else if (key == "seed") s.seed = value.get<std::uint64_t>();
    else throw SchemaError("unknown split key '" + key + "'");
  }
  s.validate();
}

std::vector<std::size_t> largest_remainder(std::size_t n, const std::vector<double>& ratios) {
  const double total = std::accumulate(ratios.begin(), ratios.end(), 0.0);
  std::vector<std::size_t> sizes(ratios.size());
  std::vector<double> remainder(ratios.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    const double quota = static_cast<double>(n) * ratios[i] / total;
    sizes[i] = static_cast<std::size_t>(std::floor(quota));
    remainder[i] = quota - static_cast<double>(sizes[i]);
    assigned += sizes[i];
  }
  std::vector<std::size_t> order(ratios.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
    return a > b;
  });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++sizes[order[k % order.size()]];
  return sizes;
}

std::string sentence_key(const ManifestEntry& e) { return normalize_text(e.sentence); }

DatasetSplit split_dataset(const std::vector<ManifestEntry>& entries, const SplitSpec& spec) {
  spec.validate();
  if (entries.empty()) throw ConfigError("cannot split an empty corpus");
  std::mt19937_64 rng(spec.seed);
  std::vector<std::size_t> all(entries.size());
  std::iota(all.begin(), all.end(), 0);

  switch (spec.strategy) {
    case SplitStrategy::random_pairs: {
      const auto sizes = largest_remainder(entries.size(), {spec.ratios.begin(), spec.ratios.end()});
      const auto parts = cut(shuffled(all, rng), sizes);
      return {gather(entries, parts[0]), gather(entries, parts[1]), gather(entries, parts[2])};
    }
    case SplitStrategy::holdout_session: {
      std::vector<std::size_t> rest, test;
      for (std::size_t i : all) (entries[i].session_id == *spec.holdout_key ? test : rest).push_back(i);
      if (test.empty()) throw ConfigError("session '" + *spec.holdout_key + "' not present in corpus");
      return holdout(entries, std::move(rest), std::move(test), spec, rng);
    }
    case SplitStrategy::holdout_story: {
      std::set<std::string> held;
      for (const auto& e : entries) {
        if (e.story_id == *spec.holdout_key) held.insert(sentence_key(e));
      }
      if (held.empty()) throw ConfigError("story '" + *spec.holdout_key + "' not present in corpus");
      std::vector<std::size_t> rest, test;
      for (std::size_t i : all) {
        const bool in_test = entries[i].story_id == *spec.holdout_key || held.count(sentence_key(entries[i])) > 0;
        (in_test ? test : rest).push_back(i);
      }
      return holdout(entries, std::move(rest), std::move(test), spec, rng);
    }
    case SplitStrategy::holdout_sentences: {
      std::set<std::string> unique;
      for (const auto& e : entries) unique.insert(sentence_key(e));
      std::vector<std::string> keys(unique.begin(), unique.end());
      std::shuffle(keys.begin(), keys.end(), rng);
      const auto n_held = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(spec.holdout_fraction * static_cast<double>(keys.size()))));
      if (n_held >= keys.size()) throw ConfigError("holdout_sentences would leave no training sentences");
      const std::set<std::string> held(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(n_held));
      std::vector<std::size_t> rest, test;
      for (std::size_t i : all) (held.count(sentence_key(entries[i])) ? test : rest).push_back(i);
      return holdout(entries, std::move(rest), std::move(test), spec, rng);
    }
  }
  throw ConfigError("unhandled split strategy");
}

nlohmann::json split_report(const SplitSpec& spec, const DatasetSplit& split) {
  nlohmann::json j{{"strategy", to_string(spec.strategy)},
                   {"seed", spec.seed},
                   {"ratios", spec.ratios},
                   {"counts", {{"train", split.train.size()}, {"val", split.val.size()}, {"test", split.test.size()}}}};
  if (spec.holdout_key) j["holdout_key"] = *spec.holdout_key;
  if (spec.strategy == SplitStrategy::holdout_sentences) j["holdout_fraction"] = spec.holdout_fraction;
  return j;
}

}  // namespace megtext::data
