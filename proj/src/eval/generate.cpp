// SPDX-License-Identifier: Apache-2.0
#include "megtext/eval/generate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>

#include "megtext/error.hpp"

namespace megtext::eval {

using model::Tokenizer;

namespace {
constexpr float kNegInf = -std::numeric_limits<float>::infinity();

nn::RowVec log_softmax(const nn::RowVec& x) {
  const float mx = x.maxCoeff();
  const float lse = mx + std::log((x.array() - mx).exp().sum());
  return (x.array() - lse).matrix();
}
}  // namespace

std::string to_string(DecodeMode m) { return m == DecodeMode::free_run ? "free_run" : "teacher_forcing"; }

DecodeMode parse_decode_mode(std::string_view name) {
  if (name == "free_run") return DecodeMode::free_run;
  if (name == "teacher_forcing" || name == "tf") return DecodeMode::teacher_forcing;
  throw ConfigError("unknown decode mode '" + std::string(name) + "'");
}

void GenerationConfig::validate() const {
  if (beam_size < 1) throw ConfigError("beam_size must be >= 1");
  if (no_repeat_ngram < 0) throw ConfigError("no_repeat_ngram must be >= 0");
  if (!(repetition_penalty > 0)) throw ConfigError("repetition_penalty must be positive");
  if (max_new_tokens < 1) throw ConfigError("max_new_tokens must be >= 1");
  if (top_p && !(*top_p > 0 && *top_p <= 1)) throw ConfigError("top_p must lie in (0, 1]");
}

void to_json(nlohmann::json& j, const GenerationConfig& c) {
  j = {{"beam_size", c.beam_size},
       {"repetition_penalty", c.repetition_penalty},
       {"no_repeat_ngram", c.no_repeat_ngram},
       {"max_new_tokens", c.max_new_tokens},
       {"length_penalty", c.length_penalty},
       {"mode", to_string(c.mode)},
       {"top_p", c.top_p ? nlohmann::json(*c.top_p) : nlohmann::json(nullptr)},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, GenerationConfig& c) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k == "beam_size") c.beam_size = it->get<int>();
    else if (k == "repetition_penalty") c.repetition_penalty = it->get<double>();
    else if (k == "no_repeat_ngram") c.no_repeat_ngram = it->get<int>();
    else if (k == "max_new_tokens") c.max_new_tokens = it->get<int>();
    else if (k == "length_penalty") c.length_penalty = it->get<double>();
    else if (k == "mode") c.mode = parse_decode_mode(it->get<std::string>());
    else if (k == "top_p") c.top_p = it->is_null() ? std::nullopt : std::optional<double>(it->get<double>());
    else if (k == "seed") c.seed = it->get<std::uint64_t>();
    else throw SchemaError("unknown eval key '" + k + "'");
  }
  c.validate();
}

void process_logits(Eigen::Ref<nn::RowVec> logits, const std::vector<int>& sequence, std::size_t prompt_len,
                    const GenerationConfig& cfg) {
  if (cfg.repetition_penalty != 1.0) {
    const auto p = static_cast<float>(cfg.repetition_penalty);
    std::vector<int> seen(sequence.begin() + static_cast<std::ptrdiff_t>(prompt_len), sequence.end());
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (int t : seen) {
      float& v = logits(t);
      v = v > 0 ? v / p : v * p;
    }
  }
  for (int t = 0; t < Tokenizer::kSpecialCount; ++t)
    if (t != Tokenizer::kEndOfText) logits(t) = kNegInf;
  const auto n = static_cast<std::size_t>(cfg.no_repeat_ngram);
  if (n > 0 && sequence.size() + 1 >= n) {
    const std::size_t len = sequence.size();
    for (std::size_t i = 0; i + n <= len; ++i) {
      if (std::equal(sequence.begin() + static_cast<std::ptrdiff_t>(i),
                     sequence.begin() + static_cast<std::ptrdiff_t>(i + n - 1),
                     sequence.end() - static_cast<std::ptrdiff_t>(n - 1)))
        logits(sequence[i + n - 1]) = kNegInf;
    }
  }
}

namespace {

struct Hypothesis {
  std::vector<int> tokens;
  double score;
};

std::vector<int> beam_search(const model::Seq2SeqModel& m, const model::EncoderMemory& mem, nn::Graph& g,
                             const std::vector<int>& prompt, const GenerationConfig& cfg, int max_new) {
  const int k = cfg.beam_size;
  const int vocab = m.vocab_size();
  std::vector<Hypothesis> alive{{prompt, 0.0}};
  std::vector<Hypothesis> finished;
  auto normalized = [&](double score, std::size_t generated) {
    return score / std::pow(static_cast<double>(std::max<std::size_t>(1, generated)), cfg.length_penalty);
  };
  auto worst_finished = [&] {
    double w = std::numeric_limits<double>::infinity();
    for (const auto& h : finished) w = std::min(w, h.score);
    return w;
  };

  for (int step = 0; step < max_new && !alive.empty(); ++step) {
    const int batch = static_cast<int>(alive.size());
    const int len = static_cast<int>(alive.front().tokens.size());
    std::vector<int> flat;
    for (const auto& h : alive) flat.insert(flat.end(), h.tokens.begin(), h.tokens.end());
    const nn::Mat& logits = m.decode(g, mem, flat, batch).value();

    struct Cand {
      double score;
      int beam, token;
    };
    std::vector<Cand> cands;
    for (int b = 0; b < batch; ++b) {
      nn::RowVec row = logits.row(static_cast<Eigen::Index>(b) * len + len - 1);
      process_logits(row, alive[static_cast<std::size_t>(b)].tokens, prompt.size(), cfg);
      const nn::RowVec lp = log_softmax(row);
      for (int v = 0; v < vocab; ++v)
        if (std::isfinite(lp(v))) cands.push_back({alive[static_cast<std::size_t>(b)].score + lp(v), b, v});
    }
    const std::size_t top = std::min<std::size_t>(cands.size(), static_cast<std::size_t>(2 * k));
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(top), cands.end(),
                      [](const Cand& a, const Cand& b) {
                        if (a.score != b.score) return a.score > b.score;
                        return a.beam != b.beam ? a.beam < b.beam : a.token < b.token;
                      });
    std::vector<Hypothesis> next;
    for (std::size_t r = 0; r < top && static_cast<int>(next.size()) < k; ++r) {
      const Cand& c = cands[r];
      std::vector<int> toks = alive[static_cast<std::size_t>(c.beam)].tokens;
      if (c.token == Tokenizer::kEndOfText) {
        if (static_cast<int>(r) >= k) continue;
        const double s = normalized(c.score, toks.size() - prompt.size() + 1);
        if (static_cast<int>(finished.size()) < k || s > worst_finished()) {
          finished.push_back({std::move(toks), s});
          if (static_cast<int>(finished.size()) > k) {
            auto worst = std::min_element(finished.begin(), finished.end(),
                                          [](const auto& a, const auto& b) { return a.score < b.score; });
            finished.erase(worst);
          }
        }
        continue;
      }
      toks.push_back(c.token);
      next.push_back({std::move(toks), c.score});
    }
    alive = std::move(next);
    if (static_cast<int>(finished.size()) >= k && !alive.empty()) {
      double best_alive = -std::numeric_limits<double>::infinity();
      for (const auto& h : alive) best_alive = std::max(best_alive, h.score);
      const std::size_t cur = alive.front().tokens.size() - prompt.size();
      if (worst_finished() >= normalized(best_alive, cur)) break;
    }
  }
  for (auto& h : alive) finished.push_back({h.tokens, normalized(h.score, h.tokens.size() - prompt.size())});
  if (finished.empty()) return {};
  const auto best = std::max_element(finished.begin(), finished.end(),
                                     [](const auto& a, const auto& b) { return a.score < b.score; });
  return std::vector<int>(best->tokens.begin() + static_cast<std::ptrdiff_t>(prompt.size()), best->tokens.end());
}

std::vector<int> sample(const model::Seq2SeqModel& m, const model::EncoderMemory& mem, nn::Graph& g,
                        const std::vector<int>& prompt, const GenerationConfig& cfg, int max_new, std::mt19937_64& rng) {
  std::vector<int> seq = prompt;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int step = 0; step < max_new; ++step) {
    const nn::Mat& logits = m.decode(g, mem, seq, 1).value();
    nn::RowVec row = logits.row(logits.rows() - 1);
    process_logits(row, seq, prompt.size(), cfg);
    const nn::RowVec lp = log_softmax(row);
    std::vector<int> order(static_cast<std::size_t>(lp.cols()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return lp(a) > lp(b); });
    double cum = 0.0;
    std::vector<std::pair<int, double>> keep;
    for (int t : order) {
      const double p = std::exp(static_cast<double>(lp(t)));
      if (p <= 0) break;
      keep.emplace_back(t, p);
      cum += p;
      if (cum >= *cfg.top_p) break;
    }
    double u = unit(rng) * cum;
    int tok = keep.back().first;
    for (const auto& [t, p] : keep) {
      if (u < p) {
        tok = t;
        break;
      }
      u -= p;
    }
    if (tok == Tokenizer::kEndOfText) break;
    seq.push_back(tok);
  }
  return std::vector<int>(seq.begin() + static_cast<std::ptrdiff_t>(prompt.size()), seq.end());
}

}  // namespace

std::vector<int> generate_tokens(const model::Seq2SeqModel& model, const nn::Mat& input, int language_token,
                                 const GenerationConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  nn::Graph g(false);
  const auto enc = model.encode(g, input, 1);
  const auto mem = model.memory(g, enc, 1);
  std::vector<int> prompt{Tokenizer::kStartOfTranscript, language_token, Tokenizer::kTranscribe,
                          Tokenizer::kNoTimestamps};
  const int max_new = std::min(cfg.max_new_tokens, model.dims().decoder_capacity - static_cast<int>(prompt.size()));
  if (cfg.top_p) return sample(model, mem, g, prompt, cfg, max_new, rng);
  return beam_search(model, mem, g, prompt, cfg, max_new);
}

std::vector<std::string> generate(const model::Seq2SeqModel& model, const std::vector<nn::Mat>& segments,
                                  const std::vector<int>& language_tokens, const GenerationConfig& cfg) {
  if (segments.empty()) throw ConfigError("no segments to decode");
  if (segments.size() != language_tokens.size()) throw ConfigError("one language token per segment required");
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < segments.size(); ++i)
    out.push_back(model.tokenizer().decode(generate_tokens(model, segments[i], language_tokens[i], cfg, rng)));
  return out;
}

std::vector<int> teacher_force_tokens(const model::Seq2SeqModel& model, const nn::Mat& input, int language_token,
                                      const std::vector<int>& reference) {
  if (reference.empty()) throw ConfigError("teacher forcing needs a non-empty reference");
  nn::Graph g(false);
  const auto enc = model.encode(g, input, 1);
  const auto mem = model.memory(g, enc, 1);
  std::vector<int> seq{Tokenizer::kStartOfTranscript, language_token, Tokenizer::kTranscribe,
                       Tokenizer::kNoTimestamps};
  const std::size_t prompt = seq.size();
  seq.insert(seq.end(), reference.begin(), reference.end());
  const nn::Mat& logits = model.decode(g, mem, seq, 1).value();
  std::vector<int> out;
  for (std::size_t pos = prompt - 1; pos < seq.size(); ++pos) {
    Eigen::Index best = 0;
    logits.row(static_cast<Eigen::Index>(pos)).maxCoeff(&best);
    if (best == Tokenizer::kEndOfText) break;
    out.push_back(static_cast<int>(best));
  }
  return out;
}

std::vector<std::string> teacher_force_decode(const model::Seq2SeqModel& model, const std::vector<nn::Mat>& segments,
                                              const std::vector<int>& language_tokens,
                                              const std::vector<std::string>& references) {
  if (segments.empty()) throw ConfigError("no segments to decode");
  if (segments.size() != references.size() || segments.size() != language_tokens.size())
    throw ConfigError("segments, languages and references differ in count");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto ref = model.tokenizer().encode(references[i]);
    out.push_back(model.tokenizer().decode(teacher_force_tokens(model, segments[i], language_tokens[i], ref)));
  }
  return out;
}

}  // namespace megtext::eval
