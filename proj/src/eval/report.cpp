// SPDX-License-Identifier: Apache-2.0
#include "megtext/eval/report.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <random>
#include <set>
#include <sstream>

#include "megtext/data/text.hpp"
#include "megtext/error.hpp"

namespace megtext::eval {

void to_json(nlohmann::json& j, const EvaluationReport& r) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : r.samples) samples.push_back({{"reference", s.reference}, {"hypothesis", s.hypothesis}});
  j = {{"schema_version", r.schema_version},
       {"dataset", r.dataset},
       {"mode", r.mode},
       {"baseline", r.baseline},
       {"bleu_variant", r.bleu_variant},
       {"bleu", r.bleu},
       {"rouge1", {{"f", r.rouge1.f}, {"p", r.rouge1.p}, {"r", r.rouge1.r}}},
       {"wer", r.wer},
       {"samples", samples}};
}

void from_json(const nlohmann::json& j, EvaluationReport& r) {
  r.schema_version = j.at("schema_version").get<int>();
  if (r.schema_version != kReportSchemaVersion)
    throw SchemaError("unsupported report schema version " + std::to_string(r.schema_version));
  r.dataset = j.at("dataset").get<std::string>();
  r.mode = j.at("mode").get<std::string>();
  r.baseline = j.at("baseline").get<std::string>();
  r.bleu_variant = j.at("bleu_variant").get<std::string>();
  r.bleu = j.at("bleu").get<std::array<double, 4>>();
  r.rouge1 = {j.at("rouge1").at("f").get<double>(), j.at("rouge1").at("p").get<double>(),
              j.at("rouge1").at("r").get<double>()};
  r.wer = j.at("wer").get<double>();
  r.samples.clear();
  for (const auto& s : j.at("samples"))
    r.samples.push_back({s.at("reference").get<std::string>(), s.at("hypothesis").get<std::string>()});
}

EvaluationReport score_transcripts(const std::vector<std::string>& references,
                                   const std::vector<std::string>& hypotheses) {
  EvaluationReport r;
  for (int n = 1; n <= 4; ++n) r.bleu[static_cast<std::size_t>(n - 1)] = bleu_n(references, hypotheses, n);
  r.rouge1 = rouge1(references, hypotheses);
  r.wer = wer(references, hypotheses);
  for (std::size_t i = 0; i < references.size(); ++i) r.samples.push_back({references[i], hypotheses[i]});
  return r;
}

std::string transcript_block(const EvaluationReport& r) {
  std::ostringstream out;
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    if (i) out << '\n';
    out << "Predicted: " << r.samples[i].hypothesis << '\n' << "True: " << r.samples[i].reference << '\n';
  }
  return out.str();
}

void write_report(const std::filesystem::path& dir, const std::string& stem, const EvaluationReport& r) {
  std::filesystem::create_directories(dir);
  std::ofstream(dir / (stem + ".json")) << nlohmann::json(r).dump(2) << '\n';
  std::ofstream(dir / (stem + ".txt")) << transcript_block(r);
}

EvaluationReport read_report(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw std::runtime_error("cannot open " + json_path.string());
  return nlohmann::json::parse(in).get<EvaluationReport>();
}

EvaluationReport evaluate_corpus(const model::Seq2SeqModel& model, const train::Dataset& data,
                                 const GenerationConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw ConfigError("evaluation set is empty");
  std::vector<nn::Mat> segments;
  std::vector<int> langs;
  std::vector<std::string> refs;
  for (const auto& ex : data.examples) {
    segments.push_back(train::to_input(ex.window));
    langs.push_back(ex.language_token);
    refs.push_back(data::normalize_text(ex.entry.sentence));
  }
  const std::vector<std::string> hyps = cfg.mode == DecodeMode::free_run
                                            ? generate(model, segments, langs, cfg)
                                            : teacher_force_decode(model, segments, langs, refs);
  EvaluationReport r = score_transcripts(refs, hyps);
  r.dataset = data.name;
  r.mode = to_string(cfg.mode);
  return r;
}

train::Dataset noise_dataset(const train::Dataset& data, std::uint64_t seed) {
  train::Dataset noisy = data;
  noisy.name = data.name + "+noise";
  std::mt19937_64 rng(seed ^ 0x4E015EULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& ex : noisy.examples)
    for (Eigen::Index i = 0; i < ex.window.samples.size(); ++i) ex.window.samples.data()[i] = normal(rng);
  return noisy;
}

EvaluationReport noise_baseline(const model::Seq2SeqModel& model, const train::Dataset& data,
                                const GenerationConfig& cfg) {
  EvaluationReport r = evaluate_corpus(model, noise_dataset(data, cfg.seed), cfg);
  r.dataset = data.name;
  r.baseline = "noise";
  return r;
}

void to_json(nlohmann::json& j, const ProbeResult& r) {
  j = {{"accuracy", r.accuracy}, {"chance", r.chance},   {"ratio", r.ratio},
       {"clips", r.clips},       {"correct", r.correct}, {"vocabulary", r.vocabulary}};
}

ProbeResult word_probe_eval(const model::Seq2SeqModel& model, const train::Dataset& clips,
                            const std::vector<std::string>& vocabulary, const GenerationConfig& cfg) {
  std::set<std::string> vocab;
  for (const auto& w : vocabulary) vocab.insert(data::normalize_text(w));
  vocab.erase("");
  if (vocab.empty()) throw ConfigError("word probe needs a non-empty vocabulary");
  if (clips.empty()) throw ConfigError("word probe needs clips");
  ProbeResult r;
  r.vocabulary = vocab.size();
  r.chance = 1.0 / static_cast<double>(vocab.size());
  std::mt19937_64 rng(cfg.seed);
  GenerationConfig free = cfg;
  free.mode = DecodeMode::free_run;
  for (const auto& ex : clips.examples) {
    const auto toks = generate_tokens(model, train::to_input(ex.window), ex.language_token, free, rng);
    if (data::normalize_text(model.tokenizer().decode(toks)) == data::normalize_text(ex.entry.sentence)) ++r.correct;
    ++r.clips;
  }
  r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.clips);
  r.ratio = r.accuracy / r.chance;
  return r;
}

}  // namespace megtext::eval
