// SPDX-License-Identifier: Apache-2.0
#include "megtext/data/manifest.hpp"

#include <cmath>
#include <fstream>
#include <regex>

#include "megtext/error.hpp"

namespace megtext::data {
namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key) {
  if (!obj.contains(key)) throw SchemaError(std::string("missing required field '") + key + "'");
  return obj.at(key);
}

double number(const json& v, const char* key) {
  if (!v.is_number()) throw SchemaError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

std::string id_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) {
    const double d = v.get<double>();
    if (d == std::floor(d)) return std::to_string(static_cast<long long>(d));
    return v.dump();
  }
  throw SchemaError("identifier fields must be strings or numbers");
}

std::string session_from_path(const std::string& path) {
  static const std::regex ses_re(R"(ses-([A-Za-z0-9]+))");
  std::smatch m;
  if (std::regex_search(path, m, ses_re)) return m[1];
  return "0";
}

// Keys consumed into typed fields; everything else is kept in `extra`.
const std::vector<std::string>& consumed_keys() {
  static const std::vector<std::string> keys{"speech", "eeg",     "duration", "language", "sentence",
                                             "sentences", "subj", "session",  "story",    "start",
                                             "end",    "audio_start", "audio_end"};
  return keys;
}

}  // namespace

void ManifestEntry::validate() const {
  if (sentence.empty()) throw SchemaError("sentence must be non-empty");
  if (!(signal_rate_hz > 0.0)) throw SchemaError("eeg.sr must be positive");
  if (!(duration_s > 0.0)) throw SchemaError("duration must be positive");
  if (std::abs((end_s - start_s) - duration_s) > kTimeToleranceS) {
    throw SchemaError("end - start disagrees with duration by more than 1 ms");
  }
  for (const auto& w : word_spans) {
    if (w.word.empty()) throw SchemaError("word spans must have a non-empty word");
    if (w.start_s > w.end_s) throw SchemaError("word '" + w.word + "' starts after it ends");
    if (w.start_s < -kTimeToleranceS || w.end_s > duration_s + kTimeToleranceS) {
      throw SchemaError("word '" + w.word + "' lies outside [0, duration]");
    }
  }
}

ManifestEntry parse_manifest_line(std::string_view line, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError(line_no, "expected a JSON object");

  ManifestEntry e;
  try {
    const json& eeg = require(obj, "eeg");
    e.signal_path = require(eeg, "path").get<std::string>();
    e.signal_rate_hz = number(require(eeg, "sr"), "eeg.sr");
    if (obj.contains("speech") && obj["speech"].is_object()) {
      e.speech_path = obj["speech"].value("path", "");
      e.speech_rate_hz = obj["speech"].value("sr", 0.0);
    }
    e.sentence = require(obj, "sentence").get<std::string>();
    e.duration_s = number(require(obj, "duration"), "duration");
    e.start_s = number(require(obj, "start"), "start");
    e.end_s = number(require(obj, "end"), "end");
    e.language = obj.value("language", std::string("English"));
    e.subject_id = id_string(require(obj, "subj"));
    e.session_id = obj.contains("session") ? id_string(obj["session"]) : session_from_path(e.signal_path);
    e.story_id = obj.contains("story") ? id_string(obj["story"]) : std::string();

    std::vector<WordSpan> raw;
    if (obj.contains("sentences")) {
      for (const auto& s : obj["sentences"]) {
        if (!s.contains("words")) continue;
        for (const auto& w : s["words"]) {
          raw.push_back({require(w, "word").get<std::string>(), number(require(w, "start"), "word.start"),
                         number(require(w, "end"), "word.end")});
        }
      }
    }
    double offset = 0.0;
    if (obj.contains("audio_start")) {
      offset = e.start_s - number(obj["audio_start"], "audio_start");
    } else {
      bool relative = true;
      for (const auto& w : raw) {
        if (w.start_s < -kTimeToleranceS || w.end_s > e.duration_s + kTimeToleranceS) relative = false;
      }
      if (!relative) offset = e.start_s;
    }
    for (auto& w : raw) {
      w.start_s -= offset;
      w.end_s -= offset;
    }
    e.word_spans = std::move(raw);

    for (const auto& [key, value] : obj.items()) {
      if (std::find(consumed_keys().begin(), consumed_keys().end(), key) == consumed_keys().end()) {
        e.extra[key] = value;
      }
    }
    e.validate();
  } catch (const SchemaError& err) {
    throw SchemaError("line " + std::to_string(line_no) + ": " + err.what());
  } catch (const json::exception& err) {
    throw SchemaError("line " + std::to_string(line_no) + ": " + err.what());
  }
  return e;
}

std::vector<ManifestEntry> parse_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw RangeError("cannot open manifest " + path.string());
  std::vector<ManifestEntry> entries;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    entries.push_back(parse_manifest_line(line, line_no));
  }
  return entries;
}

json manifest_json(const ManifestEntry& e) {
  json words = json::array();
  for (const auto& w : e.word_spans) words.push_back({{"word", w.word}, {"start", w.start_s}, {"end", w.end_s}});
  json obj = e.extra;
  if (!e.speech_path.empty()) obj["speech"] = {{"path", e.speech_path}, {"sr", e.speech_rate_hz}};
  obj["eeg"] = {{"path", e.signal_path}, {"sr", e.signal_rate_hz}};
  obj["duration"] = e.duration_s;
  obj["language"] = e.language;
  obj["sentence"] = e.sentence;
  obj["sentences"] = json::array({{{"text", e.sentence},
                                   {"start", 0.0},
                                   {"end", e.duration_s},
                                   {"duration", e.duration_s},
                                   {"words", words}}});
  obj["subj"] = e.subject_id;
  obj["session"] = e.session_id;
  obj["story"] = e.story_id;
  obj["start"] = e.start_s;
  obj["end"] = e.end_s;
  return obj;
}

std::string serialize_manifest_line(const ManifestEntry& entry) { return manifest_json(entry).dump(); }

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw RangeError("cannot write manifest " + path.string());
  for (const auto& e : entries) out << serialize_manifest_line(e) << '\n';
}

std::filesystem::path resolve_signal_path(const ManifestEntry& entry, const std::filesystem::path& manifest_dir) {
  std::filesystem::path p(entry.signal_path);
  return p.is_absolute() ? p : manifest_dir / p;
}

}  // namespace megtext::data
