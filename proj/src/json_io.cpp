#include "skt/json_io.hpp"

#include <fstream>
#include <sstream>

#include "skt/errors.hpp"

namespace skt::io {

namespace {

// nlohmann reports a byte offset; turn it into 1-based line/column.
std::pair<int, int> line_col_at(const std::string& text, std::size_t byte) {
  int line = 1;
  int col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    auto [line, col] = line_col_at(text, byte);
    std::ostringstream msg;
    msg << origin << ":" << line << ":" << col << ": " << e.what();
    throw ParseError(msg.str(), line, col);
  }
}

json load_json_file(const std::string& path) {
  return parse_json(read_text_file(path), path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << content;
  if (!out) throw ValidationError("write failed: " + path);
}

const json& require_field(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end())
    throw ValidationError(where + ": missing required field \"" + key + "\"");
  return *it;
}

double require_number(const json& j, const char* key, const std::string& where) {
  const json& v = require_field(j, key, where);
  if (!v.is_number())
    throw ValidationError(where + ": field \"" + key + "\" must be a number");
  return v.get<double>();
}

std::string require_string(const json& j, const char* key, const std::string& where) {
  const json& v = require_field(j, key, where);
  if (!v.is_string())
    throw ValidationError(where + ": field \"" + key + "\" must be a string");
  return v.get<std::string>();
}

std::string source_name(Source source) {
  return source == Source::GroundTruth ? "ground_truth" : "asr";
}

Source source_from_json(const json& j, const std::string& where) {
  if (!j.is_string())
    throw ValidationError(where + ": \"source\" must be a string");
  std::string s = j.get<std::string>();
  if (s == "asr") return Source::Asr;
  if (s == "ground_truth" || s == "gt") return Source::GroundTruth;
  throw ValidationError(where + ": unknown source \"" + s +
                        "\" (expected \"asr\" or \"ground_truth\")");
}

namespace {

std::string speaker_name(Speaker s) {
  return s == Speaker::Examiner ? "examiner" : "subject";
}

Speaker speaker_from_json(const json& j, const std::string& where) {
  if (!j.is_string()) throw ValidationError(where + ": \"speaker\" must be a string");
  std::string s = j.get<std::string>();
  if (s == "subject") return Speaker::Subject;
  if (s == "examiner") return Speaker::Examiner;
  throw ValidationError(where + ": unknown speaker \"" + s + "\"");
}

}  // namespace

json to_json(const WordToken& token) {
  json j;
  j["text"] = token.text;
  j["start_s"] = token.start_s;
  j["end_s"] = token.end_s;
  if (token.confidence) j["confidence"] = *token.confidence;
  if (token.speaker) j["speaker"] = speaker_name(*token.speaker);
  return j;
}

json to_json(const Transcript& transcript) {
  json j;
  j["source"] = source_name(transcript.source);
  if (transcript.speaker) j["speaker"] = speaker_name(*transcript.speaker);
  json toks = json::array();
  for (const WordToken& t : transcript.tokens) toks.push_back(to_json(t));
  j["tokens"] = std::move(toks);
  return j;
}

WordToken word_token_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": token must be an object");
  WordToken t;
  t.text = require_string(j, "text", where);
  t.start_s = require_number(j, "start_s", where);
  t.end_s = require_number(j, "end_s", where);
  if (j.contains("confidence")) {
    if (!j["confidence"].is_number())
      throw ValidationError(where + ": \"confidence\" must be a number");
    t.confidence = j["confidence"].get<double>();
  }
  if (j.contains("speaker")) t.speaker = speaker_from_json(j["speaker"], where);
  return t;
}

Transcript transcript_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": transcript must be an object");
  Transcript t;
  t.source = source_from_json(require_field(j, "source", where), where);
  if (j.contains("speaker")) t.speaker = speaker_from_json(j["speaker"], where);
  const json& toks = require_field(j, "tokens", where);
  if (!toks.is_array()) throw ValidationError(where + ": \"tokens\" must be an array");
  t.tokens.reserve(toks.size());
  for (std::size_t i = 0; i < toks.size(); ++i) {
    t.tokens.push_back(
        word_token_from_json(toks[i], where + ".tokens[" + std::to_string(i) + "]"));
  }
  return t;
}

json to_json(const ExpectedResponse& expected) {
  json j;
  j["kind"] = response_kind_name(expected.kind);
  j["items"] = expected.items;
  if (!expected.synonyms.empty()) {
    json syn = json::object();
    for (const auto& [k, v] : expected.synonyms) syn[k] = v;
    j["synonyms"] = std::move(syn);
  }
  if (expected.count_min) j["count_min"] = *expected.count_min;
  if (expected.count_max) j["count_max"] = *expected.count_max;
  return j;
}

ExpectedResponse expected_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected must be an object");
  ExpectedResponse e;
  std::string kind = require_string(j, "kind", where);
  auto k = response_kind_from_name(kind);
  if (!k) throw ValidationError(where + ": unknown expected kind \"" + kind + "\"");
  e.kind = *k;
  if (j.contains("items")) {
    const json& items = j["items"];
    if (!items.is_array()) throw ValidationError(where + ": \"items\" must be an array");
    for (const auto& it : items) {
      if (!it.is_string())
        throw ValidationError(where + ": \"items\" entries must be strings");
      e.items.push_back(it.get<std::string>());
    }
  }
  if (j.contains("synonyms")) {
    const json& syn = j["synonyms"];
    if (!syn.is_object()) throw ValidationError(where + ": \"synonyms\" must be an object");
    for (auto it = syn.begin(); it != syn.end(); ++it) {
      if (!it.value().is_array())
        throw ValidationError(where + ": synonym values must be arrays");
      std::vector<std::string> vals;
      for (const auto& v : it.value()) {
        if (!v.is_string())
          throw ValidationError(where + ": synonym variants must be strings");
        vals.push_back(v.get<std::string>());
      }
      e.synonyms[it.key()] = std::move(vals);
    }
  }
  if (j.contains("count_min")) {
    if (!j["count_min"].is_number_integer())
      throw ValidationError(where + ": \"count_min\" must be an integer");
    e.count_min = j["count_min"].get<int>();
  }
  if (j.contains("count_max")) {
    if (!j["count_max"].is_number_integer())
      throw ValidationError(where + ": \"count_max\" must be an integer");
    e.count_max = j["count_max"].get<int>();
  }
  return e;
}

json to_json(const SubjectMeta& meta) {
  json j;
  j["age_years"] = meta.age_years;
  j["iq_band"] = iq_band_name(meta.iq_band);
  if (meta.expert_total) j["expert_total"] = *meta.expert_total;
  if (!meta.expert_raw.empty()) {
    json raw = json::object();
    for (const auto& [sid, v] : meta.expert_raw) raw[subtest_name(sid)] = v;
    j["expert_raw"] = std::move(raw);
  }
  return j;
}

SubjectMeta subject_meta_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": meta must be an object");
  SubjectMeta m;
  const json& age = require_field(j, "age_years", where);
  if (!age.is_number_integer())
    throw ValidationError(where + ": \"age_years\" must be an integer");
  m.age_years = age.get<int>();
  std::string band = require_string(j, "iq_band", where);
  auto b = iq_band_from_name(band);
  if (!b)
    throw ValidationError(where + ": unknown iq_band \"" + band +
                          "\" (expected below90|90to110|above110)");
  m.iq_band = *b;
  if (j.contains("expert_total")) {
    if (!j["expert_total"].is_number_integer())
      throw ValidationError(where + ": \"expert_total\" must be an integer");
    m.expert_total = j["expert_total"].get<int>();
  }
  if (j.contains("expert_raw")) {
    const json& raw = j["expert_raw"];
    if (!raw.is_object()) throw ValidationError(where + ": \"expert_raw\" must be an object");
    for (auto it = raw.begin(); it != raw.end(); ++it) {
      auto sid = subtest_from_name(it.key());
      if (!sid) throw ValidationError(where + ": unknown subtest \"" + it.key() + "\"");
      if (!it.value().is_number())
        throw ValidationError(where + ": expert_raw values must be numbers");
      m.expert_raw[*sid] = it.value().get<double>();
    }
  }
  return m;
}

json to_json(const SubtestRecord& record) {
  json j;
  j["subtest"] = subtest_name(record.subtest);
  j["task_onset_s"] = record.task_onset_s;
  j["transcript"] = to_json(record.transcript);
  j["expected"] = to_json(record.expected);
  return j;
}

std::vector<SubtestRecord> records_from_bundle(const json& bundle, const std::string& where) {
  const json* subjects = &bundle;
  if (bundle.is_object() && bundle.contains("subjects")) subjects = &bundle["subjects"];
  if (!subjects->is_array())
    throw ValidationError(where + ": records bundle must be an array of subject documents");

  std::vector<SubtestRecord> out;
  for (std::size_t si = 0; si < subjects->size(); ++si) {
    const json& subj = (*subjects)[si];
    std::string sw = where + ".subjects[" + std::to_string(si) + "]";
    if (!subj.is_object()) throw ValidationError(sw + ": subject must be an object");
    std::string subject_id = require_string(subj, "subject_id", sw);
    SubjectMeta meta = subject_meta_from_json(require_field(subj, "meta", sw), sw + ".meta");
    const json& subtests = require_field(subj, "subtests", sw);
    if (!subtests.is_array())
      throw ValidationError(sw + ": \"subtests\" must be an array");
    for (std::size_t ti = 0; ti < subtests.size(); ++ti) {
      const json& entry = subtests[ti];
      std::string tw = sw + ".subtests[" + std::to_string(ti) + "]";
      if (!entry.is_object()) throw ValidationError(tw + ": entry must be an object");
      SubtestRecord r;
      r.subject_id = subject_id;
      r.subject_meta = meta;
      std::string sname = require_string(entry, "subtest", tw);
      auto sid = subtest_from_name(sname);
      if (!sid) throw ValidationError(tw + ": unknown subtest \"" + sname + "\"");
      r.subtest = *sid;
      r.task_onset_s = require_number(entry, "task_onset_s", tw);
      r.transcript =
          transcript_from_json(require_field(entry, "transcript", tw), tw + ".transcript");
      r.expected = expected_from_json(require_field(entry, "expected", tw), tw + ".expected");
      out.push_back(std::move(r));
    }
  }
  return out;
}

json bundle_from_records(const std::vector<SubtestRecord>& records) {
  // Group by subject, preserving first-appearance order.
  json subjects = json::array();
  std::map<std::string, std::size_t> index;
  for (const SubtestRecord& r : records) {
    auto it = index.find(r.subject_id);
    if (it == index.end()) {
      json subj;
      subj["subject_id"] = r.subject_id;
      subj["meta"] = to_json(r.subject_meta);
      subj["subtests"] = json::array();
      subjects.push_back(std::move(subj));
      it = index.emplace(r.subject_id, subjects.size() - 1).first;
    }
    subjects[it->second]["subtests"].push_back(to_json(r));
  }
  return subjects;
}

}  // namespace skt::io
