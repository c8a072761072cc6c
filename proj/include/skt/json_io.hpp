#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skt/core.hpp"

namespace skt::io {

using nlohmann::json;

// Parses text, converting parse failures into ParseError with the 1-based
// line/column computed from the error byte offset. `origin` is a filename or
// "<stdin>" used in the message.
json parse_json(const std::string& text, const std::string& origin);
json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// ---- core types <-> JSON ----
// Token: {"text":"eins","start_s":1.20,"end_s":1.55}
// Transcript: {"source":"asr","tokens":[...]}

json to_json(const WordToken& token);
json to_json(const Transcript& transcript);
json to_json(const ExpectedResponse& expected);
json to_json(const SubjectMeta& meta);
json to_json(const SubtestRecord& record);  // one entry of a subject's "subtests" array

WordToken word_token_from_json(const json& j, const std::string& where);
Transcript transcript_from_json(const json& j, const std::string& where);
ExpectedResponse expected_from_json(const json& j, const std::string& where);
SubjectMeta subject_meta_from_json(const json& j, const std::string& where);

// A records bundle is an array of subject documents:
//   [{"subject_id":"p01","meta":{...},"subtests":[{...},...]}, ...]
// Each subtest entry: {"subtest":"S1","task_onset_s":2.0,
//                      "transcript":{...},"expected":{...}}
std::vector<SubtestRecord> records_from_bundle(const json& bundle, const std::string& where);
json bundle_from_records(const std::vector<SubtestRecord>& records);

std::string source_name(Source source);
Source source_from_json(const json& j, const std::string& where);

// Helpers shared by all parsers; throw ValidationError naming `where`.
const json& require_field(const json& j, const char* key, const std::string& where);
double require_number(const json& j, const char* key, const std::string& where);
std::string require_string(const json& j, const char* key, const std::string& where);

}  // namespace skt::io
