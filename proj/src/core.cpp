#include "skt/core.hpp"

#include <algorithm>
#include <sstream>

#include "skt/textutil.hpp"

namespace skt {

Speaker Transcript::effective_speaker(std::size_t token_index) const {
  const WordToken& tok = tokens.at(token_index);
  if (tok.speaker) return *tok.speaker;
  if (speaker) return *speaker;
  return Speaker::Subject;
}

bool Transcript::token_is_examiner(std::size_t token_index) const {
  return effective_speaker(token_index) == Speaker::Examiner;
}

std::string Transcript::joined_text() const {
  std::string out;
  for (const WordToken& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t.text;
  }
  return out;
}

int subtest_number(SubtestId id) {
  switch (id) {
    case SubtestId::S1: return 1;
    case SubtestId::S2: return 2;
    case SubtestId::S3: return 3;
    case SubtestId::S6: return 6;
    case SubtestId::S7: return 7;
    case SubtestId::S8: return 8;
    case SubtestId::S9: return 9;
  }
  return 0;
}

std::optional<SubtestId> subtest_from_number(int n) {
  switch (n) {
    case 1: return SubtestId::S1;
    case 2: return SubtestId::S2;
    case 3: return SubtestId::S3;
    case 6: return SubtestId::S6;
    case 7: return SubtestId::S7;
    case 8: return SubtestId::S8;
    case 9: return SubtestId::S9;
    default: return std::nullopt;
  }
}

std::string subtest_name(SubtestId id) {
  return "S" + std::to_string(subtest_number(id));
}

std::optional<SubtestId> subtest_from_name(std::string_view name) {
  if (name.size() < 2 || (name[0] != 'S' && name[0] != 's')) return std::nullopt;
  int n = 0;
  for (std::size_t i = 1; i < name.size(); ++i) {
    if (name[i] < '0' || name[i] > '9') return std::nullopt;
    n = n * 10 + (name[i] - '0');
  }
  return subtest_from_number(n);
}

bool is_timed_subtest(SubtestId id) {
  return id == SubtestId::S1 || id == SubtestId::S3 || id == SubtestId::S6 ||
         id == SubtestId::S7;
}

bool is_memory_subtest(SubtestId id) {
  return id == SubtestId::S2 || id == SubtestId::S8 || id == SubtestId::S9;
}

bool is_attention_subtest(SubtestId id) { return is_timed_subtest(id); }

std::string response_kind_name(ResponseKind kind) {
  switch (kind) {
    case ResponseKind::ObjectSet: return "object_set";
    case ResponseKind::NumberSet: return "number_set";
    case ResponseKind::CountRange: return "count_range";
    case ResponseKind::LetterSet: return "letter_set";
  }
  return "object_set";
}

std::optional<ResponseKind> response_kind_from_name(std::string_view name) {
  if (name == "object_set") return ResponseKind::ObjectSet;
  if (name == "number_set") return ResponseKind::NumberSet;
  if (name == "count_range") return ResponseKind::CountRange;
  if (name == "letter_set") return ResponseKind::LetterSet;
  return std::nullopt;
}

std::string iq_band_name(IqBand band) {
  switch (band) {
    case IqBand::Below90: return "below90";
    case IqBand::Band90to110: return "90to110";
    case IqBand::Above110: return "above110";
  }
  return "90to110";
}

std::optional<IqBand> iq_band_from_name(std::string_view name) {
  if (name == "below90") return IqBand::Below90;
  if (name == "90to110") return IqBand::Band90to110;
  if (name == "above110") return IqBand::Above110;
  return std::nullopt;
}

ResponseKind expected_kind_for(SubtestId id) {
  switch (id) {
    case SubtestId::S3: return ResponseKind::NumberSet;
    case SubtestId::S6: return ResponseKind::CountRange;
    case SubtestId::S7: return ResponseKind::LetterSet;
    default: return ResponseKind::ObjectSet;
  }
}

namespace {

bool text_empty_after_trim(const std::string& s) {
  for (char32_t c : text::utf8_decode(s)) {
    if (!text::is_space(c)) return false;
  }
  return true;
}

}  // namespace

std::vector<std::string> validate_record(const SubtestRecord& record) {
  std::vector<std::string> violations;
  auto add = [&](const std::string& msg) { violations.push_back(msg); };

  const auto& tokens = record.transcript.tokens;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const WordToken& t = tokens[i];
    std::string at = " @ index " + std::to_string(i);
    if (t.start_s < 0.0) add("WordToken.start_s < 0" + at);
    if (t.end_s < t.start_s) add("WordToken.end_s < start_s" + at);
    if (text_empty_after_trim(t.text)) add("WordToken.text empty after trim" + at);
    if (t.confidence && (*t.confidence < 0.0 || *t.confidence > 1.0))
      add("WordToken.confidence outside [0,1]" + at);
    if (i > 0 && t.start_s < tokens[i - 1].start_s)
      add("Transcript.tokens not sorted by start_s" + at);
  }

  if (record.task_onset_s < 0.0) add("SubtestRecord.task_onset_s < 0");
  if (!tokens.empty() && record.task_onset_s > tokens.front().start_s)
    add("SubtestRecord.task_onset_s > first token start_s");

  const ExpectedResponse& ex = record.expected;
  ResponseKind want = expected_kind_for(record.subtest);
  if (ex.kind != want)
    add("ExpectedResponse.kind " + response_kind_name(ex.kind) +
        " incompatible with subtest " + subtest_name(record.subtest));

  if (ex.kind == ResponseKind::CountRange) {
    if (!ex.count_min || !ex.count_max) {
      add("ExpectedResponse.count_min/count_max required for count_range");
    } else if (*ex.count_min > *ex.count_max) {
      add("ExpectedResponse.count_min > count_max");
    }
  } else {
    if (ex.items.empty()) add("ExpectedResponse.items empty");
    if (ex.count_min || ex.count_max)
      add("ExpectedResponse.count_min/count_max only valid for count_range");
  }
  for (const auto& [key, vals] : ex.synonyms) {
    if (std::find(ex.items.begin(), ex.items.end(), key) == ex.items.end())
      add("ExpectedResponse.synonyms key not in items: \"" + key + "\"");
    for (const auto& v : vals) {
      if (text_empty_after_trim(v))
        add("ExpectedResponse.synonyms empty variant for \"" + key + "\"");
    }
  }

  const SubjectMeta& meta = record.subject_meta;
  if (meta.age_years < 18) add("SubjectMeta.age_years < 18");
  if (meta.expert_total && (*meta.expert_total < 0 || *meta.expert_total > 27))
    add("SubjectMeta.expert_total outside [0,27]");
  for (const auto& [sid, value] : meta.expert_raw) {
    if (value < 0.0)
      add("SubjectMeta.expert_raw negative for " + subtest_name(sid));
  }

  if (text_empty_after_trim(record.subject_id)) add("SubtestRecord.subject_id empty");

  return violations;
}

}  // namespace skt
