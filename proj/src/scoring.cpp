#include "skt/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "skt/errors.hpp"
#include "skt/json_io.hpp"
#include "skt/textutil.hpp"

namespace skt::scoring {

namespace {

void require_subtest(const SubtestRecord& record, std::initializer_list<SubtestId> allowed,
                     const char* scorer) {
  for (SubtestId id : allowed) {
    if (record.subtest == id) return;
  }
  throw ValidationError(std::string(scorer) + ": wrong subtest " +
                        subtest_name(record.subtest));
}

void require_kind(const SubtestRecord& record, ResponseKind kind, const char* scorer) {
  if (record.expected.kind != kind)
    throw ValidationError(std::string(scorer) + ": expected kind " +
                          response_kind_name(kind) + ", got " +
                          response_kind_name(record.expected.kind));
}

double clamp_seconds(double v) {
  return std::min(kMaxSeconds, std::max(0.0, v));
}

bool has_subject_tokens(const Transcript& t) {
  for (std::size_t i = 0; i < t.tokens.size(); ++i) {
    if (!t.token_is_examiner(i)) return true;
  }
  return false;
}

double max_end(const std::vector<matcher::MatchResult>& matched) {
  double m = 0.0;
  for (const auto& r : matched) m = std::max(m, r.end_s);
  return m;
}

}  // namespace

std::string timed_mode_name(TimedMode mode) {
  return mode == TimedMode::LastWord ? "last_word" : "last_expected";
}

RawScore score_naming_s1(const SubtestRecord& record, double threshold) {
  matcher::MatchPolicy policy;
  policy.threshold = threshold;
  return score_naming_s1(record, policy);
}

RawScore score_naming_s1(const SubtestRecord& record, const matcher::MatchPolicy& policy) {
  require_subtest(record, {SubtestId::S1}, "score_naming_s1");
  require_kind(record, ResponseKind::ObjectSet, "score_naming_s1");

  RawScore score;
  score.subtest = record.subtest;
  score.matched = matcher::find_expected(record.transcript, record.expected, policy);
  if (score.matched.empty()) {
    score.value = kFallbackSeconds;
    score.fallback_used = false;
    score.diagnostics.push_back("no-match-default-60");
    return score;
  }
  score.value = clamp_seconds(max_end(score.matched) - record.task_onset_s);
  return score;
}

RawScore score_recall(const SubtestRecord& record, double threshold) {
  matcher::MatchPolicy policy;
  policy.threshold = threshold;
  return score_recall(record, policy);
}

RawScore score_recall(const SubtestRecord& record, const matcher::MatchPolicy& policy) {
  require_subtest(record, {SubtestId::S2, SubtestId::S8}, "score_recall");
  require_kind(record, ResponseKind::ObjectSet, "score_recall");

  RawScore score;
  score.subtest = record.subtest;
  score.matched = matcher::find_expected(record.transcript, record.expected, policy);
  score.value = static_cast<double>(record.expected.items.size() - score.matched.size());
  if (!has_subject_tokens(record.transcript))
    score.diagnostics.push_back("no-verbal-response");
  return score;
}

RawScore score_recognition_s9(const SubtestRecord& record, double threshold,
                              const matcher::NegationFilter& filter) {
  matcher::MatchPolicy policy;
  policy.threshold = threshold;
  return score_recognition_s9(record, policy, filter);
}

RawScore score_recognition_s9(const SubtestRecord& record, const matcher::MatchPolicy& policy,
                              const matcher::NegationFilter& filter) {
  require_subtest(record, {SubtestId::S9}, "score_recognition_s9");
  require_kind(record, ResponseKind::ObjectSet, "score_recognition_s9");

  RawScore score;
  score.subtest = record.subtest;
  auto hits = matcher::find_expected(record.transcript, record.expected, policy);
  score.matched = filter.filter(record.transcript, hits);
  score.value = static_cast<double>(record.expected.items.size() - score.matched.size());
  if (!has_subject_tokens(record.transcript))
    score.diagnostics.push_back("no-verbal-response");
  return score;
}

namespace {

// A token is a valid S3/S6/S7 response if it belongs to the expected set.
// Number reading accepts both digit tokens and number words; counting
// accepts any integer (word or digits) inside the configured range.
bool is_valid_response_token(const std::string& raw_text, const ExpectedResponse& expected,
                             const matcher::MatchPolicy& policy,
                             const numword::Lexicon& dialect) {
  std::string token = text::strip_punct(raw_text);
  if (token.empty()) return false;

  if (expected.kind == ResponseKind::CountRange) {
    auto v = numword::parse_number_word(token, dialect);
    return v && *v >= *expected.count_min && *v <= *expected.count_max;
  }

  auto token_value = numword::parse_number_word(token, dialect);
  for (const std::string& item : expected.items) {
    if (matcher::matches(token, item, policy)) return true;
    if (expected.kind == ResponseKind::NumberSet && token_value) {
      auto item_value = numword::parse_number_word(item, dialect);
      if (item_value && *item_value == *token_value) return true;
    }
    auto syn = expected.synonyms.find(item);
    if (syn != expected.synonyms.end()) {
      for (const std::string& s : syn->second) {
        if (matcher::matches(token, s, policy)) return true;
      }
    }
  }
  return false;
}

}  // namespace

RawScore score_timed_set(const SubtestRecord& record, double threshold, TimedMode mode) {
  matcher::MatchPolicy policy;
  policy.threshold = threshold;
  return score_timed_set(record, policy, mode, numword::Lexicon::builtin());
}

RawScore score_timed_set(const SubtestRecord& record, const matcher::MatchPolicy& policy,
                         TimedMode mode, const numword::Lexicon& dialect) {
  require_subtest(record, {SubtestId::S3, SubtestId::S6, SubtestId::S7}, "score_timed_set");
  require_kind(record, expected_kind_for(record.subtest), "score_timed_set");
  if (record.expected.kind == ResponseKind::CountRange &&
      (!record.expected.count_min || !record.expected.count_max))
    throw ValidationError("score_timed_set: count_range requires count_min and count_max");

  RawScore score;
  score.subtest = record.subtest;

  const Transcript& t = record.transcript;
  bool found = false;
  double last_end = 0.0;
  for (std::size_t i = 0; i < t.tokens.size(); ++i) {
    if (t.token_is_examiner(i)) continue;
    bool valid;
    if (mode == TimedMode::LastWord) {
      valid = true;
    } else {
      valid = is_valid_response_token(t.tokens[i].text, record.expected, policy, dialect);
    }
    if (!valid) continue;
    if (!found || t.tokens[i].end_s > last_end) last_end = t.tokens[i].end_s;
    if (mode != TimedMode::LastWord) {
      matcher::MatchResult r;
      r.canonical = text::strip_punct(t.tokens[i].text);
      r.matched_surface = t.tokens[i].text;
      r.token_index = static_cast<int>(i);
      r.start_s = t.tokens[i].start_s;
      r.end_s = t.tokens[i].end_s;
      r.similarity = 1.0;
      score.matched.push_back(std::move(r));
    }
    found = true;
  }

  if (!found) {
    score.value = kFallbackSeconds;
    score.fallback_used = true;
    score.diagnostics.push_back("no-valid-response-token");
    return score;
  }
  score.value = clamp_seconds(last_end - record.task_onset_s);
  return score;
}

RawScore score_record(const SubtestRecord& record, const ScoringConfig& config) {
  std::vector<std::string> violations = validate_record(record);
  if (!violations.empty()) {
    std::string msg = "invalid record (subject " + record.subject_id + ", " +
                      subtest_name(record.subtest) + "):";
    for (const std::string& v : violations) msg += "\n  - " + v;
    throw ValidationError(msg);
  }

  switch (record.subtest) {
    case SubtestId::S1:
      return score_naming_s1(record, config.match);
    case SubtestId::S2:
    case SubtestId::S8:
      return score_recall(record, config.match);
    case SubtestId::S9: {
      auto filter = config.make_negation_filter();
      return score_recognition_s9(record, config.match, *filter);
    }
    case SubtestId::S3: {
      // Number reading: normalize spoken number words first.
      SubtestRecord normalized = record;
      normalized.transcript =
          numword::normalize_transcript(record.transcript, config.dialect).first;
      return score_timed_set(normalized, config.match, TimedMode::LastExpected,
                             config.dialect);
    }
    case SubtestId::S6:
      return score_timed_set(record, config.match, config.s6_mode, config.dialect);
    case SubtestId::S7:
      return score_timed_set(record, config.match, TimedMode::LastExpected, config.dialect);
  }
  throw ValidationError("score_record: unhandled subtest");
}

// ---- config ----

ScoringConfig ScoringConfig::from_json_file(const std::string& path) {
  return from_json(io::load_json_file(path), path);
}

ScoringConfig ScoringConfig::from_json(const nlohmann::json& j, const std::string& origin) {
  if (!j.is_object()) throw ValidationError(origin + ": scoring config must be an object");
  ScoringConfig c;

  if (j.contains("match")) {
    const auto& m = j["match"];
    if (!m.is_object()) throw ValidationError(origin + ": \"match\" must be an object");
    if (m.contains("threshold")) {
      if (!m["threshold"].is_number())
        throw ValidationError(origin + ": match.threshold must be a number");
      c.match.threshold = m["threshold"].get<double>();
    }
    if (m.contains("reference_side")) {
      std::string side = m["reference_side"].get<std::string>();
      if (side == "target") {
        c.match.reference_side = matcher::ReferenceSide::Target;
      } else if (side == "candidate") {
        c.match.reference_side = matcher::ReferenceSide::Candidate;
      } else {
        throw ValidationError(origin + ": match.reference_side must be target|candidate");
      }
    }
    if (m.contains("rounding")) {
      std::string r = m["rounding"].get<std::string>();
      if (r == "floor") {
        c.match.rounding = matcher::Rounding::Floor;
      } else if (r == "round") {
        c.match.rounding = matcher::Rounding::Round;
      } else if (r == "ceil") {
        c.match.rounding = matcher::Rounding::Ceil;
      } else {
        throw ValidationError(origin + ": match.rounding must be floor|round|ceil");
      }
    }
  }

  if (j.contains("s6_mode")) {
    std::string mode = j["s6_mode"].get<std::string>();
    if (mode == "last_expected") {
      c.s6_mode = TimedMode::LastExpected;
    } else if (mode == "last_word") {
      c.s6_mode = TimedMode::LastWord;
    } else {
      throw ValidationError(origin + ": s6_mode must be last_expected|last_word");
    }
  }

  if (j.contains("negation")) {
    const auto& n = j["negation"];
    if (!n.is_object()) throw ValidationError(origin + ": \"negation\" must be an object");
    if (n.contains("mode")) c.negation.mode = n["mode"].get<std::string>();
    if (n.contains("window")) {
      if (!n["window"].is_number_integer())
        throw ValidationError(origin + ": negation.window must be an integer");
      c.negation.window = n["window"].get<int>();
    }
    if (n.contains("lexicon")) {
      if (!n["lexicon"].is_array())
        throw ValidationError(origin + ": negation.lexicon must be an array");
      c.negation.lexicon.clear();
      for (const auto& w : n["lexicon"]) c.negation.lexicon.push_back(w.get<std::string>());
    }
    if (n.contains("command")) c.negation.command = n["command"].get<std::string>();
  }

  if (j.contains("dialect_lexicon")) {
    const auto& d = j["dialect_lexicon"];
    if (d.is_string()) {
      c.dialect = numword::Lexicon::from_json_file(d.get<std::string>());
    } else if (d.is_object()) {
      for (auto it = d.begin(); it != d.end(); ++it)
        c.dialect.add(it.key(), it.value().get<int>());
    } else {
      throw ValidationError(origin + ": dialect_lexicon must be a path or an object");
    }
  }

  c.validate(origin);
  return c;
}

void ScoringConfig::validate(const std::string& origin) const {
  if (!(match.threshold > 0.0) || match.threshold > 1.0)
    throw ValidationError(origin + ": match.threshold must be in (0,1]");
  if (negation.window < 0)
    throw ValidationError(origin + ": negation.window must be >= 0");
  if (negation.mode != "rule" && negation.mode != "command")
    throw ValidationError(origin + ": negation.mode must be rule|command");
  if (negation.mode == "command" && negation.command.empty())
    throw ValidationError(origin + ": negation.command required when mode is command");
}

nlohmann::json ScoringConfig::to_json() const {
  nlohmann::json j;
  j["match"]["threshold"] = match.threshold;
  j["match"]["reference_side"] =
      match.reference_side == matcher::ReferenceSide::Target ? "target" : "candidate";
  switch (match.rounding) {
    case matcher::Rounding::Floor: j["match"]["rounding"] = "floor"; break;
    case matcher::Rounding::Round: j["match"]["rounding"] = "round"; break;
    case matcher::Rounding::Ceil: j["match"]["rounding"] = "ceil"; break;
  }
  j["s6_mode"] = timed_mode_name(s6_mode);
  j["negation"]["mode"] = negation.mode;
  j["negation"]["window"] = negation.window;
  j["negation"]["lexicon"] = negation.lexicon;
  if (!negation.command.empty()) j["negation"]["command"] = negation.command;
  nlohmann::json lex = nlohmann::json::object();
  for (const auto& [word, value] : dialect.entries()) lex[word] = value;
  j["dialect_lexicon"] = std::move(lex);
  return j;
}

std::unique_ptr<matcher::NegationFilter> ScoringConfig::make_negation_filter() const {
  if (negation.mode == "command")
    return std::make_unique<matcher::CommandNegationFilter>(negation.command);
  return std::make_unique<matcher::RuleNegationFilter>(negation.window, negation.lexicon);
}

}  // namespace skt::scoring
