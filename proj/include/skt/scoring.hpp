#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skt/core.hpp"
#include "skt/matcher.hpp"
#include "skt/numword.hpp"

namespace skt::scoring {

// Seconds for the timed subtests (S1/S3/S6/S7), omission counts for the
// memory subtests (S2/S8/S9). fallback_used marks the detection-failure
// value 60 and only ever occurs for S3/S6/S7.
struct RawScore {
  SubtestId subtest = SubtestId::S1;
  double value = 0.0;
  bool fallback_used = false;
  std::vector<matcher::MatchResult> matched;
  std::vector<std::string> diagnostics;
};

// How the completion timestamp of a timed subtest is picked:
//   LastExpected - end of the last token that belongs to the expected set
//   LastWord     - end of the last subject token, regardless of content
//                  (robust when detection is unreliable)
enum class TimedMode { LastExpected, LastWord };

std::string timed_mode_name(TimedMode mode);

struct NegationConfig {
  std::string mode = "rule";  // "rule" or "command"
  int window = 3;
  std::vector<std::string> lexicon = matcher::kDefaultNegationLexicon;
  std::string command;  // required when mode == "command"
};

struct ScoringConfig {
  matcher::MatchPolicy match;
  TimedMode s6_mode = TimedMode::LastExpected;
  NegationConfig negation;
  numword::Lexicon dialect = numword::Lexicon::builtin();

  static ScoringConfig from_json_file(const std::string& path);
  static ScoringConfig from_json(const nlohmann::json& j, const std::string& origin);
  nlohmann::json to_json() const;  // effective config, for manifests/hashing
  std::unique_ptr<matcher::NegationFilter> make_negation_filter() const;
  void validate(const std::string& origin) const;
};

inline constexpr double kFallbackSeconds = 60.0;
inline constexpr double kMaxSeconds = 60.0;

// Picture naming: time from task onset to the end of the last recognized
// expected object, clamped to [0,60]. No match at all yields 60 plus a
// diagnostic (not a fallback flag; the fallback rule belongs to S3/S6/S7).
RawScore score_naming_s1(const SubtestRecord& record, double threshold);
RawScore score_naming_s1(const SubtestRecord& record, const matcher::MatchPolicy& policy);

// Immediate/delayed recall (S2/S8): omitted objects = expected - recognized.
RawScore score_recall(const SubtestRecord& record, double threshold);
RawScore score_recall(const SubtestRecord& record, const matcher::MatchPolicy& policy);

// Recognition (S9): like recall, but hits pass through the negation filter
// first ("kein Hut" must not count as naming the hat).
RawScore score_recognition_s9(const SubtestRecord& record, double threshold,
                              const matcher::NegationFilter& filter);
RawScore score_recognition_s9(const SubtestRecord& record, const matcher::MatchPolicy& policy,
                              const matcher::NegationFilter& filter);

// Timed response-set subtests (S3 number reading, S6 counting, S7 letter
// interference). A token is a valid response if it belongs to the expected
// set; durations run from task_onset_s to the end of the last valid token
// (LastExpected) or the last subject token (LastWord). No valid token at
// all: value = 60 with fallback_used = true.
RawScore score_timed_set(const SubtestRecord& record, double threshold, TimedMode mode);
RawScore score_timed_set(const SubtestRecord& record, const matcher::MatchPolicy& policy,
                         TimedMode mode, const numword::Lexicon& dialect);

// Validates the record, checks the answer-key kind, then dispatches to the
// scorer configured for the subtest.
RawScore score_record(const SubtestRecord& record, const ScoringConfig& config);

}  // namespace skt::scoring
