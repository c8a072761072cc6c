#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace skt {

enum class Source { GroundTruth, Asr };

enum class Speaker { Subject, Examiner };

// One recognized word with absolute timestamps (seconds from recording
// start). Invariant: 0 <= start_s <= end_s.
struct WordToken {
  std::string text;
  double start_s = 0.0;
  double end_s = 0.0;
  std::optional<double> confidence;   // [0,1] when present
  std::optional<Speaker> speaker;     // overrides the transcript default
};

// Time-stamped word sequence for one subtest recording. Tokens are kept in
// non-decreasing start_s order.
struct Transcript {
  std::vector<WordToken> tokens;
  Source source = Source::Asr;
  std::optional<Speaker> speaker;  // default speaker for untagged tokens

  Speaker effective_speaker(std::size_t token_index) const;
  bool token_is_examiner(std::size_t token_index) const;
  std::string joined_text() const;
};

// The seven subtests scoreable from audio. Subtests 4 and 5 (motor/visual)
// have no speech channel and never appear here.
enum class SubtestId { S1, S2, S3, S6, S7, S8, S9 };

inline constexpr std::array<SubtestId, 7> kAllSubtests = {
    SubtestId::S1, SubtestId::S2, SubtestId::S3, SubtestId::S6,
    SubtestId::S7, SubtestId::S8, SubtestId::S9};

int subtest_number(SubtestId id);
std::optional<SubtestId> subtest_from_number(int n);
std::string subtest_name(SubtestId id);                    // "S1".."S9"
std::optional<SubtestId> subtest_from_name(std::string_view name);

// Timed subtests score completion time in seconds; the rest count omissions.
bool is_timed_subtest(SubtestId id);
bool is_memory_subtest(SubtestId id);     // S2, S8, S9
bool is_attention_subtest(SubtestId id);  // S1, S3, S6, S7

// What the expected-response set describes.
//   ObjectSet  - named objects, synonym-expandable (S1, S2, S8, S9)
//   NumberSet  - the two-digit numbers the subject reads aloud (S3)
//   CountRange - counting task; any count inside the range is valid (S6)
//   LetterSet  - the interference-task target letters (S7)
enum class ResponseKind { ObjectSet, NumberSet, CountRange, LetterSet };

std::string response_kind_name(ResponseKind kind);
std::optional<ResponseKind> response_kind_from_name(std::string_view name);

// The task-specific answer key for one subtest.
struct ExpectedResponse {
  ResponseKind kind = ResponseKind::ObjectSet;
  std::vector<std::string> items;
  std::map<std::string, std::vector<std::string>> synonyms;  // canonical -> alternatives
  std::optional<int> count_min;  // CountRange only
  std::optional<int> count_max;
};

// IQ is only ever used as one of three bands, mirroring how the cutoff
// tables are published.
enum class IqBand { Below90, Band90to110, Above110 };

std::string iq_band_name(IqBand band);
std::optional<IqBand> iq_band_from_name(std::string_view name);

// Demographics plus optional expert (human) scores used for agreement
// reports. expert_raw may cover any subset of subtests.
struct SubjectMeta {
  int age_years = 0;
  IqBand iq_band = IqBand::Band90to110;
  std::optional<int> expert_total;
  std::map<SubtestId, double> expert_raw;
};

// Everything needed to score one subtest of one subject.
struct SubtestRecord {
  std::string subject_id;
  SubtestId subtest = SubtestId::S1;
  Transcript transcript;
  double task_onset_s = 0.0;  // instruction end; timing starts here
  ExpectedResponse expected;
  SubjectMeta subject_meta;
};

// Which answer-key kind each subtest requires.
ResponseKind expected_kind_for(SubtestId id);

// Returns human-readable violations ("WordToken.end_s < start_s @ index 3");
// empty means the record is safe to hand to any scorer.
std::vector<std::string> validate_record(const SubtestRecord& record);

}  // namespace skt
