#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skt/core.hpp"

namespace skt::metrics {

// Word-level alignment between a reference and a hypothesis.
// hits + substitutions + deletions == ref_len always holds. Among all
// minimum-cost alignments, the one with the most hits is reported, which
// makes every count unique.
struct AlignmentCounts {
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
  int hits = 0;
  int ref_len = 0;

  int errors() const { return substitutions + deletions + insertions; }
  double wer() const;  // errors / ref_len; can exceed 1 under heavy insertion
  double wc() const;   // hits / ref_len
};

AlignmentCounts align_words(const std::vector<std::string>& ref,
                            const std::vector<std::string>& hyp);

// Lowercases, strips punctuation, splits on whitespace.
std::vector<std::string> tokenize_for_wer(std::string_view transcript_text);

// Sample Pearson correlation. Throws on length mismatch, fewer than two
// points, or a constant vector (undefined correlation).
double pearson(const std::vector<double>& x, const std::vector<double>& y);

enum class Group { NCI, MCI, DEM, All };

std::string group_name(Group group);
std::optional<Group> group_from_name(std::string_view name);

// Band mapping on the expert total: 0-4 NCI, 5-8 MCI, >= 9 DEM.
Group group_of_total(int expert_total);

// One agreement data point: an automatic raw score (with the transcript
// source that produced it) next to the expert raw score, plus the word
// sequences for transcription-quality metrics when both sides are known.
struct EvalRow {
  std::string subject;
  SubtestId subtest = SubtestId::S1;
  Source source = Source::Asr;
  double auto_raw = 0.0;
  std::optional<double> expert_raw;
  std::vector<std::string> ref_words;  // ground-truth words
  std::vector<std::string> hyp_words;  // recognized words
};

struct SubtestStats {
  std::optional<double> pearson_gt;   // auto-on-GT-transcript vs expert
  std::optional<double> pearson_asr;  // auto-on-ASR-transcript vs expert
  std::optional<double> wer;          // corpus-level
  std::optional<double> wc;
  int n = 0;  // subjects contributing at least one data point
};

struct GroupReport {
  Group group = Group::All;
  int n = 0;  // subjects in the group
  std::map<SubtestId, SubtestStats> per_subtest;
  SubtestStats overall;  // pooled across subtests within the group
};

struct ReportBundle {
  std::vector<GroupReport> reports;  // NCI, MCI, DEM (where populated), then All
  std::vector<std::string> warnings;
};

// Correlations are computed per (subtest, transcript source) over subjects;
// WER/WC are corpus-level sums, not means of per-row rates. Groups with
// fewer than two subjects are omitted with a warning; undefined cells stay
// empty with a warning.
ReportBundle subgroup_report(const std::vector<EvalRow>& rows,
                             const std::map<std::string, Group>& grouping);

std::string report_csv(const ReportBundle& bundle);
std::string report_markdown(const ReportBundle& bundle);
nlohmann::json report_json(const ReportBundle& bundle);

}  // namespace skt::metrics
