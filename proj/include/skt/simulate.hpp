#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skt/core.hpp"
#include "skt/metrics.hpp"
#include "skt/scoring.hpp"

namespace skt::sim {

// Deterministic splittable RNG (splitmix64-based). Subject streams are
// derived from (seed, subject index), so parallel and serial generation
// produce identical cohorts.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  static Rng for_subject(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64();
  double uniform();                    // [0, 1)
  double normal(double mean, double sd);
  int uniform_int(int lo, int hi);     // inclusive
  bool bernoulli(double p);
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(0, static_cast<int>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// Cohort generation parameters. Severity-linked speech production and
// group-dependent recognition errors are the two levers that reproduce the
// pooled-vs-subgroup and word-count effects.
struct SimConfig {
  int n_subjects = 300;
  std::uint64_t seed = 42;
  std::map<metrics::Group, double> group_mix = {
      {metrics::Group::NCI, 68.0 / 158.0},
      {metrics::Group::MCI, 44.0 / 158.0},
      {metrics::Group::DEM, 46.0 / 158.0}};
  std::map<metrics::Group, double> items_named_mean = {
      {metrics::Group::NCI, 10.5}, {metrics::Group::MCI, 8.5}, {metrics::Group::DEM, 6.0}};
  std::map<metrics::Group, double> asr_sub_rate = {
      {metrics::Group::NCI, 0.02}, {metrics::Group::MCI, 0.05}, {metrics::Group::DEM, 0.12}};
  std::map<metrics::Group, double> asr_del_rate = {
      {metrics::Group::NCI, 0.01}, {metrics::Group::MCI, 0.04}, {metrics::Group::DEM, 0.10}};
  std::map<metrics::Group, double> asr_ins_rate = {
      {metrics::Group::NCI, 0.02}, {metrics::Group::MCI, 0.03}, {metrics::Group::DEM, 0.06}};
  // Probability that a letter token of a fast speaker is echoed as a
  // repetition burst by the recognizer (letter-task failure mode).
  double hallucination_rate_fast_speech = 0.35;
  std::map<metrics::Group, double> fallback_rate = {
      {metrics::Group::NCI, 0.08}, {metrics::Group::MCI, 0.10}, {metrics::Group::DEM, 0.25}};

  static SimConfig from_json_file(const std::string& path);
  static SimConfig from_json(const nlohmann::json& j, const std::string& origin);
  nlohmann::json to_json() const;
  void validate(const std::string& origin) const;
};

struct SimSubject {
  std::string subject_id;
  int true_total = 0;            // latent severity, 0..27
  metrics::Group group = metrics::Group::NCI;  // classify bands of true_total
  int age_years = 0;
  IqBand iq_band = IqBand::Band90to110;
  std::map<SubtestId, double> true_raw;  // scorer output on the truth transcripts
  std::vector<SubtestRecord> truth_records;
  std::vector<SubtestRecord> asr_records;
  int word_count = 0;  // subject tokens across the recognized transcripts
};

// Generates the cohort; truth transcripts realize each subject's latent
// severity, recognized transcripts are corrupted copies. expert_raw baked
// into subject_meta is the scorer's result on the truth transcript under
// `scoring`, so an uncorrupted cohort round-trips with agreement 1.0.
std::vector<SimSubject> generate_cohort(const SimConfig& config);
std::vector<SimSubject> generate_cohort(const SimConfig& config,
                                        const scoring::ScoringConfig& scoring);

struct GroupFallbackStats {
  int events = 0;
  int subjects = 0;
  double rate_per_subject = 0.0;  // fallback flags / subjects in group
  double mean_abs_error = 0.0;    // mean |60 - expert_raw| over fallback records
};

struct PitfallSummary {
  double pooled_r = 0.0;                       // all groups, all subtests
  std::map<metrics::Group, double> group_r;    // per-group pooled correlation
  double gap_pooled_minus_nci = 0.0;
  double gap_pooled_minus_min_group = 0.0;
  std::map<metrics::Group, GroupFallbackStats> fallback;
  double confound_balanced_accuracy = 0.0;           // word-count rule, held out
  double confound_balanced_accuracy_permuted = 0.0;  // same rule, labels shuffled
  double confound_threshold_words = 0.0;
};

struct PitfallStudy {
  std::vector<SimSubject> cohort;
  metrics::ReportBundle reports;
  PitfallSummary summary;
};

// Scores the corrupted transcripts with the real scoring module, compares
// against the baked expert values, and assembles the subgroup report plus
// the pitfall summary.
PitfallStudy run_pitfall_study(const SimConfig& config,
                               const scoring::ScoringConfig& scoring);

// Single-threshold word-count rule for DEM vs non-DEM, trained on even
// subject indices and evaluated on odd ones. Returns held-out balanced
// accuracy (mean of sensitivity and specificity), which is immune to the
// class imbalance of the default mix. Throws if either half lacks a class.
double confound_baseline(const std::vector<SimSubject>& cohort);
double confound_baseline(const std::vector<SimSubject>& cohort, double* threshold_out);

// Copy of the cohort with group labels (and the severity totals they derive
// from) shuffled across subjects; word counts stay put, severing the link
// the confound rule exploits.
std::vector<SimSubject> permute_groups(const std::vector<SimSubject>& cohort,
                                       std::uint64_t seed);

nlohmann::json summary_to_json(const PitfallSummary& summary);

}  // namespace skt::sim
