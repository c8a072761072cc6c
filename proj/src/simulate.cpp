#include "skt/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "skt/errors.hpp"
#include "skt/json_io.hpp"
#include "skt/numword.hpp"

namespace skt::sim {

// ---- RNG ----

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng Rng::for_subject(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed ^ (0xA5A5A5A55A5A5A5AULL + index * 0x9E3779B97F4A7C15ULL);
  Rng rng(s);
  rng.next_u64();  // warm up so adjacent indices decorrelate
  rng.next_u64();
  return rng;
}

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal(double mean, double sd) {
  // Box-Muller; u1 in (0,1] so the log never sees zero.
  double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  double u2 = uniform();
  double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
  return mean + sd * z;
}

int Rng::uniform_int(int lo, int hi) {
  if (hi < lo) std::swap(lo, hi);
  std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(next_u64() % span);
}

bool Rng::bernoulli(double p) { return uniform() < p; }

// ---- config ----

namespace {

const std::array<metrics::Group, 3> kGroups = {metrics::Group::NCI, metrics::Group::MCI,
                                               metrics::Group::DEM};

std::map<metrics::Group, double> group_map_from_json(const nlohmann::json& j,
                                                     const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": must be an object");
  std::map<metrics::Group, double> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto g = metrics::group_from_name(it.key());
    if (!g || *g == metrics::Group::All)
      throw ValidationError(where + ": unknown group \"" + it.key() + "\"");
    if (!it.value().is_number())
      throw ValidationError(where + ": values must be numbers");
    out[*g] = it.value().get<double>();
  }
  for (metrics::Group g : kGroups) {
    if (!out.count(g))
      throw ValidationError(where + ": missing group " + metrics::group_name(g));
  }
  return out;
}

nlohmann::json group_map_to_json(const std::map<metrics::Group, double>& m) {
  nlohmann::json j;
  for (const auto& [g, v] : m) j[metrics::group_name(g)] = v;
  return j;
}

void check_rates(const std::map<metrics::Group, double>& m, const std::string& name,
                 const std::string& origin) {
  for (const auto& [g, v] : m) {
    if (v < 0.0 || v > 1.0)
      throw ValidationError(origin + ": " + name + "." + metrics::group_name(g) +
                            " outside [0,1]");
  }
}

}  // namespace

SimConfig SimConfig::from_json_file(const std::string& path) {
  return from_json(io::load_json_file(path), path);
}

SimConfig SimConfig::from_json(const nlohmann::json& j, const std::string& origin) {
  if (!j.is_object()) throw ValidationError(origin + ": sim config must be an object");
  SimConfig c;
  if (j.contains("n_subjects")) {
    if (!j["n_subjects"].is_number_integer())
      throw ValidationError(origin + ": n_subjects must be an integer");
    c.n_subjects = j["n_subjects"].get<int>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer())
      throw ValidationError(origin + ": seed must be an integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("group_mix")) c.group_mix = group_map_from_json(j["group_mix"], origin + ".group_mix");
  if (j.contains("items_named_mean"))
    c.items_named_mean = group_map_from_json(j["items_named_mean"], origin + ".items_named_mean");
  if (j.contains("asr_sub_rate"))
    c.asr_sub_rate = group_map_from_json(j["asr_sub_rate"], origin + ".asr_sub_rate");
  if (j.contains("asr_del_rate"))
    c.asr_del_rate = group_map_from_json(j["asr_del_rate"], origin + ".asr_del_rate");
  if (j.contains("asr_ins_rate"))
    c.asr_ins_rate = group_map_from_json(j["asr_ins_rate"], origin + ".asr_ins_rate");
  if (j.contains("hallucination_rate_fast_speech")) {
    if (!j["hallucination_rate_fast_speech"].is_number())
      throw ValidationError(origin + ": hallucination_rate_fast_speech must be a number");
    c.hallucination_rate_fast_speech = j["hallucination_rate_fast_speech"].get<double>();
  }
  if (j.contains("fallback_rate"))
    c.fallback_rate = group_map_from_json(j["fallback_rate"], origin + ".fallback_rate");
  c.validate(origin);
  return c;
}

void SimConfig::validate(const std::string& origin) const {
  if (n_subjects < 4) throw ValidationError(origin + ": n_subjects must be >= 4");
  double mix_sum = 0.0;
  for (const auto& [g, v] : group_mix) {
    if (v < 0.0) throw ValidationError(origin + ": group_mix values must be >= 0");
    mix_sum += v;
  }
  if (std::abs(mix_sum - 1.0) > 1e-9)
    throw ValidationError(origin + ": group_mix must sum to 1");
  for (const auto& [g, v] : items_named_mean) {
    if (v < 0.0 || v > 12.0)
      throw ValidationError(origin + ": items_named_mean must be within [0,12]");
  }
  check_rates(asr_sub_rate, "asr_sub_rate", origin);
  check_rates(asr_del_rate, "asr_del_rate", origin);
  check_rates(asr_ins_rate, "asr_ins_rate", origin);
  check_rates(fallback_rate, "fallback_rate", origin);
  if (hallucination_rate_fast_speech < 0.0 || hallucination_rate_fast_speech > 1.0)
    throw ValidationError(origin + ": hallucination_rate_fast_speech outside [0,1]");
}

nlohmann::json SimConfig::to_json() const {
  nlohmann::json j;
  j["n_subjects"] = n_subjects;
  j["seed"] = seed;
  j["group_mix"] = group_map_to_json(group_mix);
  j["items_named_mean"] = group_map_to_json(items_named_mean);
  j["asr_sub_rate"] = group_map_to_json(asr_sub_rate);
  j["asr_del_rate"] = group_map_to_json(asr_del_rate);
  j["asr_ins_rate"] = group_map_to_json(asr_ins_rate);
  j["hallucination_rate_fast_speech"] = hallucination_rate_fast_speech;
  j["fallback_rate"] = group_map_to_json(fallback_rate);
  return j;
}

// ---- task material ----

namespace {

const std::vector<std::string>& sim_objects() {
  static const std::vector<std::string> objects = {
      "Hut",  "Ball",  "Schere", "Tasse", "Schlüssel", "Baum",
      "Hund", "Blume", "Auto",   "Fisch", "Lampe",     "Buch"};
  return objects;
}

const std::map<std::string, std::vector<std::string>>& sim_synonyms() {
  static const std::map<std::string, std::vector<std::string>> syn = {
      {"Tasse", {"Becher"}}, {"Auto", {"Wagen"}}, {"Hut", {"Mütze"}}};
  return syn;
}

const std::vector<std::string>& sim_numbers() {
  static const std::vector<std::string> numbers = {"14", "38", "47", "52", "66",
                                                   "71", "83", "29", "95", "60"};
  return numbers;
}

constexpr int kCountMin = 40;
constexpr int kCountMax = 50;
constexpr int kLetterTaskLen = 20;
constexpr double kOnset = 2.0;

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> fillers = {"äh",   "und",  "dann", "also", "das",
                                                   "war",  "da",   "ich",  "ja",   "genau"};
  return fillers;
}

ExpectedResponse object_expected() {
  ExpectedResponse e;
  e.kind = ResponseKind::ObjectSet;
  e.items = sim_objects();
  e.synonyms = sim_synonyms();
  return e;
}

ExpectedResponse number_expected() {
  ExpectedResponse e;
  e.kind = ResponseKind::NumberSet;
  e.items = sim_numbers();
  return e;
}

ExpectedResponse count_expected() {
  ExpectedResponse e;
  e.kind = ResponseKind::CountRange;
  e.count_min = kCountMin;
  e.count_max = kCountMax;
  return e;
}

ExpectedResponse letter_expected() {
  ExpectedResponse e;
  e.kind = ResponseKind::LetterSet;
  e.items = {"a", "b"};
  return e;
}

// Lays `texts` out evenly between onset and onset+duration; the final token
// ends exactly at onset+duration, so the timed raw score realizes the drawn
// duration.
std::vector<WordToken> lay_out(const std::vector<std::string>& texts, double duration) {
  std::vector<WordToken> tokens;
  if (texts.empty()) return tokens;
  double n = static_cast<double>(texts.size());
  double slot = duration / n;
  double word_len = std::min(0.35, slot * 0.8);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    WordToken t;
    t.text = texts[i];
    t.end_s = kOnset + slot * static_cast<double>(i + 1);
    t.start_s = t.end_s - word_len;
    tokens.push_back(std::move(t));
  }
  return tokens;
}

std::string junk_word(Rng& rng) {
  static const std::string alphabet = "bcdfghjklmnpqrstvwxz";
  int len = rng.uniform_int(4, 7);
  std::string w;
  for (int i = 0; i < len; ++i)
    w.push_back(alphabet[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(alphabet.size()) - 1))]);
  return w;
}

double clamp(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

int clamp_int(int v, int lo, int hi) { return std::min(hi, std::max(lo, v)); }

struct SubjectDraws {
  int items_s1 = 0;    // objects named in the naming task
  int items_s2 = 0;    // recalled immediately
  int items_s8 = 0;    // recalled after delay
  int items_s9 = 0;    // recognized
  double dur_s1 = 0.0;
  double dur_s3 = 0.0;
  double dur_s6 = 0.0;
  double dur_s7 = 0.0;
  int count_to = 0;    // final count reached in the counting task
  int fillers = 0;     // hesitation words per memory-task transcript
};

SubjectDraws draw_subject(Rng& rng, const SimConfig& config, metrics::Group group,
                          double theta) {
  SubjectDraws d;
  double named_mean = config.items_named_mean.at(group);
  d.items_s1 = clamp_int(static_cast<int>(std::lround(rng.normal(named_mean, 1.2))), 1, 12);
  d.items_s2 = clamp_int(
      static_cast<int>(std::lround(rng.normal(0.80 * d.items_s1, 1.0))), 0, 12);
  d.items_s8 = clamp_int(
      static_cast<int>(std::lround(rng.normal(0.80 * d.items_s2, 0.8))), 0, 12);
  d.items_s9 = clamp_int(
      static_cast<int>(std::lround(rng.normal(0.90 * d.items_s1 + 0.5, 1.0))), 0, 12);
  d.dur_s1 = clamp(12.0 + 38.0 * theta + rng.normal(0.0, 1.5), 5.0, 58.0);
  d.dur_s3 = clamp(10.0 + 30.0 * theta + rng.normal(0.0, 1.2), 6.0, 58.0);
  d.dur_s6 = clamp(15.0 + 35.0 * theta + rng.normal(0.0, 1.5), 8.0, 58.0);
  d.dur_s7 = clamp(12.0 + 34.0 * theta + rng.normal(0.0, 1.2), 6.0, 58.0);
  d.count_to = rng.uniform_int(kCountMin + 1, kCountMax - 1);
  d.fillers = clamp_int(static_cast<int>(std::lround((1.0 - theta) * 6.0 + rng.normal(0.0, 1.0))),
                        0, 10);
  return d;
}

// Interleaves `content` with `n_fillers` hesitation words, keeping the final
// content word last so it carries the completion timestamp.
std::vector<std::string> with_fillers(const std::vector<std::string>& content, int n_fillers,
                                      Rng& rng) {
  std::vector<std::string> out = content;
  for (int i = 0; i < n_fillers; ++i) {
    const auto& fillers = filler_words();
    std::string f = fillers[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(fillers.size()) - 1))];
    int max_pos = std::max(0, static_cast<int>(out.size()) - 1);
    out.insert(out.begin() + rng.uniform_int(0, max_pos), f);
  }
  return out;
}

std::vector<std::string> shuffled_objects(Rng& rng) {
  std::vector<std::string> names = sim_objects();
  rng.shuffle(names);
  return names;
}

SubtestRecord make_record(const std::string& subject_id, const SubjectMeta& meta,
                          SubtestId subtest, ExpectedResponse expected,
                          std::vector<WordToken> tokens, Source source) {
  SubtestRecord r;
  r.subject_id = subject_id;
  r.subtest = subtest;
  r.task_onset_s = kOnset;
  r.expected = std::move(expected);
  r.transcript.tokens = std::move(tokens);
  r.transcript.source = source;
  r.transcript.speaker = Speaker::Subject;
  r.subject_meta = meta;
  return r;
}

std::vector<SubtestRecord> build_truth_records(const std::string& subject_id,
                                               const SubjectMeta& meta,
                                               const SubjectDraws& draws, Rng& rng) {
  std::vector<SubtestRecord> records;

  // Naming: the named objects spread over the task duration.
  {
    std::vector<std::string> order = shuffled_objects(rng);
    std::vector<std::string> named(order.begin(), order.begin() + draws.items_s1);
    std::vector<std::string> texts = with_fillers(named, draws.fillers, rng);
    records.push_back(make_record(subject_id, meta, SubtestId::S1, object_expected(),
                                  lay_out(texts, draws.dur_s1), Source::GroundTruth));
  }

  // Immediate recall.
  {
    std::vector<std::string> order = shuffled_objects(rng);
    std::vector<std::string> recalled(order.begin(), order.begin() + draws.items_s2);
    std::vector<std::string> texts = with_fillers(recalled, draws.fillers, rng);
    double dur = 4.0 + 1.2 * static_cast<double>(texts.size());
    records.push_back(make_record(subject_id, meta, SubtestId::S2, object_expected(),
                                  lay_out(texts, std::min(dur, 55.0)), Source::GroundTruth));
  }

  // Number reading.
  {
    std::vector<std::string> words;
    for (const std::string& n : sim_numbers())
      words.push_back(numword::to_german_word(std::stoi(n)));
    records.push_back(make_record(subject_id, meta, SubtestId::S3, number_expected(),
                                  lay_out(words, draws.dur_s3), Source::GroundTruth));
  }

  // Counting upward to count_to.
  {
    std::vector<std::string> words;
    for (int v = kCountMin - 4; v <= draws.count_to; ++v)
      words.push_back(numword::to_german_word(v));
    records.push_back(make_record(subject_id, meta, SubtestId::S6, count_expected(),
                                  lay_out(words, draws.dur_s6), Source::GroundTruth));
  }

  // Letter interference task.
  {
    std::vector<std::string> letters;
    for (int i = 0; i < kLetterTaskLen; ++i)
      letters.push_back(rng.bernoulli(0.5) ? "a" : "b");
    records.push_back(make_record(subject_id, meta, SubtestId::S7, letter_expected(),
                                  lay_out(letters, draws.dur_s7), Source::GroundTruth));
  }

  // Delayed recall.
  {
    std::vector<std::string> order = shuffled_objects(rng);
    std::vector<std::string> recalled(order.begin(), order.begin() + draws.items_s8);
    std::vector<std::string> texts = with_fillers(recalled, std::max(0, draws.fillers - 1), rng);
    double dur = 4.0 + 1.3 * static_cast<double>(texts.size());
    records.push_back(make_record(subject_id, meta, SubtestId::S8, object_expected(),
                                  lay_out(texts, std::min(dur, 55.0)), Source::GroundTruth));
  }

  // Recognition: recognized items named, about half the misses explicitly
  // rejected ("kein Hut"), which the negation filter must discard.
  {
    std::vector<std::string> order = shuffled_objects(rng);
    std::vector<std::string> texts(order.begin(), order.begin() + draws.items_s9);
    for (std::size_t i = static_cast<std::size_t>(draws.items_s9); i < order.size(); ++i) {
      if (rng.bernoulli(0.5)) {
        texts.push_back("kein");
        texts.push_back(order[i]);
      }
    }
    texts = with_fillers(texts, std::max(0, draws.fillers - 2), rng);
    double dur = 5.0 + 1.1 * static_cast<double>(texts.size());
    records.push_back(make_record(subject_id, meta, SubtestId::S9, object_expected(),
                                  lay_out(texts, std::min(dur, 55.0)), Source::GroundTruth));
  }

  return records;
}

bool is_valid_timed_token(const SubtestRecord& record, const std::string& token_text) {
  if (record.subtest == SubtestId::S7) {
    for (const std::string& item : record.expected.items) {
      if (token_text == item) return true;
    }
    return false;
  }
  auto v = numword::parse_number_word(token_text);
  if (!v) return false;
  if (record.subtest == SubtestId::S6)
    return *v >= *record.expected.count_min && *v <= *record.expected.count_max;
  for (const std::string& item : record.expected.items) {
    if (*v == std::stoi(item)) return true;
  }
  return false;
}

// Word-level corruption: substitutions, deletions, insertions at the group
// rates, plus repetition bursts on letter tokens for fast speakers and full
// detection-failure events for the timed subtests.
SubtestRecord corrupt_record(const SubtestRecord& truth, const SimConfig& config,
                             metrics::Group group, Rng& rng) {
  SubtestRecord out = truth;
  out.transcript.source = Source::Asr;
  out.transcript.tokens.clear();

  double sub_rate = config.asr_sub_rate.at(group);
  double del_rate = config.asr_del_rate.at(group);
  double ins_rate = config.asr_ins_rate.at(group);
  bool timed_set = truth.subtest == SubtestId::S3 || truth.subtest == SubtestId::S6 ||
                   truth.subtest == SubtestId::S7;
  bool wreck = timed_set && rng.bernoulli(config.fallback_rate.at(group));
  bool fast_speaker = group == metrics::Group::NCI;

  std::vector<WordToken> tokens;
  for (const WordToken& t : truth.transcript.tokens) {
    if (wreck && is_valid_timed_token(truth, t.text)) {
      WordToken broken = t;
      broken.text = junk_word(rng);
      tokens.push_back(std::move(broken));
      continue;
    }
    if (rng.bernoulli(del_rate)) continue;
    WordToken kept = t;
    if (rng.bernoulli(sub_rate)) kept.text = junk_word(rng);
    std::string placed_text = kept.text;
    double placed_end = kept.end_s;
    tokens.push_back(std::move(kept));
    if (rng.bernoulli(ins_rate)) {
      WordToken ins;
      ins.text = junk_word(rng);
      ins.start_s = placed_end + 0.02;
      ins.end_s = ins.start_s + 0.15;
      tokens.push_back(std::move(ins));
    }
    if (truth.subtest == SubtestId::S7 && fast_speaker && !wreck &&
        (placed_text == "a" || placed_text == "b") &&
        rng.bernoulli(config.hallucination_rate_fast_speech)) {
      int repeats = rng.uniform_int(1, 3);
      const std::string& letter = placed_text;
      double base = placed_end;
      for (int k = 1; k <= repeats; ++k) {
        WordToken echo;
        echo.text = letter;
        echo.start_s = base + 0.22 * k;
        echo.end_s = echo.start_s + 0.15;
        tokens.push_back(std::move(echo));
      }
    }
  }

  // Insertions and echoes can land past the next original token; restore the
  // sorted-by-start invariant without disturbing relative word order.
  std::stable_sort(tokens.begin(), tokens.end(),
                   [](const WordToken& a, const WordToken& b) { return a.start_s < b.start_s; });
  out.transcript.tokens = std::move(tokens);
  return out;
}

}  // namespace

// ---- cohort generation ----

std::vector<SimSubject> generate_cohort(const SimConfig& config) {
  return generate_cohort(config, scoring::ScoringConfig{});
}

std::vector<SimSubject> generate_cohort(const SimConfig& config,
                                        const scoring::ScoringConfig& scoring_config) {
  config.validate("sim config");

  // Largest-remainder allocation keeps the group sizes exact for any n.
  std::vector<int> counts(kGroups.size(), 0);
  {
    std::vector<double> exact(kGroups.size());
    int assigned = 0;
    for (std::size_t i = 0; i < kGroups.size(); ++i) {
      exact[i] = config.group_mix.at(kGroups[i]) * config.n_subjects;
      counts[i] = static_cast<int>(std::floor(exact[i]));
      assigned += counts[i];
    }
    std::vector<std::size_t> order(kGroups.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return exact[a] - std::floor(exact[a]) > exact[b] - std::floor(exact[b]);
    });
    for (int r = 0; r < config.n_subjects - assigned; ++r)
      counts[order[static_cast<std::size_t>(r) % order.size()]]++;
  }

  // Interleave group assignment across indices so index-based splits stay
  // balanced.
  std::vector<metrics::Group> assignment;
  assignment.reserve(static_cast<std::size_t>(config.n_subjects));
  {
    std::vector<int> remaining = counts;
    Rng mix_rng(config.seed ^ 0xC0FFEE123456789AULL);
    for (int i = 0; i < config.n_subjects; ++i) {
      int total_left = remaining[0] + remaining[1] + remaining[2];
      int pick = mix_rng.uniform_int(1, total_left);
      std::size_t g = 0;
      while (pick > remaining[g]) {
        pick -= remaining[g];
        ++g;
      }
      --remaining[g];
      assignment.push_back(kGroups[g]);
    }
  }

  std::vector<SimSubject> cohort(static_cast<std::size_t>(config.n_subjects));
  for (int i = 0; i < config.n_subjects; ++i) {
    Rng rng = Rng::for_subject(config.seed, static_cast<std::uint64_t>(i));
    SimSubject& subject = cohort[static_cast<std::size_t>(i)];
    subject.group = assignment[static_cast<std::size_t>(i)];

    char id[32];
    std::snprintf(id, sizeof(id), "sim_%04d", i);
    subject.subject_id = id;

    switch (subject.group) {
      case metrics::Group::NCI: subject.true_total = rng.uniform_int(0, 4); break;
      case metrics::Group::MCI: subject.true_total = rng.uniform_int(5, 8); break;
      default: subject.true_total = rng.uniform_int(9, 27); break;
    }
    double theta = static_cast<double>(subject.true_total) / 27.0;

    subject.age_years = clamp_int(static_cast<int>(std::lround(rng.normal(74.0, 9.0))), 50, 89);
    double iq_draw = rng.uniform();
    subject.iq_band = iq_draw < 0.2   ? IqBand::Below90
                      : iq_draw < 0.8 ? IqBand::Band90to110
                                      : IqBand::Above110;

    SubjectMeta meta;
    meta.age_years = subject.age_years;
    meta.iq_band = subject.iq_band;
    meta.expert_total = subject.true_total;

    SubjectDraws draws = draw_subject(rng, config, subject.group, theta);
    subject.truth_records = build_truth_records(subject.subject_id, meta, draws, rng);

    for (SubtestRecord& truth : subject.truth_records) {
      scoring::RawScore raw = scoring::score_record(truth, scoring_config);
      subject.true_raw[truth.subtest] = raw.value;
      meta.expert_raw[truth.subtest] = raw.value;
    }
    for (SubtestRecord& truth : subject.truth_records) truth.subject_meta = meta;

    subject.asr_records.reserve(subject.truth_records.size());
    for (const SubtestRecord& truth : subject.truth_records)
      subject.asr_records.push_back(corrupt_record(truth, config, subject.group, rng));

    subject.word_count = 0;
    for (const SubtestRecord& r : subject.asr_records)
      subject.word_count += static_cast<int>(r.transcript.tokens.size());
  }
  return cohort;
}

// ---- pitfall study ----

PitfallStudy run_pitfall_study(const SimConfig& config,
                               const scoring::ScoringConfig& scoring_config) {
  PitfallStudy study;
  study.cohort = generate_cohort(config, scoring_config);

  std::vector<metrics::EvalRow> rows;
  std::map<std::string, metrics::Group> grouping;
  std::map<metrics::Group, GroupFallbackStats> fallback;
  std::map<metrics::Group, std::pair<std::vector<double>, std::vector<double>>> group_points;
  std::pair<std::vector<double>, std::vector<double>> pooled_points;

  for (const SimSubject& subject : study.cohort) {
    grouping[subject.subject_id] = subject.group;
    fallback[subject.group].subjects++;

    for (std::size_t k = 0; k < subject.asr_records.size(); ++k) {
      const SubtestRecord& asr = subject.asr_records[k];
      const SubtestRecord& truth = subject.truth_records[k];
      scoring::RawScore raw = scoring::score_record(asr, scoring_config);
      double expert = subject.true_raw.at(asr.subtest);

      metrics::EvalRow row;
      row.subject = subject.subject_id;
      row.subtest = asr.subtest;
      row.source = Source::Asr;
      row.auto_raw = raw.value;
      row.expert_raw = expert;
      std::string ref_text, hyp_text;
      for (const WordToken& t : truth.transcript.tokens) ref_text += t.text + " ";
      for (const WordToken& t : asr.transcript.tokens) hyp_text += t.text + " ";
      row.ref_words = metrics::tokenize_for_wer(ref_text);
      row.hyp_words = metrics::tokenize_for_wer(hyp_text);
      rows.push_back(std::move(row));

      metrics::EvalRow gt_row;
      gt_row.subject = subject.subject_id;
      gt_row.subtest = asr.subtest;
      gt_row.source = Source::GroundTruth;
      gt_row.auto_raw = expert;
      gt_row.expert_raw = expert;
      rows.push_back(std::move(gt_row));

      group_points[subject.group].first.push_back(raw.value);
      group_points[subject.group].second.push_back(expert);
      pooled_points.first.push_back(raw.value);
      pooled_points.second.push_back(expert);

      if (raw.fallback_used) {
        GroupFallbackStats& fb = fallback[subject.group];
        fb.events++;
        fb.mean_abs_error += std::abs(raw.value - expert);
      }
    }
  }

  study.reports = metrics::subgroup_report(rows, grouping);

  PitfallSummary& summary = study.summary;
  summary.pooled_r = metrics::pearson(pooled_points.first, pooled_points.second);
  double min_r = 1.0;
  for (const auto& [g, pts] : group_points) {
    double r = metrics::pearson(pts.first, pts.second);
    summary.group_r[g] = r;
    min_r = std::min(min_r, r);
  }
  summary.gap_pooled_minus_nci = summary.pooled_r - summary.group_r.at(metrics::Group::NCI);
  summary.gap_pooled_minus_min_group = summary.pooled_r - min_r;

  for (auto& [g, fb] : fallback) {
    if (fb.events > 0) fb.mean_abs_error /= fb.events;
    fb.rate_per_subject =
        fb.subjects > 0 ? static_cast<double>(fb.events) / fb.subjects : 0.0;
  }
  summary.fallback = std::move(fallback);

  summary.confound_balanced_accuracy =
      confound_baseline(study.cohort, &summary.confound_threshold_words);
  std::vector<SimSubject> permuted = permute_groups(study.cohort, config.seed ^ 0xBADC0DEULL);
  summary.confound_balanced_accuracy_permuted = confound_baseline(permuted);

  return study;
}

// ---- word-count confound ----

namespace {

struct LabeledCount {
  double words = 0.0;
  bool dem = false;
};

double balanced_accuracy(const std::vector<LabeledCount>& points, double threshold) {
  int tp = 0, fn = 0, tn = 0, fp = 0;
  for (const LabeledCount& p : points) {
    bool predicted_dem = p.words <= threshold;
    if (p.dem && predicted_dem) ++tp;
    if (p.dem && !predicted_dem) ++fn;
    if (!p.dem && !predicted_dem) ++tn;
    if (!p.dem && predicted_dem) ++fp;
  }
  double sens = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  double spec = tn + fp > 0 ? static_cast<double>(tn) / (tn + fp) : 0.0;
  return 0.5 * (sens + spec);
}

}  // namespace

double confound_baseline(const std::vector<SimSubject>& cohort) {
  return confound_baseline(cohort, nullptr);
}

double confound_baseline(const std::vector<SimSubject>& cohort, double* threshold_out) {
  std::vector<LabeledCount> train, test;
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    LabeledCount p;
    p.words = static_cast<double>(cohort[i].word_count);
    p.dem = cohort[i].group == metrics::Group::DEM;
    (i % 2 == 0 ? train : test).push_back(p);
  }
  auto has_both = [](const std::vector<LabeledCount>& pts) {
    bool dem = false, other = false;
    for (const LabeledCount& p : pts) (p.dem ? dem : other) = true;
    return dem && other;
  };
  if (!has_both(train) || !has_both(test))
    throw ValidationError("confound_baseline: cohort half contains a single class only");

  // Candidate thresholds: midpoints between adjacent distinct word counts.
  std::vector<double> counts;
  for (const LabeledCount& p : train) counts.push_back(p.words);
  std::sort(counts.begin(), counts.end());
  counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
  std::vector<double> candidates;
  candidates.push_back(counts.front() - 1.0);
  for (std::size_t i = 1; i < counts.size(); ++i)
    candidates.push_back(0.5 * (counts[i - 1] + counts[i]));
  candidates.push_back(counts.back() + 1.0);

  double best_threshold = candidates.front();
  double best_acc = -1.0;
  for (double t : candidates) {
    double acc = balanced_accuracy(train, t);
    if (acc > best_acc) {
      best_acc = acc;
      best_threshold = t;
    }
  }
  if (threshold_out) *threshold_out = best_threshold;
  return balanced_accuracy(test, best_threshold);
}

std::vector<SimSubject> permute_groups(const std::vector<SimSubject>& cohort,
                                       std::uint64_t seed) {
  std::vector<std::size_t> order(cohort.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<SimSubject> out = cohort;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].group = cohort[order[i]].group;
    out[i].true_total = cohort[order[i]].true_total;
  }
  return out;
}

nlohmann::json summary_to_json(const PitfallSummary& summary) {
  nlohmann::json j;
  j["pooled_r"] = summary.pooled_r;
  nlohmann::json groups;
  for (const auto& [g, r] : summary.group_r) groups[metrics::group_name(g)] = r;
  j["group_r"] = std::move(groups);
  j["gap_pooled_minus_nci"] = summary.gap_pooled_minus_nci;
  j["gap_pooled_minus_min_group"] = summary.gap_pooled_minus_min_group;
  nlohmann::json fb;
  for (const auto& [g, stats] : summary.fallback) {
    nlohmann::json e;
    e["events"] = stats.events;
    e["subjects"] = stats.subjects;
    e["rate_per_subject"] = stats.rate_per_subject;
    e["mean_abs_error"] = stats.mean_abs_error;
    fb[metrics::group_name(g)] = std::move(e);
  }
  j["fallback"] = std::move(fb);
  j["confound"]["balanced_accuracy"] = summary.confound_balanced_accuracy;
  j["confound"]["balanced_accuracy_permuted"] = summary.confound_balanced_accuracy_permuted;
  j["confound"]["threshold_words"] = summary.confound_threshold_words;
  return j;
}

}  // namespace skt::sim
