// skt - scoring, evaluation and simulation toolkit for speech-based SKT runs.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "skt/core.hpp"
#include "skt/errors.hpp"
#include "skt/json_io.hpp"
#include "skt/metrics.hpp"
#include "skt/norms.hpp"
#include "skt/numword.hpp"
#include "skt/parallel.hpp"
#include "skt/pipeline.hpp"
#include "skt/scoring.hpp"
#include "skt/simulate.hpp"
#include "skt/subprocess.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "skt 0.1.0";

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_json_file(const fs::path& path, const json& j) {
  skt::io::write_text_file(path.string(), j.dump(2) + "\n");
}

// Every command that produces an output tree records what went in. The
// manifest deliberately contains no timestamps or job counts, so re-runs
// (serial or parallel) are byte-identical.
void write_manifest(const fs::path& out_dir, const std::string& command,
                    const std::vector<std::string>& inputs,
                    const std::map<std::string, std::string>& configs,
                    const json& effective_config) {
  json m;
  m["command"] = command;
  m["tool_version"] = kToolVersion;
  m["inputs"] = inputs;
  m["configs"] = configs;
  m["out_dir"] = out_dir.string();
  m["config_hash"] = fnv1a_hex(effective_config.dump());
  write_json_file(out_dir / "manifest.json", m);
}

skt::scoring::ScoringConfig load_scoring_config(const std::string& path) {
  if (path.empty()) return skt::scoring::ScoringConfig{};
  return skt::scoring::ScoringConfig::from_json_file(path);
}

std::vector<std::string> subject_token_texts(const skt::Transcript& transcript) {
  std::vector<std::string> texts;
  for (std::size_t i = 0; i < transcript.tokens.size(); ++i) {
    if (transcript.effective_speaker(i) == skt::Speaker::Subject)
      texts.push_back(transcript.tokens[i].text);
  }
  return texts;
}

// ---- score ----

struct ScoreArgs {
  std::string records;
  std::string config;
  std::string norms;
  std::string out;
  bool allow_example_norms = false;
  int jobs = 1;
  bool as_json = false;
};

json raw_score_json(const skt::scoring::RawScore& raw) {
  json j;
  j["value"] = raw.value;
  j["fallback_used"] = raw.fallback_used;
  j["diagnostics"] = raw.diagnostics;
  return j;
}

int cmd_score(const ScoreArgs& args) {
  auto config = load_scoring_config(args.config);
  auto table = skt::norms::NormTable::from_json_file(args.norms);
  if (table.example_only() && !args.allow_example_norms)
    throw skt::NormCellError("norm table \"" + table.name() +
                             "\" is marked example_only (illustrative values, not the "
                             "published tables); pass --allow-example-norms to use it");

  auto records =
      skt::io::records_from_bundle(skt::io::load_json_file(args.records), args.records);
  if (records.empty()) throw skt::ValidationError(args.records + ": no records");

  // subject -> source -> subtest -> record
  std::map<std::string, std::map<skt::Source, std::map<skt::SubtestId, const skt::SubtestRecord*>>>
      by_subject;
  for (const auto& r : records) {
    auto& slot = by_subject[r.subject_id][r.transcript.source][r.subtest];
    if (slot)
      throw skt::ValidationError(args.records + ": duplicate record for subject " +
                                 r.subject_id + ", source " +
                                 skt::io::source_name(r.transcript.source) + ", " +
                                 skt::subtest_name(r.subtest));
    slot = &r;
  }

  std::vector<std::string> subjects;
  for (const auto& [id, _] : by_subject) subjects.push_back(id);

  struct SubjectOutput {
    json doc;
    std::vector<std::string> csv_rows;
  };
  std::vector<SubjectOutput> outputs(subjects.size());

  auto score_subject = [&](std::size_t idx) {
    const std::string& id = subjects[idx];
    json doc;
    doc["subject_id"] = id;
    json sources = json::object();
    for (const auto& [source, recs] : by_subject.at(id)) {
      const skt::SubjectMeta& meta = recs.begin()->second->subject_meta;
      std::map<skt::SubtestId, skt::scoring::RawScore> raws;
      json raw_json = json::object();
      json token_texts = json::object();
      for (const auto& [sid, rec] : recs) {
        skt::scoring::RawScore raw = skt::scoring::score_record(*rec, config);
        raw_json[skt::subtest_name(sid)] = raw_score_json(raw);
        token_texts[skt::subtest_name(sid)] = subject_token_texts(rec->transcript);
        raws.emplace(sid, std::move(raw));
      }
      skt::norms::SktResult result = skt::norms::assemble_result(id, meta, raws, table);
      json block;
      block["raw"] = std::move(raw_json);
      block["result"] = skt::norms::to_json(result);
      block["token_texts"] = std::move(token_texts);
      sources[skt::io::source_name(source)] = std::move(block);

      std::string row = id + "," + skt::io::source_name(source);
      for (skt::SubtestId sid : skt::kAllSubtests) {
        auto it = result.norm_scores.find(sid);
        row += ",";
        if (it != result.norm_scores.end()) row += std::to_string(it->second);
      }
      row += "," + std::to_string(result.total) + "," + skt::norms::severity_name(result.severity) +
             "," + (result.partial ? "true" : "false");
      outputs[idx].csv_rows.push_back(std::move(row));
    }
    doc["sources"] = std::move(sources);
    outputs[idx].doc = std::move(doc);
  };

  skt::parallel_for(subjects.size(), args.jobs, score_subject);

  fs::create_directories(fs::path(args.out) / "results");
  std::string csv = "subject_id,source,S1,S2,S3,S6,S7,S8,S9,total,severity,partial\n";
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    write_json_file(fs::path(args.out) / "results" / (subjects[i] + ".json"), outputs[i].doc);
    for (const std::string& row : outputs[i].csv_rows) csv += row + "\n";
  }
  skt::io::write_text_file((fs::path(args.out) / "summary.csv").string(), csv);

  json effective;
  effective["scoring"] = config.to_json();
  effective["allow_example_norms"] = args.allow_example_norms;
  effective["norm_table"] = table.name();
  write_manifest(args.out, "score", {args.records, args.norms},
                 {{"scoring_config", args.config.empty() ? "<defaults>" : args.config}},
                 effective);

  if (args.as_json) {
    json out;
    out["command"] = "score";
    out["subjects"] = subjects.size();
    out["out_dir"] = args.out;
    std::cout << out.dump(2) << "\n";
  } else {
    std::cerr << "scored " << subjects.size() << " subject(s) -> " << args.out << "\n";
  }
  return 0;
}

// ---- evaluate ----

struct EvaluateArgs {
  std::string auto_dir;
  std::string expert;
  std::string groups = "auto";
  std::string format = "csv";
  std::string out;
  bool as_json = false;
};

struct ExpertEntry {
  std::optional<int> total;
  std::map<skt::SubtestId, double> raw;
};

std::map<std::string, ExpertEntry> load_expert(const std::string& path) {
  json j = skt::io::load_json_file(path);
  if (!j.is_object()) throw skt::ValidationError(path + ": expert file must be an object");
  std::map<std::string, ExpertEntry> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& id = it.key();
    const json& e = it.value();
    std::string where = path + "." + id;
    if (!e.is_object()) throw skt::ValidationError(where + ": must be an object");
    ExpertEntry entry;
    if (e.contains("expert_total")) {
      if (!e["expert_total"].is_number_integer())
        throw skt::ValidationError(where + ": expert_total must be an integer");
      entry.total = e["expert_total"].get<int>();
    }
    if (e.contains("expert_raw")) {
      const json& raw = e["expert_raw"];
      if (!raw.is_object()) throw skt::ValidationError(where + ": expert_raw must be an object");
      for (auto rit = raw.begin(); rit != raw.end(); ++rit) {
        auto sid = skt::subtest_from_name(rit.key());
        if (!sid)
          throw skt::ValidationError(where + ": unknown subtest \"" + rit.key() + "\"");
        if (!rit.value().is_number())
          throw skt::ValidationError(where + ": expert_raw." + rit.key() + " must be a number");
        entry.raw[*sid] = rit.value().get<double>();
      }
    }
    out[id] = std::move(entry);
  }
  return out;
}

int cmd_evaluate(const EvaluateArgs& args) {
  auto expert = load_expert(args.expert);

  fs::path results_dir = fs::path(args.auto_dir) / "results";
  if (!fs::is_directory(results_dir))
    throw skt::ValidationError(args.auto_dir + ": not a score output directory (missing results/)");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(results_dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<skt::metrics::EvalRow> rows;
  std::map<std::string, skt::metrics::Group> grouping;
  std::set<std::string> overlap;

  std::map<std::string, skt::metrics::Group> group_file;
  if (args.groups != "auto") {
    json gj = skt::io::load_json_file(args.groups);
    if (!gj.is_object())
      throw skt::ValidationError(args.groups + ": groups file must be an object");
    for (auto it = gj.begin(); it != gj.end(); ++it) {
      auto g = skt::metrics::group_from_name(it.value().get<std::string>());
      if (!g)
        throw skt::ValidationError(args.groups + ": unknown group \"" +
                                   it.value().get<std::string>() + "\" for subject " + it.key());
      group_file[it.key()] = *g;
    }
  }

  for (const fs::path& file : files) {
    json doc = skt::io::load_json_file(file.string());
    std::string id = skt::io::require_string(doc, "subject_id", file.string());
    auto eit = expert.find(id);
    if (eit == expert.end()) continue;  // unscored by the expert: not comparable
    overlap.insert(id);

    if (args.groups == "auto") {
      if (!eit->second.total)
        throw skt::ValidationError(args.expert + "." + id +
                                   ": expert_total required for --groups auto");
      grouping[id] = skt::metrics::group_of_total(*eit->second.total);
    } else {
      auto git = group_file.find(id);
      if (git == group_file.end())
        throw skt::ValidationError(args.groups + ": no group for subject " + id);
      grouping[id] = git->second;
    }

    const json& sources = skt::io::require_field(doc, "sources", file.string());
    auto texts_of = [&](const char* source, const std::string& subtest) -> std::vector<std::string> {
      if (!sources.contains(source)) return {};
      const json& block = sources[source];
      if (!block.contains("token_texts") || !block["token_texts"].contains(subtest)) return {};
      std::string joined;
      for (const auto& w : block["token_texts"][subtest])
        joined += w.get<std::string>() + " ";
      return skt::metrics::tokenize_for_wer(joined);
    };

    for (auto sit = sources.begin(); sit != sources.end(); ++sit) {
      skt::Source source = skt::io::source_from_json(json(sit.key()), file.string());
      const json& raw = skt::io::require_field(sit.value(), "raw", file.string());
      for (auto rit = raw.begin(); rit != raw.end(); ++rit) {
        auto sid = skt::subtest_from_name(rit.key());
        if (!sid)
          throw skt::ValidationError(file.string() + ": unknown subtest \"" + rit.key() + "\"");
        skt::metrics::EvalRow row;
        row.subject = id;
        row.subtest = *sid;
        row.source = source;
        row.auto_raw = skt::io::require_number(rit.value(), "value", file.string());
        auto xit = eit->second.raw.find(*sid);
        if (xit != eit->second.raw.end()) row.expert_raw = xit->second;
        if (source == skt::Source::Asr) {
          row.ref_words = texts_of("ground_truth", rit.key());
          row.hyp_words = texts_of("asr", rit.key());
          if (row.ref_words.empty()) row.hyp_words.clear();  // no reference, no WER
        }
        rows.push_back(std::move(row));
      }
    }
  }

  if (overlap.empty())
    throw skt::ValidationError("no overlapping subjects between " + args.auto_dir + " and " +
                               args.expert);

  skt::metrics::ReportBundle bundle = skt::metrics::subgroup_report(rows, grouping);
  for (const std::string& w : bundle.warnings) std::cerr << "warning: " << w << "\n";

  std::string format = args.as_json ? "json" : args.format;
  if (format == "csv") {
    std::cout << skt::metrics::report_csv(bundle);
  } else if (format == "md") {
    std::cout << skt::metrics::report_markdown(bundle);
  } else if (format == "json") {
    std::cout << skt::metrics::report_json(bundle).dump(2) << "\n";
  } else {
    throw skt::ValidationError("unknown --format \"" + format + "\" (csv|md|json)");
  }

  if (!args.out.empty()) {
    fs::create_directories(args.out);
    skt::io::write_text_file((fs::path(args.out) / "report.csv").string(),
                             skt::metrics::report_csv(bundle));
    skt::io::write_text_file((fs::path(args.out) / "report.md").string(),
                             skt::metrics::report_markdown(bundle));
    write_json_file(fs::path(args.out) / "report.json", skt::metrics::report_json(bundle));
    json effective;
    effective["groups"] = args.groups;
    write_manifest(args.out, "evaluate", {args.auto_dir, args.expert},
                   {{"groups", args.groups}}, effective);
  }
  return 0;
}

// ---- simulate ----

struct SimulateArgs {
  std::string config;
  std::string scoring_config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool as_json = false;
};

int cmd_simulate(const SimulateArgs& args) {
  skt::sim::SimConfig config;
  if (!args.config.empty()) config = skt::sim::SimConfig::from_json_file(args.config);
  if (args.seed) config.seed = *args.seed;
  auto scoring = load_scoring_config(args.scoring_config);

  skt::sim::PitfallStudy study = skt::sim::run_pitfall_study(config, scoring);

  std::vector<skt::SubtestRecord> all_records;
  json expert = json::object();
  json groups = json::object();
  for (const skt::sim::SimSubject& subject : study.cohort) {
    for (const auto& r : subject.truth_records) all_records.push_back(r);
    for (const auto& r : subject.asr_records) all_records.push_back(r);
    json e;
    e["expert_total"] = subject.true_total;
    json raw = json::object();
    for (const auto& [sid, v] : subject.true_raw) raw[skt::subtest_name(sid)] = v;
    e["expert_raw"] = std::move(raw);
    expert[subject.subject_id] = std::move(e);
    groups[subject.subject_id] = skt::metrics::group_name(subject.group);
  }

  fs::create_directories(args.out);
  write_json_file(fs::path(args.out) / "cohort.json", skt::io::bundle_from_records(all_records));
  write_json_file(fs::path(args.out) / "expert.json", expert);
  write_json_file(fs::path(args.out) / "groups.json", groups);
  skt::io::write_text_file((fs::path(args.out) / "report.csv").string(),
                           skt::metrics::report_csv(study.reports));
  skt::io::write_text_file((fs::path(args.out) / "report.md").string(),
                           skt::metrics::report_markdown(study.reports));

  json summary = skt::sim::summary_to_json(study.summary);
  summary["n_subjects"] = config.n_subjects;
  summary["seed"] = config.seed;
  summary["warnings"] = study.reports.warnings;
  write_json_file(fs::path(args.out) / "summary.json", summary);

  json effective;
  effective["sim"] = config.to_json();
  effective["scoring"] = scoring.to_json();
  write_manifest(args.out, "simulate", {},
                 {{"sim_config", args.config.empty() ? "<defaults>" : args.config},
                  {"scoring_config",
                   args.scoring_config.empty() ? "<defaults>" : args.scoring_config}},
                 effective);

  for (const std::string& w : study.reports.warnings) std::cerr << "warning: " << w << "\n";
  if (args.as_json) {
    std::cout << summary.dump(2) << "\n";
  } else {
    std::cerr << "simulated " << config.n_subjects << " subject(s) -> " << args.out << "\n";
  }
  return 0;
}

// ---- transcribe ----

struct TranscribeArgs {
  std::string audio;
  std::string segments;
  std::string subtest;
  std::string strategy;
  std::optional<double> audio_len;
  double pad = 0.25;
  double min_gap = 0.5;
  std::string asr_cmd;
  std::string align_cmd;
  std::string align_text;
  std::string config;
  int jobs = 1;
  std::string out;
  bool as_json = false;
};

std::string resolve_cmd(const std::string& flag_value, const char* env_name,
                        const json& config, const char* config_key) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv(env_name); env && *env) return env;
  if (config.contains(config_key) && config[config_key].is_string())
    return config[config_key].get<std::string>();
  return "";
}

int cmd_transcribe(const TranscribeArgs& args) {
  json config = json::object();
  if (!args.config.empty()) config = skt::io::load_json_file(args.config);

  skt::Transcript transcript;
  if (!args.align_text.empty()) {
    std::string cmd = resolve_cmd(args.align_cmd, "SKT_ALIGN_CMD", config, "align_cmd");
    if (cmd.empty())
      throw skt::ValidationError(
          "no aligner configured (--align-cmd, SKT_ALIGN_CMD or config align_cmd)");
    skt::pipeline::CommandAlignClient client(cmd);
    transcript = skt::pipeline::run_alignment(skt::io::read_text_file(args.align_text),
                                              args.audio, client);
  } else {
    std::string cmd = resolve_cmd(args.asr_cmd, "SKT_ASR_CMD", config, "asr_cmd");
    if (cmd.empty())
      throw skt::ValidationError(
          "no transcription engine configured (--asr-cmd, SKT_ASR_CMD or config asr_cmd)");

    skt::pipeline::Strategy strategy = skt::pipeline::Strategy::Raw;
    if (!args.strategy.empty()) {
      auto s = skt::pipeline::strategy_from_name(args.strategy);
      if (!s)
        throw skt::ValidationError("unknown --strategy \"" + args.strategy +
                                   "\" (merged|chunked|prompted|raw)");
      strategy = *s;
    } else if (!args.subtest.empty()) {
      auto sid = skt::subtest_from_name(args.subtest);
      if (!sid) throw skt::ValidationError("unknown --subtest \"" + args.subtest + "\"");
      strategy = skt::pipeline::default_strategy_for(*sid);
    }

    std::vector<skt::pipeline::Segment> segments;
    if (!args.segments.empty()) {
      if (!args.audio_len)
        throw skt::ValidationError("--audio-len is required when --segments is given");
      segments = skt::pipeline::segments_from_json_file(args.segments);
      segments = skt::pipeline::smooth_segments(segments, args.min_gap, args.pad,
                                                *args.audio_len);
    }
    skt::pipeline::SegmentPlan plan =
        skt::pipeline::build_plan(std::move(segments), strategy, args.audio_len);
    skt::pipeline::CommandAsrClient client(cmd);
    transcript = skt::pipeline::run_asr(plan, client, args.audio, args.jobs);
  }

  json tj = skt::io::to_json(transcript);
  if (!args.out.empty()) {
    fs::create_directories(args.out);
    write_json_file(fs::path(args.out) / "transcript.json", tj);
    json effective;
    effective["strategy"] = args.strategy.empty() ? "<default>" : args.strategy;
    effective["pad"] = args.pad;
    effective["min_gap"] = args.min_gap;
    write_manifest(args.out, "transcribe", {args.audio, args.segments, args.align_text},
                   {{"config", args.config.empty() ? "<none>" : args.config}}, effective);
  }
  if (args.as_json || args.out.empty()) std::cout << tj.dump(2) << "\n";
  return 0;
}

// ---- normalize ----

struct NormalizeArgs {
  std::string in;
  std::string dialect;
};

int cmd_normalize(const NormalizeArgs& args) {
  std::string text;
  std::string origin;
  if (args.in.empty() || args.in == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    text = ss.str();
    origin = "<stdin>";
  } else {
    text = skt::io::read_text_file(args.in);
    origin = args.in;
  }
  skt::Transcript transcript =
      skt::io::transcript_from_json(skt::io::parse_json(text, origin), origin);

  skt::numword::Lexicon lexicon = skt::numword::Lexicon::builtin();
  if (!args.dialect.empty()) lexicon = skt::numword::Lexicon::from_json_file(args.dialect);

  auto [normalized, spans] = skt::numword::normalize_transcript(transcript, lexicon);
  json out;
  out["transcript"] = skt::io::to_json(normalized);
  json numbers = json::array();
  for (const auto& span : spans) {
    json s;
    s["token_index"] = span.token_index;
    s["surface"] = span.surface;
    s["value"] = span.value;
    numbers.push_back(std::move(s));
  }
  out["numbers"] = std::move(numbers);
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SKT speech-transcript scoring, evaluation and simulation toolkit"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  ScoreArgs score_args;
  auto* score = app.add_subcommand("score", "Score a records bundle and map to norm values");
  score->add_option("--records", score_args.records, "Records bundle JSON")->required();
  score->add_option("--config", score_args.config, "Scoring config JSON");
  score->add_option("--norms", score_args.norms, "Norm table JSON")->required();
  score->add_option("--out", score_args.out, "Output directory")->required();
  score->add_flag("--allow-example-norms", score_args.allow_example_norms,
                  "Accept a norm table marked example_only");
  score->add_option("--jobs", score_args.jobs, "Parallel workers")->check(CLI::PositiveNumber);
  score->add_flag("--json", score_args.as_json, "Machine-readable stdout");

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "Compare scored output against expert values");
  evaluate->add_option("--auto", eval_args.auto_dir, "Directory written by `skt score`")
      ->required();
  evaluate->add_option("--expert", eval_args.expert, "Expert scores JSON")->required();
  evaluate->add_option("--groups", eval_args.groups,
                       "\"auto\" (derive from expert totals) or a groups JSON file");
  evaluate->add_option("--format", eval_args.format, "csv|md|json (default csv)");
  evaluate->add_option("--out", eval_args.out, "Also write report files to this directory");
  evaluate->add_flag("--json", eval_args.as_json, "Machine-readable stdout");

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic cohort and run the "
                                                  "pitfall study on it");
  simulate->add_option("--config", sim_args.config, "Simulation config JSON");
  simulate->add_option("--scoring-config", sim_args.scoring_config, "Scoring config JSON");
  simulate->add_option("--seed", sim_args.seed, "Override the config seed");
  simulate->add_option("--out", sim_args.out, "Output directory")->required();
  simulate->add_flag("--json", sim_args.as_json, "Machine-readable stdout");

  TranscribeArgs trans_args;
  auto* transcribe = app.add_subcommand("transcribe", "Drive an external transcription or "
                                                      "alignment engine");
  transcribe->add_option("--audio", trans_args.audio, "Audio reference passed to the engine")
      ->required();
  transcribe->add_option("--segments", trans_args.segments, "Speech segments JSON");
  transcribe->add_option("--subtest", trans_args.subtest, "Pick the strategy default for this subtest");
  transcribe->add_option("--strategy", trans_args.strategy, "merged|chunked|prompted|raw");
  transcribe->add_option("--audio-len", trans_args.audio_len, "Recording length in seconds");
  transcribe->add_option("--pad", trans_args.pad, "Segment padding seconds (default 0.25)");
  transcribe->add_option("--min-gap", trans_args.min_gap,
                         "Merge segments closer than this (default 0.5)");
  transcribe->add_option("--asr-cmd", trans_args.asr_cmd, "Transcription engine command");
  transcribe->add_option("--align-cmd", trans_args.align_cmd, "Forced-alignment command");
  transcribe->add_option("--align-text", trans_args.align_text,
                         "Align this text file instead of transcribing");
  transcribe->add_option("--config", trans_args.config, "Pipeline config JSON");
  transcribe->add_option("--jobs", trans_args.jobs, "Parallel workers")
      ->check(CLI::PositiveNumber);
  transcribe->add_option("--out", trans_args.out, "Output directory");
  transcribe->add_flag("--json", trans_args.as_json, "Machine-readable stdout");

  NormalizeArgs norm_args;
  auto* normalize = app.add_subcommand("normalize", "Rewrite German number words to digits in "
                                                    "a transcript JSON");
  normalize->add_option("--in", norm_args.in, "Transcript JSON file (default stdin)");
  normalize->add_option("--dialect", norm_args.dialect, "Dialect lexicon JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "skt: " << e.what() << "\n";
    return 1;
  }

  try {
    if (score->parsed()) return cmd_score(score_args);
    if (evaluate->parsed()) return cmd_evaluate(eval_args);
    if (simulate->parsed()) return cmd_simulate(sim_args);
    if (transcribe->parsed()) return cmd_transcribe(trans_args);
    if (normalize->parsed()) return cmd_normalize(norm_args);
  } catch (const skt::ParseError& e) {
    std::cerr << "skt: error: " << e.what() << "\n";
    return 1;
  } catch (const skt::NormCellError& e) {
    std::cerr << "skt: error: " << e.what() << "\n";
    return 2;
  } catch (const skt::ClientError& e) {
    std::cerr << "skt: error: " << e.what() << "\n";
    return 3;
  } catch (const skt::ValidationError& e) {
    std::cerr << "skt: error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "skt: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
