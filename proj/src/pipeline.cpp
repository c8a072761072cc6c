#include "skt/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "skt/errors.hpp"
#include "skt/json_io.hpp"
#include "skt/parallel.hpp"
#include "skt/subprocess.hpp"

namespace skt::pipeline {

std::string strategy_name(Strategy strategy) {
  switch (strategy) {
    case Strategy::Merged: return "merged";
    case Strategy::Chunked: return "chunked";
    case Strategy::Prompted: return "prompted";
    case Strategy::Raw: return "raw";
  }
  return "raw";
}

std::optional<Strategy> strategy_from_name(std::string_view name) {
  if (name == "merged") return Strategy::Merged;
  if (name == "chunked") return Strategy::Chunked;
  if (name == "prompted") return Strategy::Prompted;
  if (name == "raw") return Strategy::Raw;
  return std::nullopt;
}

Strategy default_strategy_for(SubtestId subtest) {
  switch (subtest) {
    case SubtestId::S1: return Strategy::Prompted;
    case SubtestId::S2: return Strategy::Merged;
    case SubtestId::S3: return Strategy::Merged;
    case SubtestId::S6: return Strategy::Merged;
    case SubtestId::S7: return Strategy::Chunked;
    case SubtestId::S8: return Strategy::Merged;
    case SubtestId::S9: return Strategy::Raw;
  }
  return Strategy::Raw;
}

std::vector<Segment> smooth_segments(std::vector<Segment> segs, double min_gap_s,
                                     double pad_s, double audio_len_s) {
  if (min_gap_s < 0.0 || pad_s < 0.0 || audio_len_s < 0.0)
    throw ValidationError("smooth_segments: parameters must be non-negative");
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (segs[i].end_s <= segs[i].start_s)
      throw ValidationError("smooth_segments: segment " + std::to_string(i) +
                            " has end_s <= start_s");
    if (i > 0 && segs[i].start_s < segs[i - 1].end_s)
      throw ValidationError("smooth_segments: segments must be sorted and non-overlapping");
  }

  std::vector<Segment> padded;
  padded.reserve(segs.size());
  for (const Segment& s : segs) {
    Segment p;
    p.start_s = std::max(0.0, s.start_s - pad_s);
    p.end_s = std::min(audio_len_s, s.end_s + pad_s);
    if (p.end_s > p.start_s) padded.push_back(p);
  }

  std::vector<Segment> merged;
  for (const Segment& s : padded) {
    if (!merged.empty() && s.start_s - merged.back().end_s < min_gap_s) {
      merged.back().end_s = std::max(merged.back().end_s, s.end_s);
    } else {
      merged.push_back(s);
    }
  }
  return merged;
}

SegmentPlan build_plan(std::vector<Segment> segs, Strategy strategy,
                       std::optional<double> audio_len_s) {
  SegmentPlan plan;
  plan.strategy = strategy;
  switch (strategy) {
    case Strategy::Merged:
    case Strategy::Chunked:
      plan.chunks = std::move(segs);
      break;
    case Strategy::Prompted:
      plan.chunks = std::move(segs);
      plan.prompt_chain = true;
      break;
    case Strategy::Raw: {
      double len = 0.0;
      if (audio_len_s) {
        len = *audio_len_s;
      } else if (!segs.empty()) {
        len = segs.back().end_s;
      } else {
        throw ValidationError("build_plan: raw strategy needs audio_len_s or segments");
      }
      if (len <= 0.0) throw ValidationError("build_plan: audio length must be positive");
      plan.chunks = {Segment{0.0, len}};
      break;
    }
  }
  return plan;
}

namespace {

// Validates a client reply for one chunk and converts chunk-local times to
// recording time via `to_global` (a monotone map).
std::vector<WordToken> check_chunk_tokens(std::vector<WordToken> tokens,
                                          double local_len, const std::string& chunk_label) {
  constexpr double kSlack = 0.5;  // engines overshoot chunk ends slightly
  double prev_start = -1.0;
  for (WordToken& t : tokens) {
    if (t.text.empty())
      throw ClientError("asr client returned an empty token in " + chunk_label);
    if (t.end_s < t.start_s)
      throw ClientError("asr client returned end_s < start_s in " + chunk_label);
    if (t.start_s < -1e-9 || t.end_s > local_len + kSlack) {
      std::ostringstream msg;
      msg << "asr client token outside chunk bounds in " << chunk_label << " (start_s "
          << t.start_s << ", end_s " << t.end_s << ", chunk length " << local_len << ")";
      throw ClientError(msg.str());
    }
    if (t.start_s < prev_start)
      throw ClientError("asr client tokens not sorted by start_s in " + chunk_label);
    prev_start = t.start_s;
    t.start_s = std::max(0.0, std::min(t.start_s, local_len));
    t.end_s = std::max(t.start_s, std::min(t.end_s, local_len));
  }
  return tokens;
}

std::vector<WordToken> parse_token_reply(const nlohmann::json& reply,
                                         const std::string& chunk_label) {
  if (!reply.is_object() || !reply.contains("tokens") || !reply["tokens"].is_array())
    throw ClientError("asr client reply missing \"tokens\" array in " + chunk_label);
  std::vector<WordToken> tokens;
  for (std::size_t i = 0; i < reply["tokens"].size(); ++i) {
    tokens.push_back(io::word_token_from_json(
        reply["tokens"][i], chunk_label + ".tokens[" + std::to_string(i) + "]"));
  }
  return tokens;
}

}  // namespace

CommandAsrClient::CommandAsrClient(std::string command) : command_(std::move(command)) {
  if (command_.empty()) throw ValidationError("CommandAsrClient: empty command");
}

std::vector<WordToken> CommandAsrClient::transcribe(const AsrRequest& request) const {
  nlohmann::json req;
  req["audio_chunk_ref"] = request.audio_chunk_ref;
  req["language"] = request.language;
  if (request.prompt) req["prompt"] = *request.prompt;

  proc::RunResult run = proc::run_command(command_, req.dump());
  if (run.exit_code != 0)
    throw ClientError("asr client exited with code " + std::to_string(run.exit_code) +
                      ": " + run.err);
  nlohmann::json reply;
  try {
    reply = io::parse_json(run.out, "<asr-client>");
  } catch (const ParseError& e) {
    throw ClientError(std::string("asr client wrote invalid JSON: ") + e.what());
  }
  return parse_token_reply(reply, "<asr-client-reply>");
}

Transcript run_asr(const SegmentPlan& plan, const AsrClient& client,
                   const std::string& audio_ref, int jobs) {
  if (jobs < 1) throw ValidationError("run_asr: jobs must be >= 1");
  Transcript out;
  out.source = Source::Asr;
  if (plan.chunks.empty()) return out;

  auto chunk_label = [&](std::size_t i) {
    return "chunk " + std::to_string(i + 1) + "/" + std::to_string(plan.chunks.size());
  };

  if (plan.strategy == Strategy::Merged) {
    // One call for the concatenated stream; reply timestamps live on the
    // concatenated time axis and are mapped back piecewise.
    AsrRequest req;
    req.audio_chunk_ref["audio_ref"] = audio_ref;
    req.audio_chunk_ref["segments"] = segments_to_json(plan.chunks);
    double total = 0.0;
    std::vector<double> offsets;  // concatenated-time start of each segment
    for (const Segment& s : plan.chunks) {
      offsets.push_back(total);
      total += s.length();
    }
    std::vector<WordToken> tokens;
    try {
      tokens = client.transcribe(req);
    } catch (const ClientError& e) {
      throw ClientError("asr client failed on merged stream: " + std::string(e.what()));
    }
    tokens = check_chunk_tokens(std::move(tokens), total, "merged stream");
    auto to_global = [&](double t) {
      std::size_t i = offsets.size() - 1;
      while (i > 0 && t < offsets[i]) --i;
      double local = std::min(t - offsets[i], plan.chunks[i].length());
      return plan.chunks[i].start_s + local;
    };
    for (WordToken& t : tokens) {
      t.start_s = to_global(t.start_s);
      t.end_s = std::max(t.start_s, to_global(t.end_s));
      out.tokens.push_back(std::move(t));
    }
    return out;
  }

  // Chunked / Prompted / Raw: one call per chunk.
  std::vector<std::vector<WordToken>> per_chunk(plan.chunks.size());
  auto transcribe_chunk = [&](std::size_t i, const std::optional<std::string>& prompt) {
    AsrRequest req;
    req.audio_chunk_ref["audio_ref"] = audio_ref;
    req.audio_chunk_ref["start_s"] = plan.chunks[i].start_s;
    req.audio_chunk_ref["end_s"] = plan.chunks[i].end_s;
    req.prompt = prompt;
    std::vector<WordToken> tokens;
    try {
      tokens = client.transcribe(req);
    } catch (const ClientError& e) {
      throw ClientError("asr client failed on " + chunk_label(i) + ": " +
                        std::string(e.what()));
    }
    return check_chunk_tokens(std::move(tokens), plan.chunks[i].length(), chunk_label(i));
  };

  if (plan.prompt_chain) {
    std::string accumulated;
    for (std::size_t i = 0; i < plan.chunks.size(); ++i) {
      std::optional<std::string> prompt;
      if (!accumulated.empty()) prompt = accumulated;
      per_chunk[i] = transcribe_chunk(i, prompt);
      for (const WordToken& t : per_chunk[i]) {
        if (!accumulated.empty()) accumulated.push_back(' ');
        accumulated += t.text;
      }
    }
  } else if (jobs == 1 || plan.chunks.size() == 1) {
    for (std::size_t i = 0; i < plan.chunks.size(); ++i)
      per_chunk[i] = transcribe_chunk(i, std::nullopt);
  } else {
    // Bounded fan-out; results land in their slot so the join order is
    // independent of completion order.
    parallel_for(plan.chunks.size(), jobs,
                 [&](std::size_t i) { per_chunk[i] = transcribe_chunk(i, std::nullopt); });
  }

  for (std::size_t i = 0; i < plan.chunks.size(); ++i) {
    for (WordToken t : per_chunk[i]) {
      t.start_s += plan.chunks[i].start_s;
      t.end_s += plan.chunks[i].start_s;
      out.tokens.push_back(std::move(t));
    }
  }
  return out;
}

CommandAlignClient::CommandAlignClient(std::string command) : command_(std::move(command)) {
  if (command_.empty()) throw ValidationError("CommandAlignClient: empty command");
}

std::vector<WordToken> CommandAlignClient::align(const std::string& text,
                                                 const std::string& audio_ref) const {
  nlohmann::json req;
  req["text"] = text;
  req["audio_ref"] = audio_ref;
  proc::RunResult run = proc::run_command(command_, req.dump());
  if (run.exit_code != 0)
    throw ClientError("alignment client exited with code " +
                      std::to_string(run.exit_code) + ": " + run.err);
  nlohmann::json reply;
  try {
    reply = io::parse_json(run.out, "<align-client>");
  } catch (const ParseError& e) {
    throw ClientError(std::string("alignment client wrote invalid JSON: ") + e.what());
  }
  return parse_token_reply(reply, "<align-client-reply>");
}

Transcript run_alignment(const std::string& transcript_text, const std::string& audio_ref,
                         const AlignClient& client) {
  std::vector<std::string> words;
  {
    std::istringstream in(transcript_text);
    std::string w;
    while (in >> w) words.push_back(w);
  }
  Transcript out;
  out.source = Source::GroundTruth;
  if (words.empty()) return out;

  std::vector<WordToken> tokens = client.align(transcript_text, audio_ref);
  if (tokens.size() != words.size())
    throw ClientError("alignment client returned " + std::to_string(tokens.size()) +
                      " tokens for " + std::to_string(words.size()) + " input words");
  double prev = -1.0;
  for (const WordToken& t : tokens) {
    if (t.end_s < t.start_s || t.start_s < 0.0)
      throw ClientError("alignment client returned invalid timestamps");
    if (t.start_s < prev)
      throw ClientError("alignment client tokens not sorted by start_s");
    prev = t.start_s;
  }
  out.tokens = std::move(tokens);
  return out;
}

std::vector<Segment> segments_from_json(const nlohmann::json& j, const std::string& origin) {
  if (!j.is_array()) throw ValidationError(origin + ": segments must be an array");
  std::vector<Segment> segs;
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::string where = origin + "[" + std::to_string(i) + "]";
    Segment s;
    s.start_s = io::require_number(j[i], "start_s", where);
    s.end_s = io::require_number(j[i], "end_s", where);
    if (s.end_s <= s.start_s) throw ValidationError(where + ": end_s must exceed start_s");
    segs.push_back(s);
  }
  for (std::size_t i = 1; i < segs.size(); ++i) {
    if (segs[i].start_s < segs[i - 1].end_s)
      throw ValidationError(origin + ": segments must be sorted and non-overlapping");
  }
  return segs;
}

std::vector<Segment> segments_from_json_file(const std::string& path) {
  return segments_from_json(io::load_json_file(path), path);
}

nlohmann::json segments_to_json(const std::vector<Segment>& segs) {
  nlohmann::json j = nlohmann::json::array();
  for (const Segment& s : segs) {
    nlohmann::json e;
    e["start_s"] = s.start_s;
    e["end_s"] = s.end_s;
    j.push_back(std::move(e));
  }
  return j;
}

}  // namespace skt::pipeline
