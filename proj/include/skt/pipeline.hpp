#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skt/core.hpp"

namespace skt::pipeline {

// One speech region detected by VAD, in recording time.
struct Segment {
  double start_s = 0.0;
  double end_s = 0.0;

  double length() const { return end_s - start_s; }
  bool operator==(const Segment&) const = default;
};

// How the speech regions are handed to the transcription engine:
//   Merged   - all regions concatenated into one stream, one engine call
//   Chunked  - one independent engine call per region
//   Prompted - chunked, but each call receives the accumulated text of the
//              previous chunks as decoder prompt
//   Raw      - the whole recording in one call, VAD ignored
enum class Strategy { Merged, Chunked, Prompted, Raw };

std::string strategy_name(Strategy strategy);
std::optional<Strategy> strategy_from_name(std::string_view name);

// The per-subtest defaults (naming prompted; recall/number/count merged;
// interference chunked; recognition raw).
Strategy default_strategy_for(SubtestId subtest);

struct SegmentPlan {
  Strategy strategy = Strategy::Raw;
  std::vector<Segment> chunks;
  bool prompt_chain = false;
};

// Pads every segment by pad_s on both sides, clamps to [0, audio_len_s],
// then merges neighbours whose gap is below min_gap_s. Input must be sorted
// and non-overlapping; output is sorted, non-overlapping, in range.
std::vector<Segment> smooth_segments(std::vector<Segment> segs, double min_gap_s,
                                     double pad_s, double audio_len_s);

// Builds the transcription plan. audio_len_s is required for Raw when segs
// is empty (it is the only way to know the recording length).
SegmentPlan build_plan(std::vector<Segment> segs, Strategy strategy,
                       std::optional<double> audio_len_s = std::nullopt);

// What an engine is asked to transcribe. audio_chunk_ref tells the client
// which part(s) of which recording to decode:
//   {"audio_ref": "...", "start_s": a, "end_s": b}                (one region)
//   {"audio_ref": "...", "segments": [{"start_s":..,"end_s":..}]} (merged)
// Replies carry chunk-local timestamps starting at 0.
struct AsrRequest {
  nlohmann::json audio_chunk_ref;
  std::string language = "de";
  std::optional<std::string> prompt;
};

class AsrClient {
 public:
  virtual ~AsrClient() = default;
  virtual std::vector<WordToken> transcribe(const AsrRequest& request) const = 0;
};

// Invokes `command` via /bin/sh with the request JSON on stdin; expects
// {"tokens":[{"text","start_s","end_s"}]} on stdout.
class CommandAsrClient final : public AsrClient {
 public:
  explicit CommandAsrClient(std::string command);
  std::vector<WordToken> transcribe(const AsrRequest& request) const override;

 private:
  std::string command_;
};

// Runs the plan against the client and stitches the replies back into
// recording time. jobs > 1 fans independent chunks out to worker threads;
// the token order and timestamps are identical to a serial run. Prompted
// plans are inherently sequential.
Transcript run_asr(const SegmentPlan& plan, const AsrClient& client,
                   const std::string& audio_ref, int jobs = 1);

class AlignClient {
 public:
  virtual ~AlignClient() = default;
  virtual std::vector<WordToken> align(const std::string& text,
                                       const std::string& audio_ref) const = 0;
};

// {"text": "...", "audio_ref": "..."} on stdin -> token JSON on stdout.
class CommandAlignClient final : public AlignClient {
 public:
  explicit CommandAlignClient(std::string command);
  std::vector<WordToken> align(const std::string& text,
                               const std::string& audio_ref) const override;

 private:
  std::string command_;
};

// Attaches per-word timestamps to a known transcript. The aligner must
// return exactly one token per whitespace-separated input word.
Transcript run_alignment(const std::string& transcript_text, const std::string& audio_ref,
                         const AlignClient& client);

// Segments file: JSON array of {"start_s":..,"end_s":..}.
std::vector<Segment> segments_from_json(const nlohmann::json& j, const std::string& origin);
std::vector<Segment> segments_from_json_file(const std::string& path);
nlohmann::json segments_to_json(const std::vector<Segment>& segs);

}  // namespace skt::pipeline
