#include <doctest.h>

#include <chrono>
#include <string>
#include <thread>
#include <vector>

#include "skt/errors.hpp"
#include "skt/pipeline.hpp"

using namespace skt;
using namespace skt::pipeline;

namespace {

Segment seg(double a, double b) { return Segment{a, b}; }

WordToken tok(std::string text, double start, double end) {
  WordToken t;
  t.text = std::move(text);
  t.start_s = start;
  t.end_s = end;
  return t;
}

// Replies with a fixed token list regardless of the request.
struct StaticClient final : AsrClient {
  std::vector<WordToken> tokens;
  std::vector<WordToken> transcribe(const AsrRequest&) const override { return tokens; }
};

// Records every request and answers with one token naming the call order.
struct RecordingClient final : AsrClient {
  mutable std::vector<AsrRequest> requests;
  std::vector<WordToken> transcribe(const AsrRequest& r) const override {
    requests.push_back(r);
    return {tok("w" + std::to_string(requests.size()), 0.1, 0.2)};
  }
};

// Derives the reply from the chunk start and sleeps longer on earlier
// chunks, so completion order under threads is the reverse of chunk order.
struct SleepyClient final : AsrClient {
  std::vector<WordToken> transcribe(const AsrRequest& r) const override {
    double start = r.audio_chunk_ref["start_s"].get<double>();
    std::this_thread::sleep_for(std::chrono::milliseconds(start < 50.0 ? 20 : 1));
    return {tok("c" + std::to_string(static_cast<int>(start)), 0.0, 0.5)};
  }
};

struct FailingClient final : AsrClient {
  std::vector<WordToken> transcribe(const AsrRequest& r) const override {
    if (r.audio_chunk_ref.contains("start_s") &&
        r.audio_chunk_ref["start_s"].get<double>() == 10.0)
      throw ClientError("engine crashed");
    return {tok("ok", 0.0, 0.5)};
  }
};

struct StaticAligner final : AlignClient {
  std::vector<WordToken> tokens;
  std::vector<WordToken> align(const std::string&, const std::string&) const override {
    return tokens;
  }
};

std::string fixture_script(const char* name) {
  return std::string("python3 ") + SKT_FIXTURE_DIR + "/bin/" + name;
}

}  // namespace

TEST_CASE("strategy names round trip and subtests get sensible defaults") {
  for (Strategy s : {Strategy::Merged, Strategy::Chunked, Strategy::Prompted, Strategy::Raw}) {
    CHECK(strategy_from_name(strategy_name(s)) == s);
  }
  CHECK_FALSE(strategy_from_name("streamed").has_value());

  CHECK(default_strategy_for(SubtestId::S1) == Strategy::Prompted);
  CHECK(default_strategy_for(SubtestId::S2) == Strategy::Merged);
  CHECK(default_strategy_for(SubtestId::S3) == Strategy::Merged);
  CHECK(default_strategy_for(SubtestId::S6) == Strategy::Merged);
  CHECK(default_strategy_for(SubtestId::S7) == Strategy::Chunked);
  CHECK(default_strategy_for(SubtestId::S8) == Strategy::Merged);
  CHECK(default_strategy_for(SubtestId::S9) == Strategy::Raw);
}

TEST_CASE("smooth_segments merges close neighbours") {
  auto out = smooth_segments({seg(1.0, 2.0), seg(2.1, 3.0)}, 0.5, 0.0, 10.0);
  REQUIRE(out.size() == 1);
  CHECK(out[0] == seg(1.0, 3.0));

  // A gap at least min_gap stays split.
  out = smooth_segments({seg(1.0, 2.0), seg(2.5, 3.0)}, 0.5, 0.0, 10.0);
  REQUIRE(out.size() == 2);

  // Padding can push neighbours into each other.
  out = smooth_segments({seg(1.0, 2.0), seg(2.3, 3.0)}, 0.0, 0.2, 10.0);
  REQUIRE(out.size() == 1);
  CHECK(out[0].start_s == doctest::Approx(0.8));
  CHECK(out[0].end_s == doctest::Approx(3.2));
}

TEST_CASE("smooth_segments clamps padding to the recording") {
  auto out = smooth_segments({seg(0.05, 1.0)}, 0.5, 0.1, 10.0);
  REQUIRE(out.size() == 1);
  CHECK(out[0].start_s == 0.0);
  CHECK(out[0].end_s == doctest::Approx(1.1));

  out = smooth_segments({seg(9.5, 9.95)}, 0.5, 0.1, 10.0);
  REQUIRE(out.size() == 1);
  CHECK(out[0].start_s == doctest::Approx(9.4));
  CHECK(out[0].end_s == 10.0);

  // A segment entirely past the end vanishes.
  out = smooth_segments({seg(11.0, 12.0)}, 0.5, 0.0, 10.0);
  CHECK(out.empty());

  CHECK(smooth_segments({}, 0.5, 0.1, 10.0).empty());
}

TEST_CASE("smooth_segments validates parameters and input order") {
  CHECK_THROWS_AS(smooth_segments({seg(1, 2)}, -0.1, 0.0, 10.0), ValidationError);
  CHECK_THROWS_AS(smooth_segments({seg(1, 2)}, 0.0, -0.1, 10.0), ValidationError);
  CHECK_THROWS_AS(smooth_segments({seg(1, 2)}, 0.0, 0.0, -1.0), ValidationError);
  CHECK_THROWS_AS(smooth_segments({seg(2, 2)}, 0.5, 0.0, 10.0), ValidationError);
  CHECK_THROWS_AS(smooth_segments({seg(1, 3), seg(2, 4)}, 0.5, 0.0, 10.0), ValidationError);
  CHECK_THROWS_AS(smooth_segments({seg(3, 4), seg(1, 2)}, 0.5, 0.0, 10.0), ValidationError);
}

TEST_CASE("smooth_segments output is a fixed point under pad-free smoothing") {
  auto out = smooth_segments({seg(0.2, 1.0), seg(1.3, 2.0), seg(4.0, 5.0)}, 0.5, 0.3, 10.0);
  auto again = smooth_segments(out, 0.5, 0.0, 10.0);
  CHECK(again == out);
}

TEST_CASE("build_plan wires segments by strategy") {
  auto segs = std::vector<Segment>{seg(1, 2), seg(3, 4)};

  SegmentPlan merged = build_plan(segs, Strategy::Merged);
  CHECK(merged.chunks == segs);
  CHECK_FALSE(merged.prompt_chain);

  SegmentPlan chunked = build_plan(segs, Strategy::Chunked);
  CHECK(chunked.chunks == segs);

  SegmentPlan prompted = build_plan(segs, Strategy::Prompted);
  CHECK(prompted.chunks == segs);
  CHECK(prompted.prompt_chain);

  SegmentPlan raw = build_plan(segs, Strategy::Raw);  // length from the last segment
  REQUIRE(raw.chunks.size() == 1);
  CHECK(raw.chunks[0] == seg(0.0, 4.0));

  raw = build_plan({}, Strategy::Raw, 30.0);
  REQUIRE(raw.chunks.size() == 1);
  CHECK(raw.chunks[0] == seg(0.0, 30.0));

  CHECK_THROWS_AS(build_plan({}, Strategy::Raw), ValidationError);
  CHECK_THROWS_AS(build_plan({}, Strategy::Raw, 0.0), ValidationError);
}

TEST_CASE("run_asr merged: concatenated timestamps map back piecewise") {
  CommandAsrClient client(fixture_script("fake_asr.py"));
  SegmentPlan plan = build_plan({seg(10.0, 12.0), seg(20.0, 21.0)}, Strategy::Merged);

  Transcript t = run_asr(plan, client, "rec.wav");
  CHECK(t.source == Source::Asr);
  REQUIRE(t.tokens.size() == 3);
  // Three tokens over a 3s concatenated stream: [0,0.8], [1,1.8], [2,2.8].
  CHECK(t.tokens[0].text == "eins");
  CHECK(t.tokens[0].start_s == doctest::Approx(10.0));
  CHECK(t.tokens[0].end_s == doctest::Approx(10.8));
  CHECK(t.tokens[1].start_s == doctest::Approx(11.0));
  CHECK(t.tokens[1].end_s == doctest::Approx(11.8));
  // The third token lives in the second segment.
  CHECK(t.tokens[2].start_s == doctest::Approx(20.0));
  CHECK(t.tokens[2].end_s == doctest::Approx(20.8));
}

TEST_CASE("run_asr chunked: chunk-local times shift by the chunk start") {
  CommandAsrClient client(fixture_script("fake_asr.py"));
  SegmentPlan plan = build_plan({seg(10.0, 13.0)}, Strategy::Chunked);

  Transcript t = run_asr(plan, client, "rec.wav");
  REQUIRE(t.tokens.size() == 3);
  CHECK(t.tokens[0].start_s == doctest::Approx(10.0));
  CHECK(t.tokens[1].start_s == doctest::Approx(11.0));
  CHECK(t.tokens[2].start_s == doctest::Approx(12.0));
  CHECK(t.tokens[2].end_s == doctest::Approx(12.8));
}

TEST_CASE("run_asr prompted: each chunk sees the accumulated text") {
  RecordingClient client;
  SegmentPlan plan = build_plan({seg(1, 2), seg(3, 4), seg(5, 6)}, Strategy::Prompted);

  Transcript t = run_asr(plan, client, "rec.wav");
  REQUIRE(client.requests.size() == 3);
  CHECK_FALSE(client.requests[0].prompt.has_value());
  CHECK(client.requests[1].prompt == "w1");
  CHECK(client.requests[2].prompt == "w1 w2");
  CHECK(client.requests[0].audio_chunk_ref["start_s"] == 1.0);
  CHECK(client.requests[0].audio_chunk_ref["end_s"] == 2.0);

  REQUIRE(t.tokens.size() == 3);
  CHECK(t.tokens[0].text == "w1");
  CHECK(t.tokens[0].start_s == doctest::Approx(1.1));
  CHECK(t.tokens[1].start_s == doctest::Approx(3.1));
  CHECK(t.tokens[2].start_s == doctest::Approx(5.1));
}

TEST_CASE("run_asr prompted via an external client chains prompt word counts") {
  CommandAsrClient client(fixture_script("fake_asr.py"));
  SegmentPlan plan = build_plan({seg(0, 3), seg(5, 8), seg(10, 13)}, Strategy::Prompted);

  Transcript t = run_asr(plan, client, "rec.wav");
  REQUIRE(t.tokens.size() == 9);
  CHECK(t.tokens[0].text == "eins");
  CHECK(t.tokens[3].text == "p3");  // second chunk saw a 3-word prompt
  CHECK(t.tokens[6].text == "p6");  // third chunk saw 6 accumulated words
}

TEST_CASE("run_asr parallel fan-out matches the serial token order") {
  SleepyClient client;
  std::vector<Segment> segs;
  for (int i = 0; i < 6; ++i) segs.push_back(seg(i * 20.0, i * 20.0 + 1.0));
  SegmentPlan plan = build_plan(segs, Strategy::Chunked);

  Transcript serial = run_asr(plan, client, "rec.wav", 1);
  Transcript parallel = run_asr(plan, client, "rec.wav", 4);
  REQUIRE(serial.tokens.size() == 6);
  REQUIRE(parallel.tokens.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(parallel.tokens[i].text == serial.tokens[i].text);
    CHECK(parallel.tokens[i].start_s == serial.tokens[i].start_s);
  }
  CHECK(serial.tokens[0].text == "c0");
  CHECK(serial.tokens[5].text == "c100");

  CHECK_THROWS_AS(run_asr(plan, client, "rec.wav", 0), ValidationError);
}

TEST_CASE("run_asr names the failing chunk, also under parallel execution") {
  FailingClient client;  // fails on the chunk starting at 10.0
  SegmentPlan plan = build_plan({seg(0, 1), seg(10, 11), seg(20, 21)}, Strategy::Chunked);

  for (int jobs : {1, 4}) {
    try {
      run_asr(plan, client, "rec.wav", jobs);
      FAIL("expected ClientError");
    } catch (const ClientError& e) {
      std::string msg = e.what();
      CHECK(msg.find("chunk 2/3") != std::string::npos);
      CHECK(msg.find("engine crashed") != std::string::npos);
    }
  }
}

TEST_CASE("run_asr rejects contract-violating replies") {
  StaticClient client;
  SegmentPlan plan = build_plan({seg(0.0, 2.0)}, Strategy::Chunked);

  client.tokens = {tok("a", 1.0, 0.5)};  // end before start
  CHECK_THROWS_AS(run_asr(plan, client, "r"), ClientError);

  client.tokens = {tok("a", 0.0, 3.0)};  // far past the chunk end
  CHECK_THROWS_AS(run_asr(plan, client, "r"), ClientError);

  client.tokens = {tok("a", 1.5, 1.8), tok("b", 0.5, 0.8)};  // unsorted
  CHECK_THROWS_AS(run_asr(plan, client, "r"), ClientError);

  client.tokens = {tok("", 0.5, 0.8)};  // empty text
  CHECK_THROWS_AS(run_asr(plan, client, "r"), ClientError);

  // Slight overshoot is tolerated and clamped to the chunk.
  client.tokens = {tok("a", 1.5, 2.3)};
  Transcript t = run_asr(plan, client, "r");
  REQUIRE(t.tokens.size() == 1);
  CHECK(t.tokens[0].end_s == doctest::Approx(2.0));
}

TEST_CASE("run_asr surfaces external client failures as ClientError") {
  SegmentPlan plan = build_plan({seg(0.0, 2.0)}, Strategy::Chunked);
  CHECK_THROWS_AS(
      run_asr(plan, CommandAsrClient(fixture_script("failing_client.py")), "r"),
      ClientError);
  CHECK_THROWS_AS(
      run_asr(plan, CommandAsrClient(fixture_script("bad_json_client.py")), "r"),
      ClientError);
  CHECK_THROWS_AS(CommandAsrClient(""), ValidationError);
}

TEST_CASE("run_alignment attaches one token per input word") {
  CommandAlignClient client(fixture_script("fake_align.py"));
  Transcript t = run_alignment("eins zwei drei", "rec.wav", client);
  CHECK(t.source == Source::GroundTruth);
  REQUIRE(t.tokens.size() == 3);
  CHECK(t.tokens[0].text == "eins");
  CHECK(t.tokens[2].text == "drei");
  CHECK(t.tokens[2].start_s == doctest::Approx(2.0));
  CHECK(t.tokens[2].end_s == doctest::Approx(2.8));

  // Empty text: nothing to align, the client is not consulted.
  Transcript empty = run_alignment("   ", "rec.wav", client);
  CHECK(empty.tokens.empty());
}

TEST_CASE("run_alignment enforces the one-token-per-word contract") {
  StaticAligner aligner;
  aligner.tokens = {tok("eins", 0.0, 0.5)};
  CHECK_THROWS_AS(run_alignment("eins zwei", "r", aligner), ClientError);

  aligner.tokens = {tok("eins", 0.0, 0.5), tok("zwei", 1.0, 0.2)};
  CHECK_THROWS_AS(run_alignment("eins zwei", "r", aligner), ClientError);

  aligner.tokens = {tok("eins", 2.0, 2.5), tok("zwei", 1.0, 1.5)};
  CHECK_THROWS_AS(run_alignment("eins zwei", "r", aligner), ClientError);

  CHECK_THROWS_AS(CommandAlignClient(""), ValidationError);
}

TEST_CASE("segments json round trip and validation") {
  auto segs = std::vector<Segment>{seg(0.5, 1.5), seg(2.0, 4.0)};
  auto back = segments_from_json(segments_to_json(segs), "segs");
  CHECK(back == segs);

  CHECK_THROWS_AS(segments_from_json(nlohmann::json::object(), "s"), ValidationError);
  CHECK_THROWS_AS(
      segments_from_json(nlohmann::json::parse(R"([{"start_s":1.0,"end_s":1.0}])"), "s"),
      ValidationError);
  CHECK_THROWS_AS(
      segments_from_json(
          nlohmann::json::parse(R"([{"start_s":2.0,"end_s":3.0},{"start_s":1.0,"end_s":1.5}])"),
          "s"),
      ValidationError);
  CHECK_THROWS_AS(segments_from_json(nlohmann::json::parse(R"([{"start_s":1.0}])"), "s"),
                  ValidationError);
}
