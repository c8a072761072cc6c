#include <doctest.h>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "skt/errors.hpp"
#include "skt/matcher.hpp"
#include "skt/textutil.hpp"

using namespace skt;
using namespace skt::matcher;

namespace {

// Reference implementation: full-matrix DP, no rolling-row tricks.
int lev_oracle(const std::string& a, const std::string& b) {
  auto u = text::utf8_decode(a);
  auto v = text::utf8_decode(b);
  std::vector<std::vector<int>> d(u.size() + 1, std::vector<int>(v.size() + 1, 0));
  for (std::size_t i = 0; i <= u.size(); ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= v.size(); ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= u.size(); ++i) {
    for (std::size_t j = 1; j <= v.size(); ++j) {
      int sub = d[i - 1][j - 1] + (u[i - 1] == v[j - 1] ? 0 : 1);
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, sub});
    }
  }
  return d[u.size()][v.size()];
}

std::string random_word(std::mt19937& rng, int max_len) {
  static const std::vector<std::string> alphabet = {
      "a", "b", "e", "h", "l", "n", "r", "s", "t", "u", "ä", "ö", "ü", "ß"};
  std::uniform_int_distribution<int> len(0, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string w;
  int n = len(rng);
  for (int i = 0; i < n; ++i) w += alphabet[pick(rng)];
  return w;
}

Transcript make_transcript(const std::vector<std::string>& words) {
  Transcript t;
  for (std::size_t i = 0; i < words.size(); ++i) {
    WordToken w;
    w.text = words[i];
    w.start_s = static_cast<double>(i);
    w.end_s = static_cast<double>(i) + 0.5;
    t.tokens.push_back(std::move(w));
  }
  return t;
}

std::string fixture_script(const char* name) {
  return std::string("python3 ") + SKT_FIXTURE_DIR + "/bin/" + name;
}

}  // namespace

TEST_CASE("levenshtein basics") {
  CHECK(levenshtein("", "") == 0);
  CHECK(levenshtein("abc", "") == 3);
  CHECK(levenshtein("", "abc") == 3);
  CHECK(levenshtein("kitten", "sitting") == 3);
  CHECK(levenshtein("Haus", "Maus") == 1);
  CHECK(levenshtein("Schlüssel", "Schlüssel") == 0);
  // Unicode scalars, not bytes: exchanging one umlaut is one edit.
  CHECK(levenshtein("bär", "bur") == 1);
  CHECK(levenshtein("äöü", "xyz") == 3);
}

TEST_CASE("levenshtein agrees with a full-matrix reference on random pairs") {
  std::mt19937 rng(1234);
  for (int it = 0; it < 1000; ++it) {
    std::string a = random_word(rng, 15);
    std::string b = random_word(rng, 15);
    CHECK(levenshtein(a, b) == lev_oracle(a, b));
  }
}

TEST_CASE("levenshtein is a metric on random triples") {
  std::mt19937 rng(99);
  for (int it = 0; it < 500; ++it) {
    std::string a = random_word(rng, 10);
    std::string b = random_word(rng, 10);
    std::string c = random_word(rng, 10);
    int ab = levenshtein(a, b);
    int bc = levenshtein(b, c);
    int ac = levenshtein(a, c);
    CHECK(ab == levenshtein(b, a));
    CHECK(ac <= ab + bc);
    if (a == b) CHECK(ab == 0);
    if (ab == 0) CHECK(a == b);
  }
}

TEST_CASE("matches: short targets require exactness at the default threshold") {
  // |target| < 10 at 0.9 gives a budget of zero edits.
  CHECK(matches("Hut", "Hut"));
  CHECK(matches("hut", "HUT"));
  CHECK_FALSE(matches("Hud", "Hut"));
  CHECK_FALSE(matches("Hutt", "Hut"));
  CHECK(matches("schlüssel", "Schlüssel"));  // 9 chars: still exact-only
  CHECK_FALSE(matches("schlussel", "Schlüssel"));
}

TEST_CASE("matches: the edit budget opens exactly at ten characters") {
  // (1 - 0.9) * 10 = 1.0 must round to a budget of one edit, not zero.
  CHECK(matches("Zahnbürstl", "Zahnbürste"));     // 10 chars, 1 substitution
  CHECK(matches("Zahnbürst", "Zahnbürste"));      // 1 deletion
  CHECK_FALSE(matches("Zahnbürsl", "Zahnbürste"));  // 2 edits
  CHECK_FALSE(matches("Streichhol", "Streichholz", 0.95));  // budget 0 at 0.95
}

TEST_CASE("matches: reference side and rounding are policy choices") {
  MatchPolicy p;
  p.threshold = 0.9;

  // 12-char target: floor(1.2) = 1 edit allowed.
  CHECK(matches("Taschenlampo", "Taschenlampe", p));

  p.rounding = Rounding::Ceil;  // ceil(1.2) = 2 edits
  CHECK(matches("Taschenlammo", "Taschenlampe", p));

  p.rounding = Rounding::Round;  // round(1.2) = 1 edit
  CHECK_FALSE(matches("Taschenlammo", "Taschenlampe", p));

  // Candidate-side budget: a 10-char candidate against a 3-char target.
  p = MatchPolicy{};
  p.reference_side = ReferenceSide::Candidate;
  CHECK_FALSE(matches("Hud", "Hut", p));  // candidate len 3: budget 0
  p.threshold = 0.5;
  CHECK(matches("Hud", "Hut", p));  // floor(0.5*3) = 1
}

TEST_CASE("matches rejects an empty target") {
  CHECK_THROWS_AS(matches("x", ""), ValidationError);
}

TEST_CASE("find_expected reports first occurrences in token order") {
  Transcript t = make_transcript({"also", "Ball", "äh", "Hut", "Ball", "Tasse"});
  ExpectedResponse e;
  e.kind = ResponseKind::ObjectSet;
  e.items = {"Hut", "Ball", "Tasse", "Baum"};

  auto hits = find_expected(t, e, 0.9);
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].canonical == "Ball");
  CHECK(hits[0].token_index == 1);  // first "Ball", not the repeat at 4
  CHECK(hits[1].canonical == "Hut");
  CHECK(hits[1].token_index == 3);
  CHECK(hits[2].canonical == "Tasse");
  CHECK(hits[2].token_index == 5);
  CHECK(hits[0].start_s == 1.0);
  CHECK(hits[0].end_s == 1.5);
  CHECK(hits[0].similarity == 1.0);
}

TEST_CASE("find_expected matches synonyms but reports the canonical item") {
  Transcript t = make_transcript({"der", "Becher", "und", "der", "Wagen"});
  ExpectedResponse e;
  e.kind = ResponseKind::ObjectSet;
  e.items = {"Tasse", "Auto"};
  e.synonyms["Tasse"] = {"Becher"};
  e.synonyms["Auto"] = {"Wagen"};

  auto hits = find_expected(t, e, 0.9);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].canonical == "Tasse");
  CHECK(hits[0].matched_surface == "Becher");
  CHECK(hits[1].canonical == "Auto");
  CHECK(hits[1].matched_surface == "Wagen");
}

TEST_CASE("find_expected skips examiner tokens and strips punctuation") {
  Transcript t = make_transcript({"Hut,", "Ball"});
  t.tokens[1].speaker = Speaker::Examiner;
  ExpectedResponse e;
  e.kind = ResponseKind::ObjectSet;
  e.items = {"Hut", "Ball"};

  auto hits = find_expected(t, e, 0.9);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].canonical == "Hut");
  CHECK(hits[0].matched_surface == "Hut,");  // surface keeps the comma

  // A transcript-wide examiner default silences everything.
  t.speaker = Speaker::Examiner;
  t.tokens[1].speaker.reset();
  t.tokens[0].speaker = Speaker::Subject;
  hits = find_expected(t, e, 0.9);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].token_index == 0);
}

TEST_CASE("filter_negated drops hits preceded by a negation word") {
  Transcript t = make_transcript({"kein", "Hut", "aber", "ein", "Ball"});
  ExpectedResponse e;
  e.kind = ResponseKind::ObjectSet;
  e.items = {"Hut", "Ball"};
  auto hits = find_expected(t, e, 0.9);
  REQUIRE(hits.size() == 2);

  auto kept = filter_negated(t, hits, 3);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].canonical == "Ball");

  // The window is measured in tokens immediately before the hit.
  Transcript far = make_transcript({"kein", "a", "b", "c", "Hut"});
  auto far_hits = find_expected(far, e, 0.9);
  REQUIRE(far_hits.size() == 1);
  CHECK(filter_negated(far, far_hits, 3).size() == 1);  // out of window
  CHECK(filter_negated(far, far_hits, 4).empty());      // in window
  CHECK(filter_negated(far, far_hits, 0).size() == 1);  // window 0 keeps all

  CHECK_THROWS_AS(filter_negated(far, far_hits, -1), ValidationError);
}

TEST_CASE("filter_negated is idempotent and preserves order") {
  Transcript t = make_transcript(
      {"nicht", "Hut", "x", "y", "z", "Ball", "keine", "Tasse", "a", "b", "c", "Baum"});
  ExpectedResponse e;
  e.kind = ResponseKind::ObjectSet;
  e.items = {"Hut", "Ball", "Tasse", "Baum"};
  auto hits = find_expected(t, e, 0.9);
  REQUIRE(hits.size() == 4);
  auto once = filter_negated(t, hits, 3);
  auto twice = filter_negated(t, once, 3);
  REQUIRE(once.size() == 2);
  CHECK(once[0].canonical == "Ball");
  CHECK(once[1].canonical == "Baum");
  REQUIRE(twice.size() == once.size());
  for (std::size_t i = 0; i < once.size(); ++i)
    CHECK(twice[i].token_index == once[i].token_index);
}

TEST_CASE("filter_negated honours a custom lexicon") {
  Transcript t = make_transcript({"nie", "Hut"});
  ExpectedResponse e;
  e.kind = ResponseKind::ObjectSet;
  e.items = {"Hut"};
  auto hits = find_expected(t, e, 0.9);
  CHECK(filter_negated(t, hits, 3).size() == 1);  // "nie" not in the default lexicon
  CHECK(filter_negated(t, hits, 3, {"nie"}).empty());
}

TEST_CASE("RuleNegationFilter wraps filter_negated") {
  Transcript t = make_transcript({"kein", "Hut"});
  ExpectedResponse e;
  e.kind = ResponseKind::ObjectSet;
  e.items = {"Hut"};
  auto hits = find_expected(t, e, 0.9);

  RuleNegationFilter deflt;
  CHECK(deflt.filter(t, hits).empty());
  RuleNegationFilter custom(3, {"nie"});
  CHECK(custom.filter(t, hits).size() == 1);
}

TEST_CASE("CommandNegationFilter round trips through an external process") {
  Transcript t = make_transcript({"kein", "Hut", "aber", "ein", "Ball"});
  ExpectedResponse e;
  e.kind = ResponseKind::ObjectSet;
  e.items = {"Hut", "Ball"};
  auto hits = find_expected(t, e, 0.9);
  REQUIRE(hits.size() == 2);

  CommandNegationFilter filter(fixture_script("fake_negation.py"));
  auto kept = filter.filter(t, hits);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].canonical == "Ball");
}

TEST_CASE("CommandNegationFilter failure modes raise ClientError") {
  Transcript t = make_transcript({"Hut"});
  ExpectedResponse e;
  e.kind = ResponseKind::ObjectSet;
  e.items = {"Hut"};
  auto hits = find_expected(t, e, 0.9);

  CHECK_THROWS_AS(CommandNegationFilter(fixture_script("failing_client.py")).filter(t, hits),
                  ClientError);
  CHECK_THROWS_AS(CommandNegationFilter(fixture_script("bad_json_client.py")).filter(t, hits),
                  ClientError);
  // Out-of-range index.
  CHECK_THROWS_AS(
      CommandNegationFilter("python3 -c \"print('{\\\"kept_hit_indices\\\":[5]}')\"")
          .filter(t, hits),
      ClientError);
  // Not strictly increasing.
  CHECK_THROWS_AS(
      CommandNegationFilter("python3 -c \"print('{\\\"kept_hit_indices\\\":[0,0]}')\"")
          .filter(t, hits),
      ClientError);
  // Missing key.
  CHECK_THROWS_AS(CommandNegationFilter("python3 -c \"print('{}')\"").filter(t, hits),
                  ClientError);
  CHECK_THROWS_AS(CommandNegationFilter(""), ValidationError);
}
