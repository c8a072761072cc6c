#include <doctest.h>

#include <map>
#include <string>
#include <vector>

#include "skt/errors.hpp"
#include "skt/metrics.hpp"

using namespace skt;
using namespace skt::metrics;

namespace {

std::vector<std::string> words(std::initializer_list<const char*> ws) {
  return std::vector<std::string>(ws.begin(), ws.end());
}

EvalRow row(std::string subject, SubtestId sid, Source source, double auto_raw,
            double expert_raw) {
  EvalRow r;
  r.subject = std::move(subject);
  r.subtest = sid;
  r.source = source;
  r.auto_raw = auto_raw;
  r.expert_raw = expert_raw;
  return r;
}

}  // namespace

TEST_CASE("align_words on hand-checked cases") {
  // Identical sequences.
  AlignmentCounts c = align_words(words({"a", "b", "c"}), words({"a", "b", "c"}));
  CHECK(c.hits == 3);
  CHECK(c.errors() == 0);
  CHECK(c.wer() == 0.0);
  CHECK(c.wc() == 1.0);

  // One substitution.
  c = align_words(words({"a", "b", "c"}), words({"a", "x", "c"}));
  CHECK(c.substitutions == 1);
  CHECK(c.deletions == 0);
  CHECK(c.insertions == 0);
  CHECK(c.hits == 2);

  // One deletion (ref word missing from hyp).
  c = align_words(words({"a", "b", "c"}), words({"a", "c"}));
  CHECK(c.deletions == 1);
  CHECK(c.hits == 2);
  CHECK(c.wer() == doctest::Approx(1.0 / 3.0));

  // One insertion.
  c = align_words(words({"a", "c"}), words({"a", "b", "c"}));
  CHECK(c.insertions == 1);
  CHECK(c.hits == 2);
  CHECK(c.wer() == doctest::Approx(0.5));

  // Empty hypothesis: everything deleted.
  c = align_words(words({"a", "b"}), {});
  CHECK(c.deletions == 2);
  CHECK(c.hits == 0);
  CHECK(c.wer() == 1.0);

  // Insertions can push WER past 1.
  c = align_words(words({"a"}), words({"x", "y", "z"}));
  CHECK(c.errors() == 3);  // 1 substitution + 2 insertions
  CHECK(c.wer() == 3.0);

  CHECK_THROWS_AS(align_words({}, words({"a"})), ValidationError);
}

TEST_CASE("align_words prefers hits among equal-cost alignments") {
  // "a b" -> "b": cost 1 either way (delete a, keep b) or (sub a->b, delete b).
  // The hit-maximizing alignment keeps the b match.
  AlignmentCounts c = align_words(words({"a", "b"}), words({"b"}));
  CHECK(c.hits == 1);
  CHECK(c.deletions == 1);
  CHECK(c.substitutions == 0);

  // Shifted window: "a b c d" vs "b c d e" aligns the three common words.
  c = align_words(words({"a", "b", "c", "d"}), words({"b", "c", "d", "e"}));
  CHECK(c.hits == 3);
  CHECK(c.errors() == 2);
}

TEST_CASE("align_words counting identities hold on random-ish inputs") {
  const std::vector<std::vector<std::string>> refs = {
      words({"der", "hund", "läuft"}),
      words({"a", "a", "a", "b"}),
      words({"x"}),
      words({"eins", "zwei", "drei", "vier", "fünf"}),
  };
  const std::vector<std::vector<std::string>> hyps = {
      words({"der", "hunt", "läuft", "schnell"}),
      words({"a", "b", "a"}),
      words({"y", "x"}),
      {},
  };
  for (const auto& ref : refs) {
    for (const auto& hyp : hyps) {
      AlignmentCounts c = align_words(ref, hyp);
      CHECK(c.hits + c.substitutions + c.deletions == static_cast<int>(ref.size()));
      CHECK(c.hits + c.substitutions + c.insertions == static_cast<int>(hyp.size()));
      CHECK(c.hits >= 0);
      CHECK(c.substitutions >= 0);
      CHECK(c.deletions >= 0);
      CHECK(c.insertions >= 0);
    }
  }
}

TEST_CASE("tokenize_for_wer lowercases and strips punctuation") {
  auto w = tokenize_for_wer("Der Hund, die Katze!");
  CHECK(w == words({"der", "hund", "die", "katze"}));
}

TEST_CASE("pearson on closed-form cases") {
  CHECK(pearson({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0));
  CHECK(pearson({1, 2, 3}, {6, 4, 2}) == doctest::Approx(-1.0));
  // Affine transforms leave r untouched.
  std::vector<double> x = {1.0, 2.5, 3.0, 7.0, 9.5};
  std::vector<double> y = {2.0, 1.0, 4.0, 5.0, 4.5};
  double r = pearson(x, y);
  std::vector<double> x2;
  for (double v : x) x2.push_back(3.0 * v - 11.0);
  CHECK(pearson(x2, y) == doctest::Approx(r).epsilon(1e-12));

  // Symmetric orthogonal case: r = 0.
  CHECK(pearson({-1, 0, 1, 0}, {0, 1, 0, -1}) == doctest::Approx(0.0));

  CHECK_THROWS_AS(pearson({1, 2}, {1}), ValidationError);
  CHECK_THROWS_AS(pearson({1}, {1}), ValidationError);
  CHECK_THROWS_AS(pearson({1, 1, 1}, {1, 2, 3}), ValidationError);
  CHECK_THROWS_AS(pearson({1, 2, 3}, {5, 5, 5}), ValidationError);
}

TEST_CASE("group banding on the expert total") {
  CHECK(group_of_total(0) == Group::NCI);
  CHECK(group_of_total(4) == Group::NCI);
  CHECK(group_of_total(5) == Group::MCI);
  CHECK(group_of_total(8) == Group::MCI);
  CHECK(group_of_total(9) == Group::DEM);
  CHECK(group_of_total(27) == Group::DEM);
  CHECK_THROWS_AS(group_of_total(-1), ValidationError);
  CHECK_THROWS_AS(group_of_total(28), ValidationError);

  for (Group g : {Group::NCI, Group::MCI, Group::DEM, Group::All}) {
    CHECK(group_from_name(group_name(g)) == g);
  }
  CHECK(group_from_name("nci") == Group::NCI);
  CHECK_FALSE(group_from_name("SCI").has_value());
}

TEST_CASE("subgroup_report separates per-group from pooled correlations") {
  // Two groups with perfect within-group agreement but shifted levels: the
  // pooled correlation is dominated by the between-group spread.
  std::vector<EvalRow> rows;
  std::map<std::string, Group> grouping;
  // Group A (NCI): expert 1..3, auto tracks expert exactly.
  rows.push_back(row("a1", SubtestId::S1, Source::Asr, 1.0, 1.0));
  rows.push_back(row("a2", SubtestId::S1, Source::Asr, 2.0, 2.0));
  rows.push_back(row("a3", SubtestId::S1, Source::Asr, 3.0, 3.0));
  // Group B (DEM): expert 41..43, auto tracks expert exactly.
  rows.push_back(row("b1", SubtestId::S1, Source::Asr, 41.0, 41.0));
  rows.push_back(row("b2", SubtestId::S1, Source::Asr, 42.0, 42.0));
  rows.push_back(row("b3", SubtestId::S1, Source::Asr, 43.0, 43.0));
  for (const char* s : {"a1", "a2", "a3"}) grouping[s] = Group::NCI;
  for (const char* s : {"b1", "b2", "b3"}) grouping[s] = Group::DEM;

  ReportBundle bundle = subgroup_report(rows, grouping);
  REQUIRE(bundle.reports.size() == 3);  // NCI, DEM, All
  CHECK(bundle.reports[0].group == Group::NCI);
  CHECK(bundle.reports[1].group == Group::DEM);
  CHECK(bundle.reports[2].group == Group::All);
  CHECK(bundle.reports[0].n == 3);
  CHECK(bundle.reports[2].n == 6);

  CHECK(*bundle.reports[0].per_subtest.at(SubtestId::S1).pearson_asr == doctest::Approx(1.0));
  CHECK(*bundle.reports[2].per_subtest.at(SubtestId::S1).pearson_asr == doctest::Approx(1.0));
  CHECK_FALSE(bundle.reports[0].per_subtest.at(SubtestId::S1).pearson_gt.has_value());
  CHECK(bundle.warnings.empty());
}

TEST_CASE("subgroup_report: pooled r can dwarf every within-group r") {
  // Within each group auto is anti-correlated with expert; between groups
  // the level shift dominates, so the pooled r comes out strongly positive.
  std::vector<EvalRow> rows;
  std::map<std::string, Group> grouping;
  double noise[4] = {0.0, 1.0, 2.0, 3.0};
  for (int i = 0; i < 4; ++i) {
    std::string id = "n" + std::to_string(i);
    rows.push_back(row(id, SubtestId::S1, Source::Asr, 3.0 - noise[i], noise[i]));
    grouping[id] = Group::NCI;
  }
  for (int i = 0; i < 4; ++i) {
    std::string id = "d" + std::to_string(i);
    rows.push_back(row(id, SubtestId::S1, Source::Asr, 43.0 - noise[i], 40.0 + noise[i]));
    grouping[id] = Group::DEM;
  }

  ReportBundle bundle = subgroup_report(rows, grouping);
  REQUIRE(bundle.reports.size() == 3);
  double nci_r = *bundle.reports[0].per_subtest.at(SubtestId::S1).pearson_asr;
  double all_r = *bundle.reports[2].per_subtest.at(SubtestId::S1).pearson_asr;
  CHECK(nci_r == doctest::Approx(-1.0));
  CHECK(all_r > 0.9);
}

TEST_CASE("subgroup_report pools WER at the corpus level") {
  // Corpus-level WER weights rows by reference length; a mean of per-row
  // rates would give a different value.
  std::vector<EvalRow> rows;
  std::map<std::string, Group> grouping;

  EvalRow r1 = row("s1", SubtestId::S2, Source::Asr, 0.0, 0.0);
  r1.ref_words = words({"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"});
  r1.hyp_words = r1.ref_words;  // 0 errors over 10 words
  EvalRow r2 = row("s2", SubtestId::S2, Source::Asr, 1.0, 1.0);
  r2.ref_words = words({"x", "y"});
  r2.hyp_words = words({"p", "q"});  // 2 errors over 2 words
  rows = {r1, r2};
  grouping["s1"] = Group::NCI;
  grouping["s2"] = Group::NCI;

  ReportBundle bundle = subgroup_report(rows, grouping);
  REQUIRE(bundle.reports.size() == 2);  // NCI and All
  const SubtestStats& stats = bundle.reports[0].per_subtest.at(SubtestId::S2);
  CHECK(*stats.wer == doctest::Approx(2.0 / 12.0));  // not (0 + 1)/2
  CHECK(*stats.wc == doctest::Approx(10.0 / 12.0));
}

TEST_CASE("subgroup_report warns and omits tiny or degenerate cells") {
  std::vector<EvalRow> rows;
  std::map<std::string, Group> grouping;
  rows.push_back(row("a1", SubtestId::S1, Source::Asr, 1.0, 1.0));
  rows.push_back(row("a2", SubtestId::S1, Source::Asr, 2.0, 2.0));
  rows.push_back(row("lone", SubtestId::S1, Source::Asr, 5.0, 5.0));
  grouping["a1"] = Group::NCI;
  grouping["a2"] = Group::NCI;
  grouping["lone"] = Group::DEM;

  ReportBundle bundle = subgroup_report(rows, grouping);
  REQUIRE(bundle.reports.size() == 2);  // DEM omitted
  CHECK(bundle.reports[0].group == Group::NCI);
  CHECK(bundle.reports[1].group == Group::All);
  bool warned = false;
  for (const auto& w : bundle.warnings)
    if (w.find("DEM") != std::string::npos && w.find("fewer than 2") != std::string::npos)
      warned = true;
  CHECK(warned);

  // Constant values: the correlation cell stays empty with a warning.
  rows.clear();
  grouping.clear();
  rows.push_back(row("c1", SubtestId::S1, Source::Asr, 1.0, 7.0));
  rows.push_back(row("c2", SubtestId::S1, Source::Asr, 1.0, 9.0));
  grouping["c1"] = Group::NCI;
  grouping["c2"] = Group::NCI;
  bundle = subgroup_report(rows, grouping);
  REQUIRE(bundle.reports.size() == 2);
  CHECK_FALSE(bundle.reports[0].per_subtest.at(SubtestId::S1).pearson_asr.has_value());
  CHECK_FALSE(bundle.warnings.empty());

  // One-sided word lists are skipped with a warning, not crashed on.
  rows.clear();
  grouping.clear();
  EvalRow lop1 = row("w1", SubtestId::S2, Source::Asr, 0.0, 0.0);
  lop1.ref_words = words({"a"});
  EvalRow lop2 = row("w2", SubtestId::S2, Source::Asr, 1.0, 1.0);
  rows = {lop1, lop2};
  grouping["w1"] = Group::NCI;
  grouping["w2"] = Group::NCI;
  bundle = subgroup_report(rows, grouping);
  bool skip_warned = false;
  for (const auto& w : bundle.warnings)
    if (w.find("only one side") != std::string::npos) skip_warned = true;
  CHECK(skip_warned);
  CHECK_FALSE(bundle.reports[0].per_subtest.at(SubtestId::S2).wer.has_value());

  CHECK(subgroup_report({}, {}).reports.empty());
}

TEST_CASE("report renderers cover every populated group row") {
  std::vector<EvalRow> rows;
  std::map<std::string, Group> grouping;
  rows.push_back(row("a1", SubtestId::S1, Source::Asr, 1.0, 1.0));
  rows.push_back(row("a1", SubtestId::S1, Source::GroundTruth, 1.0, 1.0));
  rows.push_back(row("a2", SubtestId::S1, Source::Asr, 2.0, 2.0));
  rows.push_back(row("a2", SubtestId::S1, Source::GroundTruth, 2.0, 2.0));
  grouping["a1"] = Group::NCI;
  grouping["a2"] = Group::NCI;

  ReportBundle bundle = subgroup_report(rows, grouping);
  std::string csv = report_csv(bundle);
  CHECK(csv.find("group,subtest,n,pearson_gt,pearson_asr,wer,wc\n") == 0);
  CHECK(csv.find("NCI,S1,2,1.0000,1.0000,,\n") != std::string::npos);
  CHECK(csv.find("NCI,overall,2,1.0000,1.0000,,\n") != std::string::npos);
  CHECK(csv.find("All,S1,2,") != std::string::npos);

  std::string md = report_markdown(bundle);
  CHECK(md.find("| Group | Subtest | n |") == 0);
  CHECK(md.find("| NCI | S1 | 2 | 1.0000 | 1.0000 | - | - |") != std::string::npos);

  nlohmann::json j = report_json(bundle);
  REQUIRE(j["reports"].size() == 2);
  CHECK(j["reports"][0]["group"] == "NCI");
  CHECK(j["reports"][0]["per_subtest"]["S1"]["pearson_asr"] == doctest::Approx(1.0));
  CHECK_FALSE(j["reports"][0]["per_subtest"]["S1"].contains("wer"));
  CHECK(j["warnings"].is_array());
}
