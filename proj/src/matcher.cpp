#include "skt/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "skt/errors.hpp"
#include "skt/json_io.hpp"
#include "skt/subprocess.hpp"
#include "skt/textutil.hpp"

namespace skt::matcher {

int levenshtein(std::string_view a, std::string_view b) {
  std::vector<char32_t> u = text::utf8_decode(a);
  std::vector<char32_t> v = text::utf8_decode(b);
  if (u.size() < v.size()) std::swap(u, v);  // v is the short side
  std::vector<int> row(v.size() + 1);
  for (std::size_t j = 0; j <= v.size(); ++j) row[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= u.size(); ++i) {
    int diag = row[0];
    row[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= v.size(); ++j) {
      int cost = (u[i - 1] == v[j - 1]) ? 0 : 1;
      int next = std::min({row[j] + 1, row[j - 1] + 1, diag + cost});
      diag = row[j];
      row[j] = next;
    }
  }
  return row[v.size()];
}

namespace {

// (1 - 0.9) * 10 = 0.9999... in binary floating point; the epsilon keeps the
// budget from collapsing by one whole edit.
constexpr double kBudgetEpsilon = 1e-9;

int edit_budget(double threshold, std::size_t ref_len, Rounding rounding) {
  double raw = (1.0 - threshold) * static_cast<double>(ref_len);
  switch (rounding) {
    case Rounding::Floor: return static_cast<int>(std::floor(raw + kBudgetEpsilon));
    case Rounding::Round: return static_cast<int>(std::floor(raw + 0.5));
    case Rounding::Ceil: return static_cast<int>(std::ceil(raw - kBudgetEpsilon));
  }
  return 0;
}

struct MatchOutcome {
  bool matched = false;
  double similarity = 0.0;
};

MatchOutcome try_match(const std::string& lc_candidate, const std::string& lc_target,
                       const MatchPolicy& policy) {
  std::size_t cand_len = text::utf8_decode(lc_candidate).size();
  std::size_t targ_len = text::utf8_decode(lc_target).size();
  if (targ_len == 0) throw ValidationError("matches: target must be non-empty");
  std::size_t ref_len =
      policy.reference_side == ReferenceSide::Target ? targ_len : cand_len;
  int budget = edit_budget(policy.threshold, ref_len, policy.rounding);
  int d = levenshtein(lc_candidate, lc_target);
  MatchOutcome out;
  out.matched = d <= budget;
  out.similarity = 1.0 - static_cast<double>(d) / static_cast<double>(targ_len);
  if (out.similarity < 0.0) out.similarity = 0.0;
  return out;
}

}  // namespace

bool matches(std::string_view candidate, std::string_view target, double threshold) {
  MatchPolicy policy;
  policy.threshold = threshold;
  return matches(candidate, target, policy);
}

bool matches(std::string_view candidate, std::string_view target, const MatchPolicy& policy) {
  return try_match(text::lowercase_de(candidate), text::lowercase_de(target), policy).matched;
}

std::vector<MatchResult> find_expected(const Transcript& t, const ExpectedResponse& expected,
                                       double threshold) {
  MatchPolicy policy;
  policy.threshold = threshold;
  return find_expected(t, expected, policy);
}

std::vector<MatchResult> find_expected(const Transcript& t, const ExpectedResponse& expected,
                                       const MatchPolicy& policy) {
  // Pre-lowercase every token once.
  std::vector<std::string> lc_tokens(t.tokens.size());
  for (std::size_t i = 0; i < t.tokens.size(); ++i)
    lc_tokens[i] = text::lowercase_de(text::strip_punct(t.tokens[i].text));

  std::vector<MatchResult> results;
  for (const std::string& item : expected.items) {
    std::vector<std::string> forms;
    forms.push_back(text::lowercase_de(item));
    auto syn = expected.synonyms.find(item);
    if (syn != expected.synonyms.end()) {
      for (const std::string& s : syn->second) forms.push_back(text::lowercase_de(s));
    }
    for (std::size_t i = 0; i < t.tokens.size(); ++i) {
      if (t.token_is_examiner(i)) continue;
      if (lc_tokens[i].empty()) continue;
      bool matched = false;
      double best_sim = 0.0;
      std::string best_surface;
      for (const std::string& form : forms) {
        MatchOutcome m = try_match(lc_tokens[i], form, policy);
        if (m.matched && m.similarity > best_sim) {
          matched = true;
          best_sim = m.similarity;
        }
      }
      if (!matched) continue;
      MatchResult r;
      r.canonical = item;
      r.matched_surface = t.tokens[i].text;
      r.token_index = static_cast<int>(i);
      r.start_s = t.tokens[i].start_s;
      r.end_s = t.tokens[i].end_s;
      r.similarity = best_sim;
      results.push_back(std::move(r));
      break;  // first occurrence wins; later repeats are ignored
    }
  }
  std::stable_sort(results.begin(), results.end(),
                   [](const MatchResult& a, const MatchResult& b) {
                     return a.token_index < b.token_index;
                   });
  return results;
}

const std::vector<std::string> kDefaultNegationLexicon = {"nicht", "kein", "keine",
                                                          "keinen", "nein"};

std::vector<MatchResult> filter_negated(const Transcript& t,
                                        const std::vector<MatchResult>& hits, int window) {
  return filter_negated(t, hits, window, kDefaultNegationLexicon);
}

std::vector<MatchResult> filter_negated(const Transcript& t,
                                        const std::vector<MatchResult>& hits, int window,
                                        const std::vector<std::string>& lexicon) {
  if (window < 0) throw ValidationError("filter_negated: window must be >= 0");
  std::set<std::string> lex;
  for (const std::string& w : lexicon) lex.insert(text::lowercase_de(w));

  std::vector<MatchResult> kept;
  for (const MatchResult& h : hits) {
    bool negated = false;
    int lo = std::max(0, h.token_index - window);
    for (int i = lo; i < h.token_index; ++i) {
      std::string w = text::lowercase_de(
          text::strip_punct(t.tokens[static_cast<std::size_t>(i)].text));
      if (lex.count(w)) {
        negated = true;
        break;
      }
    }
    if (!negated) kept.push_back(h);
  }
  return kept;
}

RuleNegationFilter::RuleNegationFilter(int window, std::vector<std::string> lexicon)
    : window_(window), lexicon_(std::move(lexicon)) {}

std::vector<MatchResult> RuleNegationFilter::filter(
    const Transcript& t, const std::vector<MatchResult>& hits) const {
  return filter_negated(t, hits, window_, lexicon_);
}

CommandNegationFilter::CommandNegationFilter(std::string command)
    : command_(std::move(command)) {
  if (command_.empty())
    throw ValidationError("CommandNegationFilter: empty command");
}

namespace {

io::json hit_to_json(const MatchResult& h) {
  io::json j;
  j["canonical"] = h.canonical;
  j["matched_surface"] = h.matched_surface;
  j["token_index"] = h.token_index;
  j["start_s"] = h.start_s;
  j["end_s"] = h.end_s;
  j["similarity"] = h.similarity;
  return j;
}

}  // namespace

std::vector<MatchResult> CommandNegationFilter::filter(
    const Transcript& t, const std::vector<MatchResult>& hits) const {
  io::json req;
  req["tokens"] = io::to_json(t)["tokens"];
  io::json jhits = io::json::array();
  for (const MatchResult& h : hits) jhits.push_back(hit_to_json(h));
  req["hits"] = std::move(jhits);

  proc::RunResult run = proc::run_command(command_, req.dump());
  if (run.exit_code != 0)
    throw ClientError("negation filter client exited with code " +
                      std::to_string(run.exit_code) + ": " + run.err);

  io::json reply;
  try {
    reply = io::parse_json(run.out, "<negation-client>");
  } catch (const ParseError& e) {
    throw ClientError(std::string("negation filter client wrote invalid JSON: ") +
                      e.what());
  }
  if (!reply.is_object() || !reply.contains("kept_hit_indices") ||
      !reply["kept_hit_indices"].is_array())
    throw ClientError("negation filter client reply missing \"kept_hit_indices\" array");

  std::vector<MatchResult> kept;
  long last = -1;
  for (const auto& idx : reply["kept_hit_indices"]) {
    if (!idx.is_number_integer())
      throw ClientError("negation filter client indices must be integers");
    long i = idx.get<long>();
    if (i < 0 || i >= static_cast<long>(hits.size()))
      throw ClientError("negation filter client index out of range: " + std::to_string(i));
    if (i <= last)
      throw ClientError("negation filter client indices must be strictly increasing");
    last = i;
    kept.push_back(hits[static_cast<std::size_t>(i)]);
  }
  return kept;
}

}  // namespace skt::matcher
