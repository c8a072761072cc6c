#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "skt/core.hpp"

namespace skt::matcher {

// One expected item found in a transcript.
struct MatchResult {
  std::string canonical;        // the expected item (not the synonym)
  std::string matched_surface;  // transcript token text as spoken
  int token_index = 0;
  double start_s = 0.0;
  double end_s = 0.0;
  double similarity = 1.0;  // 1 - distance/|target|, never below the threshold
};

// Unit-cost edit distance over Unicode scalar values.
int levenshtein(std::string_view a, std::string_view b);

// Which side's length the edit budget is measured against, and how the
// fractional budget is turned into an integer.
enum class ReferenceSide { Target, Candidate };
enum class Rounding { Floor, Round, Ceil };

struct MatchPolicy {
  double threshold = 0.9;
  ReferenceSide reference_side = ReferenceSide::Target;
  Rounding rounding = Rounding::Floor;
};

// True iff candidate is within the edit budget of target:
// levenshtein(lc(candidate), lc(target)) <= floor((1-threshold) * |target|).
// Lengths count Unicode scalars; at the default threshold 0.9, targets
// shorter than 10 characters require an exact case-insensitive match.
bool matches(std::string_view candidate, std::string_view target, double threshold = 0.9);
bool matches(std::string_view candidate, std::string_view target, const MatchPolicy& policy);

// Scans tokens in order and reports each expected item at most once, at its
// first matching token (canonical form or any synonym). Examiner tokens are
// skipped; token text is punctuation-stripped before matching. Results are
// sorted by token_index.
std::vector<MatchResult> find_expected(const Transcript& t, const ExpectedResponse& expected,
                                       double threshold);
std::vector<MatchResult> find_expected(const Transcript& t, const ExpectedResponse& expected,
                                       const MatchPolicy& policy);

extern const std::vector<std::string> kDefaultNegationLexicon;

// Drops a hit when any of the `window` tokens immediately preceding it is a
// negation word. Idempotent; output preserves input order.
std::vector<MatchResult> filter_negated(const Transcript& t,
                                        const std::vector<MatchResult>& hits,
                                        int window = 3);
std::vector<MatchResult> filter_negated(const Transcript& t,
                                        const std::vector<MatchResult>& hits, int window,
                                        const std::vector<std::string>& lexicon);

// Pluggable negation filtering: the rule-based default above, or an external
// command speaking the JSON contract
//   stdin  {"tokens":[...], "hits":[...]}
//   stdout {"kept_hit_indices":[0,2,...]}
class NegationFilter {
 public:
  virtual ~NegationFilter() = default;
  virtual std::vector<MatchResult> filter(const Transcript& t,
                                          const std::vector<MatchResult>& hits) const = 0;
};

class RuleNegationFilter final : public NegationFilter {
 public:
  RuleNegationFilter() = default;
  RuleNegationFilter(int window, std::vector<std::string> lexicon);
  std::vector<MatchResult> filter(const Transcript& t,
                                  const std::vector<MatchResult>& hits) const override;

 private:
  int window_ = 3;
  std::vector<std::string> lexicon_ = kDefaultNegationLexicon;
};

// Runs `command` through /bin/sh for every transcript. Throws ClientError on
// nonzero exit, malformed JSON, or out-of-range indices.
class CommandNegationFilter final : public NegationFilter {
 public:
  explicit CommandNegationFilter(std::string command);
  std::vector<MatchResult> filter(const Transcript& t,
                                  const std::vector<MatchResult>& hits) const override;

 private:
  std::string command_;
};

}  // namespace skt::matcher
