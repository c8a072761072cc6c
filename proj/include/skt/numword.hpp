#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skt/core.hpp"

namespace skt::numword {

// One token rewrite performed by normalize_transcript.
struct NumberSpan {
  int token_index = 0;
  std::string surface;  // original token text
  int value = 0;        // 0..99
};

// Dialect/variant lexicon mapping word forms to values. Ships with
// {"zwo": 2}; extensible from a JSON file (map string -> integer).
class Lexicon {
 public:
  static Lexicon builtin();
  static Lexicon from_json_file(const std::string& path);

  void add(std::string word, int value);
  std::optional<int> lookup(const std::string& lowercased_word) const;
  const std::map<std::string, int>& entries() const { return entries_; }

 private:
  std::map<std::string, int> entries_;
};

// Parses a single German number word (or digit string) to its value 0..99.
// Case-insensitive, umlaut-preserving; hyphens are stripped before matching
// ("ein-und-zwanzig"). Covers simple forms, teens, tens, unit+und+tens
// compounds and lexicon entries. Multi-token numerals are never joined.
// Digit strings "0".."99" (no leading zeros) pass through. Standalone "ein"
// is rejected (indefinite article, not the numeral "eins"); ordinals are
// rejected.
std::optional<int> parse_number_word(std::string_view word);
std::optional<int> parse_number_word(std::string_view word, const Lexicon& lexicon);

// Canonical written form for 0..99 ("einundzwanzig"). Inverse of the parser
// on its output range; used by the cohort simulator.
std::string to_german_word(int n);

// Rewrites every parseable token's text to its digit string. Token count,
// order and all timestamps are preserved; every rewrite (including digit
// pass-throughs) is reported as a span.
std::pair<Transcript, std::vector<NumberSpan>> normalize_transcript(const Transcript& t);
std::pair<Transcript, std::vector<NumberSpan>> normalize_transcript(const Transcript& t,
                                                                    const Lexicon& lexicon);

}  // namespace skt::numword
