#include "skt/numword.hpp"

#include <array>

#include "skt/errors.hpp"
#include "skt/json_io.hpp"
#include "skt/textutil.hpp"

namespace skt::numword {

namespace {

// Simple forms with a dedicated word: 0..20 plus the tens.
const std::map<std::string, int>& simple_forms() {
  static const std::map<std::string, int> forms = {
      {"null", 0},     {"eins", 1},     {"zwei", 2},     {"drei", 3},
      {"vier", 4},     {"fünf", 5},     {"sechs", 6},    {"sieben", 7},
      {"acht", 8},     {"neun", 9},     {"zehn", 10},    {"elf", 11},
      {"zwölf", 12},   {"dreizehn", 13},{"vierzehn", 14},{"fünfzehn", 15},
      {"sechzehn", 16},{"siebzehn", 17},{"achtzehn", 18},{"neunzehn", 19},
      {"zwanzig", 20}, {"dreißig", 30}, {"vierzig", 40}, {"fünfzig", 50},
      {"sechzig", 60}, {"siebzig", 70}, {"achtzig", 80}, {"neunzig", 90},
  };
  return forms;
}

// Unit prefixes used in compounds; note "ein" (not "eins") before "und".
const std::map<std::string, int>& compound_units() {
  static const std::map<std::string, int> units = {
      {"ein", 1},  {"zwei", 2}, {"drei", 3},  {"vier", 4}, {"fünf", 5},
      {"sechs", 6},{"sieben", 7},{"acht", 8}, {"neun", 9},
  };
  return units;
}

const std::map<std::string, int>& compound_tens() {
  static const std::map<std::string, int> tens = {
      {"zwanzig", 20}, {"dreißig", 30}, {"vierzig", 40}, {"fünfzig", 50},
      {"sechzig", 60}, {"siebzig", 70}, {"achtzig", 80}, {"neunzig", 90},
  };
  return tens;
}

std::optional<int> parse_digit_string(const std::string& w) {
  if (w.empty() || w.size() > 2) return std::nullopt;
  for (char c : w) {
    if (c < '0' || c > '9') return std::nullopt;
  }
  if (w.size() == 2 && w[0] == '0') return std::nullopt;  // "07" is not canonical
  return std::stoi(w);
}

std::optional<int> parse_compound(const std::string& w) {
  // unit + "und" + tens, e.g. "einundzwanzig".
  std::size_t pos = w.find("und");
  while (pos != std::string::npos) {
    std::string unit = w.substr(0, pos);
    std::string tens = w.substr(pos + 3);
    auto u = compound_units().find(unit);
    auto t = compound_tens().find(tens);
    if (u != compound_units().end() && t != compound_tens().end())
      return u->second + t->second;
    pos = w.find("und", pos + 1);
  }
  return std::nullopt;
}

}  // namespace

Lexicon Lexicon::builtin() {
  Lexicon lex;
  lex.add("zwo", 2);
  return lex;
}

Lexicon Lexicon::from_json_file(const std::string& path) {
  io::json j = io::load_json_file(path);
  if (!j.is_object())
    throw ValidationError(path + ": dialect lexicon must be a JSON object");
  Lexicon lex = builtin();
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number_integer())
      throw ValidationError(path + ": lexicon values must be integers");
    int v = it.value().get<int>();
    if (v < 0 || v > 99)
      throw ValidationError(path + ": lexicon value out of range 0..99 for \"" +
                            it.key() + "\"");
    lex.add(it.key(), v);
  }
  return lex;
}

void Lexicon::add(std::string word, int value) {
  entries_[text::lowercase_de(word)] = value;
}

std::optional<int> Lexicon::lookup(const std::string& lowercased_word) const {
  auto it = entries_.find(lowercased_word);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> parse_number_word(std::string_view word) {
  static const Lexicon lex = Lexicon::builtin();
  return parse_number_word(word, lex);
}

std::optional<int> parse_number_word(std::string_view word, const Lexicon& lexicon) {
  std::string w = text::lowercase_de(text::strip_hyphens(word));
  if (w.empty()) return std::nullopt;

  if (auto v = parse_digit_string(w)) return v;
  if (auto v = lexicon.lookup(w)) return v;

  auto simple = simple_forms().find(w);
  if (simple != simple_forms().end()) return simple->second;

  return parse_compound(w);
}

std::string to_german_word(int n) {
  if (n < 0 || n > 99) throw ValidationError("to_german_word: value out of range 0..99");
  static const std::array<const char*, 21> low = {
      "null",     "eins",     "zwei",     "drei",     "vier",    "fünf",
      "sechs",    "sieben",   "acht",     "neun",     "zehn",    "elf",
      "zwölf",    "dreizehn", "vierzehn", "fünfzehn", "sechzehn","siebzehn",
      "achtzehn", "neunzehn", "zwanzig"};
  static const std::array<const char*, 10> tens = {
      "", "", "zwanzig", "dreißig", "vierzig", "fünfzig",
      "sechzig", "siebzig", "achtzig", "neunzig"};
  static const std::array<const char*, 10> units = {
      "", "ein", "zwei", "drei", "vier", "fünf", "sechs", "sieben", "acht", "neun"};
  if (n <= 20) return low[static_cast<std::size_t>(n)];
  int u = n % 10;
  int t = n / 10;
  if (u == 0) return tens[static_cast<std::size_t>(t)];
  return std::string(units[static_cast<std::size_t>(u)]) + "und" +
         tens[static_cast<std::size_t>(t)];
}

std::pair<Transcript, std::vector<NumberSpan>> normalize_transcript(const Transcript& t) {
  return normalize_transcript(t, Lexicon::builtin());
}

std::pair<Transcript, std::vector<NumberSpan>> normalize_transcript(const Transcript& t,
                                                                    const Lexicon& lexicon) {
  Transcript out = t;
  std::vector<NumberSpan> spans;
  for (std::size_t i = 0; i < out.tokens.size(); ++i) {
    std::string core = text::strip_punct(out.tokens[i].text);
    auto v = parse_number_word(core, lexicon);
    if (!v) continue;
    NumberSpan span;
    span.token_index = static_cast<int>(i);
    span.surface = out.tokens[i].text;
    span.value = *v;
    out.tokens[i].text = std::to_string(*v);
    spans.push_back(std::move(span));
  }
  return {std::move(out), std::move(spans)};
}

}  // namespace skt::numword
