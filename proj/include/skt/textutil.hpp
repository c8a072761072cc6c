#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace skt::text {

// Decodes UTF-8 into Unicode scalar values. Invalid bytes are interpreted
// as Latin-1 so that malformed input degrades gracefully instead of
// throwing inside distance computations.
std::vector<char32_t> utf8_decode(std::string_view s);

std::string utf8_encode(const std::vector<char32_t>& cps);

// Lowercasing that covers ASCII plus the German letters: A-umlaut,
// O-umlaut, U-umlaut and capital sharp-s.
char32_t lower_de(char32_t c);
std::string lowercase_de(std::string_view s);

// True for Unicode whitespace we care about (ASCII space/tab/newline family
// plus NBSP).
bool is_space(char32_t c);

// Letters (ASCII plus Latin-1 supplement letter range) and digits.
bool is_word_char(char32_t c);

// Strips leading/trailing non-word characters: "Hund," -> "Hund".
std::string strip_punct(std::string_view s);

// Removes hyphens/dashes anywhere in the string.
std::string strip_hyphens(std::string_view s);

// Lowercases, strips punctuation and splits on whitespace. Empty tokens are
// dropped. This is the normalization used for word-level error metrics.
std::vector<std::string> split_words(std::string_view s);

}  // namespace skt::text
