#include "skt/textutil.hpp"

namespace skt::text {

namespace {

// Returns the expected continuation-byte count for a UTF-8 lead byte, or -1.
int utf8_tail_len(unsigned char lead) {
  if (lead < 0x80) return 0;
  if ((lead & 0xE0) == 0xC0) return 1;
  if ((lead & 0xF0) == 0xE0) return 2;
  if ((lead & 0xF8) == 0xF0) return 3;
  return -1;
}

}  // namespace

std::vector<char32_t> utf8_decode(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char lead = static_cast<unsigned char>(s[i]);
    int tail = utf8_tail_len(lead);
    if (tail <= 0) {
      // ASCII fast path; invalid lead bytes fall back to Latin-1.
      out.push_back(static_cast<char32_t>(lead));
      ++i;
      continue;
    }
    bool ok = i + static_cast<std::size_t>(tail) < s.size();
    char32_t cp = lead & (0x3F >> tail);
    for (int k = 1; ok && k <= tail; ++k) {
      unsigned char c = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
      if ((c & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (c & 0x3F);
      }
    }
    if (!ok) {
      out.push_back(static_cast<char32_t>(lead));
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(tail) + 1;
  }
  return out;
}

std::string utf8_encode(const std::vector<char32_t>& cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

char32_t lower_de(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + (U'a' - U'A');
  switch (c) {
    case U'Ä': return U'ä';
    case U'Ö': return U'ö';
    case U'Ü': return U'ü';
    case U'ẞ': return U'ß';  // capital sharp s (U+1E9E)
    default: break;
  }
  // Latin-1 supplement uppercase block (covers accented letters in names).
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
  return c;
}

std::string lowercase_de(std::string_view s) {
  std::vector<char32_t> cps = utf8_decode(s);
  for (char32_t& c : cps) c = lower_de(c);
  return utf8_encode(cps);
}

bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' ||
         c == U'\v' || c == 0xA0;
}

bool is_word_char(char32_t c) {
  if (c >= U'0' && c <= U'9') return true;
  if (c >= U'a' && c <= U'z') return true;
  if (c >= U'A' && c <= U'Z') return true;
  if (c >= 0xC0 && c <= 0xFF && c != 0xD7 && c != 0xF7) return true;  // Latin-1 letters
  if (c == U'ẞ') return true;
  return c > 0xFF && !is_space(c) && c != U'…';
}

std::string strip_punct(std::string_view s) {
  std::vector<char32_t> cps = utf8_decode(s);
  std::size_t b = 0;
  std::size_t e = cps.size();
  while (b < e && !is_word_char(cps[b])) ++b;
  while (e > b && !is_word_char(cps[e - 1])) --e;
  return utf8_encode(std::vector<char32_t>(cps.begin() + static_cast<long>(b),
                                           cps.begin() + static_cast<long>(e)));
}

std::string strip_hyphens(std::string_view s) {
  std::vector<char32_t> cps = utf8_decode(s);
  std::vector<char32_t> out;
  out.reserve(cps.size());
  for (char32_t c : cps) {
    if (c == U'-' || c == 0x2010 || c == 0x2011 || c == 0x2013 || c == 0x2014) continue;
    out.push_back(c);
  }
  return utf8_encode(out);
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<char32_t> cps = utf8_decode(s);
  std::vector<std::string> words;
  std::vector<char32_t> cur;
  auto flush = [&] {
    if (cur.empty()) return;
    std::string w = strip_punct(utf8_encode(cur));
    if (!w.empty()) words.push_back(lowercase_de(w));
    cur.clear();
  };
  for (char32_t c : cps) {
    if (is_space(c)) {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return words;
}

}  // namespace skt::text
