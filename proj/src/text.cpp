#include "convodyn/text.hpp"

#include <algorithm>
#include <iterator>
#include <utility>

namespace convodyn::text {

namespace {

struct Range {
  char32_t lo;
  char32_t hi;
};

// Alphabetic blocks of the scripts a support chat is plausibly written in.
// Ranges are inclusive and sorted; symbols interleaved inside Latin-1 are
// excluded explicitly.
constexpr Range kLetterRanges[] = {
    {U'A', U'Z'},         {U'a', U'z'},         {0x00AA, 0x00AA},     {0x00B5, 0x00B5},
    {0x00BA, 0x00BA},     {0x00C0, 0x00D6},     {0x00D8, 0x00F6},     {0x00F8, 0x02C1},
    {0x02C6, 0x02D1},     {0x0370, 0x0374},     {0x0376, 0x037D},     {0x0386, 0x0386},
    {0x0388, 0x03FF},     {0x0400, 0x0481},     {0x048A, 0x052F},     {0x0531, 0x0556},
    {0x0561, 0x0587},     {0x05D0, 0x05EA},     {0x0620, 0x064A},     {0x0671, 0x06D3},
    {0x0904, 0x0939},     {0x0E01, 0x0E30},     {0x10A0, 0x10FF},     {0x1100, 0x11FF},
    {0x1E00, 0x1FFF},     {0x2C00, 0x2DFF},     {0x3041, 0x3096},     {0x30A1, 0x30FA},
    {0x3105, 0x312F},     {0x3131, 0x318E},     {0x3400, 0x4DBF},     {0x4E00, 0x9FFF},
    {0xA640, 0xA69F},     {0xA722, 0xA7FF},     {0xAC00, 0xD7A3},     {0xF900, 0xFAFF},
    {0xFF21, 0xFF3A},     {0xFF41, 0xFF5A},
};

constexpr Range kDigitRanges[] = {
    {U'0', U'9'},
    {0x0660, 0x0669},
    {0x06F0, 0x06F9},
    {0x0966, 0x096F},
    {0x0E50, 0x0E59},
    {0xFF10, 0xFF19},
};

template <std::size_t N>
bool in_ranges(char32_t cp, const Range (&ranges)[N]) {
  auto it = std::upper_bound(std::begin(ranges), std::end(ranges), cp,
                             [](char32_t value, const Range& r) { return value < r.lo; });
  if (it == std::begin(ranges)) return false;
  --it;
  return cp <= it->hi;
}

}  // namespace

std::u32string decode_utf8(std::string_view bytes) {
  std::u32string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  while (i < bytes.size()) {
    const auto b0 = static_cast<unsigned char>(bytes[i]);
    int len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      ++i;
      continue;
    }
    if (i + static_cast<std::size_t>(len) > bytes.size()) {
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(bytes[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    // Reject overlong forms, surrogates and out-of-range values.
    static constexpr char32_t kMinForLen[] = {0, 0, 0x80, 0x800, 0x10000};
    if (!ok || cp < kMinForLen[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

std::string encode_utf8(std::u32string_view code_points) {
  std::string out;
  out.reserve(code_points.size());
  for (char32_t cp : code_points) {
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

bool is_letter(char32_t cp) { return in_ranges(cp, kLetterRanges); }

bool is_digit(char32_t cp) { return in_ranges(cp, kDigitRanges); }

bool is_space(char32_t cp) {
  switch (cp) {
    case U' ':
    case U'\t':
    case U'\n':
    case U'\v':
    case U'\f':
    case U'\r':
    case 0x00A0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_kept_punctuation(char32_t cp) {
  switch (cp) {
    case U'.':
    case U',':
    case U';':
    case U':':
    case U'!':
    case U'?':
    case U'\'':
    case U'"':
    case U'(':
    case U')':
    case U'-':
      return true;
    default:
      return false;
  }
}

std::string clean(std::string_view raw) {
  std::u32string cps = decode_utf8(raw);
  std::u32string kept;
  kept.reserve(cps.size());
  for (char32_t cp : cps) {
    if (is_letter(cp) || is_digit(cp) || is_space(cp) || is_kept_punctuation(cp)) kept.push_back(cp);
  }
  std::size_t first = 0;
  while (first < kept.size() && is_space(kept[first])) ++first;
  std::size_t last = kept.size();
  while (last > first && is_space(kept[last - 1])) --last;
  return encode_utf8(std::u32string_view(kept).substr(first, last - first));
}

bool is_blank(std::string_view s) {
  for (char32_t cp : decode_utf8(s)) {
    if (!is_space(cp)) return false;
  }
  return true;
}

std::string truncate_code_points(std::string_view s, std::size_t max_chars) {
  std::size_t count = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    if (count == max_chars) return std::string(s.substr(0, i));
    const auto b = static_cast<unsigned char>(s[i]);
    std::size_t len = b < 0x80 ? 1 : (b & 0xE0) == 0xC0 ? 2 : (b & 0xF0) == 0xE0 ? 3 : (b & 0xF8) == 0xF0 ? 4 : 1;
    i = std::min(s.size(), i + len);
    ++count;
  }
  return std::string(s);
}

std::size_t code_point_count(std::string_view s) {
  std::size_t count = 0;
  for (char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++count;
  }
  return count;
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::u32string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(encode_utf8(current));
      current.clear();
    }
  };
  for (char32_t cp : decode_utf8(s)) {
    if (is_letter(cp) || is_digit(cp)) {
      if (cp >= U'A' && cp <= U'Z') cp += U'a' - U'A';
      // Latin-1 upper case, enough for Spanish and Portuguese accents.
      else if ((cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7)) cp += 0x20;
      current.push_back(cp);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

}  // namespace convodyn::text
