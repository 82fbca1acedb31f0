#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace convodyn::text {

// Decodes UTF-8 into code points. Invalid sequences are skipped byte by byte.
std::u32string decode_utf8(std::string_view bytes);
std::string encode_utf8(std::u32string_view code_points);

bool is_letter(char32_t cp);
bool is_digit(char32_t cp);
bool is_space(char32_t cp);
bool is_kept_punctuation(char32_t cp);

// Keeps letters, digits, whitespace and the punctuation . , ; : ! ? ' " ( ) -
// and trims surrounding whitespace.
std::string clean(std::string_view raw);

bool is_blank(std::string_view s);

// First `max_chars` code points of a UTF-8 string.
std::string truncate_code_points(std::string_view s, std::size_t max_chars);

std::size_t code_point_count(std::string_view s);

// Lower-cased word tokens: maximal runs of letters or digits.
std::vector<std::string> tokenize(std::string_view s);

}  // namespace convodyn::text
