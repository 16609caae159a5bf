#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers. Strings are UTF-8 throughout the pipeline; Unicode
// properties, normalisation and charset conversion come from ICU.
namespace ccurate::text {

inline constexpr char32_t kReplacement = 0xFFFD;

/// Decodes the code point starting at `pos` and advances `pos`. Invalid
/// sequences yield U+FFFD and consume one byte.
char32_t next_codepoint(std::string_view s, std::size_t& pos) noexcept;

void append_utf8(std::string& out, char32_t cp);

std::size_t codepoint_count(std::string_view s) noexcept;

/// Replaces ill-formed sequences with U+FFFD.
std::string sanitize_utf8(std::string_view s);

std::string nfc(std::string_view s);
std::string to_lower(std::string_view s);
std::string ascii_lower(std::string_view s);

bool is_alpha(char32_t cp) noexcept;
bool is_alnum(char32_t cp) noexcept;
bool is_white_space(char32_t cp) noexcept;
bool is_control(char32_t cp) noexcept;

/// Converts `bytes` from `charset` to UTF-8. Unknown charsets throw FormatError.
std::string to_utf8(std::string_view bytes, std::string_view charset);
bool is_known_charset(std::string_view charset);

/// Whitespace-delimited tokens (Unicode White_Space).
std::vector<std::string_view> split_words(std::string_view s);
std::size_t word_count(std::string_view s);

std::vector<std::string_view> split_lines(std::string_view s);

std::string_view trim(std::string_view s) noexcept;
std::string collapse_whitespace(std::string_view s);
std::string truncate_codepoints(std::string_view s, std::size_t max_codepoints);

bool iequals(std::string_view a, std::string_view b) noexcept;
bool starts_with_icase(std::string_view s, std::string_view prefix) noexcept;

} // namespace ccurate::text
