#include "ccurate/text.hpp"

#include "ccurate/error.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/ucnv.h>
#include <unicode/unistr.h>

#include <algorithm>

namespace ccurate::text {

char32_t next_codepoint(std::string_view s, std::size_t& pos) noexcept {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    if (b0 < 0x80) {
        ++pos;
        return b0;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
        min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
        min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
        min = 0x10000;
    } else {
        ++pos;
        return kReplacement;
    }
    if (pos + len > s.size()) {
        ++pos;
        return kReplacement;
    }
    for (std::size_t i = 1; i < len; ++i) {
        const auto b = static_cast<unsigned char>(s[pos + i]);
        if ((b & 0xC0) != 0x80) {
            ++pos;
            return kReplacement;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        ++pos;
        return kReplacement;
    }
    pos += len;
    return cp;
}

void append_utf8(std::string& out, char32_t cp) {
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

std::size_t codepoint_count(std::string_view s) noexcept {
    std::size_t n = 0;
    for (std::size_t i = 0; i < s.size();) {
        next_codepoint(s, i);
        ++n;
    }
    return n;
}

std::string sanitize_utf8(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        const std::size_t start = i;
        const char32_t cp = next_codepoint(s, i);
        if (cp == kReplacement && !(i - start == 3 && s.substr(start, 3) == "\xEF\xBF\xBD")) {
            append_utf8(out, kReplacement);
        } else {
            out.append(s.substr(start, i - start));
        }
    }
    return out;
}

std::string nfc(std::string_view s) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) {
        throw Error("ICU NFC normaliser unavailable");
    }
    const auto src = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
    if (norm->isNormalized(src, status) && U_SUCCESS(status)) {
        return std::string(s);
    }
    status = U_ZERO_ERROR;
    const icu::UnicodeString out = norm->normalize(src, status);
    std::string result;
    out.toUTF8String(result);
    return result;
}

std::string to_lower(std::string_view s) {
    auto u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
    u.toLower(icu::Locale::getRoot());
    std::string out;
    u.toUTF8String(out);
    return out;
}

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(c >= 'A' && c <= 'Z' ? c + 32 : c);
    });
    return out;
}

bool is_alpha(char32_t cp) noexcept { return u_isUAlphabetic(static_cast<UChar32>(cp)) != 0; }
bool is_alnum(char32_t cp) noexcept {
    return u_isUAlphabetic(static_cast<UChar32>(cp)) != 0 || u_isdigit(static_cast<UChar32>(cp)) != 0;
}
bool is_white_space(char32_t cp) noexcept { return u_isUWhiteSpace(static_cast<UChar32>(cp)) != 0; }
bool is_control(char32_t cp) noexcept { return u_charType(static_cast<UChar32>(cp)) == U_CONTROL_CHAR; }

bool is_known_charset(std::string_view charset) {
    UErrorCode status = U_ZERO_ERROR;
    const std::string name(charset);
    UConverter* conv = ucnv_open(name.c_str(), &status);
    if (conv != nullptr) {
        ucnv_close(conv);
    }
    return U_SUCCESS(status);
}

std::string to_utf8(std::string_view bytes, std::string_view charset) {
    const std::string name(charset);
    UErrorCode status = U_ZERO_ERROR;
    UConverter* conv = ucnv_open(name.c_str(), &status);
    if (U_FAILURE(status) || conv == nullptr) {
        throw FormatError("unknown charset: " + name);
    }
    icu::UnicodeString u(bytes.data(), static_cast<int32_t>(bytes.size()), conv, status);
    ucnv_close(conv);
    if (U_FAILURE(status)) {
        throw FormatError("charset conversion failed: " + name);
    }
    std::string out;
    u.toUTF8String(out);
    return out;
}

std::vector<std::string_view> split_words(std::string_view s) {
    std::vector<std::string_view> words;
    std::size_t start = std::string_view::npos;
    for (std::size_t i = 0; i < s.size();) {
        const std::size_t at = i;
        const char32_t cp = next_codepoint(s, i);
        if (is_white_space(cp)) {
            if (start != std::string_view::npos) {
                words.push_back(s.substr(start, at - start));
                start = std::string_view::npos;
            }
        } else if (start == std::string_view::npos) {
            start = at;
        }
    }
    if (start != std::string_view::npos) {
        words.push_back(s.substr(start));
    }
    return words;
}

std::size_t word_count(std::string_view s) {
    std::size_t n = 0;
    bool in_word = false;
    for (std::size_t i = 0; i < s.size();) {
        const bool ws = is_white_space(next_codepoint(s, i));
        if (!ws && !in_word) {
            ++n;
        }
        in_word = !ws;
    }
    return n;
}

std::vector<std::string_view> split_lines(std::string_view s) {
    std::vector<std::string_view> lines;
    if (s.empty()) {
        return lines;
    }
    std::size_t start = 0;
    while (true) {
        const std::size_t nl = s.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(s.substr(start));
            break;
        }
        lines.push_back(s.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

std::string_view trim(std::string_view s) noexcept {
    std::size_t begin = 0;
    std::size_t end = s.size();
    // Walk code points so multi-byte spaces (NBSP, ideographic space) are trimmed too.
    while (begin < end) {
        std::size_t next = begin;
        if (!is_white_space(next_codepoint(s, next))) {
            break;
        }
        begin = next;
    }
    while (end > begin) {
        std::size_t start = end - 1;
        while (start > begin && (static_cast<unsigned char>(s[start]) & 0xC0) == 0x80) {
            --start;
        }
        std::size_t probe = start;
        if (!is_white_space(next_codepoint(s, probe)) || probe != end) {
            break;
        }
        end = start;
    }
    return s.substr(begin, end - begin);
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending = false;
    for (std::size_t i = 0; i < s.size();) {
        const std::size_t at = i;
        const char32_t cp = next_codepoint(s, i);
        if (is_white_space(cp)) {
            pending = true;
            continue;
        }
        if (pending && !out.empty()) {
            out.push_back(' ');
        }
        pending = false;
        out.append(s.substr(at, i - at));
    }
    return out;
}

std::string truncate_codepoints(std::string_view s, std::size_t max_codepoints) {
    std::size_t i = 0;
    for (std::size_t n = 0; n < max_codepoints && i < s.size(); ++n) {
        next_codepoint(s, i);
    }
    return std::string(s.substr(0, i));
}

bool iequals(std::string_view a, std::string_view b) noexcept {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto x = static_cast<unsigned char>(a[i]);
        auto y = static_cast<unsigned char>(b[i]);
        if (x >= 'A' && x <= 'Z') x += 32;
        if (y >= 'A' && y <= 'Z') y += 32;
        if (x != y) {
            return false;
        }
    }
    return true;
}

bool starts_with_icase(std::string_view s, std::string_view prefix) noexcept {
    return s.size() >= prefix.size() && iequals(s.substr(0, prefix.size()), prefix);
}

} // namespace ccurate::text
