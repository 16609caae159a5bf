#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace ccurate {

/// Hierarchical URL split into its RFC 3986 components. Scheme and host are
/// stored lowercase.
struct Url {
    std::string scheme;
    std::string userinfo;
    std::string host;
    std::string port;
    std::string path;
    std::optional<std::string> query;
    std::optional<std::string> fragment;

    std::string to_string() const;
};

/// Parses an absolute URL with an authority component (`scheme://host/...`).
std::optional<Url> parse_absolute_url(std::string_view text);

/// Resolves `reference` against `base` (RFC 3986 section 5.2).
std::optional<Url> resolve_url(const Url& base, std::string_view reference);

std::string remove_dot_segments(std::string_view path);

} // namespace ccurate
