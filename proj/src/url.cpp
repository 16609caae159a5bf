#include "ccurate/url.hpp"

#include "ccurate/text.hpp"

#include <cctype>
#include <vector>

namespace ccurate {
namespace {

bool valid_scheme(std::string_view s) {
    if (s.empty() || std::isalpha(static_cast<unsigned char>(s[0])) == 0) {
        return false;
    }
    for (char c : s) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) == 0 && c != '+' && c != '-' && c != '.') {
            return false;
        }
    }
    return true;
}

bool has_space_or_control(std::string_view s) {
    for (char c : s) {
        const auto u = static_cast<unsigned char>(c);
        if (u <= 0x20 || u == 0x7F) {
            return true;
        }
    }
    return false;
}

struct Parts {
    std::optional<std::string> scheme;
    std::optional<std::string> authority;
    std::string path;
    std::optional<std::string> query;
    std::optional<std::string> fragment;
};

Parts split_reference(std::string_view ref) {
    Parts p;
    if (const auto hash = ref.find('#'); hash != std::string_view::npos) {
        p.fragment = std::string(ref.substr(hash + 1));
        ref = ref.substr(0, hash);
    }
    if (const auto q = ref.find('?'); q != std::string_view::npos) {
        p.query = std::string(ref.substr(q + 1));
        ref = ref.substr(0, q);
    }
    if (const auto colon = ref.find(':'); colon != std::string_view::npos) {
        const auto slash = ref.find('/');
        if ((slash == std::string_view::npos || colon < slash) && valid_scheme(ref.substr(0, colon))) {
            p.scheme = text::ascii_lower(ref.substr(0, colon));
            ref = ref.substr(colon + 1);
        }
    }
    if (ref.substr(0, 2) == "//") {
        ref = ref.substr(2);
        const auto end = ref.find('/');
        p.authority = std::string(ref.substr(0, end));
        ref = end == std::string_view::npos ? std::string_view{} : ref.substr(end);
    }
    p.path = std::string(ref);
    return p;
}

bool split_authority(std::string_view auth, Url& url) {
    if (const auto at = auth.rfind('@'); at != std::string_view::npos) {
        url.userinfo = std::string(auth.substr(0, at));
        auth = auth.substr(at + 1);
    }
    std::string_view host = auth;
    if (!auth.empty() && auth.front() == '[') {
        const auto close = auth.find(']');
        if (close == std::string_view::npos) {
            return false;
        }
        host = auth.substr(0, close + 1);
        auto rest = auth.substr(close + 1);
        if (!rest.empty()) {
            if (rest.front() != ':') {
                return false;
            }
            url.port = std::string(rest.substr(1));
        }
    } else if (const auto colon = auth.rfind(':'); colon != std::string_view::npos) {
        host = auth.substr(0, colon);
        url.port = std::string(auth.substr(colon + 1));
    }
    for (char c : url.port) {
        if (std::isdigit(static_cast<unsigned char>(c)) == 0) {
            return false;
        }
    }
    std::string h = text::ascii_lower(host);
    while (!h.empty() && h.back() == '.') {
        h.pop_back();
    }
    url.host = std::move(h);
    return true;
}

std::string merge_paths(const Url& base, std::string_view ref_path) {
    if (!base.host.empty() && base.path.empty()) {
        return "/" + std::string(ref_path);
    }
    const auto slash = base.path.rfind('/');
    if (slash == std::string::npos) {
        return std::string(ref_path);
    }
    return base.path.substr(0, slash + 1) + std::string(ref_path);
}

} // namespace

std::string Url::to_string() const {
    std::string out = scheme + "://";
    if (!userinfo.empty()) {
        out += userinfo + "@";
    }
    out += host;
    if (!port.empty()) {
        out += ":" + port;
    }
    out += path.empty() ? "/" : path;
    if (query) {
        out += "?" + *query;
    }
    if (fragment) {
        out += "#" + *fragment;
    }
    return out;
}

std::string remove_dot_segments(std::string_view path) {
    std::vector<std::string_view> out;
    std::string_view in = path;
    const bool absolute = !in.empty() && in.front() == '/';
    bool trailing_slash = false;
    std::size_t pos = absolute ? 1 : 0;
    while (pos <= in.size()) {
        auto end = in.find('/', pos);
        if (end == std::string_view::npos) {
            end = in.size();
        }
        const auto seg = in.substr(pos, end - pos);
        const bool last = end == in.size();
        if (seg == ".") {
            trailing_slash = last;
        } else if (seg == "..") {
            if (!out.empty()) {
                out.pop_back();
            }
            trailing_slash = last;
        } else {
            out.push_back(seg);
            trailing_slash = false;
        }
        pos = end + 1;
    }
    std::string result = absolute ? "/" : "";
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (i > 0) {
            result += '/';
        }
        result += out[i];
    }
    if (trailing_slash && (result.empty() || result.back() != '/')) {
        result += '/';
    }
    return result;
}

std::optional<Url> parse_absolute_url(std::string_view input) {
    const auto trimmed = text::trim(input);
    if (trimmed.empty() || has_space_or_control(trimmed)) {
        return std::nullopt;
    }
    Parts p = split_reference(trimmed);
    if (!p.scheme || !p.authority) {
        return std::nullopt;
    }
    Url url;
    url.scheme = *p.scheme;
    if (!split_authority(*p.authority, url) || url.host.empty()) {
        return std::nullopt;
    }
    url.path = p.path.empty() ? "/" : remove_dot_segments(p.path);
    url.query = std::move(p.query);
    url.fragment = std::move(p.fragment);
    return url;
}

std::optional<Url> resolve_url(const Url& base, std::string_view reference) {
    const auto ref = text::trim(reference);
    if (has_space_or_control(ref)) {
        return std::nullopt;
    }
    Parts p = split_reference(ref);
    Url target;
    if (p.scheme) {
        if (!p.authority) {
            return std::nullopt; // mailto:, javascript: and friends
        }
        return parse_absolute_url(ref);
    }
    target.scheme = base.scheme;
    if (p.authority) {
        if (!split_authority(*p.authority, target) || target.host.empty()) {
            return std::nullopt;
        }
        target.path = p.path.empty() ? "/" : remove_dot_segments(p.path);
        target.query = std::move(p.query);
    } else {
        target.userinfo = base.userinfo;
        target.host = base.host;
        target.port = base.port;
        if (p.path.empty()) {
            target.path = base.path;
            target.query = p.query ? std::move(p.query) : base.query;
        } else {
            target.path = p.path.front() == '/' ? remove_dot_segments(p.path)
                                                : remove_dot_segments(merge_paths(base, p.path));
            target.query = std::move(p.query);
        }
    }
    target.fragment = std::move(p.fragment);
    return target;
}

} // namespace ccurate
