#include "ccurate/license.hpp"

#include "ccurate/text.hpp"
#include "ccurate/url.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <set>

namespace ccurate {
namespace {

constexpr std::string_view kFamilyNames[] = {"zero", "mark", "by", "by_sa", "by_nc", "by_nd", "by_nc_sa", "by_nc_nd"};
constexpr std::string_view kFamilyUrlTokens[] = {"", "", "by", "by-sa", "by-nc", "by-nd", "by-nc-sa", "by-nc-nd"};
constexpr std::string_view kKindNames[] = {"meta_tag", "json_ld", "link_rel", "anchor_href"};
constexpr std::string_view kLocationNames[] = {"head", "footer", "body"};

bool is_version(std::string_view s) {
    const auto dot = s.find('.');
    if (dot == std::string_view::npos || dot == 0 || dot + 1 == s.size()) {
        return false;
    }
    return std::all_of(s.begin(), s.end(), [](char c) { return c == '.' || std::isdigit(static_cast<unsigned char>(c)); }) &&
           std::count(s.begin(), s.end(), '.') == 1;
}

bool is_jurisdiction(std::string_view s) {
    return s.size() >= 2 && s.size() <= 10 &&
           std::all_of(s.begin(), s.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

// deed, deed.nl, legalcode, legalcode.nl, legalcode.txt
bool is_deed_suffix(std::string_view s) {
    for (std::string_view stem : {std::string_view("deed"), std::string_view("legalcode")}) {
        if (s == stem) {
            return true;
        }
        if (s.size() > stem.size() + 1 && s.substr(0, stem.size()) == stem && s[stem.size()] == '.') {
            const auto rest = s.substr(stem.size() + 1);
            if (std::all_of(rest.begin(), rest.end(), [](char c) {
                    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
                })) {
                return true;
            }
        }
    }
    return false;
}

bool is_cc_host(std::string_view host) { return host == "creativecommons.org" || host == "www.creativecommons.org"; }

std::vector<std::string_view> path_segments(std::string_view path) {
    std::vector<std::string_view> segs;
    std::size_t start = 0;
    while (start <= path.size()) {
        auto end = path.find('/', start);
        if (end == std::string_view::npos) {
            end = path.size();
        }
        if (end > start) {
            segs.push_back(path.substr(start, end - start));
        }
        start = end + 1;
    }
    return segs;
}

bool has_token(std::string_view value, std::string_view token) {
    const std::string lower = text::ascii_lower(value);
    std::size_t i = 0;
    while (i < lower.size()) {
        while (i < lower.size() && std::isalnum(static_cast<unsigned char>(lower[i])) == 0) {
            ++i;
        }
        const std::size_t start = i;
        while (i < lower.size() && std::isalnum(static_cast<unsigned char>(lower[i])) != 0) {
            ++i;
        }
        if (i > start && std::string_view(lower).substr(start, i - start) == token) {
            return true;
        }
    }
    return false;
}

bool looks_like_url(std::string_view s) {
    s = text::trim(s);
    return text::starts_with_icase(s, "http://") || text::starts_with_icase(s, "https://") || s.substr(0, 2) == "//";
}

std::optional<std::string> resolve_href(const std::optional<Url>& base, std::string_view href) {
    href = text::trim(href);
    if (href.empty()) {
        return std::nullopt;
    }
    if (base) {
        if (auto url = resolve_url(*base, href)) {
            return url->to_string();
        }
        return std::nullopt;
    }
    if (href.substr(0, 2) == "//") {
        return "https:" + std::string(href);
    }
    if (auto url = parse_absolute_url(href)) {
        return url->to_string();
    }
    return std::nullopt;
}

std::string window_around(const std::string& haystack, const std::string& needle) {
    if (text::codepoint_count(haystack) <= kMaxSnippetCodepoints) {
        return haystack;
    }
    auto at = needle.empty() ? std::string::npos : haystack.find(needle);
    if (at == std::string::npos) {
        return text::truncate_codepoints(haystack, kMaxSnippetCodepoints);
    }
    // Centre the window on the needle, in code points.
    const std::size_t needle_cps = text::codepoint_count(needle);
    std::size_t lead = needle_cps >= kMaxSnippetCodepoints ? 0 : (kMaxSnippetCodepoints - needle_cps) / 2;
    std::size_t start = at;
    while (start > 0 && lead > 0) {
        --start;
        while (start > 0 && (static_cast<unsigned char>(haystack[start]) & 0xC0) == 0x80) {
            --start;
        }
        --lead;
    }
    return text::truncate_codepoints(std::string_view(haystack).substr(start), kMaxSnippetCodepoints);
}

std::string describe_tag(const Node& node) {
    std::string out = "<" + node.tag;
    for (const auto& attr : node.attributes) {
        out += " " + attr.name + "=\"" + attr.value + "\"";
    }
    out += ">";
    return text::truncate_codepoints(out, kMaxSnippetCodepoints);
}

std::string anchor_context(const NodeTree& tree, NodeId anchor) {
    NodeId block = tree.node(anchor).parent;
    while (block != kNoNode && block != tree.body() && !is_block_element(tree.node(block).tag)) {
        block = tree.node(block).parent;
    }
    if (block == kNoNode) {
        block = anchor;
    }
    const std::string block_text = text::collapse_whitespace(tree.text_content(block));
    const std::string anchor_text = text::collapse_whitespace(tree.text_content(anchor));
    return window_around(block_text, anchor_text);
}

bool is_json_ld(const Node& node) {
    const auto* type = node.attribute("type");
    if (type == nullptr) {
        return false;
    }
    auto t = text::ascii_lower(text::trim(*type));
    t = t.substr(0, t.find(';'));
    return text::trim(t) == "application/ld+json";
}

void collect_json_ld_licenses(const nlohmann::json& value, std::vector<std::string>& out, bool allow_graph) {
    if (value.is_array()) {
        for (const auto& item : value) {
            collect_json_ld_licenses(item, out, allow_graph);
        }
        return;
    }
    if (!value.is_object()) {
        return;
    }
    if (auto it = value.find("license"); it != value.end() && it->is_string()) {
        out.push_back(it->get<std::string>());
    }
    if (allow_graph) {
        if (auto g = value.find("@graph"); g != value.end() && g->is_array()) {
            for (const auto& member : *g) {
                collect_json_ld_licenses(member, out, false);
            }
        }
    }
}

bool is_license_meta_name(std::string value) {
    value = text::ascii_lower(text::trim(value));
    std::replace(value.begin(), value.end(), ':', '.');
    return value == "license" || value == "dcterms.license" || value == "dc.rights";
}

bool is_cc_anchor_target(const std::string& resolved) {
    const auto url = parse_absolute_url(resolved);
    if (!url || !is_cc_host(url->host)) {
        return false;
    }
    const std::string path = text::ascii_lower(url->path);
    return path.rfind("/licenses/", 0) == 0 || path.rfind("/publicdomain/", 0) == 0 ||
           path.rfind("/certification/", 0) == 0;
}

} // namespace

std::string_view to_string(CCFamily family) noexcept { return kFamilyNames[static_cast<int>(family)]; }
std::string_view to_string(SourceKind kind) noexcept { return kKindNames[static_cast<int>(kind)]; }
std::string_view to_string(Location location) noexcept { return kLocationNames[static_cast<int>(location)]; }

std::optional<CCFamily> family_from_string(std::string_view name) noexcept {
    for (std::size_t i = 0; i < std::size(kFamilyNames); ++i) {
        if (kFamilyNames[i] == name) {
            return static_cast<CCFamily>(i);
        }
    }
    return std::nullopt;
}

std::optional<SourceKind> source_kind_from_string(std::string_view name) noexcept {
    for (std::size_t i = 0; i < std::size(kKindNames); ++i) {
        if (kKindNames[i] == name) {
            return static_cast<SourceKind>(i);
        }
    }
    return std::nullopt;
}

std::optional<Location> location_from_string(std::string_view name) noexcept {
    for (std::size_t i = 0; i < std::size(kLocationNames); ++i) {
        if (kLocationNames[i] == name) {
            return static_cast<Location>(i);
        }
    }
    return std::nullopt;
}

std::optional<CCLicense> parse_cc_url(std::string_view input) {
    auto trimmed = std::string(text::trim(input));
    if (trimmed.substr(0, 2) == "//") {
        trimmed = "https:" + trimmed;
    }
    const auto url = parse_absolute_url(trimmed);
    if (!url || (url->scheme != "http" && url->scheme != "https") || !is_cc_host(url->host) || !url->port.empty() ||
        !url->userinfo.empty()) {
        return std::nullopt;
    }
    const std::string path = text::ascii_lower(url->path);
    const auto segs = path_segments(path);
    if (segs.size() < 3 || !is_version(segs[2])) {
        return std::nullopt;
    }
    CCLicense license;
    std::size_t rest = 3;
    if (segs[0] == "licenses") {
        bool found = false;
        for (std::size_t i = 2; i < std::size(kFamilyUrlTokens); ++i) {
            if (segs[1] == kFamilyUrlTokens[i]) {
                license.family = static_cast<CCFamily>(i);
                found = true;
                break;
            }
        }
        if (!found) {
            return std::nullopt;
        }
        if (segs.size() > rest && !is_deed_suffix(segs[rest])) {
            if (!is_jurisdiction(segs[rest])) {
                return std::nullopt;
            }
            license.jurisdiction = std::string(segs[rest]);
            ++rest;
        }
    } else if (segs[0] == "publicdomain") {
        if (segs[1] == "zero") {
            license.family = CCFamily::zero;
        } else if (segs[1] == "mark") {
            license.family = CCFamily::mark;
        } else {
            return std::nullopt;
        }
    } else {
        return std::nullopt;
    }
    if (segs.size() > rest && is_deed_suffix(segs[rest])) {
        ++rest;
    }
    if (segs.size() != rest) {
        return std::nullopt;
    }
    license.version = std::string(segs[2]);
    return license;
}

std::string canonical_cc_url(const CCLicense& license) {
    std::string out = "https://creativecommons.org/";
    const std::string version = license.version.value_or("1.0");
    switch (license.family) {
    case CCFamily::zero:
        return out + "publicdomain/zero/" + version + "/";
    case CCFamily::mark:
        return out + "publicdomain/mark/" + version + "/";
    default:
        break;
    }
    out += "licenses/" + std::string(kFamilyUrlTokens[static_cast<int>(license.family)]) + "/" + version + "/";
    if (license.jurisdiction) {
        out += *license.jurisdiction + "/";
    }
    return out;
}

Location classify_location(NodeId node, const NodeTree& tree) {
    if (node == tree.head() || tree.is_ancestor(tree.head(), node)) {
        return Location::head;
    }
    NodeId top_level = kNoNode;
    for (NodeId cur = node; cur != kNoNode; cur = tree.node(cur).parent) {
        const Node& n = tree.node(cur);
        if (n.kind != NodeKind::element) {
            continue;
        }
        if (n.tag == "footer") {
            return Location::footer;
        }
        for (const char* attr : {"id", "class"}) {
            if (const auto* value = n.attribute(attr); value != nullptr && has_token(*value, "footer")) {
                return Location::footer;
            }
        }
        if (n.parent == tree.body()) {
            top_level = cur;
        }
    }
    if (top_level != kNoNode) {
        std::vector<NodeId> elements;
        for (NodeId child : tree.node(tree.body()).children) {
            if (tree.node(child).kind == NodeKind::element) {
                elements.push_back(child);
            }
        }
        if (elements.size() > kFooterFallbackChildren) {
            const auto tail = elements.end() - static_cast<std::ptrdiff_t>(kFooterFallbackChildren);
            if (std::find(tail, elements.end(), top_level) != elements.end()) {
                return Location::footer;
            }
        }
    }
    return Location::body;
}

std::vector<LicenseCandidate> find_candidates(const NodeTree& tree, std::string_view document_url) {
    std::optional<Url> base;
    if (!document_url.empty()) {
        base = parse_absolute_url(document_url);
    }
    for (NodeId id : tree.elements_by_tag("base")) {
        if (const auto* href = tree.node(id).attribute("href")) {
            if (base) {
                if (auto resolved = resolve_url(*base, *href)) {
                    base = std::move(resolved);
                }
            } else if (auto absolute = parse_absolute_url(*href)) {
                base = std::move(absolute);
            }
            break;
        }
    }

    std::vector<LicenseCandidate> out;
    std::size_t order = 0;
    auto add = [&](NodeId id, SourceKind kind, std::string target, std::string snippet) {
        LicenseCandidate c;
        c.source_kind = kind;
        c.location = classify_location(id, tree);
        c.parsed = parse_cc_url(target);
        c.target_url = std::move(target);
        c.context_snippet = text::truncate_codepoints(snippet, kMaxSnippetCodepoints);
        c.document_order = order;
        out.push_back(std::move(c));
    };

    tree.visit(tree.root(), [&](NodeId id) {
        ++order;
        const Node& node = tree.node(id);
        if (node.kind != NodeKind::element) {
            return;
        }
        if (node.tag == "meta") {
            const auto* name = node.attribute("name");
            const auto* property = node.attribute("property");
            const auto* content = node.attribute("content");
            const bool named = (name != nullptr && is_license_meta_name(*name)) ||
                               (property != nullptr && is_license_meta_name(*property));
            if (named && content != nullptr && looks_like_url(*content)) {
                if (auto target = resolve_href(base, *content)) {
                    add(id, SourceKind::meta_tag, *target, describe_tag(node));
                }
            }
        } else if (node.tag == "script" && is_json_ld(node)) {
            const auto parsed = nlohmann::json::parse(tree.text_content(id), nullptr, false);
            if (parsed.is_discarded()) {
                return;
            }
            std::vector<std::string> licenses;
            collect_json_ld_licenses(parsed, licenses, true);
            for (const auto& license : licenses) {
                if (!looks_like_url(license)) {
                    continue;
                }
                if (auto target = resolve_href(base, license)) {
                    add(id, SourceKind::json_ld, *target, "\"license\": \"" + license + "\"");
                }
            }
        } else if (node.tag == "link") {
            const auto* rel = node.attribute("rel");
            const auto* href = node.attribute("href");
            if (rel == nullptr || href == nullptr) {
                return;
            }
            bool licensed = false;
            for (auto word : text::split_words(*rel)) {
                licensed = licensed || text::iequals(word, "license");
            }
            if (licensed) {
                auto target = resolve_href(base, *href);
                add(id, SourceKind::link_rel, target.value_or(std::string(text::trim(*href))), describe_tag(node));
            }
        } else if (node.tag == "a") {
            const auto* href = node.attribute("href");
            if (href == nullptr) {
                return;
            }
            auto target = resolve_href(base, *href);
            if (target && is_cc_anchor_target(*target)) {
                add(id, SourceKind::anchor_href, *target, anchor_context(tree, id));
            }
        }
    });
    return out;
}

std::vector<LicenseCandidate> rank_candidates(std::vector<LicenseCandidate> candidates) {
    std::stable_sort(candidates.begin(), candidates.end(), [](const LicenseCandidate& a, const LicenseCandidate& b) {
        const auto ka = std::tuple(kind_priority(a.source_kind), location_priority(a.location), a.document_order);
        const auto kb = std::tuple(kind_priority(b.source_kind), location_priority(b.location), b.document_order);
        return ka < kb;
    });
    int rank = 1;
    for (auto& c : candidates) {
        c.rank = rank++;
    }
    return candidates;
}

LicenseAnnotation resolve(std::vector<LicenseCandidate> ranked) {
    LicenseAnnotation annotation;
    std::set<CCFamily> families;
    for (const auto& c : ranked) {
        if (!c.parsed) {
            continue;
        }
        families.insert(c.parsed->family);
        if (!annotation.best) {
            annotation.best = c.parsed;
            annotation.best_location = c.location;
        }
    }
    annotation.conflict = families.size() >= 2;
    annotation.candidates = std::move(ranked);
    return annotation;
}

LicenseAnnotation extract_license(const NodeTree& tree, std::string_view document_url) {
    return resolve(rank_candidates(find_candidates(tree, document_url)));
}

namespace {
template <class T>
nlohmann::json optional_json(const std::optional<T>& value) {
    return value ? nlohmann::json(*value) : nlohmann::json(nullptr);
}
} // namespace

void to_json(nlohmann::json& j, const CCLicense& license) {
    j = nlohmann::json{{"family", to_string(license.family)},
                       {"version", optional_json(license.version)},
                       {"jurisdiction", optional_json(license.jurisdiction)}};
}

void from_json(const nlohmann::json& j, CCLicense& license) {
    const auto family = family_from_string(j.at("family").get<std::string>());
    if (!family) {
        throw nlohmann::json::other_error::create(501, "unknown license family", &j);
    }
    license.family = *family;
    license.version.reset();
    license.jurisdiction.reset();
    if (auto it = j.find("version"); it != j.end() && it->is_string()) {
        license.version = it->get<std::string>();
    }
    if (auto it = j.find("jurisdiction"); it != j.end() && it->is_string()) {
        license.jurisdiction = it->get<std::string>();
    }
}

void to_json(nlohmann::json& j, const LicenseCandidate& c) {
    j = nlohmann::json{{"source_kind", to_string(c.source_kind)},
                       {"location", to_string(c.location)},
                       {"target_url", c.target_url},
                       {"parsed", optional_json(c.parsed)},
                       {"context_snippet", c.context_snippet},
                       {"rank", c.rank}};
}

void from_json(const nlohmann::json& j, LicenseCandidate& c) {
    const auto kind = source_kind_from_string(j.at("source_kind").get<std::string>());
    const auto location = location_from_string(j.at("location").get<std::string>());
    if (!kind || !location) {
        throw nlohmann::json::other_error::create(501, "unknown candidate source kind or location", &j);
    }
    c.source_kind = *kind;
    c.location = *location;
    c.target_url = j.value("target_url", std::string{});
    c.parsed.reset();
    if (auto it = j.find("parsed"); it != j.end() && !it->is_null()) {
        c.parsed = it->get<CCLicense>();
    }
    c.context_snippet = j.value("context_snippet", std::string{});
    c.rank = j.value("rank", 0);
    c.document_order = static_cast<std::size_t>(c.rank);
}

void to_json(nlohmann::json& j, const LicenseAnnotation& a) {
    j = nlohmann::json{{"best", optional_json(a.best)},
                       {"best_location", a.best_location ? nlohmann::json(to_string(*a.best_location))
                                                         : nlohmann::json(nullptr)},
                       {"conflict", a.conflict},
                       {"candidates", a.candidates}};
}

void from_json(const nlohmann::json& j, LicenseAnnotation& a) {
    a = LicenseAnnotation{};
    if (auto it = j.find("best"); it != j.end() && !it->is_null()) {
        a.best = it->get<CCLicense>();
    }
    if (auto it = j.find("best_location"); it != j.end() && it->is_string()) {
        a.best_location = location_from_string(it->get<std::string>());
    }
    a.conflict = j.value("conflict", false);
    if (auto it = j.find("candidates"); it != j.end()) {
        a.candidates = it->get<std::vector<LicenseCandidate>>();
    }
}

} // namespace ccurate
