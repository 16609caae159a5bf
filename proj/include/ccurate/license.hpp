#pragma once

#include "ccurate/markup.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ccurate {

enum class CCFamily { zero, mark, by, by_sa, by_nc, by_nd, by_nc_sa, by_nc_nd };

inline constexpr CCFamily kAllFamilies[] = {CCFamily::zero,  CCFamily::mark,  CCFamily::by,       CCFamily::by_sa,
                                            CCFamily::by_nc, CCFamily::by_nd, CCFamily::by_nc_sa, CCFamily::by_nc_nd};

std::string_view to_string(CCFamily family) noexcept;
std::optional<CCFamily> family_from_string(std::string_view name) noexcept;

struct CCLicense {
    CCFamily family = CCFamily::by;
    std::optional<std::string> version;
    std::optional<std::string> jurisdiction;

    bool operator==(const CCLicense&) const = default;
};

/// CC-0, the Public Domain Mark and CC-BY are the permissive families.
constexpr bool is_permissive(CCFamily family) noexcept {
    return family == CCFamily::zero || family == CCFamily::mark || family == CCFamily::by;
}
inline bool is_permissive(const CCLicense& license) noexcept { return is_permissive(license.family); }

enum class SourceKind { meta_tag, json_ld, link_rel, anchor_href };
enum class Location { head, footer, body };

std::string_view to_string(SourceKind kind) noexcept;
std::string_view to_string(Location location) noexcept;
std::optional<SourceKind> source_kind_from_string(std::string_view name) noexcept;
std::optional<Location> location_from_string(std::string_view name) noexcept;

struct LicenseCandidate {
    SourceKind source_kind = SourceKind::anchor_href;
    Location location = Location::body;
    std::string target_url;
    std::optional<CCLicense> parsed;
    std::string context_snippet;
    /// 1 = most confident; 0 until rank_candidates has run.
    int rank = 0;
    /// Pre-order position of the originating node; ties in ranking fall back to it.
    std::size_t document_order = 0;
};

struct LicenseAnnotation {
    std::vector<LicenseCandidate> candidates;
    std::optional<CCLicense> best;
    std::optional<Location> best_location;
    bool conflict = false;
};

/// Number of trailing top-level body elements treated as footer when no
/// explicit footer markup exists.
inline constexpr std::size_t kFooterFallbackChildren = 3;
inline constexpr std::size_t kMaxSnippetCodepoints = 200;

/// Recognises creativecommons.org license and public-domain tool URLs.
std::optional<CCLicense> parse_cc_url(std::string_view url);
std::string canonical_cc_url(const CCLicense& license);

Location classify_location(NodeId node, const NodeTree& tree);

/// Unranked candidates in document order. Relative hrefs are resolved
/// against `document_url` (or a `<base href>` when present).
std::vector<LicenseCandidate> find_candidates(const NodeTree& tree, std::string_view document_url = {});

std::vector<LicenseCandidate> rank_candidates(std::vector<LicenseCandidate> candidates);
LicenseAnnotation resolve(std::vector<LicenseCandidate> ranked);

/// find_candidates, rank_candidates and resolve in sequence.
LicenseAnnotation extract_license(const NodeTree& tree, std::string_view document_url = {});

/// Priority tuple used by rank_candidates; smaller sorts first.
constexpr int kind_priority(SourceKind kind) noexcept { return static_cast<int>(kind); }
constexpr int location_priority(Location location) noexcept { return static_cast<int>(location); }

void to_json(nlohmann::json& j, const CCLicense& license);
void from_json(const nlohmann::json& j, CCLicense& license);
void to_json(nlohmann::json& j, const LicenseCandidate& candidate);
void from_json(const nlohmann::json& j, LicenseCandidate& candidate);
void to_json(nlohmann::json& j, const LicenseAnnotation& annotation);
void from_json(const nlohmann::json& j, LicenseAnnotation& annotation);

} // namespace ccurate
