#pragma once

#include "ccurate/document.hpp"
#include "ccurate/license.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ccurate {

enum class DomainStatus { unverified, verified_permissive, rejected, below_threshold };

std::string_view to_string(DomainStatus status) noexcept;
std::optional<DomainStatus> domain_status_from_string(std::string_view name) noexcept;

inline constexpr std::uint64_t kVerificationMinWords = 250'000;
inline constexpr std::size_t kEvidenceDocs = 5;

/// Best-ranked license candidate of one document, shown to the reviewer.
struct Evidence {
    std::string doc_id;
    std::string url;
    std::string target_url;
    std::string context_snippet;

    bool operator==(const Evidence&) const = default;
};

struct DomainLedgerEntry {
    std::string domain;
    std::uint64_t doc_count = 0;
    std::uint64_t word_count = 0;
    /// Counted over documents with a parsed best license.
    std::map<CCFamily, std::uint64_t> family_histogram;
    std::map<Location, std::uint64_t> location_histogram;
    std::uint64_t conflict_count = 0;
    /// Up to kEvidenceDocs documents, smallest doc_id first.
    std::vector<Evidence> evidence;
    DomainStatus status = DomainStatus::unverified;
    std::string verdict_note;
    std::string verdict_time;
    std::string reviewer;

    bool operator==(const DomainLedgerEntry&) const = default;
};

using DomainLedger = std::map<std::string, DomainLedgerEntry, std::less<>>;

void add_to_ledger(DomainLedger& ledger, const Document& doc);
DomainLedger build_ledger(const std::vector<Document>& docs);
/// Counts add up; evidence merges by doc_id. Commutative and associative
/// over freshly built (unverified) ledgers.
DomainLedger merge_ledgers(const DomainLedger& a, const DomainLedger& b);

/// Step 1: a domain survives when no annotated document carries a
/// non-permissive family and none is in conflict.
std::set<std::string> filter_domain_license(const DomainLedger& ledger);

/// Step 2: keep documents whose best license sits in the head or footer.
bool license_position_ok(const Document& doc) noexcept;
std::vector<Document> filter_license_position(const std::vector<Document>& docs);

struct QueueItem {
    std::string domain;
    std::uint64_t word_count = 0;
    std::vector<Evidence> evidence;

    bool operator==(const QueueItem&) const = default;
};

using VerificationQueue = std::vector<QueueItem>;

/// Step 3: unverified domains above `min_words`, by word count descending
/// then domain ascending. Unverified domains at or below the threshold are
/// marked below_threshold in `ledger`.
VerificationQueue build_verification_queue(DomainLedger& ledger, std::uint64_t min_words = kVerificationMinWords);

/// Read-only view of the queue (no status changes).
VerificationQueue verification_queue(const DomainLedger& ledger, std::uint64_t min_words = kVerificationMinWords);

/// A reviewer decision on one domain.
struct Verdict {
    std::string domain;
    DomainStatus status = DomainStatus::verified_permissive;
    std::string note;
    std::string time;
    std::string reviewer;

    bool operator==(const Verdict&) const = default;
};

/// Throws NotFoundError for unknown domains, ConflictError unless the
/// domain is unverified, ConfigError for a status other than
/// verified_permissive or rejected.
void record_verdict(DomainLedger& ledger, const Verdict& verdict);

/// Domains with status verified_permissive.
std::set<std::string> allowlisted_domains(const DomainLedger& ledger);
bool allowlisted(const DomainLedger& ledger, std::string_view domain);
std::vector<Document> apply_allowlist(const std::vector<Document>& docs, const DomainLedger& ledger);

/// Allowlist file: one JSON object per line with domain, status,
/// verdict_note, verdict_time, reviewer.
std::vector<Verdict> read_allowlist(std::istream& in);
void write_allowlist(std::ostream& out, const DomainLedger& ledger);

struct PolicyResult {
    DomainLedger ledger;
    std::set<std::string> step1_domains;
    std::vector<Document> step2_docs;
    VerificationQueue queue;
    std::vector<Document> kept;
};

/// Steps 1 to 3 in order. Verdicts for domains outside the queue are ignored.
PolicyResult run_policy(const std::vector<Document>& docs, const std::vector<Verdict>& verdicts,
                        std::uint64_t min_words = kVerificationMinWords);

/// SPDX identifiers accepted for source code (case-insensitive).
bool permissive_code_license(std::string_view spdx_id);

void to_json(nlohmann::json& j, const Evidence& e);
void from_json(const nlohmann::json& j, Evidence& e);
void to_json(nlohmann::json& j, const DomainLedgerEntry& e);
void from_json(const nlohmann::json& j, DomainLedgerEntry& e);
void to_json(nlohmann::json& j, const QueueItem& item);
void from_json(const nlohmann::json& j, QueueItem& item);
void to_json(nlohmann::json& j, const Verdict& v);
void from_json(const nlohmann::json& j, Verdict& v);

void write_ledger(std::ostream& out, const DomainLedger& ledger);
DomainLedger read_ledger(std::istream& in);

} // namespace ccurate
