#pragma once

#include "ccurate/document.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ccurate {

// ---- personal data ---------------------------------------------------------

/// Pattern classes in matching priority order.
enum class PiiClass { url_credentials, email, iban, phone, bsn };

std::string_view to_string(PiiClass cls) noexcept;
std::string placeholder(PiiClass cls);

struct PiiMatch {
    PiiClass cls;
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Validated, non-overlapping matches; earlier start wins, then longer
/// span, then class priority.
std::vector<PiiMatch> find_pii(std::string_view text);

bool iban_checksum_ok(std::string_view iban);
/// Dutch eleven-test on a 9-digit number.
bool bsn_checksum_ok(std::string_view digits);

/// One replaced span, in coordinates of the unscrubbed text.
struct Edit {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::string replacement;

    bool operator==(const Edit&) const = default;
};

struct ScrubReport {
    std::string doc_id;
    std::map<std::string, std::size_t> replacements;
    bool residual_risk_flag = false;
};

struct ScrubResult {
    std::string text;
    ScrubReport report;
    std::vector<Edit> edits;
};

/// Replaces every match with `[PII:<class>]` until nothing matches.
ScrubResult scrub_pii(std::string_view text);

/// Applies sorted, non-overlapping edits.
std::string apply_edits(std::string_view original, const std::vector<Edit>& edits);

// ---- harmful language ------------------------------------------------------

enum class Severity { none, review, drop };

std::string_view to_string(Severity severity) noexcept;
std::optional<Severity> severity_from_string(std::string_view name) noexcept;

/// Terms are matched on whole words, case-insensitively; multi-word terms
/// are allowed.
class Wordlist {
public:
    /// `term<TAB>severity` per line; blank lines and `#` comments skipped.
    static Wordlist parse(std::istream& in);
    static Wordlist load(const std::filesystem::path& path);

    void add(std::string_view term, Severity severity);
    bool empty() const noexcept { return terms_.empty(); }
    std::size_t size() const noexcept { return terms_.size(); }
    std::size_t max_words() const noexcept { return max_words_; }
    const Severity* find(const std::string& normalized_term) const;

private:
    std::map<std::string, Severity> terms_;
    std::size_t max_words_ = 0;
};

struct HarmHit {
    std::string term;
    std::size_t offset = 0;
    Severity severity = Severity::none;

    bool operator==(const HarmHit&) const = default;
};

struct HarmResult {
    Severity severity = Severity::none;
    std::vector<HarmHit> hits;
};

/// Leftmost-longest matching over word tokens. Empty wordlist throws ConfigError.
HarmResult flag_harmful(std::string_view text, const Wordlist& wordlist);

// ---- deduplication ---------------------------------------------------------

struct DedupOptions {
    std::size_t shingle_words = 13;
    std::size_t permutations = 128;
    std::size_t bands = 16;
    double threshold = 0.9;
    std::uint64_t seed = 0x5eedULL;
};

enum class DuplicateKind { exact, near };

struct DuplicateRecord {
    std::string retained;
    DuplicateKind kind = DuplicateKind::exact;
    double similarity = 1.0;
};

struct DedupReport {
    std::string scope;
    std::size_t input = 0;
    std::size_t kept = 0;
    /// dropped doc_id -> retained counterpart.
    std::map<std::string, DuplicateRecord> dropped;
};

struct DedupResult {
    std::vector<Document> kept;
    DedupReport report;
};

using ComparisonObserver = std::function<void(const Document& candidate, const Document& kept)>;

/// Word shingle fingerprints (lowercased words of the normalized text).
std::vector<std::uint64_t> shingle_hashes(std::string_view text, std::size_t shingle_words);
std::vector<std::uint64_t> minhash_signature(const std::vector<std::uint64_t>& shingles, const DedupOptions& options);
double estimate_jaccard(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b);

/// First occurrence wins. Each document is compared only with documents
/// already kept; documents outside `scope` throw ConfigError.
DedupResult deduplicate(const std::vector<Document>& docs, std::string_view scope, const DedupOptions& options = {},
                        const ComparisonObserver& observer = {});

// ---- audit -----------------------------------------------------------------

struct AuditContext {
    std::string pii_class;
    Edit edit;
    std::string original;
    std::string before;
    std::string after;
};

struct AuditEntry {
    std::string doc_id;
    std::string url;
    std::string original;
    std::string scrubbed;
    std::vector<AuditContext> changes;
};

inline constexpr std::size_t kAuditContextBytes = 40;

/// Uniform sample of `n` documents from `originals`, each re-scrubbed with
/// its edit list. Deterministic for a given seed and input order.
std::vector<AuditEntry> pii_audit_sample(const std::vector<Document>& originals, std::size_t n, std::uint64_t seed);

void to_json(nlohmann::json& j, const Edit& e);
void from_json(const nlohmann::json& j, Edit& e);
void to_json(nlohmann::json& j, const ScrubReport& r);
void from_json(const nlohmann::json& j, ScrubReport& r);
void to_json(nlohmann::json& j, const HarmResult& r);
void to_json(nlohmann::json& j, const DedupReport& r);
void to_json(nlohmann::json& j, const AuditEntry& e);
void from_json(const nlohmann::json& j, AuditEntry& e);

} // namespace ccurate
