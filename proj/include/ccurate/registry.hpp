#pragma once

#include "ccurate/curate.hpp"
#include "ccurate/policy.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ccurate {

enum class LicenseBasis { public_domain, cc0, cc_by, consented, code_permissive };

std::string_view to_string(LicenseBasis basis) noexcept;
std::optional<LicenseBasis> license_basis_from_string(std::string_view name) noexcept;

struct CollectionRecord {
    std::string collection_id;
    std::string source_description;
    LicenseBasis license_basis = LicenseBasis::public_domain;
    /// Tokens per language code ("other" for the remainder).
    std::map<std::string, double> language_breakdown;
    std::uint64_t token_count = 0;
    std::uint64_t word_count = 0;
    std::string provenance_notes;
    /// 1 on registration, +1 per update.
    int version = 1;

    bool operator==(const CollectionRecord&) const = default;
};

enum class RiskLevel { low, medium, high };

std::string_view to_string(RiskLevel level) noexcept;
std::optional<RiskLevel> risk_level_from_string(std::string_view name) noexcept;

struct RiskWeights {
    double low = 1.0;
    double medium = 0.5;
    double high = 0.1;

    /// Each weight in (0, 1] and high <= medium <= low; throws ConfigError.
    void validate() const;
    double weight(RiskLevel level) const noexcept;
    bool operator==(const RiskWeights&) const = default;
};

struct RiskRecord {
    std::string collection_id;
    RiskLevel risk = RiskLevel::low;
    std::string rationale;
    double sampling_weight = 1.0;
    /// Set when the collection was rejected outright.
    bool removed = false;

    bool operator==(const RiskRecord&) const = default;
};

void to_json(nlohmann::json& j, const CollectionRecord& r);
void from_json(const nlohmann::json& j, CollectionRecord& r);
void to_json(nlohmann::json& j, const RiskWeights& w);
void from_json(const nlohmann::json& j, RiskWeights& w);
void to_json(nlohmann::json& j, const RiskRecord& r);
void from_json(const nlohmann::json& j, RiskRecord& r);

/// Everything the registry knows; rebuilt by replaying the event log.
struct RegistryState {
    std::map<std::string, std::vector<CollectionRecord>, std::less<>> collections;
    std::map<std::string, RiskRecord, std::less<>> risks;
    RiskWeights weights;
    std::map<std::string, ThresholdConfig, std::less<>> thresholds;
    DomainLedger ledger;
    std::uint64_t last_seq = 0;

    bool operator==(const RegistryState&) const = default;
};

/// Append-only event log under `root/events.jsonl` plus derived files:
/// `configs/<id>.json` threshold snapshots and `reports/<id>/<dim>.json`
/// bucket reports. All mutations are serialized and logged before they
/// take effect in memory.
class Registry {
public:
    using Clock = std::function<std::string()>;

    explicit Registry(std::filesystem::path root, Clock clock = {});

    const std::filesystem::path& root() const noexcept { return root_; }

    CollectionRecord register_collection(CollectionRecord record);
    CollectionRecord update_collection(CollectionRecord record);
    std::optional<CollectionRecord> collection(std::string_view id) const;
    std::vector<CollectionRecord> collection_history(std::string_view id) const;
    std::vector<CollectionRecord> collections() const;

    /// `risk` is low, medium, high or rejected (stored as high + removed).
    RiskRecord assign_risk(std::string_view collection_id, std::string_view risk, std::string rationale);
    std::optional<RiskRecord> risk(std::string_view collection_id) const;
    void set_risk_weights(const RiskWeights& weights);
    RiskWeights risk_weights() const;

    /// Stored config, or reference bounds at version 0.
    ThresholdConfig thresholds(std::string_view collection_id) const;
    /// Requires cfg.version == current + 1 (ConflictError otherwise).
    ThresholdConfig put_thresholds(ThresholdConfig cfg);

    void store_bucket_report(const BucketReport& report);
    std::optional<nlohmann::json> bucket_report(std::string_view collection_id, std::string_view dimension) const;

    /// Replaces the domain ledger (typically the policy ledger after steps 1-2).
    void import_ledger(const DomainLedger& ledger);
    VerificationQueue queue() const;
    DomainLedgerEntry record_verdict(std::string_view domain, std::string_view status, std::string note,
                                     std::string reviewer = {});
    std::optional<DomainLedgerEntry> domain(std::string_view domain) const;
    void export_allowlist(std::ostream& out) const;

    RegistryState state() const;
    /// State rebuilt from the event log alone.
    static RegistryState replay(const std::filesystem::path& events_file);

    std::filesystem::path events_path() const { return root_ / "events.jsonl"; }

private:
    void append(std::string_view type, nlohmann::json data);
    void require_collection(std::string_view id) const;

    std::filesystem::path root_;
    Clock clock_;
    mutable std::mutex mutex_;
    RegistryState state_;
};

/// Current UTC time as `YYYY-MM-DDTHH:MM:SSZ`.
std::string utc_timestamp();

} // namespace ccurate
