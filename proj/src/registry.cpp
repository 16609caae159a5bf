#include "ccurate/registry.hpp"

#include "ccurate/error.hpp"
#include "ccurate/text.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>

namespace ccurate {
namespace {

void apply_event(RegistryState& state, std::string_view type, const nlohmann::json& data) {
    if (type == "collection_registered" || type == "collection_updated") {
        auto record = data.get<CollectionRecord>();
        state.collections[record.collection_id].push_back(std::move(record));
    } else if (type == "risk_assigned") {
        auto record = data.get<RiskRecord>();
        state.risks[record.collection_id] = std::move(record);
    } else if (type == "risk_weights_set") {
        state.weights = data.get<RiskWeights>();
    } else if (type == "thresholds_saved") {
        auto cfg = data.get<ThresholdConfig>();
        state.thresholds[cfg.collection_id] = std::move(cfg);
    } else if (type == "ledger_imported") {
        state.ledger.clear();
        for (const auto& e : data.at("entries")) {
            auto entry = e.get<DomainLedgerEntry>();
            auto domain = entry.domain;
            state.ledger[domain] = std::move(entry);
        }
    } else if (type == "verdict_recorded") {
        record_verdict(state.ledger, data.get<Verdict>());
    } else if (type == "bucket_report_stored") {
        // Audit only; the report itself lives in reports/.
    } else {
        throw FormatError("unknown registry event type: " + std::string(type));
    }
}

bool safe_component(std::string_view id) {
    if (id.empty() || id.front() == '.') {
        return false;
    }
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                        c == '_' || c == '-';
        if (!ok) {
            return false;
        }
    }
    return true;
}

void validate_record(const CollectionRecord& r) {
    if (!safe_component(r.collection_id)) {
        throw ConfigError("invalid collection id: '" + r.collection_id + "'");
    }
    for (const auto& [language, tokens] : r.language_breakdown) {
        if (!(tokens >= 0.0) || !std::isfinite(tokens)) {
            throw ConfigError("language breakdown for '" + language + "' must be a non-negative number");
        }
    }
}

} // namespace

std::string_view to_string(LicenseBasis basis) noexcept {
    switch (basis) {
    case LicenseBasis::public_domain:
        return "public_domain";
    case LicenseBasis::cc0:
        return "cc0";
    case LicenseBasis::cc_by:
        return "cc_by";
    case LicenseBasis::consented:
        return "consented";
    case LicenseBasis::code_permissive:
        return "code_permissive";
    }
    return "public_domain";
}

std::optional<LicenseBasis> license_basis_from_string(std::string_view name) noexcept {
    for (auto b : {LicenseBasis::public_domain, LicenseBasis::cc0, LicenseBasis::cc_by, LicenseBasis::consented,
                   LicenseBasis::code_permissive}) {
        if (to_string(b) == name) {
            return b;
        }
    }
    return std::nullopt;
}

std::string_view to_string(RiskLevel level) noexcept {
    switch (level) {
    case RiskLevel::low:
        return "low";
    case RiskLevel::medium:
        return "medium";
    case RiskLevel::high:
        return "high";
    }
    return "low";
}

std::optional<RiskLevel> risk_level_from_string(std::string_view name) noexcept {
    for (auto l : {RiskLevel::low, RiskLevel::medium, RiskLevel::high}) {
        if (to_string(l) == name) {
            return l;
        }
    }
    return std::nullopt;
}

void RiskWeights::validate() const {
    for (double w : {low, medium, high}) {
        if (!(w > 0.0 && w <= 1.0)) {
            throw ConfigError("risk weights must lie in (0, 1]");
        }
    }
    if (!(high <= medium && medium <= low)) {
        throw ConfigError("risk weights must satisfy high <= medium <= low");
    }
}

double RiskWeights::weight(RiskLevel level) const noexcept {
    switch (level) {
    case RiskLevel::low:
        return low;
    case RiskLevel::medium:
        return medium;
    case RiskLevel::high:
        return high;
    }
    return high;
}

void to_json(nlohmann::json& j, const CollectionRecord& r) {
    j = nlohmann::json{{"collection_id", r.collection_id},
                       {"source_description", r.source_description},
                       {"license_basis", to_string(r.license_basis)},
                       {"language_breakdown", r.language_breakdown},
                       {"token_count", r.token_count},
                       {"word_count", r.word_count},
                       {"provenance_notes", r.provenance_notes},
                       {"version", r.version}};
}

void from_json(const nlohmann::json& j, CollectionRecord& r) {
    r.collection_id = j.at("collection_id").get<std::string>();
    r.source_description = j.value("source_description", std::string{});
    const auto basis = license_basis_from_string(j.at("license_basis").get<std::string>());
    if (!basis) {
        throw ConfigError("license_basis must be one of public_domain, cc0, cc_by, consented, code_permissive");
    }
    r.license_basis = *basis;
    r.language_breakdown = j.value("language_breakdown", std::map<std::string, double>{});
    r.token_count = j.value("token_count", std::uint64_t{0});
    r.word_count = j.value("word_count", std::uint64_t{0});
    r.provenance_notes = j.value("provenance_notes", std::string{});
    r.version = j.value("version", 1);
}

void to_json(nlohmann::json& j, const RiskWeights& w) {
    j = nlohmann::json{{"low", w.low}, {"medium", w.medium}, {"high", w.high}};
}

void from_json(const nlohmann::json& j, RiskWeights& w) {
    w.low = j.at("low").get<double>();
    w.medium = j.at("medium").get<double>();
    w.high = j.at("high").get<double>();
}

void to_json(nlohmann::json& j, const RiskRecord& r) {
    j = nlohmann::json{{"collection_id", r.collection_id},
                       {"risk", to_string(r.risk)},
                       {"rationale", r.rationale},
                       {"sampling_weight", r.sampling_weight},
                       {"removed", r.removed}};
}

void from_json(const nlohmann::json& j, RiskRecord& r) {
    r.collection_id = j.at("collection_id").get<std::string>();
    const auto level = risk_level_from_string(j.at("risk").get<std::string>());
    if (!level) {
        throw FormatError("unknown risk level");
    }
    r.risk = *level;
    r.rationale = j.value("rationale", std::string{});
    r.sampling_weight = j.at("sampling_weight").get<double>();
    r.removed = j.value("removed", false);
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Registry::Registry(std::filesystem::path root, Clock clock) : root_(std::move(root)), clock_(std::move(clock)) {
    if (!clock_) {
        clock_ = utc_timestamp;
    }
    std::filesystem::create_directories(root_);
    if (std::filesystem::exists(events_path())) {
        state_ = replay(events_path());
    }
}

RegistryState Registry::replay(const std::filesystem::path& events_file) {
    RegistryState state;
    std::ifstream in(events_file);
    if (!in) {
        throw ConfigError("cannot open event log: " + events_file.string());
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) {
            continue;
        }
        try {
            const auto event = nlohmann::json::parse(line);
            const auto seq = event.at("seq").get<std::uint64_t>();
            if (seq != state.last_seq + 1) {
                throw FormatError("event log sequence gap at line " + std::to_string(line_no));
            }
            apply_event(state, event.at("type").get<std::string>(), event.at("data"));
            state.last_seq = seq;
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("event log line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return state;
}

void Registry::append(std::string_view type, nlohmann::json data) {
    // Apply to a copy first so a rejected event never reaches the log.
    RegistryState next = state_;
    apply_event(next, type, data);
    next.last_seq = state_.last_seq + 1;
    const nlohmann::json event = {
        {"seq", next.last_seq}, {"time", clock_()}, {"type", type}, {"data", std::move(data)}};
    std::ofstream out(events_path(), std::ios::app | std::ios::binary);
    out << event.dump() << '\n';
    out.flush();
    if (!out) {
        throw Error("cannot append to event log: " + events_path().string());
    }
    state_ = std::move(next);
}

void Registry::require_collection(std::string_view id) const {
    if (!state_.collections.contains(id)) {
        throw NotFoundError("unknown collection: " + std::string(id));
    }
}

CollectionRecord Registry::register_collection(CollectionRecord record) {
    std::lock_guard lock(mutex_);
    validate_record(record);
    if (state_.collections.contains(record.collection_id)) {
        throw ConflictError("collection already registered: " + record.collection_id);
    }
    record.version = 1;
    append("collection_registered", record);
    return record;
}

CollectionRecord Registry::update_collection(CollectionRecord record) {
    std::lock_guard lock(mutex_);
    validate_record(record);
    require_collection(record.collection_id);
    record.version = state_.collections.find(record.collection_id)->second.back().version + 1;
    append("collection_updated", record);
    return record;
}

std::optional<CollectionRecord> Registry::collection(std::string_view id) const {
    std::lock_guard lock(mutex_);
    auto it = state_.collections.find(id);
    if (it == state_.collections.end()) {
        return std::nullopt;
    }
    return it->second.back();
}

std::vector<CollectionRecord> Registry::collection_history(std::string_view id) const {
    std::lock_guard lock(mutex_);
    auto it = state_.collections.find(id);
    if (it == state_.collections.end()) {
        throw NotFoundError("unknown collection: " + std::string(id));
    }
    return it->second;
}

std::vector<CollectionRecord> Registry::collections() const {
    std::lock_guard lock(mutex_);
    std::vector<CollectionRecord> out;
    for (const auto& [_, history] : state_.collections) {
        out.push_back(history.back());
    }
    return out;
}

RiskRecord Registry::assign_risk(std::string_view collection_id, std::string_view risk, std::string rationale) {
    std::lock_guard lock(mutex_);
    require_collection(collection_id);
    RiskRecord record;
    record.collection_id = std::string(collection_id);
    record.rationale = std::move(rationale);
    if (risk == "rejected") {
        record.risk = RiskLevel::high;
        record.removed = true;
    } else if (auto level = risk_level_from_string(risk)) {
        record.risk = *level;
    } else {
        throw ConfigError("risk must be low, medium, high or rejected");
    }
    record.sampling_weight = state_.weights.weight(record.risk);
    append("risk_assigned", record);
    return record;
}

std::optional<RiskRecord> Registry::risk(std::string_view collection_id) const {
    std::lock_guard lock(mutex_);
    auto it = state_.risks.find(collection_id);
    if (it == state_.risks.end()) {
        return std::nullopt;
    }
    return it->second;
}

void Registry::set_risk_weights(const RiskWeights& weights) {
    weights.validate();
    std::lock_guard lock(mutex_);
    append("risk_weights_set", weights);
}

RiskWeights Registry::risk_weights() const {
    std::lock_guard lock(mutex_);
    return state_.weights;
}

ThresholdConfig Registry::thresholds(std::string_view collection_id) const {
    std::lock_guard lock(mutex_);
    require_collection(collection_id);
    if (auto it = state_.thresholds.find(collection_id); it != state_.thresholds.end()) {
        return it->second;
    }
    return reference_config(std::string(collection_id));
}

ThresholdConfig Registry::put_thresholds(ThresholdConfig cfg) {
    cfg.validate();
    std::lock_guard lock(mutex_);
    require_collection(cfg.collection_id);
    int current = 0;
    if (auto it = state_.thresholds.find(cfg.collection_id); it != state_.thresholds.end()) {
        current = it->second.version;
    }
    if (cfg.version != current + 1) {
        throw ConflictError("threshold version " + std::to_string(cfg.version) + " is stale; expected " +
                            std::to_string(current + 1));
    }
    append("thresholds_saved", cfg);
    ConfigStore(root_ / "configs").save(cfg);
    return cfg;
}

void Registry::store_bucket_report(const BucketReport& report) {
    std::lock_guard lock(mutex_);
    require_collection(report.collection_id);
    if (!is_bucket_dimension(report.dimension)) {
        throw ConfigError("unknown dimension: " + report.dimension);
    }
    const auto dir = root_ / "reports" / report.collection_id;
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / (report.dimension + ".json"), std::ios::binary | std::ios::trunc);
        out << nlohmann::json(report).dump(1) << '\n';
        if (!out) {
            throw Error("cannot write bucket report");
        }
    }
    append("bucket_report_stored", {{"collection_id", report.collection_id}, {"dimension", report.dimension}});
}

std::optional<nlohmann::json> Registry::bucket_report(std::string_view collection_id,
                                                      std::string_view dimension) const {
    std::lock_guard lock(mutex_);
    require_collection(collection_id);
    if (!is_bucket_dimension(dimension)) {
        throw ConfigError("unknown dimension: " + std::string(dimension));
    }
    const auto path = root_ / "reports" / std::string(collection_id) / (std::string(dimension) + ".json");
    std::ifstream in(path);
    if (!in) {
        return std::nullopt;
    }
    return nlohmann::json::parse(in);
}

void Registry::import_ledger(const DomainLedger& ledger) {
    std::lock_guard lock(mutex_);
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [_, e] : ledger) {
        entries.push_back(e);
    }
    append("ledger_imported", {{"entries", std::move(entries)}});
}

VerificationQueue Registry::queue() const {
    std::lock_guard lock(mutex_);
    return verification_queue(state_.ledger);
}

DomainLedgerEntry Registry::record_verdict(std::string_view domain, std::string_view status, std::string note,
                                           std::string reviewer) {
    const auto parsed = domain_status_from_string(status);
    if (!parsed || (*parsed != DomainStatus::verified_permissive && *parsed != DomainStatus::rejected)) {
        throw ConfigError("verdict status must be verified_permissive or rejected");
    }
    std::lock_guard lock(mutex_);
    Verdict v{std::string(domain), *parsed, std::move(note), clock_(), std::move(reviewer)};
    // Surface not-found / conflict before anything is logged.
    DomainLedger probe;
    if (auto it = state_.ledger.find(domain); it != state_.ledger.end()) {
        probe.emplace(it->first, it->second);
    }
    ccurate::record_verdict(probe, v);
    append("verdict_recorded", v);
    return state_.ledger.find(domain)->second;
}

std::optional<DomainLedgerEntry> Registry::domain(std::string_view domain) const {
    std::lock_guard lock(mutex_);
    auto it = state_.ledger.find(domain);
    if (it == state_.ledger.end()) {
        return std::nullopt;
    }
    return it->second;
}

void Registry::export_allowlist(std::ostream& out) const {
    std::lock_guard lock(mutex_);
    write_allowlist(out, state_.ledger);
}

RegistryState Registry::state() const {
    std::lock_guard lock(mutex_);
    return state_;
}

} // namespace ccurate
