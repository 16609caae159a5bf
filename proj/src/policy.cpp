#include "ccurate/policy.hpp"

#include "ccurate/error.hpp"
#include "ccurate/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <istream>
#include <ostream>

namespace ccurate {
namespace {

bool evidence_less(const Evidence& a, const Evidence& b) {
    if (a.doc_id != b.doc_id) {
        return a.doc_id < b.doc_id;
    }
    return a.url < b.url;
}

void merge_evidence(std::vector<Evidence>& into, const std::vector<Evidence>& from) {
    into.insert(into.end(), from.begin(), from.end());
    std::sort(into.begin(), into.end(), evidence_less);
    into.erase(std::unique(into.begin(), into.end()), into.end());
    if (into.size() > kEvidenceDocs) {
        into.resize(kEvidenceDocs);
    }
}

std::optional<Evidence> evidence_of(const Document& doc) {
    if (!doc.license) {
        return std::nullopt;
    }
    const LicenseCandidate* top = nullptr;
    for (const auto& c : doc.license->candidates) {
        if (c.parsed && (top == nullptr || c.rank < top->rank)) {
            top = &c;
        }
    }
    if (top == nullptr) {
        return std::nullopt;
    }
    return Evidence{doc.doc_id, doc.url, top->target_url, top->context_snippet};
}

template <class Enum>
nlohmann::json histogram_json(const std::map<Enum, std::uint64_t>& h) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : h) {
        j[std::string(to_string(k))] = v;
    }
    return j;
}

template <class Enum, class Parse>
std::map<Enum, std::uint64_t> histogram_from_json(const nlohmann::json& j, Parse parse) {
    std::map<Enum, std::uint64_t> h;
    for (const auto& [k, v] : j.items()) {
        const auto key = parse(k);
        if (!key) {
            throw FormatError("unknown histogram key: '" + k + "'");
        }
        h[*key] = v.template get<std::uint64_t>();
    }
    return h;
}

} // namespace

std::string_view to_string(DomainStatus status) noexcept {
    switch (status) {
    case DomainStatus::unverified:
        return "unverified";
    case DomainStatus::verified_permissive:
        return "verified_permissive";
    case DomainStatus::rejected:
        return "rejected";
    case DomainStatus::below_threshold:
        return "below_threshold";
    }
    return "unverified";
}

std::optional<DomainStatus> domain_status_from_string(std::string_view name) noexcept {
    for (auto s : {DomainStatus::unverified, DomainStatus::verified_permissive, DomainStatus::rejected,
                   DomainStatus::below_threshold}) {
        if (to_string(s) == name) {
            return s;
        }
    }
    return std::nullopt;
}

void add_to_ledger(DomainLedger& ledger, const Document& doc) {
    auto it = ledger.find(doc.domain);
    if (it == ledger.end()) {
        it = ledger.emplace(doc.domain, DomainLedgerEntry{}).first;
        it->second.domain = doc.domain;
    }
    auto& e = it->second;
    ++e.doc_count;
    e.word_count += doc.word_count;
    if (doc.license) {
        if (doc.license->best) {
            ++e.family_histogram[doc.license->best->family];
        }
        if (doc.license->best_location) {
            ++e.location_histogram[*doc.license->best_location];
        }
        if (doc.license->conflict) {
            ++e.conflict_count;
        }
    }
    if (auto ev = evidence_of(doc)) {
        merge_evidence(e.evidence, {*ev});
    }
}

DomainLedger build_ledger(const std::vector<Document>& docs) {
    DomainLedger ledger;
    for (const auto& d : docs) {
        add_to_ledger(ledger, d);
    }
    return ledger;
}

DomainLedger merge_ledgers(const DomainLedger& a, const DomainLedger& b) {
    DomainLedger out = a;
    for (const auto& [domain, eb] : b) {
        auto it = out.find(domain);
        if (it == out.end()) {
            out.emplace(domain, eb);
            continue;
        }
        auto& e = it->second;
        e.doc_count += eb.doc_count;
        e.word_count += eb.word_count;
        for (const auto& [k, v] : eb.family_histogram) {
            e.family_histogram[k] += v;
        }
        for (const auto& [k, v] : eb.location_histogram) {
            e.location_histogram[k] += v;
        }
        e.conflict_count += eb.conflict_count;
        merge_evidence(e.evidence, eb.evidence);
        if (e.status == DomainStatus::unverified && eb.status != DomainStatus::unverified) {
            e.status = eb.status;
            e.verdict_note = eb.verdict_note;
            e.verdict_time = eb.verdict_time;
            e.reviewer = eb.reviewer;
        }
    }
    return out;
}

std::set<std::string> filter_domain_license(const DomainLedger& ledger) {
    std::set<std::string> kept;
    for (const auto& [domain, e] : ledger) {
        if (e.conflict_count > 0) {
            continue;
        }
        const bool all_permissive = std::all_of(e.family_histogram.begin(), e.family_histogram.end(),
                                                [](const auto& kv) { return is_permissive(kv.first); });
        if (all_permissive) {
            kept.insert(domain);
        }
    }
    return kept;
}

bool license_position_ok(const Document& doc) noexcept {
    return doc.license && doc.license->best && doc.license->best_location &&
           (*doc.license->best_location == Location::head || *doc.license->best_location == Location::footer);
}

std::vector<Document> filter_license_position(const std::vector<Document>& docs) {
    std::vector<Document> kept;
    for (const auto& d : docs) {
        if (license_position_ok(d)) {
            kept.push_back(d);
        }
    }
    return kept;
}

VerificationQueue verification_queue(const DomainLedger& ledger, std::uint64_t min_words) {
    VerificationQueue queue;
    for (const auto& [domain, e] : ledger) {
        if (e.status == DomainStatus::unverified && e.word_count > min_words) {
            queue.push_back({domain, e.word_count, e.evidence});
        }
    }
    // Ledger iteration is already domain-ascending, so a stable sort on
    // word count leaves ties in domain order.
    std::stable_sort(queue.begin(), queue.end(),
                     [](const QueueItem& a, const QueueItem& b) { return a.word_count > b.word_count; });
    return queue;
}

VerificationQueue build_verification_queue(DomainLedger& ledger, std::uint64_t min_words) {
    for (auto& [_, e] : ledger) {
        if (e.status == DomainStatus::unverified && e.word_count <= min_words) {
            e.status = DomainStatus::below_threshold;
        }
    }
    return verification_queue(ledger, min_words);
}

void record_verdict(DomainLedger& ledger, const Verdict& verdict) {
    if (verdict.status != DomainStatus::verified_permissive && verdict.status != DomainStatus::rejected) {
        throw ConfigError("verdict status must be verified_permissive or rejected");
    }
    auto it = ledger.find(verdict.domain);
    if (it == ledger.end()) {
        throw NotFoundError("unknown domain: " + verdict.domain);
    }
    auto& e = it->second;
    if (e.status != DomainStatus::unverified) {
        throw ConflictError("domain " + verdict.domain + " is " + std::string(to_string(e.status)));
    }
    e.status = verdict.status;
    e.verdict_note = verdict.note;
    e.verdict_time = verdict.time;
    e.reviewer = verdict.reviewer;
}

std::set<std::string> allowlisted_domains(const DomainLedger& ledger) {
    std::set<std::string> out;
    for (const auto& [domain, e] : ledger) {
        if (e.status == DomainStatus::verified_permissive) {
            out.insert(domain);
        }
    }
    return out;
}

bool allowlisted(const DomainLedger& ledger, std::string_view domain) {
    auto it = ledger.find(domain);
    return it != ledger.end() && it->second.status == DomainStatus::verified_permissive;
}

std::vector<Document> apply_allowlist(const std::vector<Document>& docs, const DomainLedger& ledger) {
    std::vector<Document> kept;
    for (const auto& d : docs) {
        if (allowlisted(ledger, d.domain)) {
            kept.push_back(d);
        }
    }
    return kept;
}

std::vector<Verdict> read_allowlist(std::istream& in) {
    std::vector<Verdict> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) {
            continue;
        }
        try {
            out.push_back(nlohmann::json::parse(line).get<Verdict>());
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("allowlist line " + std::to_string(line_no) + ": " + e.what());
        } catch (const FormatError& e) {
            throw FormatError("allowlist line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void write_allowlist(std::ostream& out, const DomainLedger& ledger) {
    for (const auto& [domain, e] : ledger) {
        if (e.status == DomainStatus::verified_permissive) {
            out << nlohmann::json(Verdict{domain, e.status, e.verdict_note, e.verdict_time, e.reviewer}).dump()
                << '\n';
        }
    }
}

PolicyResult run_policy(const std::vector<Document>& docs, const std::vector<Verdict>& verdicts,
                        std::uint64_t min_words) {
    PolicyResult r;
    r.step1_domains = filter_domain_license(build_ledger(docs));
    for (const auto& d : docs) {
        if (r.step1_domains.contains(d.domain) && license_position_ok(d)) {
            r.step2_docs.push_back(d);
        }
    }
    r.ledger = build_ledger(r.step2_docs);
    r.queue = build_verification_queue(r.ledger, min_words);
    for (const auto& v : verdicts) {
        auto it = r.ledger.find(v.domain);
        if (it != r.ledger.end() && it->second.status == DomainStatus::unverified) {
            record_verdict(r.ledger, v);
        }
    }
    r.kept = apply_allowlist(r.step2_docs, r.ledger);
    return r;
}

bool permissive_code_license(std::string_view spdx_id) {
    static constexpr std::string_view accepted[] = {"Apache-2.0", "MIT", "BSD-2-Clause", "BSD-3-Clause",
                                                    "Unlicense"};
    const auto id = text::trim(spdx_id);
    return std::any_of(std::begin(accepted), std::end(accepted),
                       [&](std::string_view a) { return text::iequals(a, id); });
}

void to_json(nlohmann::json& j, const Evidence& e) {
    j = nlohmann::json{
        {"doc_id", e.doc_id}, {"url", e.url}, {"target_url", e.target_url}, {"context_snippet", e.context_snippet}};
}

void from_json(const nlohmann::json& j, Evidence& e) {
    e.doc_id = j.at("doc_id").get<std::string>();
    e.url = j.value("url", std::string{});
    e.target_url = j.value("target_url", std::string{});
    e.context_snippet = j.value("context_snippet", std::string{});
}

void to_json(nlohmann::json& j, const DomainLedgerEntry& e) {
    j = nlohmann::json{{"domain", e.domain},
                       {"doc_count", e.doc_count},
                       {"word_count", e.word_count},
                       {"family_histogram", histogram_json(e.family_histogram)},
                       {"location_histogram", histogram_json(e.location_histogram)},
                       {"conflict_count", e.conflict_count},
                       {"evidence", e.evidence},
                       {"status", to_string(e.status)},
                       {"verdict_note", e.verdict_note},
                       {"verdict_time", e.verdict_time},
                       {"reviewer", e.reviewer}};
}

void from_json(const nlohmann::json& j, DomainLedgerEntry& e) {
    e.domain = j.at("domain").get<std::string>();
    e.doc_count = j.at("doc_count").get<std::uint64_t>();
    e.word_count = j.at("word_count").get<std::uint64_t>();
    e.family_histogram = histogram_from_json<CCFamily>(j.value("family_histogram", nlohmann::json::object()),
                                                        family_from_string);
    e.location_histogram = histogram_from_json<Location>(j.value("location_histogram", nlohmann::json::object()),
                                                          location_from_string);
    e.conflict_count = j.value("conflict_count", std::uint64_t{0});
    e.evidence = j.value("evidence", std::vector<Evidence>{});
    const auto status = domain_status_from_string(j.value("status", std::string("unverified")));
    if (!status) {
        throw FormatError("unknown domain status in ledger entry for " + e.domain);
    }
    e.status = *status;
    e.verdict_note = j.value("verdict_note", std::string{});
    e.verdict_time = j.value("verdict_time", std::string{});
    e.reviewer = j.value("reviewer", std::string{});
}

void to_json(nlohmann::json& j, const QueueItem& item) {
    j = nlohmann::json{{"domain", item.domain}, {"word_count", item.word_count}, {"evidence", item.evidence}};
}

void from_json(const nlohmann::json& j, QueueItem& item) {
    item.domain = j.at("domain").get<std::string>();
    item.word_count = j.at("word_count").get<std::uint64_t>();
    item.evidence = j.value("evidence", std::vector<Evidence>{});
}

void to_json(nlohmann::json& j, const Verdict& v) {
    j = nlohmann::json{{"domain", v.domain},
                       {"status", to_string(v.status)},
                       {"verdict_note", v.note},
                       {"verdict_time", v.time},
                       {"reviewer", v.reviewer}};
}

void from_json(const nlohmann::json& j, Verdict& v) {
    v.domain = j.at("domain").get<std::string>();
    const auto status = domain_status_from_string(j.at("status").get<std::string>());
    if (!status) {
        throw FormatError("unknown verdict status for " + v.domain);
    }
    v.status = *status;
    v.note = j.value("verdict_note", std::string{});
    v.time = j.value("verdict_time", std::string{});
    v.reviewer = j.value("reviewer", std::string{});
}

void write_ledger(std::ostream& out, const DomainLedger& ledger) {
    for (const auto& [_, e] : ledger) {
        out << nlohmann::json(e).dump() << '\n';
    }
}

DomainLedger read_ledger(std::istream& in) {
    DomainLedger ledger;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) {
            continue;
        }
        try {
            auto e = nlohmann::json::parse(line).get<DomainLedgerEntry>();
            auto domain = e.domain;
            ledger[domain] = std::move(e);
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("ledger line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return ledger;
}

} // namespace ccurate
