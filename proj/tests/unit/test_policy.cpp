#include "ccurate/error.hpp"
#include "ccurate/policy.hpp"

#include "generators.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <sstream>

using namespace ccurate;

namespace {

const CCFamily kFamilies[] = {CCFamily::zero,  CCFamily::mark,  CCFamily::by,       CCFamily::by_sa,
                              CCFamily::by_nc, CCFamily::by_nd, CCFamily::by_nc_sa, CCFamily::by_nc_nd};

Document doc(const std::string& domain, int i, std::uint64_t words, std::optional<CCFamily> fam,
             Location loc = Location::head, bool conflict = false) {
    return gen::annotated_doc(domain, i, words, fam, loc, conflict);
}

std::vector<Document> random_corpus(gen::Rng& rng, int n_docs, int n_domains) {
    std::vector<Document> docs;
    for (int i = 0; i < n_docs; ++i) {
        const std::string domain = "site" + std::to_string(gen::uniform(rng, 0, n_domains - 1)) + ".nl";
        std::optional<CCFamily> fam;
        if (!gen::chance(rng, 0.05)) {
            // Mostly permissive so some domains survive step 1.
            fam = gen::chance(rng, 0.9) ? gen::pick(rng, std::vector<CCFamily>{CCFamily::zero, CCFamily::mark,
                                                                              CCFamily::by})
                                        : gen::pick(rng, std::vector<CCFamily>(std::begin(kFamilies),
                                                                               std::end(kFamilies)));
        }
        const Location loc = gen::pick(rng, std::vector<Location>{Location::head, Location::footer,
                                                                  Location::footer, Location::body});
        docs.push_back(doc(domain, i, static_cast<std::uint64_t>(gen::uniform(rng, 1, 40)), fam, loc,
                           fam && gen::chance(rng, 0.02)));
    }
    return docs;
}

// Steps 1 to 3 composed naively, straight from their definitions.
std::set<std::string> naive_policy(const std::vector<Document>& docs, const std::map<std::string, DomainStatus>& verdicts,
                                   std::uint64_t min_words) {
    std::set<std::string> domains;
    for (const auto& d : docs) {
        domains.insert(d.domain);
    }
    std::set<std::string> kept;
    for (const auto& domain : domains) {
        bool step1 = true;
        for (const auto& d : docs) {
            if (d.domain != domain || !d.license) {
                continue;
            }
            if (d.license->conflict) {
                step1 = false;
            }
            if (d.license->best && !is_permissive(d.license->best->family)) {
                step1 = false;
            }
        }
        if (!step1) {
            continue;
        }
        std::uint64_t words = 0;
        std::vector<std::string> survivors;
        for (const auto& d : docs) {
            if (d.domain == domain && d.license && d.license->best && d.license->best_location &&
                *d.license->best_location != Location::body) {
                words += d.word_count;
                survivors.push_back(d.doc_id);
            }
        }
        auto v = verdicts.find(domain);
        if (words > min_words && v != verdicts.end() && v->second == DomainStatus::verified_permissive) {
            kept.insert(survivors.begin(), survivors.end());
        }
    }
    return kept;
}

std::set<std::string> ids(const std::vector<Document>& docs) {
    std::set<std::string> out;
    for (const auto& d : docs) {
        out.insert(d.doc_id);
    }
    return out;
}

std::vector<Verdict> random_verdicts(gen::Rng& rng, const std::vector<Document>& docs,
                                     std::map<std::string, DomainStatus>& as_map) {
    std::set<std::string> domains;
    for (const auto& d : docs) {
        domains.insert(d.domain);
    }
    std::vector<Verdict> out;
    for (const auto& domain : domains) {
        if (gen::chance(rng, 0.8)) {
            Verdict v;
            v.domain = domain;
            v.status = gen::chance(rng, 0.7) ? DomainStatus::verified_permissive : DomainStatus::rejected;
            v.reviewer = "r";
            out.push_back(v);
            as_map[domain] = v.status;
        }
    }
    return out;
}

} // namespace

TEST(BuildLedger, Counting) {
    EXPECT_TRUE(build_ledger({}).empty());
    std::vector<Document> docs = {doc("a.example", 1, 10, CCFamily::by), doc("a.example", 2, 5, CCFamily::zero),
                                  doc("a.example", 3, 1, std::nullopt), doc("b.example", 4, 7, CCFamily::by_sa),
                                  doc("b.example", 5, 3, CCFamily::by, Location::body, true)};
    const auto l = build_ledger(docs);
    ASSERT_EQ(l.size(), 2u);
    EXPECT_EQ(l.at("a.example").doc_count, 3u);
    EXPECT_EQ(l.at("a.example").word_count, 16u);
    EXPECT_EQ(l.at("b.example").doc_count, 2u);
    EXPECT_EQ(l.at("a.example").family_histogram.at(CCFamily::by), 1u);
    EXPECT_EQ(l.at("a.example").family_histogram.at(CCFamily::zero), 1u);
    EXPECT_EQ(l.at("b.example").location_histogram.at(Location::body), 1u);
    EXPECT_EQ(l.at("b.example").conflict_count, 1u);
    // Histograms sum to the annotated documents.
    std::uint64_t fam_sum = 0;
    for (const auto& [_, c] : l.at("a.example").family_histogram) {
        fam_sum += c;
    }
    EXPECT_EQ(fam_sum, 2u);
}

TEST(BuildLedger, EvidenceIsSmallestDocIds) {
    std::vector<Document> docs;
    for (int i = 0; i < 12; ++i) {
        docs.push_back(doc("a.nl", i, 3, CCFamily::by));
    }
    const auto l = build_ledger(docs);
    const auto& ev = l.at("a.nl").evidence;
    ASSERT_EQ(ev.size(), kEvidenceDocs);
    auto all = ids(docs);
    auto it = all.begin();
    for (const auto& e : ev) {
        EXPECT_EQ(e.doc_id, *it++);
        EXPECT_FALSE(e.context_snippet.empty());
    }
}

TEST(BuildLedger, ShardMergeEqualsSinglePass) {
    gen::Rng rng(53);
    for (int round = 0; round < 50; ++round) {
        const auto docs = random_corpus(rng, gen::uniform(rng, 0, 80), 6);
        const std::size_t cut1 = static_cast<std::size_t>(gen::uniform(rng, 0, static_cast<int>(docs.size())));
        const std::size_t cut2 = static_cast<std::size_t>(gen::uniform(rng, static_cast<int>(cut1), static_cast<int>(docs.size())));
        const std::vector<Document> a(docs.begin(), docs.begin() + cut1);
        const std::vector<Document> b(docs.begin() + cut1, docs.begin() + cut2);
        const std::vector<Document> c(docs.begin() + cut2, docs.end());
        const auto la = build_ledger(a);
        const auto lb = build_ledger(b);
        const auto lc = build_ledger(c);
        const auto whole = build_ledger(docs);
        EXPECT_EQ(merge_ledgers(merge_ledgers(la, lb), lc), whole);
        EXPECT_EQ(merge_ledgers(la, merge_ledgers(lb, lc)), whole);
        EXPECT_EQ(merge_ledgers(lb, la), merge_ledgers(la, lb));
    }
}

TEST(FilterDomainLicense, Examples) {
    std::vector<Document> docs = {doc("by.nl", 1, 5, CCFamily::by),       doc("by.nl", 2, 5, CCFamily::by),
                                  doc("sa.nl", 3, 5, CCFamily::by),       doc("sa.nl", 4, 5, CCFamily::by_sa),
                                  doc("conf.nl", 5, 5, CCFamily::by, Location::head, true),
                                  doc("none.nl", 6, 5, std::nullopt),     doc("pd.nl", 7, 5, CCFamily::mark),
                                  doc("pd.nl", 8, 5, CCFamily::zero)};
    const auto kept = filter_domain_license(build_ledger(docs));
    EXPECT_TRUE(kept.contains("by.nl"));
    EXPECT_FALSE(kept.contains("sa.nl"));
    EXPECT_FALSE(kept.contains("conf.nl"));
    EXPECT_TRUE(kept.contains("pd.nl"));
    // Unannotated documents are neutral.
    EXPECT_TRUE(kept.contains("none.nl"));
}

TEST(FilterDomainLicense, MatchesPerDocumentBruteForce) {
    gen::Rng rng(59);
    for (int round = 0; round < 50; ++round) {
        const auto docs = random_corpus(rng, 60, 8);
        const auto kept = filter_domain_license(build_ledger(docs));
        std::set<std::string> domains;
        for (const auto& d : docs) {
            domains.insert(d.domain);
        }
        for (const auto& domain : domains) {
            bool ok = true;
            for (const auto& d : docs) {
                if (d.domain == domain && d.license &&
                    (d.license->conflict || (d.license->best && !is_permissive(*d.license->best)))) {
                    ok = false;
                }
            }
            EXPECT_EQ(kept.contains(domain), ok) << domain;
        }
    }
}

TEST(FilterLicensePosition, Examples) {
    EXPECT_TRUE(license_position_ok(doc("a.nl", 1, 1, CCFamily::by, Location::head)));
    EXPECT_TRUE(license_position_ok(doc("a.nl", 2, 1, CCFamily::by, Location::footer)));
    EXPECT_FALSE(license_position_ok(doc("a.nl", 3, 1, CCFamily::by, Location::body)));
    EXPECT_FALSE(license_position_ok(doc("a.nl", 4, 1, std::nullopt)));
    Document bare;
    EXPECT_FALSE(license_position_ok(bare));
    EXPECT_EQ(filter_license_position({doc("a.nl", 1, 1, CCFamily::by, Location::head),
                                       doc("a.nl", 3, 1, CCFamily::by, Location::body)})
                  .size(),
              1u);
}

TEST(VerificationQueue, ThresholdAndOrder) {
    std::vector<Document> docs = {doc("drie.nl", 1, 300'000, CCFamily::by), doc("twee.nl", 2, 200'000, CCFamily::by),
                                  doc("vier.nl", 3, 400'000, CCFamily::by)};
    auto ledger = build_ledger(docs);
    const auto q = build_verification_queue(ledger);
    ASSERT_EQ(q.size(), 2u);
    EXPECT_EQ(q[0].domain, "vier.nl");
    EXPECT_EQ(q[0].word_count, 400'000u);
    EXPECT_EQ(q[1].domain, "drie.nl");
    EXPECT_EQ(ledger.at("twee.nl").status, DomainStatus::below_threshold);
    EXPECT_EQ(ledger.at("vier.nl").status, DomainStatus::unverified);

    DomainLedger empty;
    EXPECT_TRUE(build_verification_queue(empty).empty());
}

TEST(VerificationQueue, ExactlyAtThresholdIsBelow) {
    auto ledger = build_ledger({doc("rand.nl", 1, kVerificationMinWords, CCFamily::by),
                                doc("erboven.nl", 2, kVerificationMinWords + 1, CCFamily::by)});
    const auto q = build_verification_queue(ledger);
    ASSERT_EQ(q.size(), 1u);
    EXPECT_EQ(q[0].domain, "erboven.nl");
    EXPECT_EQ(ledger.at("rand.nl").status, DomainStatus::below_threshold);
}

TEST(VerificationQueue, TiesBreakByDomainAndOrderIsNonIncreasing) {
    gen::Rng rng(61);
    for (int round = 0; round < 50; ++round) {
        DomainLedger ledger;
        std::vector<std::pair<std::uint64_t, std::string>> oracle;
        for (int i = 0; i < 30; ++i) {
            DomainLedgerEntry e;
            e.domain = "d" + std::to_string(gen::uniform(rng, 0, 999)) + ".nl";
            e.word_count = static_cast<std::uint64_t>(gen::uniform(rng, 0, 8)) * 100;
            if (ledger.contains(e.domain)) {
                continue;
            }
            ledger[e.domain] = e;
            if (e.word_count > 250) {
                oracle.emplace_back(e.word_count, e.domain);
            }
        }
        // Stable sort recheck: domain order first, then by words descending.
        std::sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
        std::stable_sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        const auto view = verification_queue(ledger, 250);
        const auto q = build_verification_queue(ledger, 250);
        EXPECT_EQ(view, q);
        ASSERT_EQ(q.size(), oracle.size());
        for (std::size_t i = 0; i < q.size(); ++i) {
            EXPECT_EQ(q[i].domain, oracle[i].second);
            if (i > 0) {
                EXPECT_GE(q[i - 1].word_count, q[i].word_count);
            }
        }
        for (const auto& [domain, e] : ledger) {
            EXPECT_EQ(e.status == DomainStatus::below_threshold, e.word_count <= 250) << domain;
        }
    }
}

TEST(RecordVerdict, TransitionsAndErrors) {
    auto ledger = build_ledger({doc("a.nl", 1, 10, CCFamily::by), doc("b.nl", 2, 10, CCFamily::by)});
    record_verdict(ledger, {"a.nl", DomainStatus::verified_permissive, "ok", "2024-03-01T00:00:00Z", "anna"});
    EXPECT_EQ(ledger.at("a.nl").status, DomainStatus::verified_permissive);
    EXPECT_EQ(ledger.at("a.nl").reviewer, "anna");
    EXPECT_THROW(record_verdict(ledger, {"a.nl", DomainStatus::rejected, "", "", ""}), ConflictError);
    EXPECT_THROW(record_verdict(ledger, {"x.nl", DomainStatus::rejected, "", "", ""}), NotFoundError);
    EXPECT_THROW(record_verdict(ledger, {"b.nl", DomainStatus::below_threshold, "", "", ""}), ConfigError);
    EXPECT_EQ(allowlisted_domains(ledger), (std::set<std::string>{"a.nl"}));
}

TEST(ApplyAllowlist, Examples) {
    std::vector<Document> docs = {doc("ja.nl", 1, 10, CCFamily::by), doc("ja.nl", 2, 10, CCFamily::by),
                                  doc("nee.nl", 3, 10, CCFamily::by), doc("open.nl", 4, 10, CCFamily::by)};
    auto ledger = build_ledger(docs);
    record_verdict(ledger, {"ja.nl", DomainStatus::verified_permissive, "", "", ""});
    record_verdict(ledger, {"nee.nl", DomainStatus::rejected, "", "", ""});
    const auto kept = apply_allowlist(docs, ledger);
    ASSERT_EQ(kept.size(), 2u);
    EXPECT_EQ(kept[0].domain, "ja.nl");
}

TEST(Allowlist, JsonlRoundTrip) {
    auto ledger = build_ledger({doc("ja.nl", 1, 10, CCFamily::by), doc("nee.nl", 2, 10, CCFamily::by)});
    record_verdict(ledger, {"ja.nl", DomainStatus::verified_permissive, "footer klopt", "2024-03-01T10:00:00Z", "anna"});
    record_verdict(ledger, {"nee.nl", DomainStatus::rejected, "alleen afbeeldingen", "2024-03-01T11:00:00Z", "bo"});
    std::stringstream ss;
    write_allowlist(ss, ledger);
    const auto text = ss.str();
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        const auto j = nlohmann::json::parse(line);
        for (const char* key : {"domain", "status", "verdict_note", "verdict_time", "reviewer"}) {
            EXPECT_TRUE(j.contains(key)) << key;
        }
    }
    std::istringstream in(text);
    const auto verdicts = read_allowlist(in);
    // Only allowed domains are exported.
    ASSERT_EQ(verdicts.size(), 1u);
    EXPECT_EQ(verdicts[0], (Verdict{"ja.nl", DomainStatus::verified_permissive, "footer klopt",
                                    "2024-03-01T10:00:00Z", "anna"}));
    auto fresh = build_ledger({doc("ja.nl", 1, 10, CCFamily::by), doc("nee.nl", 2, 10, CCFamily::by)});
    record_verdict(fresh, verdicts[0]);
    EXPECT_EQ(allowlisted_domains(fresh), allowlisted_domains(ledger));
    EXPECT_EQ(fresh.at("ja.nl"), ledger.at("ja.nl"));
    std::istringstream bad("{\"domain\": 3}\n");
    EXPECT_THROW(read_allowlist(bad), FormatError);
}

TEST(Ledger, JsonlRoundTrip) {
    gen::Rng rng(67);
    auto ledger = build_ledger(random_corpus(rng, 50, 5));
    std::stringstream ss;
    write_ledger(ss, ledger);
    EXPECT_EQ(read_ledger(ss), ledger);
}

TEST(RunPolicy, ReplayEqualsNaiveFilter) {
    gen::Rng rng(71);
    for (int round = 0; round < 40; ++round) {
        auto docs = random_corpus(rng, 200, 12);
        std::map<std::string, DomainStatus> as_map;
        const auto verdicts = random_verdicts(rng, docs, as_map);
        const std::uint64_t min_words = static_cast<std::uint64_t>(gen::uniform(rng, 0, 200));
        const auto r = run_policy(docs, verdicts, min_words);
        EXPECT_EQ(ids(r.kept), naive_policy(docs, as_map, min_words));
    }
}

TEST(RunPolicy, ZeroFalsePositivesAndMonotoneRestriction) {
    gen::Rng rng(73);
    for (int round = 0; round < 40; ++round) {
        const auto docs = random_corpus(rng, 200, 10);
        std::map<std::string, DomainStatus> as_map;
        const auto r = run_policy(docs, random_verdicts(rng, docs, as_map), 50);
        for (const auto& d : r.kept) {
            ASSERT_TRUE(d.license && d.license->best);
            EXPECT_TRUE(is_permissive(*d.license->best));
            EXPECT_NE(*d.license->best_location, Location::body);
            EXPECT_EQ(r.ledger.at(d.domain).status, DomainStatus::verified_permissive);
        }
        const auto kept = ids(r.kept);
        const auto step2 = ids(r.step2_docs);
        const auto all = ids(docs);
        EXPECT_TRUE(std::includes(step2.begin(), step2.end(), kept.begin(), kept.end()));
        EXPECT_TRUE(std::includes(all.begin(), all.end(), step2.begin(), step2.end()));
    }
}

TEST(RunPolicy, IndependentOfInputOrder) {
    gen::Rng rng(79);
    for (int round = 0; round < 30; ++round) {
        auto docs = random_corpus(rng, 150, 8);
        std::map<std::string, DomainStatus> as_map;
        auto verdicts = random_verdicts(rng, docs, as_map);
        const auto a = run_policy(docs, verdicts, 40);
        std::shuffle(docs.begin(), docs.end(), rng);
        std::shuffle(verdicts.begin(), verdicts.end(), rng);
        const auto b = run_policy(docs, verdicts, 40);
        EXPECT_EQ(ids(a.kept), ids(b.kept));
        EXPECT_EQ(a.queue, b.queue);
        EXPECT_EQ(a.ledger, b.ledger);
    }
}

TEST(PermissiveCodeLicense, Examples) {
    EXPECT_TRUE(permissive_code_license("MIT"));
    EXPECT_FALSE(permissive_code_license("GPL-3.0"));
    EXPECT_TRUE(permissive_code_license("bsd-3-clause"));
    for (const char* id : {"Apache-2.0", "BSD-2-Clause", "Unlicense", "APACHE-2.0"}) {
        EXPECT_TRUE(permissive_code_license(id)) << id;
    }
    for (const char* id : {"", "Apache-1.1", "BSD-4-Clause", "MPL-2.0", "LGPL-2.1", "CC-BY-4.0", "MIT-0"}) {
        EXPECT_FALSE(permissive_code_license(id)) << id;
    }
}
