#include "ccurate/license.hpp"
#include "ccurate/markup.hpp"

#include "generators.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <set>

using namespace ccurate;

namespace {

LicenseCandidate candidate(SourceKind kind, Location loc, std::size_t order, std::optional<CCFamily> fam = {}) {
    LicenseCandidate c;
    c.source_kind = kind;
    c.location = loc;
    c.document_order = order;
    if (fam) {
        c.parsed = CCLicense{*fam, std::string("4.0"), std::nullopt};
    }
    return c;
}

const SourceKind kKinds[] = {SourceKind::meta_tag, SourceKind::json_ld, SourceKind::link_rel,
                             SourceKind::anchor_href};
const Location kLocations[] = {Location::head, Location::footer, Location::body};

} // namespace

TEST(ParseCcUrl, SpecExamples) {
    auto a = parse_cc_url("https://creativecommons.org/licenses/by/4.0/");
    ASSERT_TRUE(a);
    EXPECT_EQ(a->family, CCFamily::by);
    EXPECT_EQ(a->version, "4.0");
    EXPECT_FALSE(a->jurisdiction);
    auto b = parse_cc_url("https://creativecommons.org/licenses/by-nc-sa/3.0/nl/");
    ASSERT_TRUE(b);
    EXPECT_EQ(b->family, CCFamily::by_nc_sa);
    EXPECT_EQ(b->version, "3.0");
    EXPECT_EQ(b->jurisdiction, "nl");
    EXPECT_FALSE(parse_cc_url("https://example.org/licenses/by/4.0/"));
}

TEST(ParseCcUrl, Variants) {
    EXPECT_EQ(parse_cc_url("//creativecommons.org/licenses/by-sa/4.0/")->family, CCFamily::by_sa);
    EXPECT_EQ(parse_cc_url("http://creativecommons.org/publicdomain/zero/1.0/")->family, CCFamily::zero);
    EXPECT_EQ(parse_cc_url("https://creativecommons.org/publicdomain/mark/1.0/")->family, CCFamily::mark);
    EXPECT_EQ(parse_cc_url("https://creativecommons.org/licenses/by/4.0/deed.nl")->version, "4.0");
    EXPECT_EQ(parse_cc_url("https://www.creativecommons.org/licenses/by-nd/2.0")->family, CCFamily::by_nd);
    EXPECT_FALSE(parse_cc_url("https://creativecommons.org/certification/"));
    EXPECT_FALSE(parse_cc_url("https://creativecommons.org/licenses/by/"));
    EXPECT_FALSE(parse_cc_url("https://creativecommons.org/licenses/gpl/4.0/"));
    EXPECT_FALSE(parse_cc_url("https://creativecommons.org/licenses/by/4.0/extra/stuff/"));
    EXPECT_FALSE(parse_cc_url("ftp://creativecommons.org/licenses/by/4.0/"));
    EXPECT_FALSE(parse_cc_url("https://creativecommons.org.evil.nl/licenses/by/4.0/"));
    EXPECT_FALSE(parse_cc_url(""));
}

TEST(ParseCcUrl, CanonicalRoundTripExhaustive) {
    for (CCFamily f : kAllFamilies) {
        for (const char* v : {"1.0", "2.0", "2.5", "3.0", "4.0"}) {
            const CCLicense lic{f, std::string(v), std::nullopt};
            const auto back = parse_cc_url(canonical_cc_url(lic));
            ASSERT_TRUE(back) << canonical_cc_url(lic);
            EXPECT_EQ(*back, lic) << canonical_cc_url(lic);
        }
    }
}

TEST(FindCandidates, HeadMeta) {
    const auto tree = parse_markup(
        R"(<head><meta name="license" content="https://creativecommons.org/licenses/by/4.0/"></head><body>x</body>)");
    const auto c = find_candidates(tree);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0].source_kind, SourceKind::meta_tag);
    EXPECT_EQ(c[0].location, Location::head);
    EXPECT_EQ(c[0].parsed->family, CCFamily::by);
    EXPECT_EQ(c[0].parsed->version, "4.0");
}

TEST(FindCandidates, ProseYieldsNothing) {
    const auto tree = parse_markup("<p>this page discusses CC-BY licensing</p>");
    EXPECT_TRUE(find_candidates(tree).empty());
}

TEST(FindCandidates, FooterZeroAndHeadBySa) {
    const auto tree = parse_markup(
        R"(<head><meta name="license" content="https://creativecommons.org/licenses/by-sa/3.0/"></head>)"
        R"(<body><p>x</p><footer><a href="https://creativecommons.org/publicdomain/zero/1.0/">CC0</a></footer></body>)");
    const auto c = find_candidates(tree);
    ASSERT_EQ(c.size(), 2u);
    std::set<CCFamily> fams{c[0].parsed->family, c[1].parsed->family};
    EXPECT_EQ(fams, (std::set<CCFamily>{CCFamily::zero, CCFamily::by_sa}));
    const auto a = resolve(rank_candidates(c));
    EXPECT_TRUE(a.conflict);
    EXPECT_EQ(a.best->family, CCFamily::by_sa);
    EXPECT_EQ(a.best_location, Location::head);
}

TEST(FindCandidates, SnippetIsBounded) {
    std::string long_text(600, 'x');
    const auto tree = parse_markup("<p>" + long_text +
                                   " <a href=\"https://creativecommons.org/licenses/by/4.0/\">CC</a> " + long_text +
                                   "</p>");
    const auto c = find_candidates(tree);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_LE(c[0].context_snippet.size(), kMaxSnippetCodepoints);
    EXPECT_FALSE(c[0].context_snippet.empty());
}

TEST(ClassifyLocation, SiteFooterClassMidBody) {
    const auto tree = parse_markup(R"(<div>a</div><div class="site-footer"><a href="x">l</a></div><div>b</div>)");
    const auto a = tree.elements_by_tag("a");
    ASSERT_EQ(a.size(), 1u);
    EXPECT_EQ(classify_location(a[0], tree), Location::footer);
}

TEST(ClassifyLocation, FooterTokenIsCaseInsensitive) {
    const auto tree = parse_markup(R"(<div id="Page-Footer"><a href="x">l</a></div>)");
    EXPECT_EQ(classify_location(tree.elements_by_tag("a")[0], tree), Location::footer);
    const auto tree2 = parse_markup(R"(<div class="footnotes"><a href="x">l</a></div>)");
    EXPECT_EQ(classify_location(tree2.elements_by_tag("a")[0], tree2), Location::body);
}

TEST(RankCandidates, MetaHeadBeatsBodyAnchor) {
    auto r = rank_candidates({candidate(SourceKind::anchor_href, Location::body, 1),
                              candidate(SourceKind::meta_tag, Location::head, 2)});
    EXPECT_EQ(r[0].source_kind, SourceKind::meta_tag);
    EXPECT_EQ(r[0].rank, 1);
    EXPECT_EQ(r[1].rank, 2);
    EXPECT_TRUE(rank_candidates({}).empty());
}

TEST(RankCandidates, FooterAnchorBeatsBodyAnchor) {
    auto r = rank_candidates({candidate(SourceKind::anchor_href, Location::body, 1),
                              candidate(SourceKind::anchor_href, Location::footer, 2)});
    EXPECT_EQ(r[0].location, Location::footer);
}

// Oracle: the priority table written out independently.
TEST(RankCandidates, TotalOrderOverAllTwelveCombinations) {
    auto expected_before = [](SourceKind ka, Location la, SourceKind kb, Location lb) {
        const int kind_rank[] = {0, 1, 2, 3};  // meta, json_ld, link, anchor
        const int loc_rank[] = {0, 1, 2};      // head, footer, body
        if (kind_rank[static_cast<int>(ka)] != kind_rank[static_cast<int>(kb)]) {
            return kind_rank[static_cast<int>(ka)] < kind_rank[static_cast<int>(kb)];
        }
        return loc_rank[static_cast<int>(la)] < loc_rank[static_cast<int>(lb)];
    };
    for (SourceKind ka : kKinds) {
        for (Location la : kLocations) {
            for (SourceKind kb : kKinds) {
                for (Location lb : kLocations) {
                    if (ka == kb && la == lb) {
                        continue;
                    }
                    // Both input orders give the same winner.
                    for (int flip = 0; flip < 2; ++flip) {
                        auto a = candidate(ka, la, flip ? 2 : 1);
                        auto b = candidate(kb, lb, flip ? 1 : 2);
                        auto r = rank_candidates({a, b});
                        const bool a_first = r[0].source_kind == ka && r[0].location == la;
                        EXPECT_EQ(a_first, expected_before(ka, la, kb, lb));
                    }
                }
            }
        }
    }
    // Transitivity: ranking all twelve at once agrees with every pair.
    std::vector<LicenseCandidate> all;
    std::size_t order = 0;
    for (SourceKind k : kKinds) {
        for (Location l : kLocations) {
            all.push_back(candidate(k, l, ++order));
        }
    }
    std::reverse(all.begin(), all.end());
    const auto ranked = rank_candidates(all);
    for (std::size_t i = 0; i + 1 < ranked.size(); ++i) {
        for (std::size_t j = i + 1; j < ranked.size(); ++j) {
            EXPECT_TRUE(expected_before(ranked[i].source_kind, ranked[i].location, ranked[j].source_kind,
                                        ranked[j].location));
        }
    }
}

TEST(Resolve, Basics) {
    auto single = resolve(rank_candidates({candidate(SourceKind::link_rel, Location::head, 1, CCFamily::by)}));
    EXPECT_EQ(single.best->family, CCFamily::by);
    EXPECT_FALSE(single.conflict);
    auto none = resolve(rank_candidates({candidate(SourceKind::link_rel, Location::head, 1)}));
    EXPECT_FALSE(none.best);
    EXPECT_FALSE(none.conflict);
    EXPECT_EQ(none.candidates.size(), 1u);
}

TEST(Resolve, PermutationInvariant) {
    gen::Rng rng(11);
    for (int round = 0; round < 300; ++round) {
        std::vector<LicenseCandidate> cs;
        const int n = gen::uniform(rng, 0, 7);
        for (int i = 0; i < n; ++i) {
            std::optional<CCFamily> fam;
            if (gen::chance(rng, 0.7)) {
                fam = kAllFamilies[gen::uniform(rng, 0, 7)];
            }
            cs.push_back(candidate(kKinds[gen::uniform(rng, 0, 3)], kLocations[gen::uniform(rng, 0, 2)],
                                   static_cast<std::size_t>(i), fam));
        }
        const auto base = resolve(rank_candidates(cs));
        std::shuffle(cs.begin(), cs.end(), rng);
        const auto shuffled = resolve(rank_candidates(cs));
        EXPECT_EQ(base.best, shuffled.best);
        EXPECT_EQ(base.best_location, shuffled.best_location);
        EXPECT_EQ(base.conflict, shuffled.conflict);
        // Conflict flag against a brute-force recount.
        std::set<CCFamily> fams;
        for (const auto& c : cs) {
            if (c.parsed) {
                fams.insert(c.parsed->family);
            }
        }
        EXPECT_EQ(base.conflict, fams.size() >= 2);
    }
}

TEST(LicenseJson, AnnotationRoundTrip) {
    const auto tree = parse_markup(
        R"(<head><link rel="license" href="https://creativecommons.org/licenses/by/3.0/nl/"></head>)"
        R"(<body><a href="https://creativecommons.org/licenses/by-nc/4.0/">x</a></body>)");
    const auto a = extract_license(tree);
    const nlohmann::json j = a;
    EXPECT_EQ(j["best"]["family"], "by");
    EXPECT_EQ(j["best"]["version"], "3.0");
    EXPECT_EQ(j["best"]["jurisdiction"], "nl");
    EXPECT_EQ(j["best_location"], "head");
    EXPECT_EQ(j["conflict"], true);
    EXPECT_EQ(j["candidates"].size(), 2u);
    const auto back = j.get<LicenseAnnotation>();
    EXPECT_EQ(back.best, a.best);
    EXPECT_EQ(back.best_location, a.best_location);
    EXPECT_EQ(back.conflict, a.conflict);
    EXPECT_EQ(back.candidates.size(), 2u);
}

TEST(FindCandidates, ProseInjectionProperty) {
    gen::Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const auto page = gen::random_page(rng, true);
        EXPECT_TRUE(find_candidates(parse_markup(page)).empty()) << page;
    }
}

TEST(LicenseFixtures, AllLabelsMatch) {
    const auto dir = gen::fixtures_dir() / "license";
    std::ifstream lf(dir / "labels.json");
    const auto labels = nlohmann::json::parse(lf);
    const auto url = labels.at("document_url").get<std::string>();
    ASSERT_GE(labels.at("labels").size(), 40u);
    for (const auto& [file, want] : labels.at("labels").items()) {
        std::ifstream in(dir / file, std::ios::binary);
        ASSERT_TRUE(in) << file;
        const std::string html((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        const auto got = extract_license(parse_markup(html), url);
        if (want.at("family").is_null()) {
            EXPECT_FALSE(got.best) << file;
            continue;
        }
        ASSERT_TRUE(got.best) << file;
        EXPECT_EQ(to_string(got.best->family), want.at("family").get<std::string>()) << file;
        EXPECT_EQ(got.best->version.value_or(""), want.at("version").is_null() ? "" : want.at("version").get<std::string>())
            << file;
        ASSERT_TRUE(got.best_location) << file;
        EXPECT_EQ(to_string(*got.best_location), want.at("location").get<std::string>()) << file;
        EXPECT_EQ(got.conflict, want.at("conflict").get<bool>()) << file;
    }
}
