#include "ccurate/ingest.hpp"
#include "ccurate/pipeline.hpp"
#include "ccurate/policy.hpp"
#include "ccurate/postprocess.hpp"
#include "ccurate/synth.hpp"

#include "generators.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <fstream>
#include <set>

using namespace ccurate;
using nlohmann::json;

namespace {

const auto kWarcDir = gen::fixtures_dir() / "warc";

json expected_counts() { return json::parse(gen::read_text_file(kWarcDir / "expected_counts.json")); }

// The recorded oracle names fates; map them onto report fields.
json fates(const json& report) {
    std::size_t kept = 0;
    for (const auto& [_, t] : report.at("kept").items()) {
        kept += t.at("documents").get<std::size_t>();
    }
    return {{"duplicate", report["dropped"]["duplicate"]},
            {"kept", kept},
            {"non_html", report["archive"]["skipped_content_type"]},
            {"other_language", report["dropped"]["language"]},
            {"too_short", report["dropped"]["quality"]}};
}

void expect_matches_oracle(const json& report) {
    const auto want = expected_counts();
    EXPECT_EQ(report.at("kept"), want.at("kept"));
    EXPECT_EQ(report.at("retained"), want.at("retained"));
    EXPECT_EQ(fates(report), want.at("fates"));
}

std::set<std::string> ids(const std::vector<Document>& docs) {
    std::set<std::string> out;
    for (const auto& d : docs) {
        out.insert(d.doc_id);
    }
    return out;
}

} // namespace

TEST(Pipeline, SampleWarcsMatchRecordedCounts) {
    Pipeline p({});
    for (const char* name : {"sample-0.warc", "sample-1.warc.gz"}) {
        std::ifstream in(kWarcDir / name, std::ios::binary);
        ASSERT_TRUE(in) << name;
        p.add_archive(in, ArchiveFormat::warc);
    }
    const auto result = p.finish();
    expect_matches_oracle(json(result.report));
    EXPECT_EQ(result.kept.size(), 56u);
}

TEST(Pipeline, CliRunMatchesRecordedCounts) {
    const auto dir = gen::scratch_dir("cli-run");
    ASSERT_EQ(gen::run_cli("run '" + (kWarcDir / "sample-0.warc").string() + "' '" +
                           (kWarcDir / "sample-1.warc.gz").string() + "' --report '" + (dir / "r.json").string() +
                           "' -o '" + (dir / "kept.jsonl").string() + "'"),
              0);
    expect_matches_oracle(json::parse(gen::read_text_file(dir / "r.json")));
    EXPECT_EQ(gen::read_docs_file(dir / "kept.jsonl").size(), 56u);
}

TEST(Pipeline, SyntheticRunInvariants) {
    gen::Rng rng(61);
    const auto docs = gen::synthetic_corpus(rng, 600);
    const auto a = Pipeline({}).run(docs);
    const auto b = Pipeline({}).run(docs);
    EXPECT_EQ(ids(a.kept), ids(b.kept));
    const auto& r = a.report;
    EXPECT_EQ(r.input, docs.size());
    EXPECT_EQ(r.input, r.dropped_empty + r.dropped_language + r.dropped_quality + r.dropped_harmful +
                           r.dropped_duplicate + a.kept.size());
    EXPECT_GT(a.kept.size(), 300u);
    EXPECT_GT(r.dropped_language, 0u);
    EXPECT_GT(r.dropped_duplicate, 0u);
    const auto input_ids = ids(docs);
    std::set<std::string> texts;
    for (const auto& d : a.kept) {
        EXPECT_TRUE(input_ids.contains(d.doc_id));
        EXPECT_EQ(gen::surviving_pii(d.text), "") << d.doc_id;
        EXPECT_TRUE(crawl_retained_languages().contains(d.language_scores->top));
        EXPECT_TRUE(texts.insert(d.text).second) << "exact duplicate kept";
    }
}

TEST(Cli, CurateApplyCountsMatchLibrary) {
    gen::Rng rng(67);
    auto docs = gen::synthetic_corpus(rng, 300);
    std::vector<Document> scored;
    for (auto& d : docs) {
        d.set_text(normalize(d.text));
        d.language_scores = score_language(d.text, bundled_profiles());
        d.quality_scores = score_quality(d.text, d.language_scores->top);
        scored.push_back(d);
    }
    auto cfg = reference_config("synthetic");
    cfg.bounds["min_chars"] = {400.0, std::nullopt};
    cfg.version = 1;
    std::size_t kept = 0;
    for (const auto& d : scored) {
        kept += apply_thresholds(d, cfg).kept;
    }
    const auto dir = gen::scratch_dir("cli-apply");
    gen::write_docs_file(dir / "in.jsonl", scored);
    std::ofstream(dir / "cfg.json") << json(cfg).dump();
    ASSERT_EQ(gen::run_cli("curate apply '" + (dir / "in.jsonl").string() + "' --config '" +
                           (dir / "cfg.json").string() + "' --summary '" + (dir / "s.json").string() + "' -o '" +
                           (dir / "out.jsonl").string() + "'"),
              0);
    const auto summary = json::parse(gen::read_text_file(dir / "s.json"));
    EXPECT_EQ(summary["kept"], kept);
    EXPECT_EQ(summary["dropped"], scored.size() - kept);
    EXPECT_EQ(summary["version"], 1);
    EXPECT_EQ(gen::read_docs_file(dir / "out.jsonl").size(), kept);
    EXPECT_GT(kept, 0u);
    EXPECT_LT(kept, scored.size());
}

// Reviewer verdicts go through the registry CLI; its export feeds policy apply.
TEST(Cli, RegistryAllowlistFeedsPolicyApply) {
    std::vector<Document> docs;
    int i = 0;
    for (const auto& [domain, n] : std::vector<std::pair<std::string, int>>{{"a.nl", 6}, {"b.nl", 5}, {"c.nl", 4}}) {
        for (int k = 0; k < n; ++k) {
            docs.push_back(gen::annotated_doc(domain, i++, 40, CCFamily::by, k % 2 ? Location::head : Location::footer,
                                              false));
        }
    }
    const auto dir = gen::scratch_dir("cli-policy");
    gen::write_docs_file(dir / "docs.jsonl", docs);
    const std::string root = "--root '" + (dir / "reg").string() + "' ";
    ASSERT_EQ(gen::run_cli("policy ledger '" + (dir / "docs.jsonl").string() + "' -o '" + (dir / "ledger.jsonl").string() + "'"), 0);
    ASSERT_EQ(gen::run_cli("registry " + root + "import-ledger '" + (dir / "ledger.jsonl").string() + "' > /dev/null"), 0);
    ASSERT_EQ(gen::run_cli("registry " + root + "verdict --domain a.nl --status verified_permissive > /dev/null"), 0);
    ASSERT_EQ(gen::run_cli("registry " + root + "verdict --domain b.nl --status rejected > /dev/null"), 0);
    EXPECT_NE(gen::run_cli("registry " + root + "verdict --domain a.nl --status rejected 2> /dev/null > /dev/null"), 0);
    ASSERT_EQ(gen::run_cli("registry " + root + "export-allowlist -o '" + (dir / "allow.jsonl").string() + "'"), 0);
    ASSERT_EQ(gen::run_cli("policy apply '" + (dir / "docs.jsonl").string() + "' --min-words 100 --allowlist '" +
                           (dir / "allow.jsonl").string() + "' -o '" + (dir / "kept.jsonl").string() + "' 2> /dev/null"),
              0);

    std::ifstream allow(dir / "allow.jsonl");
    const auto verdicts = read_allowlist(allow);
    ASSERT_EQ(verdicts.size(), 1u);
    EXPECT_EQ(verdicts[0].domain, "a.nl");
    const auto kept = gen::read_docs_file(dir / "kept.jsonl");
    EXPECT_EQ(ids(kept), ids(run_policy(docs, verdicts, 100).kept));
    EXPECT_EQ(kept.size(), 6u);
}

TEST(Cli, PostAuditReconstructs) {
    gen::Rng rng(71);
    std::vector<Document> docs;
    for (int i = 0; i < 250; ++i) {
        Document d;
        d.doc_id = "d" + std::to_string(i);
        d.url = "https://www.example.nl/" + std::to_string(i);
        d.collection_id = "c";
        d.set_text(gen::pii_text(rng));
        docs.push_back(d);
    }
    const auto dir = gen::scratch_dir("cli-audit");
    gen::write_docs_file(dir / "in.jsonl", docs);
    ASSERT_EQ(gen::run_cli("post audit '" + (dir / "in.jsonl").string() + "' --n 100 -o '" +
                           (dir / "audit.jsonl").string() + "'"),
              0);
    std::ifstream in(dir / "audit.jsonl");
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        const auto e = json::parse(line).get<AuditEntry>();
        std::vector<Edit> edits;
        for (const auto& c : e.changes) {
            edits.push_back(c.edit);
        }
        EXPECT_EQ(apply_edits(e.original, edits), e.scrubbed);
        EXPECT_EQ(gen::surviving_pii(e.scrubbed), "");
        ++n;
    }
    EXPECT_EQ(n, 100u);
}

TEST(Cli, SynthCommands) {
    const auto dir = gen::scratch_dir("cli-synth");
    std::ofstream(dir / "t.tsv") << "Willem-Alexander\tP97\tPrins van Oranje\t1\t1\n"
                                    "Jan Jansen\tP19\tUtrecht\t1\t0\n"
                                    "Amsterdam\tP18\ta.jpg\t0\t1\n";
    ASSERT_EQ(gen::run_cli("synth verbalize '" + (dir / "t.tsv").string() + "' -o '" + (dir / "out.txt").string() +
                           "' 2> /dev/null"),
              0);
    EXPECT_EQ(gen::read_text_file(dir / "out.txt"), "Willem-Alexander heeft de titel Prins van Oranje.\n");

    const auto fixture = gen::fixtures_dir() / "synth";
    ASSERT_EQ(gen::run_cli("synth clean-transcripts '" + (fixture / "transcript.txt").string() + "' -o '" +
                           (dir / "clean.txt").string() + "'"),
              0);
    EXPECT_EQ(gen::read_text_file(dir / "clean.txt"), gen::read_text_file(fixture / "transcript.expected.txt"));
}

TEST(Cli, ErrorsExitNonZero) {
    EXPECT_NE(gen::run_cli("curate apply /no/such/file 2> /dev/null"), 0);
    EXPECT_NE(gen::run_cli("bogus-command 2> /dev/null"), 0);
    EXPECT_NE(gen::run_cli("synth verbalize /no/such/file 2> /dev/null"), 0);
}
