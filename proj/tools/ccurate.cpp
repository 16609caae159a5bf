// Command-line front end. Every subcommand reads JSONL documents from a
// file or stdin ("-") and writes JSONL to a file or stdout ("-").

#include "ccurate/archive.hpp"
#include "ccurate/curate.hpp"
#include "ccurate/data_paths.hpp"
#include "ccurate/document.hpp"
#include "ccurate/error.hpp"
#include "ccurate/ingest.hpp"
#include "ccurate/langid.hpp"
#include "ccurate/pipeline.hpp"
#include "ccurate/policy.hpp"
#include "ccurate/postprocess.hpp"
#include "ccurate/registry.hpp"
#include "ccurate/review_service.hpp"
#include "ccurate/sampling.hpp"
#include "ccurate/synth.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ccurate;

namespace {

class Input {
public:
    explicit Input(const std::string& path) {
        if (path == "-" || path.empty()) {
            stream_ = &std::cin;
        } else {
            file_ = std::make_unique<std::ifstream>(path, std::ios::binary);
            if (!*file_) {
                throw ConfigError("cannot open " + path);
            }
            stream_ = file_.get();
        }
    }
    std::istream& get() { return *stream_; }

private:
    std::unique_ptr<std::ifstream> file_;
    std::istream* stream_ = nullptr;
};

class Output {
public:
    explicit Output(const std::string& path) {
        if (path == "-" || path.empty()) {
            stream_ = &std::cout;
        } else {
            if (fs::path(path).has_parent_path()) {
                fs::create_directories(fs::path(path).parent_path());
            }
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
            if (!*file_) {
                throw ConfigError("cannot write " + path);
            }
            stream_ = file_.get();
        }
    }
    std::ostream& get() { return *stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_ = nullptr;
};

std::vector<Document> read_docs(const std::string& path) {
    Input in(path);
    return read_documents(in.get());
}

void write_docs(const std::string& path, const std::vector<Document>& docs) {
    Output out(path);
    for (const auto& d : docs) {
        write_document(out.get(), d);
    }
}

void write_json(const std::string& path, const json& j) {
    Output out(path);
    out.get() << j.dump(2) << '\n';
}

json read_json(const std::string& path) {
    Input in(path);
    return json::parse(in.get());
}

std::vector<LanguageProfile> profiles_from(const std::string& dir) {
    return dir.empty() ? bundled_profiles() : load_profiles(dir);
}

ArchiveFormat parse_format(const std::string& name) {
    if (name == "warc") {
        return ArchiveFormat::warc;
    }
    if (name == "jsonl") {
        return ArchiveFormat::jsonl;
    }
    throw ConfigError("unknown format " + name);
}

std::vector<double> parse_edges(const std::string& csv) {
    std::vector<double> edges;
    std::stringstream ss(csv);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (part.empty()) {
            continue;
        }
        std::size_t used = 0;
        edges.push_back(std::stod(part, &used));
        if (used != part.size()) {
            throw ConfigError("bad edge value " + part);
        }
    }
    return edges;
}

ThresholdConfig config_from(const std::string& path, const std::string& collection) {
    if (path.empty()) {
        return reference_config(collection);
    }
    return load_threshold_config(path);
}

std::map<std::string, LanguageTally> count_by_language(const std::vector<Document>& docs) {
    std::map<std::string, LanguageTally> counts;
    for (const auto& d : docs) {
        auto& t = counts[d.language_scores ? d.language_scores->top : "und"];
        ++t.documents;
        t.words += d.word_count;
    }
    return counts;
}

ReviewServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) {
        g_server->stop();
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Corpus curation pipeline"};
    app.require_subcommand(1);

    // ---- ingest --------------------------------------------------------------
    auto* ingest = app.add_subcommand("ingest", "Archive records to scored Document JSONL");
    std::vector<std::string> ingest_inputs;
    std::string ingest_format = "warc", ingest_collection = "default", ingest_crawl, ingest_out = "-",
                ingest_profiles;
    bool ingest_all = false;
    ingest->add_option("inputs", ingest_inputs, "Archive files (- for stdin)")->required();
    ingest->add_option("--format", ingest_format, "warc or jsonl");
    ingest->add_option("--collection", ingest_collection);
    ingest->add_option("--crawl-id", ingest_crawl);
    ingest->add_option("--profiles", ingest_profiles, "Language profile directory");
    ingest->add_flag("--keep-all-languages", ingest_all, "Skip the retained-language gate");
    ingest->add_option("-o,--output", ingest_out);
    ingest->callback([&] {
        const auto profiles = profiles_from(ingest_profiles);
        Output out(ingest_out);
        ArchiveStats total;
        std::size_t dropped_language = 0;
        for (const auto& path : ingest_inputs) {
            Input in(path);
            ArchiveReader reader(in.get(), parse_format(ingest_format), ingest_crawl);
            while (auto rec = reader.next()) {
                auto doc = document_from_record(*rec, ingest_collection);
                doc.set_text(normalize(doc.text));
                doc.advance(Stage::normalized);
                doc.language_scores = score_language(doc.text, profiles);
                if (!ingest_all && !retain_language(doc, crawl_retained_languages())) {
                    ++dropped_language;
                    continue;
                }
                write_document(out.get(), doc);
            }
            const auto& s = reader.stats();
            total.yielded += s.yielded;
            total.skipped_malformed += s.skipped_malformed;
            total.skipped_record_type += s.skipped_record_type;
            total.skipped_content_type += s.skipped_content_type;
            total.skipped_empty += s.skipped_empty;
        }
        std::cerr << json{{"yielded", total.yielded},
                          {"skipped_malformed", total.skipped_malformed},
                          {"skipped_record_type", total.skipped_record_type},
                          {"skipped_content_type", total.skipped_content_type},
                          {"skipped_empty", total.skipped_empty},
                          {"dropped_language", dropped_language}}
                         .dump()
                  << '\n';
    });

    // ---- run -----------------------------------------------------------------
    auto* run = app.add_subcommand("run", "Full curation chain over archives or documents");
    std::vector<std::string> run_inputs;
    std::string run_format = "warc", run_collection = "default", run_config, run_out = "-", run_report,
                run_wordlist, run_profiles;
    run->add_option("inputs", run_inputs)->required();
    run->add_option("--format", run_format, "warc, jsonl (raw records) or docs (Document JSONL)");
    run->add_option("--collection", run_collection);
    run->add_option("--config", run_config, "ThresholdConfig JSON (reference bounds if omitted)");
    run->add_option("--wordlist", run_wordlist, "Harmful-language wordlist; drop-severity hits are removed");
    run->add_option("--profiles", run_profiles);
    run->add_option("--report", run_report, "Write the run report JSON here");
    run->add_option("-o,--output", run_out);
    run->callback([&] {
        PipelineOptions opts;
        opts.collection_id = run_collection;
        if (!run_config.empty()) {
            opts.thresholds = load_threshold_config(run_config);
        }
        std::optional<Wordlist> wl;
        if (!run_wordlist.empty()) {
            wl = Wordlist::load(run_wordlist);
            opts.wordlist = &*wl;
        }
        std::vector<LanguageProfile> profiles;
        if (!run_profiles.empty()) {
            profiles = load_profiles(run_profiles);
            opts.profiles = &profiles;
        }
        Pipeline pipeline(opts);
        for (const auto& path : run_inputs) {
            Input in(path);
            if (run_format == "docs") {
                DocumentReader reader(in.get());
                while (auto d = reader.next()) {
                    pipeline.add(std::move(*d));
                }
            } else {
                pipeline.add_archive(in.get(), parse_format(run_format));
            }
        }
        auto result = pipeline.finish();
        write_docs(run_out, result.kept);
        const json report = result.report;
        if (!run_report.empty()) {
            write_json(run_report, report);
        } else {
            std::cerr << report.dump() << '\n';
        }
    });

    // ---- langid --------------------------------------------------------------
    auto* langid = app.add_subcommand("langid", "Language profiles and scoring");
    langid->require_subcommand(1);
    auto* lt = langid->add_subcommand("train", "Train one profile per <lang>.txt seed file");
    std::string lt_seed, lt_out;
    std::size_t lt_max = 0;
    lt->add_option("--seed-dir", lt_seed)->required();
    lt->add_option("--out", lt_out)->required();
    lt->add_option("--max-grams", lt_max, "Keep the most frequent grams per order (0 = all)");
    lt->callback([&] {
        TrainOptions opts;
        opts.max_grams_per_order = lt_max;
        opts.provenance = "seed corpus " + fs::path(lt_seed).filename().string();
        fs::create_directories(lt_out);
        for (const auto& p : train_profiles(read_seed_dir(lt_seed), opts)) {
            save_profile(p, fs::path(lt_out) / (p.language + ".json"));
            std::cerr << "wrote " << p.language << '\n';
        }
    });
    auto* ls = langid->add_subcommand("score", "Attach language scores to documents");
    std::string ls_in = "-", ls_out = "-", ls_profiles;
    ls->add_option("input", ls_in);
    ls->add_option("--profiles", ls_profiles);
    ls->add_option("-o,--output", ls_out);
    ls->callback([&] {
        const auto profiles = profiles_from(ls_profiles);
        Input in(ls_in);
        Output out(ls_out);
        DocumentReader reader(in.get());
        while (auto d = reader.next()) {
            d->language_scores = score_language(d->text, profiles);
            write_document(out.get(), *d);
        }
    });
    auto* le = langid->add_subcommand("eval", "Top-1 accuracy on a language<TAB>sentence file");
    std::string le_in, le_profiles;
    le->add_option("input", le_in)->required();
    le->add_option("--profiles", le_profiles);
    le->callback([&] {
        Input in(le_in);
        const auto r = evaluate(read_labeled_tsv(in.get()), profiles_from(le_profiles));
        std::cout << json{{"total", r.total}, {"correct", r.correct}, {"accuracy", r.accuracy()},
                          {"confusion", r.confusion}}
                         .dump(2)
                  << '\n';
    });

    // ---- curate --------------------------------------------------------------
    auto* curate = app.add_subcommand("curate", "Normalization, quality scores and thresholds");
    curate->require_subcommand(1);
    auto* cs = curate->add_subcommand("score", "Normalize and attach quality scores");
    std::string cs_in = "-", cs_out = "-";
    cs->add_option("input", cs_in);
    cs->add_option("-o,--output", cs_out);
    cs->callback([&] {
        Input in(cs_in);
        Output out(cs_out);
        DocumentReader reader(in.get());
        while (auto d = reader.next()) {
            d->set_text(normalize(d->text));
            if (d->stage < Stage::normalized) {
                d->advance(Stage::normalized);
            }
            if (!d->language_scores) {
                d->language_scores = score_language(d->text, bundled_profiles());
            }
            d->quality_scores = score_quality(d->text, d->language_scores->top);
            if (d->stage < Stage::scored) {
                d->advance(Stage::scored);
            }
            write_document(out.get(), *d);
        }
    });
    auto* ca = curate->add_subcommand("apply", "Keep documents within a threshold config");
    std::string ca_in = "-", ca_out = "-", ca_config, ca_collection = "default", ca_rejected, ca_summary;
    ca->add_option("input", ca_in);
    ca->add_option("--config", ca_config);
    ca->add_option("--collection", ca_collection, "Collection for reference bounds when --config is omitted");
    ca->add_option("--rejected", ca_rejected, "Write dropped documents with their failed dimensions");
    ca->add_option("--summary", ca_summary, "Write kept/dropped counts JSON (stderr otherwise)");
    ca->add_option("-o,--output", ca_out);
    ca->callback([&] {
        const auto cfg = config_from(ca_config, ca_collection);
        Input in(ca_in);
        Output out(ca_out);
        std::unique_ptr<Output> rejected;
        if (!ca_rejected.empty()) {
            rejected = std::make_unique<Output>(ca_rejected);
        }
        std::size_t kept = 0, dropped = 0;
        std::map<std::string, std::size_t> failed;
        DocumentReader reader(in.get());
        while (auto d = reader.next()) {
            const auto v = apply_thresholds(*d, cfg);
            if (v.kept) {
                ++kept;
                if (d->stage < Stage::filtered) {
                    d->advance(Stage::filtered);
                }
                write_document(out.get(), *d);
            } else {
                ++dropped;
                for (const auto& f : v.failed_dimensions) {
                    ++failed[f];
                }
                if (rejected) {
                    rejected->get() << json{{"doc_id", d->doc_id}, {"verdict", v}}.dump() << '\n';
                }
            }
        }
        const json summary = {{"collection_id", cfg.collection_id},
                              {"version", cfg.version},
                              {"kept", kept},
                              {"dropped", dropped},
                              {"failed_dimensions", failed}};
        if (ca_summary.empty()) {
            std::cerr << summary.dump() << '\n';
        } else {
            write_json(ca_summary, summary);
        }
    });
    auto* csa = curate->add_subcommand("sample", "Uniform reservoir sample");
    std::string csa_in = "-", csa_out = "-";
    std::size_t csa_n = 1000;
    std::uint64_t csa_seed = 0;
    csa->add_option("input", csa_in);
    csa->add_option("--n", csa_n);
    csa->add_option("--seed", csa_seed);
    csa->add_option("-o,--output", csa_out);
    csa->callback([&] {
        Input in(csa_in);
        ReservoirSampler<Document> sampler(csa_n, csa_seed);
        DocumentReader reader(in.get());
        while (auto d = reader.next()) {
            sampler.offer(std::move(*d));
        }
        write_docs(csa_out, std::move(sampler).take());
    });
    auto* cb = curate->add_subcommand("buckets", "Bucket report over one dimension");
    std::string cb_in = "-", cb_out = "-", cb_dim, cb_edges, cb_collection;
    std::size_t cb_samples = kBucketExcerpts;
    cb->add_option("input", cb_in);
    cb->add_option("--dimension", cb_dim)->required();
    cb->add_option("--edges", cb_edges, "Comma-separated, strictly increasing")->required();
    cb->add_option("--collection", cb_collection);
    cb->add_option("--samples", cb_samples, "Excerpts kept per bucket");
    cb->add_option("-o,--output", cb_out);
    cb->callback([&] {
        const auto docs = read_docs(cb_in);
        auto collection = cb_collection;
        if (collection.empty() && !docs.empty()) {
            collection = docs.front().collection_id;
        }
        const json report = bucketize(docs, cb_dim, parse_edges(cb_edges), collection, cb_samples);
        write_json(cb_out, report);
    });

    // ---- policy --------------------------------------------------------------
    auto* policy = app.add_subcommand("policy", "Domain-level license policy");
    policy->require_subcommand(1);
    auto* pl = policy->add_subcommand("ledger", "Per-domain ledger after steps 1 and 2");
    std::string pl_in = "-", pl_out = "-";
    bool pl_all = false;
    pl->add_option("input", pl_in);
    pl->add_flag("--all", pl_all, "Ledger over every document, before steps 1 and 2");
    pl->add_option("-o,--output", pl_out);
    pl->callback([&] {
        const auto docs = read_docs(pl_in);
        Output out(pl_out);
        if (pl_all) {
            write_ledger(out.get(), build_ledger(docs));
        } else {
            write_ledger(out.get(), run_policy(docs, {}, 0).ledger);
        }
    });
    auto* pq = policy->add_subcommand("queue", "Verification queue");
    std::string pq_in = "-", pq_out = "-", pq_ledger;
    std::uint64_t pq_min = kVerificationMinWords;
    pq->add_option("input", pq_in, "Documents (ignored with --ledger)");
    pq->add_option("--ledger", pq_ledger, "Read a ledger instead of documents");
    pq->add_option("--min-words", pq_min);
    pq->add_option("-o,--output", pq_out);
    pq->callback([&] {
        VerificationQueue queue;
        if (!pq_ledger.empty()) {
            Input in(pq_ledger);
            auto ledger = read_ledger(in.get());
            queue = build_verification_queue(ledger, pq_min);
        } else {
            queue = run_policy(read_docs(pq_in), {}, pq_min).queue;
        }
        Output out(pq_out);
        for (const auto& item : queue) {
            out.get() << json(item).dump() << '\n';
        }
    });
    auto* pa = policy->add_subcommand("apply", "Steps 1 to 3 with reviewer verdicts");
    std::string pa_in = "-", pa_out = "-", pa_allow;
    std::uint64_t pa_min = kVerificationMinWords;
    pa->add_option("input", pa_in);
    pa->add_option("--allowlist", pa_allow)->required();
    pa->add_option("--min-words", pa_min);
    pa->add_option("-o,--output", pa_out);
    pa->callback([&] {
        Input allow(pa_allow);
        const auto verdicts = read_allowlist(allow.get());
        const auto result = run_policy(read_docs(pa_in), verdicts, pa_min);
        write_docs(pa_out, result.kept);
        std::cerr << json{{"step1_domains", result.step1_domains.size()},
                          {"step2_docs", result.step2_docs.size()},
                          {"queue", result.queue.size()},
                          {"kept", result.kept.size()}}
                         .dump()
                  << '\n';
    });

    // ---- post ----------------------------------------------------------------
    auto* post = app.add_subcommand("post", "Post-processing");
    post->require_subcommand(1);
    auto* ps = post->add_subcommand("scrub", "Replace personal data with placeholders");
    std::string ps_in = "-", ps_out = "-", ps_reports;
    ps->add_option("input", ps_in);
    ps->add_option("--reports", ps_reports, "ScrubReport JSONL sidecar");
    ps->add_option("-o,--output", ps_out);
    ps->callback([&] {
        Input in(ps_in);
        Output out(ps_out);
        std::unique_ptr<Output> reports;
        if (!ps_reports.empty()) {
            reports = std::make_unique<Output>(ps_reports);
        }
        DocumentReader reader(in.get());
        while (auto d = reader.next()) {
            auto r = scrub_pii(d->text);
            r.report.doc_id = d->doc_id;
            d->set_text(std::move(r.text));
            write_document(out.get(), *d);
            if (reports) {
                reports->get() << json(r.report).dump() << '\n';
            }
        }
    });
    auto* ph = post->add_subcommand("harmful", "Harmful-language pass");
    std::string ph_in = "-", ph_out = "-", ph_wordlist, ph_action = "drop", ph_flags;
    ph->add_option("input", ph_in);
    ph->add_option("--wordlist", ph_wordlist)->required();
    ph->add_option("--action", ph_action, "drop: remove drop-severity documents; flag: keep all")
        ->check(CLI::IsMember({"drop", "flag"}));
    ph->add_option("--flags", ph_flags, "JSONL of {doc_id, severity, hits} for flagged documents");
    ph->add_option("-o,--output", ph_out);
    ph->callback([&] {
        const auto wl = Wordlist::load(ph_wordlist);
        Input in(ph_in);
        Output out(ph_out);
        std::unique_ptr<Output> flags;
        if (!ph_flags.empty()) {
            flags = std::make_unique<Output>(ph_flags);
        }
        DocumentReader reader(in.get());
        while (auto d = reader.next()) {
            const auto r = flag_harmful(d->text, wl);
            if (flags && r.severity != Severity::none) {
                json j = r;
                j["doc_id"] = d->doc_id;
                flags->get() << j.dump() << '\n';
            }
            if (ph_action == "drop" && r.severity == Severity::drop) {
                continue;
            }
            write_document(out.get(), *d);
        }
    });
    auto* pd = post->add_subcommand("dedup", "Within-collection deduplication");
    std::string pd_in = "-", pd_out = "-", pd_collection, pd_report;
    DedupOptions pd_opts;
    pd->add_option("input", pd_in);
    pd->add_option("--collection", pd_collection)->required();
    pd->add_option("--report", pd_report, "DedupReport JSON");
    pd->add_option("--shingle-words", pd_opts.shingle_words);
    pd->add_option("--threshold", pd_opts.threshold);
    pd->add_option("-o,--output", pd_out);
    pd->callback([&] {
        const auto result = deduplicate(read_docs(pd_in), pd_collection, pd_opts);
        write_docs(pd_out, result.kept);
        const json report = result.report;
        if (pd_report.empty()) {
            std::cerr << report.dump() << '\n';
        } else {
            write_json(pd_report, report);
        }
    });
    auto* pau = post->add_subcommand("audit", "Sample scrubbed documents with their replacement diffs");
    std::string pau_in = "-", pau_out = "-";
    std::size_t pau_n = 100;
    std::uint64_t pau_seed = 0;
    pau->add_option("input", pau_in, "Documents before scrubbing");
    pau->add_option("--n", pau_n);
    pau->add_option("--seed", pau_seed);
    pau->add_option("-o,--output", pau_out);
    pau->callback([&] {
        Output out(pau_out);
        for (const auto& e : pii_audit_sample(read_docs(pau_in), pau_n, pau_seed)) {
            out.get() << json(e).dump() << '\n';
        }
    });

    // ---- synth ---------------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "Synthetic text from triples and transcripts");
    synth->require_subcommand(1);
    auto* sv = synth->add_subcommand("verbalize", "Triples TSV to sentences");
    std::string sv_in = "-", sv_out = "-", sv_templates, sv_blocklist, sv_lang = std::string(kDefaultSynthLanguage);
    sv->add_option("input", sv_in);
    sv->add_option("--templates", sv_templates);
    sv->add_option("--blocklist", sv_blocklist);
    sv->add_option("--language", sv_lang);
    sv->add_option("-o,--output", sv_out);
    sv->callback([&] {
        const auto templates = sv_templates.empty() ? TemplateSet::bundled() : TemplateSet::load(sv_templates);
        const auto blocklist = sv_blocklist.empty() ? bundled_blocklist() : load_blocklist(sv_blocklist);
        Input in(sv_in);
        SynthStats stats;
        const auto sentences = synthesize(read_triples(in.get()), templates, blocklist, sv_lang, &stats);
        Output out(sv_out);
        for (const auto& s : sentences) {
            out.get() << s << '\n';
        }
        std::cerr << json{{"input", stats.input},
                          {"dropped_privacy", stats.dropped_privacy},
                          {"dropped_trivial", stats.dropped_trivial},
                          {"no_template", stats.no_template},
                          {"emitted", stats.emitted}}
                         .dump()
                  << '\n';
    });
    auto* sc = synth->add_subcommand("clean-transcripts", "Strip markers and timestamps");
    std::string sc_in = "-", sc_out = "-";
    sc->add_option("input", sc_in);
    sc->add_option("-o,--output", sc_out);
    sc->callback([&] {
        Input in(sc_in);
        std::string text((std::istreambuf_iterator<char>(in.get())), std::istreambuf_iterator<char>());
        Output out(sc_out);
        out.get() << clean_transcript(text);
    });

    // ---- registry ------------------------------------------------------------
    auto* reg = app.add_subcommand("registry", "Collection registry and review API");
    reg->require_subcommand(1);
    std::string reg_root = "registry";
    reg->add_option("--root", reg_root, "Registry directory");
    auto open_registry = [&] { return Registry(reg_root); };

    auto* ra = reg->add_subcommand("add", "Register a collection from a JSON record");
    std::string ra_file;
    ra->add_option("record", ra_file)->required();
    ra->callback([&] {
        auto r = open_registry();
        std::cout << json(r.register_collection(read_json(ra_file).get<CollectionRecord>())).dump(2) << '\n';
    });
    auto* ru = reg->add_subcommand("update", "Append a new version of a collection record");
    std::string ru_file;
    ru->add_option("record", ru_file)->required();
    ru->callback([&] {
        auto r = open_registry();
        std::cout << json(r.update_collection(read_json(ru_file).get<CollectionRecord>())).dump(2) << '\n';
    });
    auto* rl = reg->add_subcommand("list", "Registered collections");
    rl->callback([&] {
        auto r = open_registry();
        std::cout << json(r.collections()).dump(2) << '\n';
    });
    auto* rr = reg->add_subcommand("risk", "Assign a risk level");
    std::string rr_id, rr_level, rr_rationale;
    rr->add_option("--collection", rr_id)->required();
    rr->add_option("--level", rr_level, "low, medium, high or rejected")->required();
    rr->add_option("--rationale", rr_rationale);
    rr->callback([&] {
        auto r = open_registry();
        std::cout << json(r.assign_risk(rr_id, rr_level, rr_rationale)).dump(2) << '\n';
    });
    auto* rw = reg->add_subcommand("weights", "Set the risk-to-weight map");
    RiskWeights rw_w;
    rw->add_option("--low", rw_w.low);
    rw->add_option("--medium", rw_w.medium);
    rw->add_option("--high", rw_w.high);
    rw->callback([&] {
        auto r = open_registry();
        r.set_risk_weights(rw_w);
        std::cout << json(r.risk_weights()).dump(2) << '\n';
    });
    auto* rt = reg->add_subcommand("thresholds", "Store a ThresholdConfig (version must be current + 1)");
    std::string rt_file;
    rt->add_option("config", rt_file)->required();
    rt->callback([&] {
        auto r = open_registry();
        std::cout << json(r.put_thresholds(load_threshold_config(rt_file))).dump(2) << '\n';
    });
    auto* ri = reg->add_subcommand("import-ledger", "Replace the domain ledger");
    std::string ri_file = "-";
    ri->add_option("ledger", ri_file);
    ri->callback([&] {
        auto r = open_registry();
        Input in(ri_file);
        r.import_ledger(read_ledger(in.get()));
        std::cerr << r.queue().size() << " domains queued\n";
    });
    auto* rs = reg->add_subcommand("store-report", "Store a bucket report");
    std::string rs_file = "-";
    rs->add_option("report", rs_file);
    rs->callback([&] {
        auto r = open_registry();
        r.store_bucket_report(read_json(rs_file).get<BucketReport>());
    });
    auto* rv = reg->add_subcommand("verdict", "Record a reviewer verdict on a domain");
    std::string rv_domain, rv_status, rv_note, rv_reviewer;
    rv->add_option("--domain", rv_domain)->required();
    rv->add_option("--status", rv_status, "verified_permissive or rejected")->required();
    rv->add_option("--note", rv_note);
    rv->add_option("--reviewer", rv_reviewer);
    rv->callback([&] {
        auto r = open_registry();
        std::cout << json(r.record_verdict(rv_domain, rv_status, rv_note, rv_reviewer)).dump(2) << '\n';
    });
    auto* re = reg->add_subcommand("export-allowlist", "Allowlist JSONL for policy apply");
    std::string re_out = "-";
    re->add_option("-o,--output", re_out);
    re->callback([&] {
        auto r = open_registry();
        Output out(re_out);
        r.export_allowlist(out.get());
    });
    auto* rsv = reg->add_subcommand("serve", "Serve the review API");
    std::string rsv_host = "127.0.0.1", rsv_token;
    int rsv_port = 8080;
    rsv->add_option("--host", rsv_host);
    rsv->add_option("--port", rsv_port);
    rsv->add_option("--token", rsv_token, "Shared bearer token")->envname("CCURATE_REVIEW_TOKEN");
    rsv->callback([&] {
        Registry registry(reg_root);
        ReviewService service(registry, rsv_token);
        ReviewServer server(service);
        g_server = &server;
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        std::cerr << "listening on " << rsv_host << ':' << rsv_port << '\n';
        server.listen(rsv_host, rsv_port);
        g_server = nullptr;
    });

    // ---- report --------------------------------------------------------------
    auto* report = app.add_subcommand("report", "Summaries");
    report->require_subcommand(1);
    auto* rc = report->add_subcommand("counts", "Documents and words per top language");
    std::string rc_in = "-";
    rc->add_option("input", rc_in);
    rc->callback([&] { std::cout << json(count_by_language(read_docs(rc_in))).dump(2) << '\n'; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const NotFoundError& e) {
        std::cerr << "not found: " << e.what() << '\n';
        return 3;
    } catch (const ConflictError& e) {
        std::cerr << "conflict: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
