#include "ccurate/pipeline.hpp"

#include "ccurate/error.hpp"
#include "ccurate/ingest.hpp"

#include <nlohmann/json.hpp>

#include <istream>

namespace ccurate {

namespace {

void tally(std::map<std::string, LanguageTally>& into, const Document& doc) {
    auto& t = into[doc.language_scores ? doc.language_scores->top : std::string("und")];
    ++t.documents;
    t.words += doc.word_count;
}

} // namespace

Pipeline::Pipeline(PipelineOptions options) : options_(std::move(options)) {
    if (options_.retained_languages.empty()) {
        options_.retained_languages = crawl_retained_languages();
    }
    thresholds_ = options_.thresholds ? *options_.thresholds : reference_config(options_.collection_id);
    thresholds_.validate();
    if (options_.wordlist && options_.wordlist->empty()) {
        throw ConfigError("harmful-language wordlist is empty");
    }
}

bool Pipeline::curate(Document& doc) {
    ++report_.input;
    if (doc.collection_id.empty()) {
        doc.collection_id = options_.collection_id;
    }
    doc.set_text(normalize(doc.text));
    doc.advance(Stage::normalized);
    if (doc.text.empty()) {
        ++report_.dropped_empty;
        return false;
    }

    const auto& profiles = options_.profiles ? *options_.profiles : bundled_profiles();
    doc.language_scores = score_language(doc.text, profiles);
    if (!retain_language(doc, options_.retained_languages)) {
        ++report_.dropped_language;
        return false;
    }
    tally(report_.retained, doc);

    doc.quality_scores = score_quality(doc.text, doc.language_scores->top);
    doc.advance(Stage::scored);
    const auto verdict = apply_thresholds(doc, thresholds_);
    if (!verdict.kept) {
        ++report_.dropped_quality;
        for (const auto& dim : verdict.failed_dimensions) {
            ++report_.failed_dimensions[dim];
        }
        return false;
    }
    doc.advance(Stage::filtered);

    if (options_.scrub) {
        auto scrubbed = scrub_pii(doc.text);
        scrubbed.report.doc_id = doc.doc_id;
        if (scrubbed.text != doc.text) {
            doc.set_text(std::move(scrubbed.text));
        }
        scrub_reports_.push_back(std::move(scrubbed.report));
    }
    if (options_.wordlist) {
        const auto harm = flag_harmful(doc.text, *options_.wordlist);
        if (harm.severity != Severity::none && harm.severity >= options_.harm_drop_at) {
            ++report_.dropped_harmful;
            return false;
        }
    }
    doc.advance(Stage::postprocessed);
    return true;
}

void Pipeline::add(Document doc) {
    if (curate(doc)) {
        pending_.push_back(std::move(doc));
    }
}

void Pipeline::add_archive(std::istream& in, ArchiveFormat format, const std::string& crawl_id) {
    ArchiveReader reader(in, format, crawl_id);
    while (auto record = reader.next()) {
        add(document_from_record(*record, options_.collection_id));
    }
    const auto& s = reader.stats();
    report_.archive.yielded += s.yielded;
    report_.archive.skipped_malformed += s.skipped_malformed;
    report_.archive.skipped_record_type += s.skipped_record_type;
    report_.archive.skipped_content_type += s.skipped_content_type;
    report_.archive.skipped_empty += s.skipped_empty;
}

PipelineResult Pipeline::run(std::vector<Document> docs) {
    for (auto& doc : docs) {
        add(std::move(doc));
    }
    return finish();
}

PipelineResult Pipeline::finish() {
    PipelineResult result;
    if (options_.dedup) {
        for (auto& doc : pending_) {
            doc.collection_id = options_.collection_id;
        }
        auto deduped = deduplicate(pending_, options_.collection_id, options_.dedup_options);
        report_.dropped_duplicate += deduped.report.dropped.size();
        result.kept = std::move(deduped.kept);
    } else {
        result.kept = std::move(pending_);
    }
    for (const auto& doc : result.kept) {
        tally(report_.kept, doc);
    }
    result.scrub_reports = std::move(scrub_reports_);
    result.report = std::move(report_);
    pending_.clear();
    scrub_reports_.clear();
    report_ = {};
    return result;
}

void to_json(nlohmann::json& j, const LanguageTally& t) {
    j = {{"documents", t.documents}, {"words", t.words}};
}

void from_json(const nlohmann::json& j, LanguageTally& t) {
    t.documents = j.at("documents").get<std::uint64_t>();
    t.words = j.at("words").get<std::uint64_t>();
}

void to_json(nlohmann::json& j, const PipelineReport& r) {
    j = {
        {"input", r.input},
        {"dropped",
         {{"empty", r.dropped_empty},
          {"language", r.dropped_language},
          {"quality", r.dropped_quality},
          {"harmful", r.dropped_harmful},
          {"duplicate", r.dropped_duplicate}}},
        {"retained", r.retained},
        {"kept", r.kept},
        {"failed_dimensions", r.failed_dimensions},
        {"archive",
         {{"yielded", r.archive.yielded},
          {"skipped_malformed", r.archive.skipped_malformed},
          {"skipped_record_type", r.archive.skipped_record_type},
          {"skipped_content_type", r.archive.skipped_content_type},
          {"skipped_empty", r.archive.skipped_empty}}},
    };
}

} // namespace ccurate
