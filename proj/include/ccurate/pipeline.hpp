#pragma once

#include "ccurate/archive.hpp"
#include "ccurate/curate.hpp"
#include "ccurate/document.hpp"
#include "ccurate/langid.hpp"
#include "ccurate/postprocess.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ccurate {

/// Curation chain for one collection: normalize, score languages, gate on
/// the retained set, score quality, apply thresholds, scrub personal data,
/// optionally flag harmful language, deduplicate.
struct PipelineOptions {
    std::string collection_id = "default";
    std::set<std::string> retained_languages;  // empty: crawl_retained_languages()
    std::optional<ThresholdConfig> thresholds; // empty: reference_config(collection_id)
    bool scrub = true;
    bool dedup = true;
    /// Harmful-language pass; documents reaching `harm_drop_at` are dropped.
    const Wordlist* wordlist = nullptr;
    Severity harm_drop_at = Severity::drop;
    DedupOptions dedup_options;
    /// Defaults to bundled_profiles().
    const std::vector<LanguageProfile>* profiles = nullptr;
};

struct LanguageTally {
    std::uint64_t documents = 0;
    std::uint64_t words = 0;

    bool operator==(const LanguageTally&) const = default;
};

struct PipelineReport {
    std::size_t input = 0;
    std::size_t dropped_empty = 0;
    std::size_t dropped_language = 0;
    std::size_t dropped_quality = 0;
    std::size_t dropped_harmful = 0;
    std::size_t dropped_duplicate = 0;
    /// Per top language after the language gate.
    std::map<std::string, LanguageTally> retained;
    /// Per top language of the final output.
    std::map<std::string, LanguageTally> kept;
    /// Failed-dimension name -> documents failing it.
    std::map<std::string, std::size_t> failed_dimensions;
    ArchiveStats archive;
};

struct PipelineResult {
    std::vector<Document> kept;
    std::vector<ScrubReport> scrub_reports;
    PipelineReport report;
};

class Pipeline {
public:
    explicit Pipeline(PipelineOptions options);

    /// Runs the per-document stages; returns false when the document is dropped.
    bool curate(Document& doc);
    /// Per-document stages then deduplication.
    PipelineResult run(std::vector<Document> docs);
    /// Ingests every record of `in` and runs the chain. Records of several
    /// archives can be fed by calling add_archive repeatedly before finish().
    void add_archive(std::istream& in, ArchiveFormat format, const std::string& crawl_id = {});
    void add(Document doc);
    PipelineResult finish();

    const PipelineOptions& options() const noexcept { return options_; }

private:
    PipelineOptions options_;
    ThresholdConfig thresholds_;
    std::vector<Document> pending_;
    std::vector<ScrubReport> scrub_reports_;
    PipelineReport report_;
};

void to_json(nlohmann::json& j, const LanguageTally& t);
void from_json(const nlohmann::json& j, LanguageTally& t);
void to_json(nlohmann::json& j, const PipelineReport& r);

} // namespace ccurate
