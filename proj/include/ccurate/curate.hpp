#pragma once

#include "ccurate/document.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ccurate {

/// NFC, CRLF to LF, control characters (other than LF and TAB) removed,
/// horizontal whitespace runs collapsed to one space, lines trimmed, runs of
/// three or more blank lines reduced to one. Idempotent.
std::string normalize(std::string_view text);

/// Per-language stopword lists (30 words each in the bundled set).
class Stoplists {
public:
    static Stoplists load_dir(const std::filesystem::path& dir);
    static const Stoplists& bundled();

    void add(std::string language, std::set<std::string> words);
    const std::set<std::string>* find(std::string_view language) const;
    const std::set<std::string>& all_words() const noexcept { return union_; }
    std::vector<std::string> languages() const;

private:
    std::map<std::string, std::set<std::string>, std::less<>> lists_;
    std::set<std::string> union_;
};

/// The eleven heuristic quality dimensions. Lines are the non-empty lines
/// of the text; words are whitespace tokens. `language` selects the
/// stoplist; an unknown or empty code counts hits against all lists.
QualityScores score_quality(std::string_view text, std::string_view language = {},
                            const Stoplists& stoplists = Stoplists::bundled());

struct Bound {
    std::optional<double> lower;
    std::optional<double> upper;

    bool contains(double value) const noexcept {
        return (!lower || value >= *lower) && (!upper || value <= *upper);
    }
    bool operator==(const Bound&) const = default;
};

/// Per-collection filter bounds produced by the human tuning loop.
struct ThresholdConfig {
    std::string collection_id;
    /// Keyed by quality dimension name.
    std::map<std::string, Bound> bounds;
    /// Minimum top-language score, per language.
    std::map<std::string, double> language_min;
    /// Accepted top languages; empty means any language.
    std::set<std::string> target_languages;
    int version = 0;
    std::string author_note;

    /// Throws ConfigError on unknown dimensions or lower > upper.
    void validate() const;
    bool operator==(const ThresholdConfig&) const = default;
};

/// Bounds used when a collection has no tuned configuration yet.
ThresholdConfig reference_config(std::string collection_id);

struct FilterVerdict {
    bool kept = false;
    /// Every violated bound, in dimension order; "language" and
    /// "language_score" report the language gate.
    std::vector<std::string> failed_dimensions;
};

FilterVerdict apply_thresholds(const Document& doc, const ThresholdConfig& cfg);

/// Value of a quality dimension (or "top_score") for a scored document.
double dimension_value(const Document& doc, std::string_view dimension);
bool is_bucket_dimension(std::string_view dimension) noexcept;

struct BucketSample {
    std::string doc_id;
    double score = 0.0;
    std::string excerpt;
};

struct Bucket {
    /// Absent on the underflow (lower) and overflow (upper) buckets.
    std::optional<double> lower;
    std::optional<double> upper;
    std::size_t count = 0;
    std::vector<BucketSample> samples;
};

struct BucketReport {
    std::string collection_id;
    std::string dimension;
    std::vector<double> edges;
    std::vector<Bucket> buckets;
    std::size_t sample_size = 0;
};

inline constexpr std::size_t kBucketExcerpts = 25;
inline constexpr std::size_t kExcerptCodepoints = 200;

/// Half-open buckets [e_i, e_{i+1}) plus underflow and overflow. Each bucket
/// keeps up to `max_samples` excerpts, nearest its edges first (doc_id
/// breaks ties). Throws ConfigError for non-increasing edges.
BucketReport bucketize(const std::vector<Document>& sample, std::string_view dimension,
                       const std::vector<double>& edges, std::string collection_id = {},
                       std::size_t max_samples = kBucketExcerpts);

/// Bucket index of `value` (0 = underflow).
std::size_t bucket_index(const std::vector<double>& edges, double value);

/// Stores configs as `<root>/<collection_id>.json`; versions must strictly
/// increase across saves.
class ConfigStore {
public:
    explicit ConfigStore(std::filesystem::path root);

    std::optional<ThresholdConfig> load(std::string_view collection_id) const;
    /// Throws ConflictError unless cfg.version exceeds the stored version.
    void save(const ThresholdConfig& cfg);
    std::filesystem::path path_for(std::string_view collection_id) const;

private:
    std::filesystem::path root_;
};

ThresholdConfig load_threshold_config(const std::filesystem::path& path);

void to_json(nlohmann::json& j, const Bound& bound);
void from_json(const nlohmann::json& j, Bound& bound);
void to_json(nlohmann::json& j, const ThresholdConfig& cfg);
void from_json(const nlohmann::json& j, ThresholdConfig& cfg);
void to_json(nlohmann::json& j, const FilterVerdict& verdict);
void to_json(nlohmann::json& j, const BucketReport& report);
void from_json(const nlohmann::json& j, BucketReport& report);

} // namespace ccurate
