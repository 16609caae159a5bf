#pragma once

#include "ccurate/document.hpp"

#include <nlohmann/json_fwd.hpp>

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ccurate {

inline constexpr int kMaxNgram = 3;

/// Character 1..3-gram frequency profile of one language. Each order's
/// table sums to 1.
struct LanguageProfile {
    std::string language;
    std::array<std::map<std::string, double>, kMaxNgram> ngrams;
    std::string provenance;
    /// Euclidean norm of each order's table; derived, kept in sync by refresh_norms().
    std::array<double, kMaxNgram> norms{};

    void refresh_norms();
    bool operator==(const LanguageProfile&) const = default;
};

struct TrainOptions {
    std::size_t min_chars = 1000;
    /// Keep the most frequent grams per order; 0 keeps all.
    std::size_t max_grams_per_order = 0;
    std::string provenance;
};

/// Raw n-gram counts of `text`: lowercase, letters only, each word padded
/// with one space on either side. Independent of whitespace-run length.
std::array<std::map<std::string, double>, kMaxNgram> ngram_counts(std::string_view text);

LanguageProfile train_profile(std::string_view language, const std::vector<std::string>& texts,
                              const TrainOptions& options = {});

/// One profile per label, in label order. Throws ConfigError naming the
/// first language with fewer than `min_chars` characters.
std::vector<LanguageProfile> train_profiles(const std::vector<std::pair<std::string, std::string>>& labeled,
                                            const TrainOptions& options = {});

/// Cosine similarity per n-gram order (averaged) against each profile,
/// then an exponential normalisation at temperature 1. Empty text yields
/// the uniform distribution.
LanguageScores score_language(std::string_view text, const std::vector<LanguageProfile>& profiles);

/// Per-profile similarity in [0, 1] before normalisation.
std::map<std::string, double> language_similarity(std::string_view text,
                                                  const std::vector<LanguageProfile>& profiles);

void to_json(nlohmann::json& j, const LanguageProfile& profile);
void from_json(const nlohmann::json& j, LanguageProfile& profile);

LanguageProfile load_profile(const std::filesystem::path& path);
void save_profile(const LanguageProfile& profile, const std::filesystem::path& path);
/// Every `*.json` profile in `dir`, sorted by language code.
std::vector<LanguageProfile> load_profiles(const std::filesystem::path& dir);
/// Profiles shipped under data/langid/profiles.
const std::vector<LanguageProfile>& bundled_profiles();

using LabeledText = std::pair<std::string, std::string>;

/// `<lang>.txt` files of a directory as (language, file contents), sorted by language.
std::vector<LabeledText> read_seed_dir(const std::filesystem::path& dir);
/// `language<TAB>text` lines; blank lines and `#` comments skipped.
std::vector<LabeledText> read_labeled_tsv(std::istream& in);

struct EvalResult {
    std::size_t total = 0;
    std::size_t correct = 0;
    /// gold -> predicted -> count
    std::map<std::string, std::map<std::string, std::size_t>> confusion;

    double accuracy() const noexcept { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

/// Top-1 accuracy of `profiles` on labeled texts.
EvalResult evaluate(const std::vector<LabeledText>& labeled, const std::vector<LanguageProfile>& profiles);

} // namespace ccurate
