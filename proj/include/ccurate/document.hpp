#pragma once

#include "ccurate/license.hpp"

#include <nlohmann/json_fwd.hpp>

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ccurate {

/// Normalised distribution over language codes.
struct LanguageScores {
    std::map<std::string, double> scores;
    std::string top;
    double top_score = 0.0;
};

enum class QualityDimension {
    min_chars,
    mean_word_length,
    frac_duplicate_lines,
    frac_chars_in_duplicate_lines,
    frac_lines_end_punct,
    symbol_word_ratio,
    frac_alpha_words,
    stopword_hits,
    top_bigram_frac,
    frac_bullet_lines,
    max_line_repetition_run,
};

inline constexpr std::size_t kQualityDimensionCount = 11;

std::string_view to_string(QualityDimension dim) noexcept;
std::optional<QualityDimension> quality_dimension_from_string(std::string_view name) noexcept;
/// True for dimensions whose values are fractions in [0, 1].
bool is_fraction(QualityDimension dim) noexcept;

struct QualityScores {
    std::array<double, kQualityDimensionCount> values{};

    double operator[](QualityDimension dim) const noexcept { return values[static_cast<std::size_t>(dim)]; }
    double& operator[](QualityDimension dim) noexcept { return values[static_cast<std::size_t>(dim)]; }
    bool operator==(const QualityScores&) const = default;
};

enum class Stage { raw, normalized, scored, filtered, postprocessed };

std::string_view to_string(Stage stage) noexcept;
std::optional<Stage> stage_from_string(std::string_view name) noexcept;

struct Document {
    std::string doc_id;
    std::string url;
    std::string domain;
    std::string collection_id;
    std::string text;
    std::size_t word_count = 0;
    std::optional<LanguageScores> language_scores;
    std::optional<QualityScores> quality_scores;
    std::optional<LicenseAnnotation> license;
    Stage stage = Stage::raw;

    /// Moves the document forward; going backwards throws ConflictError.
    void advance(Stage next);
    /// Replaces the text and refreshes word_count.
    void set_text(std::string new_text);
};

/// Lowercase hex SHA-256 over (collection_id, url, text), length-prefixed.
std::string compute_doc_id(std::string_view collection_id, std::string_view url, std::string_view text);

void to_json(nlohmann::json& j, const LanguageScores& scores);
void from_json(const nlohmann::json& j, LanguageScores& scores);
void to_json(nlohmann::json& j, const QualityScores& scores);
void from_json(const nlohmann::json& j, QualityScores& scores);
void to_json(nlohmann::json& j, const Document& doc);
void from_json(const nlohmann::json& j, Document& doc);

/// Reads one document per line. Missing `domain` and `word_count` are derived.
class DocumentReader {
public:
    explicit DocumentReader(std::istream& in) : in_(in) {}
    std::optional<Document> next();
    std::size_t line_number() const noexcept { return line_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
};

void write_document(std::ostream& out, const Document& doc);
std::vector<Document> read_documents(std::istream& in);

} // namespace ccurate
