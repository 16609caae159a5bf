#include "ccurate/document.hpp"

#include "ccurate/error.hpp"
#include "ccurate/hash.hpp"
#include "ccurate/public_suffix.hpp"
#include "ccurate/text.hpp"
#include "ccurate/url.hpp"

#include <nlohmann/json.hpp>

#include <istream>
#include <ostream>

namespace ccurate {
namespace {

constexpr std::string_view kDimensionNames[] = {
    "min_chars",         "mean_word_length", "frac_duplicate_lines", "frac_chars_in_duplicate_lines",
    "frac_lines_end_punct", "symbol_word_ratio", "frac_alpha_words",  "stopword_hits",
    "top_bigram_frac",   "frac_bullet_lines", "max_line_repetition_run",
};

constexpr std::string_view kStageNames[] = {"raw", "normalized", "scored", "filtered", "postprocessed"};

void hash_field(Sha256& h, std::string_view field) {
    h.update(std::to_string(field.size())).update(":").update(field);
}

} // namespace

std::string_view to_string(QualityDimension dim) noexcept { return kDimensionNames[static_cast<std::size_t>(dim)]; }

std::optional<QualityDimension> quality_dimension_from_string(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kQualityDimensionCount; ++i) {
        if (kDimensionNames[i] == name) {
            return static_cast<QualityDimension>(i);
        }
    }
    return std::nullopt;
}

bool is_fraction(QualityDimension dim) noexcept {
    switch (dim) {
    case QualityDimension::frac_duplicate_lines:
    case QualityDimension::frac_chars_in_duplicate_lines:
    case QualityDimension::frac_lines_end_punct:
    case QualityDimension::frac_alpha_words:
    case QualityDimension::top_bigram_frac:
    case QualityDimension::frac_bullet_lines:
        return true;
    default:
        return false;
    }
}

std::string_view to_string(Stage stage) noexcept { return kStageNames[static_cast<std::size_t>(stage)]; }

std::optional<Stage> stage_from_string(std::string_view name) noexcept {
    for (std::size_t i = 0; i < std::size(kStageNames); ++i) {
        if (kStageNames[i] == name) {
            return static_cast<Stage>(i);
        }
    }
    return std::nullopt;
}

void Document::advance(Stage next) {
    if (next < stage) {
        throw ConflictError("document " + doc_id + ": stage cannot move from " + std::string(to_string(stage)) +
                            " back to " + std::string(to_string(next)));
    }
    stage = next;
}

void Document::set_text(std::string new_text) {
    text = std::move(new_text);
    word_count = text::word_count(text);
}

std::string compute_doc_id(std::string_view collection_id, std::string_view url, std::string_view text) {
    Sha256 h;
    hash_field(h, collection_id);
    hash_field(h, url);
    hash_field(h, text);
    return h.hex_digest();
}

void to_json(nlohmann::json& j, const LanguageScores& s) {
    j = nlohmann::json{{"scores", s.scores}, {"top", s.top}, {"top_score", s.top_score}};
}

void from_json(const nlohmann::json& j, LanguageScores& s) {
    s.scores = j.at("scores").get<std::map<std::string, double>>();
    s.top = j.at("top").get<std::string>();
    s.top_score = j.at("top_score").get<double>();
}

void to_json(nlohmann::json& j, const QualityScores& s) {
    j = nlohmann::json::object();
    for (std::size_t i = 0; i < kQualityDimensionCount; ++i) {
        j[std::string(kDimensionNames[i])] = s.values[i];
    }
}

void from_json(const nlohmann::json& j, QualityScores& s) {
    for (std::size_t i = 0; i < kQualityDimensionCount; ++i) {
        s.values[i] = j.at(std::string(kDimensionNames[i])).get<double>();
    }
}

void to_json(nlohmann::json& j, const Document& d) {
    j = nlohmann::json{{"doc_id", d.doc_id},
                       {"url", d.url},
                       {"domain", d.domain},
                       {"collection_id", d.collection_id},
                       {"text", d.text},
                       {"word_count", d.word_count},
                       {"stage", to_string(d.stage)}};
    if (d.language_scores) {
        j["language_scores"] = *d.language_scores;
    }
    if (d.quality_scores) {
        j["quality_scores"] = *d.quality_scores;
    }
    if (d.license) {
        j["license"] = *d.license;
    }
}

void from_json(const nlohmann::json& j, Document& d) {
    d = Document{};
    d.doc_id = j.at("doc_id").get<std::string>();
    d.url = j.at("url").get<std::string>();
    d.collection_id = j.at("collection_id").get<std::string>();
    d.text = j.at("text").get<std::string>();
    d.word_count = j.contains("word_count") ? j["word_count"].get<std::size_t>() : text::word_count(d.text);
    if (auto it = j.find("domain"); it != j.end() && it->is_string() && !it->get<std::string>().empty()) {
        d.domain = it->get<std::string>();
    } else if (auto url = parse_absolute_url(d.url)) {
        d.domain = PublicSuffixList::bundled().registrable_domain(url->host);
    }
    if (auto it = j.find("stage"); it != j.end()) {
        const auto stage = stage_from_string(it->get<std::string>());
        if (!stage) {
            throw FormatError("unknown stage: " + it->get<std::string>());
        }
        d.stage = *stage;
    }
    if (auto it = j.find("language_scores"); it != j.end() && !it->is_null()) {
        d.language_scores = it->get<LanguageScores>();
    }
    if (auto it = j.find("quality_scores"); it != j.end() && !it->is_null()) {
        d.quality_scores = it->get<QualityScores>();
    }
    if (auto it = j.find("license"); it != j.end() && !it->is_null()) {
        d.license = it->get<LicenseAnnotation>();
    }
}

std::optional<Document> DocumentReader::next() {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (text::trim(line).empty()) {
            continue;
        }
        try {
            return nlohmann::json::parse(line).get<Document>();
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("document line " + std::to_string(line_) + ": " + e.what());
        }
    }
    return std::nullopt;
}

void write_document(std::ostream& out, const Document& doc) {
    out << nlohmann::json(doc).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
}

std::vector<Document> read_documents(std::istream& in) {
    std::vector<Document> docs;
    DocumentReader reader(in);
    while (auto doc = reader.next()) {
        docs.push_back(std::move(*doc));
    }
    return docs;
}

} // namespace ccurate
