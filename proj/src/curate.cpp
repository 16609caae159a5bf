#include "ccurate/curate.hpp"

#include "ccurate/data_paths.hpp"
#include "ccurate/error.hpp"
#include "ccurate/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

namespace ccurate {
namespace {

bool is_horizontal_space(char32_t cp) { return cp != U'\n' && text::is_white_space(cp); }

// One line with runs of horizontal whitespace collapsed and both ends trimmed.
std::string clean_line(std::string_view line) {
    std::string out;
    out.reserve(line.size());
    bool pending = false;
    for (std::size_t i = 0; i < line.size();) {
        const std::size_t at = i;
        const char32_t cp = text::next_codepoint(line, i);
        if (is_horizontal_space(cp)) {
            pending = !out.empty();
            continue;
        }
        if (text::is_control(cp)) {
            continue;
        }
        if (pending) {
            out.push_back(' ');
            pending = false;
        }
        out.append(line.substr(at, i - at));
    }
    return out;
}

std::vector<std::string_view> nonempty_lines(std::string_view s) {
    std::vector<std::string_view> lines;
    for (auto line : text::split_lines(s)) {
        line = text::trim(line);
        if (!line.empty()) {
            lines.push_back(line);
        }
    }
    return lines;
}

std::string strip_punct_lower(std::string_view word) {
    std::size_t begin = word.size();
    std::size_t end = 0;
    for (std::size_t i = 0; i < word.size();) {
        const std::size_t at = i;
        if (text::is_alnum(text::next_codepoint(word, i))) {
            begin = std::min(begin, at);
            end = i;
        }
    }
    if (begin >= end) {
        return {};
    }
    return text::to_lower(word.substr(begin, end - begin));
}

bool last_char_is_end_punct(std::string_view line) {
    if (line.empty()) {
        return false;
    }
    const char c = line.back();
    if (c == '.' || c == '!' || c == '?' || c == '"') {
        return true;
    }
    return line.ends_with("»");
}

bool is_bullet_line(std::string_view line) {
    return line.starts_with('-') || line.starts_with('*') || line.starts_with("•");
}

std::size_t count_symbols(std::string_view s) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < s.size();) {
        const char32_t cp = text::next_codepoint(s, i);
        if (cp == U'#' || cp == U'{' || cp == U'}' || cp == U'…') {
            ++n;
        }
    }
    return n;
}

double fraction(double num, double den) { return den > 0.0 ? num / den : 0.0; }

bool safe_collection_id(std::string_view id) {
    if (id.empty() || id.front() == '.') {
        return false;
    }
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' || c == '_' ||
               c == '-';
    });
}

nlohmann::json optional_number(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> read_optional_number(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return std::nullopt;
    }
    return j.at(key).get<double>();
}

} // namespace

std::string normalize(std::string_view input) {
    const std::string clean = text::sanitize_utf8(input);
    std::string unified;
    unified.reserve(clean.size());
    for (std::size_t i = 0; i < clean.size(); ++i) {
        if (clean[i] == '\r') {
            unified.push_back('\n');
            if (i + 1 < clean.size() && clean[i + 1] == '\n') {
                ++i;
            }
        } else {
            unified.push_back(clean[i]);
        }
    }

    std::string out;
    out.reserve(unified.size());
    std::size_t blank_run = 0;
    bool first = true;
    auto emit = [&](std::string_view line) {
        if (!first) {
            out.push_back('\n');
        }
        out.append(line);
        first = false;
    };
    auto flush_blanks = [&] {
        const std::size_t keep = blank_run >= 3 ? 1 : blank_run;
        for (std::size_t k = 0; k < keep; ++k) {
            emit("");
        }
        blank_run = 0;
    };
    for (auto raw : text::split_lines(unified)) {
        const std::string line = clean_line(raw);
        if (line.empty()) {
            ++blank_run;
            continue;
        }
        flush_blanks();
        emit(line);
    }
    flush_blanks();
    return text::nfc(out);
}

Stoplists Stoplists::load_dir(const std::filesystem::path& dir) {
    Stoplists lists;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".txt") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        std::ifstream in(f);
        if (!in) {
            throw ConfigError("cannot open stoplist: " + f.string());
        }
        std::set<std::string> words;
        std::string line;
        while (std::getline(in, line)) {
            const auto word = text::trim(line);
            if (!word.empty() && !word.starts_with('#')) {
                words.insert(text::to_lower(word));
            }
        }
        lists.add(f.stem().string(), std::move(words));
    }
    return lists;
}

const Stoplists& Stoplists::bundled() {
    static const Stoplists lists = load_dir(data_dir() / "stopwords");
    return lists;
}

void Stoplists::add(std::string language, std::set<std::string> words) {
    union_.insert(words.begin(), words.end());
    lists_[std::move(language)] = std::move(words);
}

const std::set<std::string>* Stoplists::find(std::string_view language) const {
    auto it = lists_.find(language);
    return it == lists_.end() ? nullptr : &it->second;
}

std::vector<std::string> Stoplists::languages() const {
    std::vector<std::string> out;
    for (const auto& [language, _] : lists_) {
        out.push_back(language);
    }
    return out;
}

QualityScores score_quality(std::string_view input, std::string_view language, const Stoplists& stoplists) {
    using D = QualityDimension;
    QualityScores q;
    q[D::min_chars] = static_cast<double>(text::codepoint_count(input));

    const auto words = text::split_words(input);
    const double n_words = static_cast<double>(words.size());
    if (!words.empty()) {
        std::size_t letters = 0;
        std::size_t alpha_words = 0;
        for (auto w : words) {
            letters += text::codepoint_count(w);
            bool alpha = false;
            for (std::size_t i = 0; i < w.size() && !alpha;) {
                alpha = text::is_alpha(text::next_codepoint(w, i));
            }
            alpha_words += alpha ? 1 : 0;
        }
        q[D::mean_word_length] = static_cast<double>(letters) / n_words;
        q[D::frac_alpha_words] = static_cast<double>(alpha_words) / n_words;
        q[D::symbol_word_ratio] = static_cast<double>(count_symbols(input)) / n_words;

        const std::set<std::string>* stop = stoplists.find(language);
        if (stop == nullptr) {
            stop = &stoplists.all_words();
        }
        std::vector<std::string> lowered;
        lowered.reserve(words.size());
        std::size_t hits = 0;
        for (auto w : words) {
            lowered.push_back(text::to_lower(w));
            if (stop->contains(strip_punct_lower(w))) {
                ++hits;
            }
        }
        q[D::stopword_hits] = static_cast<double>(hits);

        std::map<std::pair<std::string_view, std::string_view>, std::size_t> bigrams;
        std::size_t top = 0;
        for (std::size_t i = 0; i + 1 < lowered.size(); ++i) {
            top = std::max(top, ++bigrams[{lowered[i], lowered[i + 1]}]);
        }
        q[D::top_bigram_frac] = std::min(1.0, static_cast<double>(top) * 2.0 / n_words);
    }

    const auto lines = nonempty_lines(input);
    if (!lines.empty()) {
        const double n_lines = static_cast<double>(lines.size());
        std::unordered_map<std::string_view, std::size_t> seen;
        std::size_t dup_lines = 0;
        std::size_t dup_chars = 0;
        std::size_t line_chars = 0;
        std::size_t end_punct = 0;
        std::size_t bullets = 0;
        std::size_t run = 0;
        std::size_t max_run = 0;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            const auto line = lines[i];
            const std::size_t chars = text::codepoint_count(line);
            line_chars += chars;
            if (seen[line]++ > 0) {
                ++dup_lines;
                dup_chars += chars;
            }
            end_punct += last_char_is_end_punct(line) ? 1 : 0;
            bullets += is_bullet_line(line) ? 1 : 0;
            run = (i > 0 && lines[i - 1] == line) ? run + 1 : 1;
            max_run = std::max(max_run, run);
        }
        q[D::frac_duplicate_lines] = static_cast<double>(dup_lines) / n_lines;
        q[D::frac_chars_in_duplicate_lines] = fraction(static_cast<double>(dup_chars), static_cast<double>(line_chars));
        q[D::frac_lines_end_punct] = static_cast<double>(end_punct) / n_lines;
        q[D::frac_bullet_lines] = static_cast<double>(bullets) / n_lines;
        q[D::max_line_repetition_run] = static_cast<double>(max_run);
    }
    return q;
}

void ThresholdConfig::validate() const {
    for (const auto& [name, bound] : bounds) {
        if (!quality_dimension_from_string(name)) {
            throw ConfigError("unknown quality dimension in thresholds: '" + name + "'");
        }
        if (bound.lower && bound.upper && *bound.lower > *bound.upper) {
            throw ConfigError("lower bound exceeds upper bound for '" + name + "'");
        }
        if ((bound.lower && !std::isfinite(*bound.lower)) || (bound.upper && !std::isfinite(*bound.upper))) {
            throw ConfigError("non-finite bound for '" + name + "'");
        }
    }
    for (const auto& [language, min] : language_min) {
        if (!std::isfinite(min)) {
            throw ConfigError("non-finite language minimum for '" + language + "'");
        }
    }
    if (version < 0) {
        throw ConfigError("threshold config version must be non-negative");
    }
}

ThresholdConfig reference_config(std::string collection_id) {
    ThresholdConfig cfg;
    cfg.collection_id = std::move(collection_id);
    cfg.bounds = {
        {"min_chars", {200.0, std::nullopt}},
        {"mean_word_length", {3.0, 10.0}},
        {"frac_duplicate_lines", {std::nullopt, 0.3}},
        {"frac_chars_in_duplicate_lines", {std::nullopt, 0.2}},
        {"frac_lines_end_punct", {0.1, std::nullopt}},
        {"symbol_word_ratio", {std::nullopt, 0.1}},
        {"frac_alpha_words", {0.8, std::nullopt}},
        {"stopword_hits", {2.0, std::nullopt}},
        {"top_bigram_frac", {std::nullopt, 0.2}},
        {"frac_bullet_lines", {std::nullopt, 0.9}},
        {"max_line_repetition_run", {std::nullopt, 3.0}},
    };
    cfg.author_note = "reference defaults";
    return cfg;
}

FilterVerdict apply_thresholds(const Document& doc, const ThresholdConfig& cfg) {
    cfg.validate();
    if (!doc.quality_scores || !doc.language_scores) {
        throw FormatError("document " + doc.doc_id + " lacks quality or language scores");
    }
    FilterVerdict verdict;
    for (std::size_t i = 0; i < kQualityDimensionCount; ++i) {
        const auto dim = static_cast<QualityDimension>(i);
        auto it = cfg.bounds.find(std::string(to_string(dim)));
        if (it != cfg.bounds.end() && !it->second.contains((*doc.quality_scores)[dim])) {
            verdict.failed_dimensions.emplace_back(to_string(dim));
        }
    }
    const auto& lang = *doc.language_scores;
    if (!cfg.target_languages.empty() && !cfg.target_languages.contains(lang.top)) {
        verdict.failed_dimensions.emplace_back("language");
    }
    if (auto it = cfg.language_min.find(lang.top); it != cfg.language_min.end() && lang.top_score < it->second) {
        verdict.failed_dimensions.emplace_back("language_score");
    }
    verdict.kept = verdict.failed_dimensions.empty();
    return verdict;
}

bool is_bucket_dimension(std::string_view dimension) noexcept {
    return dimension == "top_score" || quality_dimension_from_string(dimension).has_value();
}

double dimension_value(const Document& doc, std::string_view dimension) {
    if (dimension == "top_score") {
        if (!doc.language_scores) {
            throw FormatError("document " + doc.doc_id + " has no language scores");
        }
        return doc.language_scores->top_score;
    }
    const auto dim = quality_dimension_from_string(dimension);
    if (!dim) {
        throw ConfigError("unknown dimension: '" + std::string(dimension) + "'");
    }
    if (!doc.quality_scores) {
        throw FormatError("document " + doc.doc_id + " has no quality scores");
    }
    return (*doc.quality_scores)[*dim];
}

std::size_t bucket_index(const std::vector<double>& edges, double value) {
    return static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), value) - edges.begin());
}

BucketReport bucketize(const std::vector<Document>& sample, std::string_view dimension,
                       const std::vector<double>& edges, std::string collection_id, std::size_t max_samples) {
    if (!is_bucket_dimension(dimension)) {
        throw ConfigError("unknown dimension: '" + std::string(dimension) + "'");
    }
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (!std::isfinite(edges[i]) || (i > 0 && edges[i] <= edges[i - 1])) {
            throw ConfigError("bucket edges must be finite and strictly increasing");
        }
    }
    BucketReport report;
    report.collection_id = std::move(collection_id);
    report.dimension = std::string(dimension);
    report.edges = edges;
    report.sample_size = sample.size();
    report.buckets.resize(edges.size() + 1);
    for (std::size_t b = 0; b < report.buckets.size(); ++b) {
        if (b > 0) {
            report.buckets[b].lower = edges[b - 1];
        }
        if (b < edges.size()) {
            report.buckets[b].upper = edges[b];
        }
    }

    struct Placed {
        double distance;
        const Document* doc;
        double value;
    };
    std::vector<std::vector<Placed>> members(report.buckets.size());
    for (const auto& doc : sample) {
        const double v = dimension_value(doc, dimension);
        if (std::isnan(v)) {
            throw FormatError("document " + doc.doc_id + " has a NaN score for " + report.dimension);
        }
        const std::size_t b = bucket_index(edges, v);
        const auto& bucket = report.buckets[b];
        double distance = 0.0;
        if (bucket.lower && bucket.upper) {
            distance = std::min(v - *bucket.lower, *bucket.upper - v);
        } else if (bucket.lower) {
            distance = v - *bucket.lower;
        } else if (bucket.upper) {
            distance = *bucket.upper - v;
        }
        members[b].push_back({distance, &doc, v});
        ++report.buckets[b].count;
    }
    for (std::size_t b = 0; b < members.size(); ++b) {
        auto& m = members[b];
        std::sort(m.begin(), m.end(), [](const Placed& x, const Placed& y) {
            if (x.distance != y.distance) {
                return x.distance < y.distance;
            }
            return x.doc->doc_id < y.doc->doc_id;
        });
        const std::size_t take = std::min(max_samples, m.size());
        for (std::size_t k = 0; k < take; ++k) {
            report.buckets[b].samples.push_back(
                {m[k].doc->doc_id, m[k].value,
                 text::truncate_codepoints(text::collapse_whitespace(m[k].doc->text), kExcerptCodepoints)});
        }
    }
    return report;
}

ConfigStore::ConfigStore(std::filesystem::path root) : root_(std::move(root)) {}

std::filesystem::path ConfigStore::path_for(std::string_view collection_id) const {
    if (!safe_collection_id(collection_id)) {
        throw ConfigError("invalid collection id: '" + std::string(collection_id) + "'");
    }
    return root_ / (std::string(collection_id) + ".json");
}

std::optional<ThresholdConfig> ConfigStore::load(std::string_view collection_id) const {
    const auto path = path_for(collection_id);
    if (!std::filesystem::exists(path)) {
        return std::nullopt;
    }
    return load_threshold_config(path);
}

void ConfigStore::save(const ThresholdConfig& cfg) {
    cfg.validate();
    const auto path = path_for(cfg.collection_id);
    if (auto current = load(cfg.collection_id); current && cfg.version <= current->version) {
        throw ConflictError("threshold config version " + std::to_string(cfg.version) +
                            " does not exceed stored version " + std::to_string(current->version));
    }
    std::filesystem::create_directories(root_);
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ConfigError("cannot write " + tmp.string());
        }
        out << nlohmann::json(cfg).dump(2) << '\n';
        if (!out) {
            throw ConfigError("write failed: " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

ThresholdConfig load_threshold_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open threshold config: " + path.string());
    }
    ThresholdConfig cfg;
    try {
        cfg = nlohmann::json::parse(in).get<ThresholdConfig>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    cfg.validate();
    return cfg;
}

void to_json(nlohmann::json& j, const Bound& bound) {
    j = nlohmann::json{{"lower", optional_number(bound.lower)}, {"upper", optional_number(bound.upper)}};
}

void from_json(const nlohmann::json& j, Bound& bound) {
    bound.lower = read_optional_number(j, "lower");
    bound.upper = read_optional_number(j, "upper");
}

void to_json(nlohmann::json& j, const ThresholdConfig& cfg) {
    j = nlohmann::json{{"collection_id", cfg.collection_id},
                       {"version", cfg.version},
                       {"author_note", cfg.author_note},
                       {"bounds", cfg.bounds},
                       {"language_min", cfg.language_min},
                       {"target_languages", cfg.target_languages}};
}

void from_json(const nlohmann::json& j, ThresholdConfig& cfg) {
    cfg.collection_id = j.at("collection_id").get<std::string>();
    cfg.version = j.value("version", 0);
    cfg.author_note = j.value("author_note", std::string{});
    cfg.bounds = j.value("bounds", std::map<std::string, Bound>{});
    cfg.language_min = j.value("language_min", std::map<std::string, double>{});
    cfg.target_languages = j.value("target_languages", std::set<std::string>{});
}

void to_json(nlohmann::json& j, const FilterVerdict& verdict) {
    j = nlohmann::json{{"kept", verdict.kept}, {"failed_dimensions", verdict.failed_dimensions}};
}

void to_json(nlohmann::json& j, const BucketReport& report) {
    nlohmann::json buckets = nlohmann::json::array();
    for (const auto& b : report.buckets) {
        nlohmann::json samples = nlohmann::json::array();
        for (const auto& s : b.samples) {
            samples.push_back({{"doc_id", s.doc_id}, {"score", s.score}, {"excerpt", s.excerpt}});
        }
        buckets.push_back({{"lower", optional_number(b.lower)},
                           {"upper", optional_number(b.upper)},
                           {"count", b.count},
                           {"samples", std::move(samples)}});
    }
    j = nlohmann::json{{"collection_id", report.collection_id},
                       {"dimension", report.dimension},
                       {"edges", report.edges},
                       {"sample_size", report.sample_size},
                       {"buckets", std::move(buckets)}};
}

void from_json(const nlohmann::json& j, BucketReport& report) {
    report.collection_id = j.value("collection_id", std::string{});
    report.dimension = j.at("dimension").get<std::string>();
    report.edges = j.at("edges").get<std::vector<double>>();
    report.sample_size = j.at("sample_size").get<std::size_t>();
    report.buckets.clear();
    for (const auto& jb : j.at("buckets")) {
        Bucket b;
        b.lower = read_optional_number(jb, "lower");
        b.upper = read_optional_number(jb, "upper");
        b.count = jb.at("count").get<std::size_t>();
        for (const auto& js : jb.at("samples")) {
            b.samples.push_back(
                {js.at("doc_id").get<std::string>(), js.at("score").get<double>(), js.at("excerpt").get<std::string>()});
        }
        report.buckets.push_back(std::move(b));
    }
}

} // namespace ccurate
