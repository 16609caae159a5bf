#include "ccurate/langid.hpp"

#include "ccurate/data_paths.hpp"
#include "ccurate/error.hpp"
#include "ccurate/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>

namespace ccurate {
namespace {

void count_word(const std::u32string& padded, std::array<std::map<std::string, double>, kMaxNgram>& counts) {
    for (int n = 1; n <= kMaxNgram; ++n) {
        if (padded.size() < static_cast<std::size_t>(n)) {
            continue;
        }
        for (std::size_t i = 0; i + n <= padded.size(); ++i) {
            if (n == 1 && padded[i] == U' ') {
                continue;
            }
            std::string gram;
            for (std::size_t k = i; k < i + static_cast<std::size_t>(n); ++k) {
                text::append_utf8(gram, padded[k]);
            }
            counts[n - 1][gram] += 1.0;
        }
    }
}

double norm(const std::map<std::string, double>& v) {
    double s = 0.0;
    for (const auto& [_, x] : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

double cosine(const std::map<std::string, double>& doc, double doc_norm, const std::map<std::string, double>& prof,
              double prof_norm) {
    if (doc_norm == 0.0 || prof_norm == 0.0) {
        return 0.0;
    }
    double dot = 0.0;
    for (const auto& [gram, x] : doc) {
        if (auto it = prof.find(gram); it != prof.end()) {
            dot += x * it->second;
        }
    }
    return std::clamp(dot / (doc_norm * prof_norm), 0.0, 1.0);
}

} // namespace

void LanguageProfile::refresh_norms() {
    for (int n = 0; n < kMaxNgram; ++n) {
        norms[n] = norm(ngrams[n]);
    }
}

std::array<std::map<std::string, double>, kMaxNgram> ngram_counts(std::string_view input) {
    std::array<std::map<std::string, double>, kMaxNgram> counts;
    const std::string lower = text::to_lower(input);
    std::u32string word = U" ";
    for (std::size_t i = 0; i < lower.size();) {
        const char32_t cp = text::next_codepoint(lower, i);
        if (text::is_alpha(cp)) {
            word.push_back(cp);
        } else if (word.size() > 1) {
            word.push_back(U' ');
            count_word(word, counts);
            word = U" ";
        }
    }
    if (word.size() > 1) {
        word.push_back(U' ');
        count_word(word, counts);
    }
    return counts;
}

LanguageProfile train_profile(std::string_view language, const std::vector<std::string>& texts,
                              const TrainOptions& options) {
    std::size_t chars = 0;
    std::array<std::map<std::string, double>, kMaxNgram> totals;
    for (const auto& t : texts) {
        chars += text::codepoint_count(t);
        const auto counts = ngram_counts(t);
        for (int n = 0; n < kMaxNgram; ++n) {
            for (const auto& [gram, c] : counts[n]) {
                totals[n][gram] += c;
            }
        }
    }
    if (chars < options.min_chars) {
        throw ConfigError("insufficient training data for language '" + std::string(language) + "': " +
                          std::to_string(chars) + " characters, need " + std::to_string(options.min_chars));
    }
    if (totals[0].empty()) {
        throw ConfigError("no letters in training data for language '" + std::string(language) + "'");
    }
    LanguageProfile profile;
    profile.language = std::string(language);
    profile.provenance = options.provenance;
    for (int n = 0; n < kMaxNgram; ++n) {
        auto& table = totals[n];
        if (options.max_grams_per_order > 0 && table.size() > options.max_grams_per_order) {
            std::vector<std::pair<std::string, double>> ranked(table.begin(), table.end());
            std::stable_sort(ranked.begin(), ranked.end(),
                             [](const auto& a, const auto& b) { return a.second > b.second; });
            ranked.resize(options.max_grams_per_order);
            table = std::map<std::string, double>(ranked.begin(), ranked.end());
        }
        double sum = 0.0;
        for (const auto& [_, c] : table) {
            sum += c;
        }
        for (auto& [gram, c] : table) {
            profile.ngrams[n][gram] = c / sum;
        }
    }
    profile.refresh_norms();
    return profile;
}

std::vector<LanguageProfile> train_profiles(const std::vector<std::pair<std::string, std::string>>& labeled,
                                            const TrainOptions& options) {
    std::map<std::string, std::vector<std::string>> by_language;
    for (const auto& [language, sample] : labeled) {
        by_language[language].push_back(sample);
    }
    std::vector<LanguageProfile> profiles;
    for (const auto& [language, samples] : by_language) {
        profiles.push_back(train_profile(language, samples, options));
    }
    return profiles;
}

std::map<std::string, double> language_similarity(std::string_view input,
                                                  const std::vector<LanguageProfile>& profiles) {
    const auto counts = ngram_counts(input);
    std::array<double, kMaxNgram> doc_norms{};
    for (int n = 0; n < kMaxNgram; ++n) {
        doc_norms[n] = norm(counts[n]);
    }
    std::map<std::string, double> sims;
    for (const auto& profile : profiles) {
        double total = 0.0;
        for (int n = 0; n < kMaxNgram; ++n) {
            total += cosine(counts[n], doc_norms[n], profile.ngrams[n], profile.norms[n]);
        }
        sims[profile.language] = total / kMaxNgram;
    }
    return sims;
}

LanguageScores score_language(std::string_view input, const std::vector<LanguageProfile>& profiles) {
    if (profiles.empty()) {
        throw ConfigError("score_language needs at least one profile");
    }
    LanguageScores result;
    const auto sims = language_similarity(input, profiles);
    // Text without letters has zero similarity everywhere, hence the uniform
    // distribution. Iterating the sorted map keeps the sum order independent
    // of profile order.
    double total = 0.0;
    for (const auto& [language, sim] : sims) {
        const double e = std::exp(sim);
        result.scores[language] = e;
        total += e;
    }
    for (auto& [language, score] : result.scores) {
        score /= total;
        if (result.top.empty() || score > result.top_score) {
            result.top = language;
            result.top_score = score;
        }
    }
    return result;
}

void to_json(nlohmann::json& j, const LanguageProfile& p) {
    j = nlohmann::json{{"format", "ccurate-language-profile"}, {"version", 1}, {"language", p.language},
                       {"provenance", p.provenance}};
    nlohmann::json grams = nlohmann::json::object();
    for (int n = 0; n < kMaxNgram; ++n) {
        grams[std::to_string(n + 1)] = p.ngrams[n];
    }
    j["ngrams"] = std::move(grams);
}

void from_json(const nlohmann::json& j, LanguageProfile& p) {
    if (j.value("format", std::string{}) != "ccurate-language-profile" || j.value("version", 0) != 1) {
        throw FormatError("not a version-1 language profile");
    }
    p.language = j.at("language").get<std::string>();
    p.provenance = j.value("provenance", std::string{});
    for (int n = 0; n < kMaxNgram; ++n) {
        p.ngrams[n] = j.at("ngrams").at(std::to_string(n + 1)).get<std::map<std::string, double>>();
    }
    if (p.ngrams[0].empty()) {
        throw FormatError("language profile '" + p.language + "' has an empty unigram table");
    }
    p.refresh_norms();
}

LanguageProfile load_profile(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open language profile: " + path.string());
    }
    try {
        return nlohmann::json::parse(in).get<LanguageProfile>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void save_profile(const LanguageProfile& profile, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write language profile: " + path.string());
    }
    out << nlohmann::json(profile).dump(1) << '\n';
}

std::vector<LanguageProfile> load_profiles(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<LanguageProfile> profiles;
    for (const auto& f : files) {
        profiles.push_back(load_profile(f));
    }
    std::sort(profiles.begin(), profiles.end(),
              [](const LanguageProfile& a, const LanguageProfile& b) { return a.language < b.language; });
    if (profiles.empty()) {
        throw ConfigError("no language profiles in " + dir.string());
    }
    return profiles;
}

const std::vector<LanguageProfile>& bundled_profiles() {
    static const std::vector<LanguageProfile> profiles = load_profiles(data_dir() / "langid" / "profiles");
    return profiles;
}

std::vector<LabeledText> read_seed_dir(const std::filesystem::path& dir) {
    std::vector<LabeledText> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".txt") {
            continue;
        }
        std::ifstream in(entry.path(), std::ios::binary);
        if (!in) {
            throw ConfigError("cannot read " + entry.path().string());
        }
        std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        out.emplace_back(entry.path().stem().string(), std::move(body));
    }
    std::sort(out.begin(), out.end());
    if (out.empty()) {
        throw ConfigError("no seed corpora in " + dir.string());
    }
    return out;
}

std::vector<LabeledText> read_labeled_tsv(std::istream& in) {
    std::vector<LabeledText> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) {
            throw FormatError("line " + std::to_string(n) + ": expected language<TAB>text");
        }
        out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
    }
    return out;
}

EvalResult evaluate(const std::vector<LabeledText>& labeled, const std::vector<LanguageProfile>& profiles) {
    EvalResult r;
    for (const auto& [gold, text] : labeled) {
        const auto scores = score_language(text, profiles);
        ++r.total;
        ++r.confusion[gold][scores.top];
        if (scores.top == gold) {
            ++r.correct;
        }
    }
    return r;
}

} // namespace ccurate
