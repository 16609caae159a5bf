#include "ccurate/synth.hpp"

#include "ccurate/data_paths.hpp"
#include "ccurate/error.hpp"
#include "ccurate/text.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <istream>

namespace ccurate {
namespace {

std::size_t count_occurrences(std::string_view s, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = s.find(needle); pos != std::string_view::npos; pos = s.find(needle, pos + needle.size())) {
        ++n;
    }
    return n;
}

bool parse_flag(std::string_view field, std::size_t line_no) {
    if (field == "1") {
        return true;
    }
    if (field == "0") {
        return false;
    }
    throw FormatError("triples line " + std::to_string(line_no) + ": flag must be 0 or 1");
}

bool ends_sentence(std::string_view s) {
    return s.ends_with('.') || s.ends_with('!') || s.ends_with('?') || s.ends_with("…");
}

bool is_timestamp_at(std::string_view line, std::size_t& end) {
    // hh:mm:ss or mm:ss, one or two digits in the leading field.
    auto digits = [&](std::size_t pos, std::size_t min, std::size_t max) -> std::size_t {
        std::size_t n = 0;
        while (pos + n < line.size() && n < max && line[pos + n] >= '0' && line[pos + n] <= '9') {
            ++n;
        }
        return n >= min ? n : 0;
    };
    std::size_t pos = 0;
    std::size_t groups = 0;
    std::size_t n = digits(pos, 1, 2);
    if (n == 0) {
        return false;
    }
    pos += n;
    while (groups < 2 && pos < line.size() && line[pos] == ':') {
        const std::size_t d = digits(pos + 1, 2, 2);
        if (d == 0) {
            break;
        }
        pos += 1 + d;
        ++groups;
    }
    if (groups == 0) {
        return false;
    }
    if (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') {
        return false;
    }
    end = pos;
    return true;
}

// Removes markers and a leading timestamp once; returns true if anything changed.
bool strip_once(std::string& line) {
    bool changed = false;
    std::string out;
    out.reserve(line.size());
    for (std::size_t i = 0; i < line.size();) {
        if (line[i] == '[') {
            std::size_t j = i + 1;
            while (j < line.size() && line[j] >= 'a' && line[j] <= 'z') {
                ++j;
            }
            if (j > i + 1 && j < line.size() && line[j] == ']') {
                i = j + 1;
                changed = true;
                continue;
            }
        }
        out.push_back(line[i++]);
    }
    const auto first = out.find_first_not_of(" \t");
    if (first != std::string::npos) {
        std::size_t end = 0;
        if (is_timestamp_at(std::string_view(out).substr(first), end)) {
            out.erase(0, first + end);
            changed = true;
        }
    }
    line = std::move(out);
    return changed;
}

std::string tidy(std::string_view line) {
    std::string out;
    for (char c : line) {
        if (c == ' ' && (out.empty() || out.back() == ' ')) {
            continue;
        }
        out.push_back(c);
    }
    while (!out.empty() && out.back() == ' ') {
        out.pop_back();
    }
    return out;
}

} // namespace

std::vector<Triple> read_triples(std::istream& in) {
    std::vector<Triple> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (text::trim(line).empty() || line.starts_with('#')) {
            continue;
        }
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (;;) {
            const auto tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
            if (tab == std::string::npos) {
                break;
            }
            start = tab + 1;
        }
        if (fields.size() != 5) {
            throw FormatError("triples line " + std::to_string(line_no) + ": expected 5 tab-separated fields");
        }
        if (fields[0].empty() || fields[1].empty() || fields[2].empty()) {
            throw FormatError("triples line " + std::to_string(line_no) + ": empty label or predicate");
        }
        out.push_back({fields[0], fields[1], fields[2], parse_flag(fields[3], line_no), parse_flag(fields[4], line_no)});
    }
    return out;
}

Template::Template(std::string predicate_id, std::string language, std::string pattern)
    : predicate_id_(std::move(predicate_id)), language_(std::move(language)), pattern_(std::move(pattern)) {
    if (count_occurrences(pattern_, "{s}") != 1 || count_occurrences(pattern_, "{o}") != 1) {
        throw ConfigError("template for " + predicate_id_ + "/" + language_ +
                          " must contain exactly one {s} and one {o}: \"" + pattern_ + "\"");
    }
    s_pos_ = pattern_.find("{s}");
    o_pos_ = pattern_.find("{o}");
}

std::string Template::fill(std::string_view subject, std::string_view object) const {
    const bool s_first = s_pos_ < o_pos_;
    const std::size_t a = s_first ? s_pos_ : o_pos_;
    const std::size_t b = s_first ? o_pos_ : s_pos_;
    std::string out = pattern_.substr(0, a);
    out += s_first ? subject : object;
    out += pattern_.substr(a + 3, b - a - 3);
    out += s_first ? object : subject;
    out += pattern_.substr(b + 3);
    return out;
}

TemplateSet TemplateSet::from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ConfigError("templates must be a JSON object keyed by predicate id");
    }
    TemplateSet set;
    for (const auto& [predicate, per_language] : j.items()) {
        if (!per_language.is_object()) {
            throw ConfigError("templates for " + predicate + " must map language to pattern");
        }
        for (const auto& [language, pattern] : per_language.items()) {
            if (!pattern.is_string()) {
                throw ConfigError("template " + predicate + "/" + language + " is not a string");
            }
            set.add(Template(predicate, language, pattern.get<std::string>()));
        }
    }
    return set;
}

TemplateSet TemplateSet::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open templates: " + path.string());
    }
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

const TemplateSet& TemplateSet::bundled() {
    static const TemplateSet set = load(data_dir() / "synth" / "templates.json");
    return set;
}

void TemplateSet::add(Template t) {
    auto key = std::make_pair(t.predicate_id(), t.language());
    templates_.insert_or_assign(std::move(key), std::move(t));
}

const Template* TemplateSet::find(std::string_view predicate_id, std::string_view language) const {
    auto it = templates_.find({std::string(predicate_id), std::string(language)});
    return it == templates_.end() ? nullptr : &it->second;
}

std::optional<std::string> verbalize(const Triple& triple, const TemplateSet& templates, std::string_view language) {
    const Template* t = templates.find(triple.predicate_id, language);
    if (t == nullptr) {
        return std::nullopt;
    }
    std::string sentence = t->fill(triple.subject_label, triple.object_label);
    if (!ends_sentence(sentence)) {
        sentence.push_back('.');
    }
    return sentence;
}

bool filter_person_privacy(const Triple& triple) noexcept {
    return !triple.subject_is_person || triple.subject_has_encyclopedia_page;
}

bool filter_trivial(const Triple& triple, const std::set<std::string, std::less<>>& blocklist) {
    return !blocklist.contains(triple.predicate_id);
}

std::set<std::string, std::less<>> read_blocklist(std::istream& in) {
    std::set<std::string, std::less<>> out;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        const auto id = text::trim(std::string_view(line).substr(0, hash));
        if (!id.empty()) {
            out.emplace(id);
        }
    }
    return out;
}

std::set<std::string, std::less<>> load_blocklist(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open blocklist: " + path.string());
    }
    return read_blocklist(in);
}

const std::set<std::string, std::less<>>& bundled_blocklist() {
    static const auto list = load_blocklist(data_dir() / "synth" / "trivial_predicates.txt");
    return list;
}

std::vector<std::string> synthesize(const std::vector<Triple>& triples, const TemplateSet& templates,
                                    const std::set<std::string, std::less<>>& blocklist, std::string_view language,
                                    SynthStats* stats) {
    SynthStats local;
    std::vector<std::string> out;
    for (const auto& t : triples) {
        ++local.input;
        if (!filter_person_privacy(t)) {
            ++local.dropped_privacy;
            continue;
        }
        if (!filter_trivial(t, blocklist)) {
            ++local.dropped_trivial;
            continue;
        }
        auto sentence = verbalize(t, templates, language);
        if (!sentence) {
            ++local.no_template;
            continue;
        }
        out.push_back(std::move(*sentence));
        ++local.emitted;
    }
    if (stats != nullptr) {
        *stats = local;
    }
    return out;
}

std::string clean_transcript(std::string_view input) {
    std::string out;
    bool first = true;
    for (auto raw : text::split_lines(input)) {
        std::string line(raw);
        bool changed = false;
        while (strip_once(line)) {
            changed = true;
        }
        if (!first) {
            out.push_back('\n');
        }
        first = false;
        out += changed ? tidy(line) : std::string(raw);
    }
    return out;
}

Rewrite IdentityParaphraser::paraphrase(std::string_view text) const { return {std::string(text), "identity"}; }

Rewrite IdentityTranslator::translate(std::string_view text, std::string_view, std::string_view) const {
    return {std::string(text), "identity"};
}

} // namespace ccurate
