#pragma once

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ccurate {

struct Triple {
    std::string subject_label;
    std::string predicate_id;
    std::string object_label;
    bool subject_is_person = false;
    bool subject_has_encyclopedia_page = false;
};

/// Tab-separated: subject, predicate, object, is_person (0/1), has_page (0/1).
std::vector<Triple> read_triples(std::istream& in);

/// Sentence pattern with exactly one `{s}` and one `{o}` slot.
class Template {
public:
    /// Throws ConfigError unless both slots occur exactly once.
    Template(std::string predicate_id, std::string language, std::string pattern);

    const std::string& predicate_id() const noexcept { return predicate_id_; }
    const std::string& language() const noexcept { return language_; }
    const std::string& pattern() const noexcept { return pattern_; }

    /// Slot substitution; labels are inserted verbatim and never rescanned.
    std::string fill(std::string_view subject, std::string_view object) const;

private:
    std::string predicate_id_;
    std::string language_;
    std::string pattern_;
    std::size_t s_pos_ = 0;
    std::size_t o_pos_ = 0;
};

class TemplateSet {
public:
    /// JSON object: predicate_id -> {language -> pattern}.
    static TemplateSet from_json(const nlohmann::json& j);
    static TemplateSet load(const std::filesystem::path& path);
    static const TemplateSet& bundled();

    void add(Template t);
    const Template* find(std::string_view predicate_id, std::string_view language) const;
    std::size_t size() const noexcept { return templates_.size(); }

private:
    std::map<std::pair<std::string, std::string>, Template> templates_;
};

inline constexpr std::string_view kDefaultSynthLanguage = "nld";

/// Absent when no template exists for the predicate in `language`. The
/// result always ends in sentence-final punctuation.
std::optional<std::string> verbalize(const Triple& triple, const TemplateSet& templates,
                                     std::string_view language = kDefaultSynthLanguage);

/// Drops personal data about people without an encyclopedia page.
bool filter_person_privacy(const Triple& triple) noexcept;
bool filter_trivial(const Triple& triple, const std::set<std::string, std::less<>>& blocklist);

/// One predicate id per line; `#` starts a comment.
std::set<std::string, std::less<>> read_blocklist(std::istream& in);
std::set<std::string, std::less<>> load_blocklist(const std::filesystem::path& path);
const std::set<std::string, std::less<>>& bundled_blocklist();

struct SynthStats {
    std::size_t input = 0;
    std::size_t dropped_privacy = 0;
    std::size_t dropped_trivial = 0;
    std::size_t no_template = 0;
    std::size_t emitted = 0;
};

/// Privacy filter, then triviality filter, then verbalization.
std::vector<std::string> synthesize(const std::vector<Triple>& triples, const TemplateSet& templates,
                                    const std::set<std::string, std::less<>>& blocklist,
                                    std::string_view language = kDefaultSynthLanguage, SynthStats* stats = nullptr);

/// Removes `[lowercase]` markers and leading `hh:mm:ss` / `mm:ss`
/// timestamps. Lines that change have space runs collapsed and are
/// trimmed; other lines are returned untouched. Idempotent.
std::string clean_transcript(std::string_view text);

struct Rewrite {
    std::string text;
    std::string provenance;
};

class Paraphraser {
public:
    virtual ~Paraphraser() = default;
    virtual Rewrite paraphrase(std::string_view text) const = 0;
};

class Translator {
public:
    virtual ~Translator() = default;
    virtual Rewrite translate(std::string_view text, std::string_view source_language,
                              std::string_view target_language) const = 0;
};

/// Returns its input unchanged, tagged "identity".
class IdentityParaphraser final : public Paraphraser {
public:
    Rewrite paraphrase(std::string_view text) const override;
};

class IdentityTranslator final : public Translator {
public:
    Rewrite translate(std::string_view text, std::string_view source_language,
                      std::string_view target_language) const override;
};

} // namespace ccurate
