#pragma once

// Random input generators shared by the unit and acceptance tests.

#include "ccurate/document.hpp"
#include "ccurate/license.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace ccurate::gen {

using Rng = std::mt19937_64;

std::filesystem::path fixtures_dir();

/// Picks uniformly from a non-empty vector.
template <class T>
const T& pick(Rng& rng, const std::vector<T>& items) {
    return items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng)];
}

inline bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }
inline int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// Dutch-looking filler words.
std::string random_words(Rng& rng, int n);

/// Arbitrary Unicode soup: whitespace runs, CR/LF mixes, control bytes,
/// combining marks, invalid UTF-8, blank-line runs.
std::string messy_text(Rng& rng);

/// Random HTML page. With `inject_license_prose`, license names and
/// creativecommons.org URLs appear only inside text nodes.
std::string random_page(Rng& rng, bool inject_license_prose);

/// Valid Dutch IBAN, BSN and phone numbers, plus e-mail and credentialed URLs.
std::string random_iban(Rng& rng, bool spaced);
std::string random_bsn(Rng& rng);
std::string random_phone(Rng& rng);
std::string random_email(Rng& rng);
std::string random_credential_url(Rng& rng);
/// Prose with personal data of every class mixed in, including adjacent
/// and nested-looking matches.
std::string pii_text(Rng& rng);

/// Document with text and a license annotation that has the given best
/// family and location (nullopt: no license).
Document annotated_doc(const std::string& domain, int index, std::uint64_t words, std::optional<CCFamily> family,
                       Location location, bool conflict);

/// Filler text with exactly `words` whitespace tokens.
std::string filler(std::uint64_t words);

/// Seed sentences of one language from the bundled corpora.
const std::vector<std::string>& seed_sentences(const std::string& language);

} // namespace ccurate::gen

namespace ccurate::gen {

/// Empty per-process directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

/// Runs the command-line tool through the shell; returns its exit status.
int run_cli(const std::string& args);

void write_docs_file(const std::filesystem::path& path, const std::vector<Document>& docs);
std::vector<Document> read_docs_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

} // namespace ccurate::gen

namespace ccurate::gen {

/// Independent grep for the personal data the generators inject; returns
/// the first surviving match or an empty string.
std::string surviving_pii(const std::string& s);

} // namespace ccurate::gen

namespace ccurate::gen {

/// Raw documents for end-to-end runs: several paragraphs of seed sentences
/// in a random bundled language, with personal data, exact duplicates and
/// too-short pages mixed in.
std::vector<Document> synthetic_corpus(Rng& rng, std::size_t n, const std::string& collection = "synthetic");

} // namespace ccurate::gen
