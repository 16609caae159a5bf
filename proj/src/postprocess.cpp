#include "ccurate/postprocess.hpp"

#include "ccurate/curate.hpp"
#include "ccurate/error.hpp"
#include "ccurate/hash.hpp"
#include "ccurate/sampling.hpp"
#include "ccurate/text.hpp"

#include <boost/regex.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <limits>
#include <unordered_map>

namespace ccurate {
namespace {

struct Pattern {
    PiiClass cls;
    boost::regex re;
    int group;
};

const std::vector<Pattern>& patterns() {
    static const std::vector<Pattern> p = {
        {PiiClass::url_credentials,
         boost::regex(R"(([A-Za-z][A-Za-z0-9+.\-]*://)([^\s/?#@\[\]:]+(?::[^\s/?#@\[\]]*)?@))"), 2},
        // The top-level label takes any trailing alphanumerics, so digits glued
        // to an address go with it instead of leaving a partial match.
        {PiiClass::email,
         boost::regex(R"((?<![A-Za-z0-9._%+\-])[A-Za-z0-9._%+\-]+@[A-Za-z0-9](?:[A-Za-z0-9\-]*[A-Za-z0-9])?)"
                      R"((?:\.[A-Za-z0-9](?:[A-Za-z0-9\-]*[A-Za-z0-9])?)*\.[A-Za-z](?:[A-Za-z0-9\-]*[A-Za-z0-9])?)"),
         0},
        {PiiClass::iban, boost::regex(R"((?<![A-Za-z0-9])[A-Z]{2}[0-9]{2}(?: ?[A-Z0-9]{4}){2,7}(?: ?[A-Z0-9]{1,3})?(?![A-Za-z0-9]))"), 0},
        {PiiClass::phone,
         boost::regex(R"((?<![A-Za-z0-9+])(?:\+[1-9][0-9]{0,2}(?:[ \-]?\(0\))?(?:[ \-]?[0-9]){7,12})"
                      R"(|0(?:6[ \-]?[0-9]{8}|[1-9][0-9][ \-]?[0-9]{3}[ \-]?[0-9]{4}|[1-9][0-9][ \-]?[0-9]{7})"
                      R"(|[1-9][0-9]{2}[ \-]?[0-9]{6}))(?![A-Za-z0-9]))"),
         0},
        {PiiClass::bsn, boost::regex(R"((?<![A-Za-z0-9.])[0-9]{9}(?![A-Za-z0-9]))"), 0},
    };
    return p;
}

bool validate(PiiClass cls, std::string_view span) {
    switch (cls) {
    case PiiClass::iban:
        return iban_checksum_ok(span);
    case PiiClass::bsn:
        return bsn_checksum_ok(span);
    default:
        return true;
    }
}

int priority(PiiClass cls) {
    return static_cast<int>(cls);
}

// The scrubbed text as a sequence of untouched original spans and
// inserted placeholders, so edits stay expressible in original offsets
// however many passes run.
struct Piece {
    bool original = true;
    std::size_t begin = 0;
    std::size_t end = 0;
    std::string inserted;

    std::size_t size() const { return original ? end - begin : inserted.size(); }
};

std::string flatten(std::string_view source, const std::vector<Piece>& pieces) {
    std::string out;
    for (const auto& p : pieces) {
        if (p.original) {
            out.append(source.substr(p.begin, p.end - p.begin));
        } else {
            out += p.inserted;
        }
    }
    return out;
}

Piece slice(const Piece& p, std::size_t from, std::size_t to) {
    if (p.original) {
        return {true, p.begin + from, p.begin + to, {}};
    }
    return {false, 0, 0, p.inserted.substr(from, to - from)};
}

// Replaces flattened ranges (sorted, non-overlapping, non-empty) with placeholders.
std::vector<Piece> replace_ranges(const std::vector<Piece>& pieces, const std::vector<PiiMatch>& matches) {
    std::vector<Piece> out;
    std::size_t pos = 0;
    std::size_t m = 0;
    bool emitted = false;
    for (const auto& p : pieces) {
        const std::size_t start = pos;
        const std::size_t stop = pos + p.size();
        std::size_t cursor = start;
        while (cursor < stop) {
            if (m < matches.size() && matches[m].begin <= cursor) {
                if (!emitted) {
                    out.push_back({false, 0, 0, placeholder(matches[m].cls)});
                    emitted = true;
                }
                cursor = std::min(stop, matches[m].end);
                if (cursor == matches[m].end) {
                    ++m;
                    emitted = false;
                }
                continue;
            }
            const std::size_t next = (m < matches.size() && matches[m].begin < stop) ? matches[m].begin : stop;
            out.push_back(slice(p, cursor - start, next - start));
            cursor = next;
        }
        pos = stop;
    }
    return out;
}

std::vector<Edit> edits_from(std::string_view source, const std::vector<Piece>& pieces) {
    std::vector<Edit> edits;
    std::size_t orig_pos = 0;
    std::string pending;
    bool open = false;
    for (const auto& p : pieces) {
        if (p.original) {
            if (open || p.begin != orig_pos) {
                edits.push_back({orig_pos, p.begin, std::move(pending)});
                pending.clear();
                open = false;
            }
            orig_pos = p.end;
        } else {
            pending += p.inserted;
            open = true;
        }
    }
    if (open || orig_pos != source.size()) {
        edits.push_back({orig_pos, source.size(), std::move(pending)});
    }
    return edits;
}

bool has_residual_risk(std::string_view s) {
    if (s.find('@') != std::string_view::npos) {
        return true;
    }
    std::size_t run = 0;
    for (char c : s) {
        run = (c >= '0' && c <= '9') ? run + 1 : 0;
        if (run >= 9) {
            return true;
        }
    }
    return false;
}

std::vector<std::pair<std::string, std::size_t>> word_tokens(std::string_view s) {
    std::vector<std::pair<std::string, std::size_t>> out;
    std::size_t start = std::string_view::npos;
    for (std::size_t i = 0; i < s.size();) {
        const std::size_t at = i;
        const char32_t cp = text::next_codepoint(s, i);
        if (text::is_alnum(cp)) {
            if (start == std::string_view::npos) {
                start = at;
            }
        } else if (start != std::string_view::npos) {
            out.emplace_back(text::to_lower(s.substr(start, at - start)), start);
            start = std::string_view::npos;
        }
    }
    if (start != std::string_view::npos) {
        out.emplace_back(text::to_lower(s.substr(start)), start);
    }
    return out;
}

std::string normalize_term(std::string_view term) {
    std::string out;
    for (const auto& [w, _] : word_tokens(term)) {
        if (!out.empty()) {
            out.push_back(' ');
        }
        out += w;
    }
    return out;
}

std::size_t utf8_floor(std::string_view s, std::size_t pos) {
    while (pos > 0 && pos < s.size() && (static_cast<unsigned char>(s[pos]) & 0xC0) == 0x80) {
        --pos;
    }
    return pos;
}

std::string classes_in(std::string_view replacement) {
    std::string out;
    std::size_t pos = 0;
    while ((pos = replacement.find("[PII:", pos)) != std::string_view::npos) {
        const auto close = replacement.find(']', pos);
        if (close == std::string_view::npos) {
            break;
        }
        if (!out.empty()) {
            out.push_back('+');
        }
        out.append(replacement.substr(pos + 5, close - pos - 5));
        pos = close + 1;
    }
    return out;
}

} // namespace

std::string_view to_string(PiiClass cls) noexcept {
    switch (cls) {
    case PiiClass::url_credentials:
        return "url_credentials";
    case PiiClass::email:
        return "email";
    case PiiClass::iban:
        return "iban";
    case PiiClass::phone:
        return "phone";
    case PiiClass::bsn:
        return "bsn";
    }
    return "email";
}

std::string placeholder(PiiClass cls) { return "[PII:" + std::string(to_string(cls)) + "]"; }

bool iban_checksum_ok(std::string_view raw) {
    std::string iban;
    for (char c : raw) {
        if (c != ' ') {
            iban.push_back(c);
        }
    }
    if (iban.size() < 15 || iban.size() > 34) {
        return false;
    }
    const std::string rotated = iban.substr(4) + iban.substr(0, 4);
    unsigned remainder = 0;
    for (char c : rotated) {
        if (c >= '0' && c <= '9') {
            remainder = (remainder * 10 + static_cast<unsigned>(c - '0')) % 97;
        } else if (c >= 'A' && c <= 'Z') {
            const unsigned v = static_cast<unsigned>(c - 'A') + 10;
            remainder = (remainder * 100 + v) % 97;
        } else {
            return false;
        }
    }
    return remainder == 1;
}

bool bsn_checksum_ok(std::string_view digits) {
    if (digits.size() != 9 || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        return false;
    }
    if (digits == "000000000") {
        return false;
    }
    long sum = 0;
    for (int i = 0; i < 8; ++i) {
        sum += (9 - i) * (digits[i] - '0');
    }
    sum -= digits[8] - '0';
    return sum % 11 == 0;
}

std::vector<PiiMatch> find_pii(std::string_view input) {
    std::vector<PiiMatch> all;
    for (const auto& p : patterns()) {
        boost::cregex_iterator it(input.data(), input.data() + input.size(), p.re);
        for (; it != boost::cregex_iterator(); ++it) {
            const auto& m = (*it)[p.group];
            const auto begin = static_cast<std::size_t>(m.first - input.data());
            const auto end = static_cast<std::size_t>(m.second - input.data());
            if (end > begin && validate(p.cls, input.substr(begin, end - begin))) {
                all.push_back({p.cls, begin, end});
            }
        }
    }
    std::sort(all.begin(), all.end(), [](const PiiMatch& a, const PiiMatch& b) {
        if (a.begin != b.begin) {
            return a.begin < b.begin;
        }
        if (a.end != b.end) {
            return a.end > b.end;
        }
        return priority(a.cls) < priority(b.cls);
    });
    std::vector<PiiMatch> chosen;
    std::size_t covered = 0;
    for (const auto& m : all) {
        if (m.begin >= covered) {
            chosen.push_back(m);
            covered = m.end;
        }
    }
    return chosen;
}

ScrubResult scrub_pii(std::string_view input) {
    ScrubResult result;
    std::vector<Piece> pieces = {{true, 0, input.size(), {}}};
    if (input.empty()) {
        pieces.clear();
    }
    std::string current(input);
    for (;;) {
        const auto matches = find_pii(current);
        if (matches.empty()) {
            break;
        }
        for (const auto& m : matches) {
            ++result.report.replacements[std::string(to_string(m.cls))];
        }
        pieces = replace_ranges(pieces, matches);
        current = flatten(input, pieces);
    }
    result.text = std::move(current);
    result.edits = edits_from(input, pieces);
    result.report.residual_risk_flag = has_residual_risk(result.text);
    return result;
}

std::string apply_edits(std::string_view original, const std::vector<Edit>& edits) {
    std::string out;
    std::size_t pos = 0;
    for (const auto& e : edits) {
        if (e.begin < pos || e.end < e.begin || e.end > original.size()) {
            throw FormatError("edits are not sorted and non-overlapping");
        }
        out.append(original.substr(pos, e.begin - pos));
        out += e.replacement;
        pos = e.end;
    }
    out.append(original.substr(pos));
    return out;
}

std::string_view to_string(Severity severity) noexcept {
    switch (severity) {
    case Severity::none:
        return "none";
    case Severity::review:
        return "review";
    case Severity::drop:
        return "drop";
    }
    return "none";
}

std::optional<Severity> severity_from_string(std::string_view name) noexcept {
    for (auto s : {Severity::none, Severity::review, Severity::drop}) {
        if (to_string(s) == name) {
            return s;
        }
    }
    return std::nullopt;
}

Wordlist Wordlist::parse(std::istream& in) {
    Wordlist list;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto trimmed = text::trim(line);
        if (trimmed.empty() || trimmed.starts_with('#')) {
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ConfigError("wordlist line " + std::to_string(line_no) + ": expected term<TAB>severity");
        }
        const auto severity = severity_from_string(text::trim(std::string_view(line).substr(tab + 1)));
        if (!severity || *severity == Severity::none) {
            throw ConfigError("wordlist line " + std::to_string(line_no) + ": severity must be review or drop");
        }
        list.add(std::string_view(line).substr(0, tab), *severity);
    }
    return list;
}

Wordlist Wordlist::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open wordlist: " + path.string());
    }
    return parse(in);
}

void Wordlist::add(std::string_view term, Severity severity) {
    const std::string key = normalize_term(term);
    if (key.empty()) {
        throw ConfigError("wordlist term has no letters or digits: '" + std::string(term) + "'");
    }
    auto& slot = terms_[key];
    slot = std::max(slot, severity);
    max_words_ = std::max<std::size_t>(max_words_, std::count(key.begin(), key.end(), ' ') + 1);
}

const Severity* Wordlist::find(const std::string& normalized_term) const {
    auto it = terms_.find(normalized_term);
    return it == terms_.end() ? nullptr : &it->second;
}

HarmResult flag_harmful(std::string_view input, const Wordlist& wordlist) {
    if (wordlist.empty()) {
        throw ConfigError("harmful-language wordlist is empty");
    }
    HarmResult result;
    const auto tokens = word_tokens(input);
    for (std::size_t i = 0; i < tokens.size();) {
        const std::size_t longest = std::min(wordlist.max_words(), tokens.size() - i);
        std::size_t matched = 0;
        for (std::size_t len = longest; len >= 1 && matched == 0; --len) {
            std::string key = tokens[i].first;
            for (std::size_t k = 1; k < len; ++k) {
                key += ' ';
                key += tokens[i + k].first;
            }
            if (const Severity* s = wordlist.find(key)) {
                result.hits.push_back({key, tokens[i].second, *s});
                result.severity = std::max(result.severity, *s);
                matched = len;
            }
        }
        i += matched > 0 ? matched : 1;
    }
    return result;
}

std::vector<std::uint64_t> shingle_hashes(std::string_view input, std::size_t shingle_words) {
    if (shingle_words == 0) {
        throw ConfigError("shingle size must be at least 1");
    }
    const std::string lowered = text::to_lower(input);
    const auto words = text::split_words(lowered);
    std::vector<std::uint64_t> out;
    if (words.empty()) {
        return out;
    }
    const std::size_t width = std::min(shingle_words, words.size());
    for (std::size_t i = 0; i + width <= words.size(); ++i) {
        std::string shingle(words[i]);
        for (std::size_t k = 1; k < width; ++k) {
            shingle += ' ';
            shingle += words[i + k];
        }
        out.push_back(fnv1a64(shingle));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::uint64_t> minhash_signature(const std::vector<std::uint64_t>& shingles, const DedupOptions& options) {
    std::vector<std::uint64_t> sig(options.permutations, std::numeric_limits<std::uint64_t>::max());
    for (std::size_t i = 0; i < options.permutations; ++i) {
        const std::uint64_t salt = splitmix64(options.seed + i);
        for (auto s : shingles) {
            sig[i] = std::min(sig[i], splitmix64(s ^ salt));
        }
    }
    return sig;
}

double estimate_jaccard(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
    if (a.size() != b.size() || a.empty()) {
        return 0.0;
    }
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        same += a[i] == b[i] ? 1 : 0;
    }
    return static_cast<double>(same) / static_cast<double>(a.size());
}

DedupResult deduplicate(const std::vector<Document>& docs, std::string_view scope, const DedupOptions& options,
                        const ComparisonObserver& observer) {
    if (options.bands == 0 || options.permutations % options.bands != 0) {
        throw ConfigError("permutations must be a positive multiple of bands");
    }
    const std::size_t rows = options.permutations / options.bands;
    DedupResult result;
    result.report.scope = std::string(scope);
    result.report.input = docs.size();

    std::unordered_map<std::string, std::size_t> exact;
    std::vector<std::vector<std::uint64_t>> signatures;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;

    for (const auto& doc : docs) {
        if (doc.collection_id != scope) {
            throw ConfigError("document " + doc.doc_id + " belongs to collection '" + doc.collection_id +
                              "', not '" + std::string(scope) + "'");
        }
        const std::string norm = normalize(doc.text);
        const std::string digest = sha256_hex(norm);
        if (auto it = exact.find(digest); it != exact.end()) {
            const Document& kept = result.kept[it->second];
            if (observer) {
                observer(doc, kept);
            }
            result.report.dropped[doc.doc_id] = {kept.doc_id, DuplicateKind::exact, 1.0};
            continue;
        }
        const auto shingles = shingle_hashes(norm, options.shingle_words);
        auto sig = minhash_signature(shingles, options);
        std::vector<std::uint64_t> keys;
        if (!shingles.empty()) {
            for (std::size_t b = 0; b < options.bands; ++b) {
                std::uint64_t key = splitmix64(b + 1);
                for (std::size_t r = 0; r < rows; ++r) {
                    key = splitmix64(key ^ sig[b * rows + r]);
                }
                keys.push_back(key);
            }
        }
        std::vector<std::size_t> candidates;
        for (auto key : keys) {
            if (auto it = buckets.find(key); it != buckets.end()) {
                candidates.insert(candidates.end(), it->second.begin(), it->second.end());
            }
        }
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
        bool dropped = false;
        for (auto c : candidates) {
            if (observer) {
                observer(doc, result.kept[c]);
            }
            const double sim = estimate_jaccard(sig, signatures[c]);
            if (sim >= options.threshold) {
                result.report.dropped[doc.doc_id] = {result.kept[c].doc_id, DuplicateKind::near, sim};
                dropped = true;
                break;
            }
        }
        if (dropped) {
            continue;
        }
        const std::size_t index = result.kept.size();
        result.kept.push_back(doc);
        signatures.push_back(std::move(sig));
        exact.emplace(digest, index);
        for (auto key : keys) {
            buckets[key].push_back(index);
        }
    }
    result.report.kept = result.kept.size();
    return result;
}

std::vector<AuditEntry> pii_audit_sample(const std::vector<Document>& originals, std::size_t n, std::uint64_t seed) {
    std::vector<AuditEntry> bundle;
    if (originals.empty()) {
        return bundle;
    }
    ReservoirSampler<std::size_t> sampler(n, seed);
    for (std::size_t i = 0; i < originals.size(); ++i) {
        sampler.offer(i);
    }
    auto picks = std::move(sampler).take();
    std::sort(picks.begin(), picks.end());
    for (auto i : picks) {
        const Document& doc = originals[i];
        auto scrub = scrub_pii(doc.text);
        AuditEntry entry{doc.doc_id, doc.url, doc.text, scrub.text, {}};
        const std::string_view orig = doc.text;
        for (auto& e : scrub.edits) {
            const std::size_t before_start = utf8_floor(orig, e.begin > kAuditContextBytes ? e.begin - kAuditContextBytes : 0);
            const std::size_t after_end = utf8_floor(orig, std::min(orig.size(), e.end + kAuditContextBytes));
            entry.changes.push_back({classes_in(e.replacement), e, std::string(orig.substr(e.begin, e.end - e.begin)),
                                     std::string(orig.substr(before_start, e.begin - before_start)),
                                     std::string(orig.substr(e.end, after_end - e.end))});
        }
        bundle.push_back(std::move(entry));
    }
    return bundle;
}

void to_json(nlohmann::json& j, const Edit& e) {
    j = nlohmann::json{{"begin", e.begin}, {"end", e.end}, {"replacement", e.replacement}};
}

void from_json(const nlohmann::json& j, Edit& e) {
    e.begin = j.at("begin").get<std::size_t>();
    e.end = j.at("end").get<std::size_t>();
    e.replacement = j.at("replacement").get<std::string>();
}

void to_json(nlohmann::json& j, const ScrubReport& r) {
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& [name, count] : r.replacements) {
        reps.push_back({{"pattern_name", name}, {"count", count}});
    }
    j = nlohmann::json{{"doc_id", r.doc_id}, {"replacements", std::move(reps)}, {"residual_risk_flag", r.residual_risk_flag}};
}

void from_json(const nlohmann::json& j, ScrubReport& r) {
    r.doc_id = j.at("doc_id").get<std::string>();
    r.replacements.clear();
    for (const auto& rep : j.at("replacements")) {
        r.replacements[rep.at("pattern_name").get<std::string>()] = rep.at("count").get<std::size_t>();
    }
    r.residual_risk_flag = j.value("residual_risk_flag", false);
}

void to_json(nlohmann::json& j, const HarmResult& r) {
    nlohmann::json hits = nlohmann::json::array();
    for (const auto& h : r.hits) {
        hits.push_back({{"term", h.term}, {"offset", h.offset}, {"severity", to_string(h.severity)}});
    }
    j = nlohmann::json{{"severity", to_string(r.severity)}, {"hits", std::move(hits)}};
}

void to_json(nlohmann::json& j, const DedupReport& r) {
    nlohmann::json dropped = nlohmann::json::object();
    for (const auto& [id, rec] : r.dropped) {
        dropped[id] = {{"retained", rec.retained},
                       {"kind", rec.kind == DuplicateKind::exact ? "exact" : "near"},
                       {"similarity", rec.similarity}};
    }
    j = nlohmann::json{{"scope", r.scope}, {"input", r.input}, {"kept", r.kept}, {"dropped", std::move(dropped)}};
}

void to_json(nlohmann::json& j, const AuditEntry& e) {
    nlohmann::json changes = nlohmann::json::array();
    for (const auto& c : e.changes) {
        changes.push_back({{"pii_class", c.pii_class},
                           {"begin", c.edit.begin},
                           {"end", c.edit.end},
                           {"original", c.original},
                           {"replacement", c.edit.replacement},
                           {"before", c.before},
                           {"after", c.after}});
    }
    j = nlohmann::json{{"doc_id", e.doc_id},
                       {"url", e.url},
                       {"original", e.original},
                       {"scrubbed", e.scrubbed},
                       {"changes", std::move(changes)}};
}

void from_json(const nlohmann::json& j, AuditEntry& e) {
    e.doc_id = j.at("doc_id").get<std::string>();
    e.url = j.value("url", std::string{});
    e.original = j.at("original").get<std::string>();
    e.scrubbed = j.at("scrubbed").get<std::string>();
    e.changes.clear();
    for (const auto& c : j.at("changes")) {
        AuditContext ctx;
        ctx.pii_class = c.value("pii_class", std::string{});
        ctx.edit = {c.at("begin").get<std::size_t>(), c.at("end").get<std::size_t>(),
                    c.at("replacement").get<std::string>()};
        ctx.original = c.value("original", std::string{});
        ctx.before = c.value("before", std::string{});
        ctx.after = c.value("after", std::string{});
        e.changes.push_back(std::move(ctx));
    }
}

} // namespace ccurate
