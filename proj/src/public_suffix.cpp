#include "ccurate/public_suffix.hpp"

#include "ccurate/data_paths.hpp"
#include "ccurate/error.hpp"
#include "ccurate/text.hpp"

#include <unicode/bytestream.h>
#include <unicode/idna.h>

#include <fstream>
#include <memory>
#include <vector>

namespace ccurate {
namespace {

std::string to_unicode_host(std::string_view host) {
    UErrorCode status = U_ZERO_ERROR;
    static const std::unique_ptr<icu::IDNA> idna(icu::IDNA::createUTS46Instance(UIDNA_DEFAULT, status));
    std::string lowered = text::ascii_lower(host);
    if (!idna || lowered.find("xn--") == std::string::npos) {
        return lowered;
    }
    std::string out;
    icu::StringByteSink<std::string> sink(&out);
    icu::IDNAInfo info;
    status = U_ZERO_ERROR;
    idna->nameToUnicodeUTF8(icu::StringPiece(lowered.data(), static_cast<int32_t>(lowered.size())), sink, info,
                            status);
    if (U_FAILURE(status) || info.hasErrors()) {
        return lowered;
    }
    return out;
}

std::vector<std::string_view> labels_of(std::string_view host) {
    std::vector<std::string_view> labels;
    std::size_t start = 0;
    while (start <= host.size()) {
        const auto dot = host.find('.', start);
        if (dot == std::string_view::npos) {
            labels.push_back(host.substr(start));
            break;
        }
        labels.push_back(host.substr(start, dot - start));
        start = dot + 1;
    }
    return labels;
}

std::string join_from(const std::vector<std::string_view>& labels, std::size_t first) {
    std::string out;
    for (std::size_t i = first; i < labels.size(); ++i) {
        if (i > first) {
            out += '.';
        }
        out += labels[i];
    }
    return out;
}

bool is_ip_literal(std::string_view host) {
    if (!host.empty() && host.front() == '[') {
        return true;
    }
    if (host.empty()) {
        return false;
    }
    for (char c : host) {
        if ((c < '0' || c > '9') && c != '.') {
            return false;
        }
    }
    return true;
}

} // namespace

PublicSuffixList PublicSuffixList::parse(std::istream& in) {
    PublicSuffixList psl;
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("// VERSION:", 0) == 0) {
            psl.version_ = std::string(text::trim(std::string_view(line).substr(11)));
            continue;
        }
        const auto rule = text::trim(line);
        if (rule.empty() || rule.substr(0, 2) == "//") {
            continue;
        }
        const auto token = rule.substr(0, rule.find_first_of(" \t"));
        if (token.front() == '!') {
            psl.exceptions_.insert(text::to_lower(token.substr(1)));
        } else if (token.substr(0, 2) == "*.") {
            psl.wildcard_parents_.insert(text::to_lower(token.substr(2)));
        } else {
            psl.normal_.insert(text::to_lower(token));
        }
    }
    return psl;
}

PublicSuffixList PublicSuffixList::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open public suffix list: " + path.string());
    }
    return parse(in);
}

const PublicSuffixList& PublicSuffixList::bundled() {
    static const PublicSuffixList psl = load(data_dir() / "public_suffix_list.dat");
    return psl;
}

std::size_t PublicSuffixList::suffix_labels(const std::string& unicode_host) const {
    const auto labels = labels_of(unicode_host);
    const std::size_t n = labels.size();
    std::size_t best = 1;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string candidate = join_from(labels, i);
        const std::size_t count = n - i;
        if (exceptions_.contains(candidate)) {
            return count - 1;
        }
        if (count > best && normal_.contains(candidate)) {
            best = count;
        }
        if (i + 1 < n && count > best && wildcard_parents_.contains(join_from(labels, i + 1))) {
            best = count;
        }
    }
    return best;
}

std::string PublicSuffixList::public_suffix(std::string_view host) const {
    std::string h = text::ascii_lower(host);
    if (h.empty() || is_ip_literal(h)) {
        return h;
    }
    const auto k = suffix_labels(to_unicode_host(h));
    const auto labels = labels_of(h);
    return k >= labels.size() ? h : join_from(labels, labels.size() - k);
}

std::string PublicSuffixList::registrable_domain(std::string_view host) const {
    std::string h = text::ascii_lower(host);
    while (!h.empty() && h.back() == '.') {
        h.pop_back();
    }
    if (h.empty() || is_ip_literal(h)) {
        return h;
    }
    const auto labels = labels_of(h);
    const auto k = suffix_labels(to_unicode_host(h));
    if (labels.size() <= k) {
        return h;
    }
    return join_from(labels, labels.size() - k - 1);
}

} // namespace ccurate
