#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_set>

namespace ccurate {

/// Public-suffix rule set (publicsuffix.org format) used to compute
/// registrable domains.
class PublicSuffixList {
public:
    static PublicSuffixList load(const std::filesystem::path& path);
    static PublicSuffixList parse(std::istream& in);
    /// Bundled snapshot from the data directory; loaded once.
    static const PublicSuffixList& bundled();

    /// Public suffix + one label (e.g. "example.co.uk"). IP literals, bare
    /// public suffixes and single-label hosts are returned unchanged.
    std::string registrable_domain(std::string_view host) const;
    std::string public_suffix(std::string_view host) const;

    const std::string& version() const noexcept { return version_; }
    std::size_t rule_count() const noexcept { return normal_.size() + wildcard_parents_.size() + exceptions_.size(); }

private:
    std::size_t suffix_labels(const std::string& unicode_host) const;

    std::unordered_set<std::string> normal_;
    std::unordered_set<std::string> wildcard_parents_;
    std::unordered_set<std::string> exceptions_;
    std::string version_;
};

} // namespace ccurate
