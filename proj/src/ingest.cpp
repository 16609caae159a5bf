#include "ccurate/ingest.hpp"

#include "ccurate/error.hpp"
#include "ccurate/public_suffix.hpp"
#include "ccurate/text.hpp"
#include "ccurate/url.hpp"

namespace ccurate {
namespace {

bool is_hidden(std::string_view tag) {
    return tag == "script" || tag == "style" || tag == "noscript" || tag == "template" || tag == "head" ||
           tag == "title" || tag == "iframe" || tag == "noembed" || tag == "noframes";
}

class TextCollector {
public:
    explicit TextCollector(const NodeTree& tree) : tree_(tree) {}

    std::string run() {
        walk(tree_.body());
        flush();
        return out_;
    }

private:
    void walk(NodeId id) {
        const Node& node = tree_.node(id);
        switch (node.kind) {
        case NodeKind::text:
            append(node.text);
            return;
        case NodeKind::comment:
            return;
        case NodeKind::document:
        case NodeKind::element:
            break;
        }
        if (is_hidden(node.tag)) {
            return;
        }
        const bool block = is_block_element(node.tag);
        if (block) {
            flush();
        }
        if (node.tag == "td" || node.tag == "th") {
            pending_space_ = !line_.empty();
        }
        for (NodeId child : node.children) {
            walk(child);
        }
        if (block) {
            flush();
        }
    }

    void append(std::string_view raw) {
        for (std::size_t i = 0; i < raw.size();) {
            const std::size_t at = i;
            const char32_t cp = text::next_codepoint(raw, i);
            if (text::is_white_space(cp)) {
                pending_space_ = !line_.empty();
                continue;
            }
            if (pending_space_) {
                line_.push_back(' ');
                pending_space_ = false;
            }
            line_.append(raw.substr(at, i - at));
        }
    }

    void flush() {
        if (!line_.empty()) {
            if (!out_.empty()) {
                out_.push_back('\n');
            }
            out_ += line_;
        }
        line_.clear();
        pending_space_ = false;
    }

    const NodeTree& tree_;
    std::string out_;
    std::string line_;
    bool pending_space_ = false;
};

} // namespace

const std::set<std::string>& crawl_retained_languages() {
    static const std::set<std::string> languages = {"afr", "deu", "eng", "fra", "fry", "ita", "nld", "spa"};
    return languages;
}

std::string extract_text(const NodeTree& tree) { return TextCollector(tree).run(); }

std::string text_to_markup(std::string_view text) {
    std::string out = "<html><head></head><body>";
    for (auto line : text::split_lines(text)) {
        out += "<p>" + escape_html(line) + "</p>";
    }
    out += "</body></html>";
    return out;
}

bool retain_language(const Document& doc, const std::set<std::string>& retained) {
    if (retained.empty()) {
        throw ConfigError("retained language set is empty");
    }
    if (!doc.language_scores) {
        throw FormatError("document " + doc.doc_id + " has no language scores");
    }
    return retained.contains(doc.language_scores->top);
}

Document document_from_record(const RawRecord& record, std::string_view collection_id) {
    Document doc;
    doc.url = record.target_url;
    doc.collection_id = std::string(collection_id);
    if (auto url = parse_absolute_url(record.target_url)) {
        doc.domain = PublicSuffixList::bundled().registrable_domain(url->host);
    }
    if (is_html_content_type(record.content_type)) {
        const auto charset = content_type_charset(record.content_type);
        const NodeTree tree = charset.empty() ? parse_markup(record.payload)
                                              : parse_markup(record.payload, std::string_view(charset));
        doc.set_text(extract_text(tree));
        doc.license = extract_license(tree, record.target_url);
    } else {
        const auto charset = content_type_charset(record.content_type);
        std::string decoded;
        if (!charset.empty() && charset != "utf-8" && text::is_known_charset(charset)) {
            decoded = text::to_utf8(record.payload, charset);
        } else {
            decoded = text::sanitize_utf8(record.payload);
        }
        doc.set_text(std::move(decoded));
    }
    doc.doc_id = compute_doc_id(doc.collection_id, doc.url, doc.text);
    doc.stage = Stage::raw;
    return doc;
}

} // namespace ccurate
