#include "ccurate/markup.hpp"

#include "ccurate/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_map>
#include <unordered_set>

namespace ccurate {
namespace {

bool is_ascii_space(char c) noexcept { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }
bool is_ascii_alpha(char c) noexcept { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

bool in_set(std::string_view tag, std::initializer_list<std::string_view> set) noexcept {
    return std::find(set.begin(), set.end(), tag) != set.end();
}

const std::unordered_map<std::string_view, char32_t>& named_entities() {
    static const std::unordered_map<std::string_view, char32_t> table = {
        {"amp", '&'},       {"lt", '<'},        {"gt", '>'},        {"quot", '"'},      {"apos", '\''},
        {"nbsp", 0xA0},     {"iexcl", 0xA1},    {"cent", 0xA2},     {"pound", 0xA3},    {"curren", 0xA4},
        {"yen", 0xA5},      {"brvbar", 0xA6},   {"sect", 0xA7},     {"uml", 0xA8},      {"copy", 0xA9},
        {"ordf", 0xAA},     {"laquo", 0xAB},    {"not", 0xAC},      {"shy", 0xAD},      {"reg", 0xAE},
        {"macr", 0xAF},     {"deg", 0xB0},      {"plusmn", 0xB1},   {"sup2", 0xB2},     {"sup3", 0xB3},
        {"acute", 0xB4},    {"micro", 0xB5},    {"para", 0xB6},     {"middot", 0xB7},   {"cedil", 0xB8},
        {"sup1", 0xB9},     {"ordm", 0xBA},     {"raquo", 0xBB},    {"frac14", 0xBC},   {"frac12", 0xBD},
        {"frac34", 0xBE},   {"iquest", 0xBF},   {"Agrave", 0xC0},   {"Aacute", 0xC1},   {"Acirc", 0xC2},
        {"Atilde", 0xC3},   {"Auml", 0xC4},     {"Aring", 0xC5},    {"AElig", 0xC6},    {"Ccedil", 0xC7},
        {"Egrave", 0xC8},   {"Eacute", 0xC9},   {"Ecirc", 0xCA},    {"Euml", 0xCB},     {"Igrave", 0xCC},
        {"Iacute", 0xCD},   {"Icirc", 0xCE},    {"Iuml", 0xCF},     {"ETH", 0xD0},      {"Ntilde", 0xD1},
        {"Ograve", 0xD2},   {"Oacute", 0xD3},   {"Ocirc", 0xD4},    {"Otilde", 0xD5},   {"Ouml", 0xD6},
        {"times", 0xD7},    {"Oslash", 0xD8},   {"Ugrave", 0xD9},   {"Uacute", 0xDA},   {"Ucirc", 0xDB},
        {"Uuml", 0xDC},     {"Yacute", 0xDD},   {"THORN", 0xDE},    {"szlig", 0xDF},    {"agrave", 0xE0},
        {"aacute", 0xE1},   {"acirc", 0xE2},    {"atilde", 0xE3},   {"auml", 0xE4},     {"aring", 0xE5},
        {"aelig", 0xE6},    {"ccedil", 0xE7},   {"egrave", 0xE8},   {"eacute", 0xE9},   {"ecirc", 0xEA},
        {"euml", 0xEB},     {"igrave", 0xEC},   {"iacute", 0xED},   {"icirc", 0xEE},    {"iuml", 0xEF},
        {"eth", 0xF0},      {"ntilde", 0xF1},   {"ograve", 0xF2},   {"oacute", 0xF3},   {"ocirc", 0xF4},
        {"otilde", 0xF5},   {"ouml", 0xF6},     {"divide", 0xF7},   {"oslash", 0xF8},   {"ugrave", 0xF9},
        {"uacute", 0xFA},   {"ucirc", 0xFB},    {"uuml", 0xFC},     {"yacute", 0xFD},   {"thorn", 0xFE},
        {"yuml", 0xFF},     {"OElig", 0x152},   {"oelig", 0x153},   {"Scaron", 0x160},  {"scaron", 0x161},
        {"Yuml", 0x178},    {"fnof", 0x192},    {"circ", 0x2C6},    {"tilde", 0x2DC},   {"ensp", 0x2002},
        {"emsp", 0x2003},   {"thinsp", 0x2009}, {"zwnj", 0x200C},   {"zwj", 0x200D},    {"lrm", 0x200E},
        {"rlm", 0x200F},    {"ndash", 0x2013},  {"mdash", 0x2014},  {"lsquo", 0x2018},  {"rsquo", 0x2019},
        {"sbquo", 0x201A},  {"ldquo", 0x201C},  {"rdquo", 0x201D},  {"bdquo", 0x201E},  {"dagger", 0x2020},
        {"Dagger", 0x2021}, {"bull", 0x2022},   {"hellip", 0x2026}, {"permil", 0x2030}, {"prime", 0x2032},
        {"lsaquo", 0x2039}, {"rsaquo", 0x203A}, {"euro", 0x20AC},   {"trade", 0x2122},  {"larr", 0x2190},
        {"rarr", 0x2192},   {"uarr", 0x2191},   {"darr", 0x2193},   {"harr", 0x2194},   {"minus", 0x2212},
        {"le", 0x2264},     {"ge", 0x2265},     {"ne", 0x2260},     {"infin", 0x221E},  {"check", 0x2713},
    };
    return table;
}

// Windows-1252 remapping of C1 numeric references, as browsers do.
constexpr std::array<char32_t, 32> kC1Remap = {
    0x20AC, 0x81,   0x201A, 0x192,  0x201E, 0x2026, 0x2020, 0x2021, 0x2C6,  0x2030, 0x160,
    0x2039, 0x152,  0x8D,   0x17D,  0x8F,   0x90,   0x2018, 0x2019, 0x201C, 0x201D, 0x2022,
    0x2013, 0x2014, 0x2DC,  0x2122, 0x161,  0x203A, 0x153,  0x9D,   0x17E,  0x178,
};

bool is_special(std::string_view tag) noexcept {
    static const std::unordered_set<std::string_view> special = {
        "address", "applet", "area",    "article",  "aside",   "base",     "basefont", "bgsound", "blockquote",
        "body",    "br",     "button",  "caption",  "center",  "col",      "colgroup", "dd",      "details",
        "dir",     "div",    "dl",      "dt",       "embed",   "fieldset", "figcaption", "figure", "footer",
        "form",    "frame",  "frameset", "h1",      "h2",      "h3",       "h4",       "h5",      "h6",
        "head",    "header", "hgroup",  "hr",       "html",    "iframe",   "img",      "input",   "li",
        "link",    "listing", "main",   "marquee",  "menu",    "meta",     "nav",      "noembed", "noframes",
        "noscript", "object", "ol",     "p",        "param",   "plaintext", "pre",     "script",  "section",
        "select",  "source", "style",   "summary",  "table",   "tbody",    "td",       "template", "textarea",
        "tfoot",   "th",     "thead",   "title",    "tr",      "track",    "ul",       "wbr",     "xmp",
    };
    return special.contains(tag);
}

bool is_head_content(std::string_view tag) noexcept {
    return in_set(tag, {"base", "basefont", "bgsound", "link", "meta", "noscript", "script", "style", "template",
                        "title"});
}

bool closes_paragraph(std::string_view tag) noexcept {
    return in_set(tag, {"address", "article", "aside", "blockquote", "center", "details", "dialog", "dir", "div",
                        "dl", "fieldset", "figcaption", "figure", "footer", "header", "hgroup", "main", "menu",
                        "nav", "ol", "p", "section", "summary", "ul", "h1", "h2", "h3", "h4", "h5", "h6", "pre",
                        "listing", "form", "table", "hr", "xmp", "plaintext", "li", "dd", "dt"});
}

bool is_heading(std::string_view tag) noexcept { return in_set(tag, {"h1", "h2", "h3", "h4", "h5", "h6"}); }

enum class TextMode { data, rawtext, rcdata, plaintext };

TextMode text_mode_for(std::string_view tag) noexcept {
    if (in_set(tag, {"script", "style", "xmp", "iframe", "noembed", "noframes", "noscript"})) {
        return TextMode::rawtext;
    }
    if (in_set(tag, {"title", "textarea"})) {
        return TextMode::rcdata;
    }
    if (tag == "plaintext") {
        return TextMode::plaintext;
    }
    return TextMode::data;
}

struct Token {
    enum class Kind { start_tag, end_tag, text, comment } kind;
    std::string name;
    std::vector<Attribute> attributes;
    std::string data;
    bool self_closing = false;
};

// Streaming tokenizer over decoded UTF-8 markup.
class Tokenizer {
public:
    explicit Tokenizer(std::string_view src) : src_(src) {}

    bool next(Token& tok) {
        if (pos_ >= src_.size()) {
            return false;
        }
        if (mode_ != TextMode::data) {
            return raw_text(tok);
        }
        if (src_[pos_] == '<') {
            if (src_.compare(pos_, 4, "<!--") == 0) {
                return comment(tok, pos_ + 4, "-->");
            }
            if (pos_ + 1 < src_.size()) {
                const char c = src_[pos_ + 1];
                if (c == '!' || c == '?') {
                    return comment(tok, pos_ + 2, ">");
                }
                if (c == '/' && pos_ + 2 < src_.size() && is_ascii_alpha(src_[pos_ + 2])) {
                    return end_tag(tok);
                }
                if (c == '/' && pos_ + 2 < src_.size() && src_[pos_ + 2] == '>') {
                    pos_ += 3;
                    return next(tok);
                }
                if (is_ascii_alpha(c)) {
                    return start_tag(tok);
                }
            }
        }
        return data_text(tok);
    }

    void set_mode(TextMode mode, std::string tag) {
        mode_ = mode;
        raw_tag_ = std::move(tag);
    }

private:
    bool data_text(Token& tok) {
        std::size_t end = src_.find('<', pos_ + 1);
        if (end == std::string_view::npos) {
            end = src_.size();
        }
        tok = Token{Token::Kind::text, {}, {}, decode_entities(src_.substr(pos_, end - pos_))};
        pos_ = end;
        return true;
    }

    bool comment(Token& tok, std::size_t body, std::string_view terminator) {
        const std::size_t end = src_.find(terminator, body);
        tok = Token{Token::Kind::comment, {}, {}, {}};
        if (end == std::string_view::npos) {
            tok.data = std::string(src_.substr(body));
            pos_ = src_.size();
        } else {
            tok.data = std::string(src_.substr(body, end - body));
            pos_ = end + terminator.size();
        }
        return true;
    }

    std::string read_name() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && !is_ascii_space(src_[pos_]) && src_[pos_] != '/' && src_[pos_] != '>') {
            ++pos_;
        }
        return text::ascii_lower(src_.substr(start, pos_ - start));
    }

    void skip_space() {
        while (pos_ < src_.size() && is_ascii_space(src_[pos_])) {
            ++pos_;
        }
    }

    bool end_tag(Token& tok) {
        pos_ += 2;
        tok = Token{Token::Kind::end_tag, read_name(), {}, {}};
        const std::size_t close = src_.find('>', pos_);
        pos_ = close == std::string_view::npos ? src_.size() : close + 1;
        return true;
    }

    bool start_tag(Token& tok) {
        ++pos_;
        tok = Token{Token::Kind::start_tag, read_name(), {}, {}};
        while (pos_ < src_.size()) {
            skip_space();
            if (pos_ >= src_.size()) {
                break;
            }
            if (src_[pos_] == '>') {
                ++pos_;
                break;
            }
            if (src_[pos_] == '/') {
                ++pos_;
                if (pos_ < src_.size() && src_[pos_] == '>') {
                    tok.self_closing = true;
                    ++pos_;
                    break;
                }
                continue;
            }
            const std::size_t name_start = pos_;
            ++pos_; // first char may be '=' per the HTML tokenizer rules
            while (pos_ < src_.size() && !is_ascii_space(src_[pos_]) && src_[pos_] != '/' && src_[pos_] != '>' &&
                   src_[pos_] != '=') {
                ++pos_;
            }
            std::string name = text::ascii_lower(src_.substr(name_start, pos_ - name_start));
            skip_space();
            std::string value;
            if (pos_ < src_.size() && src_[pos_] == '=') {
                ++pos_;
                skip_space();
                if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'')) {
                    const char quote = src_[pos_++];
                    const std::size_t close = src_.find(quote, pos_);
                    const std::size_t end = close == std::string_view::npos ? src_.size() : close;
                    value = decode_entities(src_.substr(pos_, end - pos_));
                    pos_ = close == std::string_view::npos ? src_.size() : close + 1;
                } else {
                    const std::size_t start = pos_;
                    while (pos_ < src_.size() && !is_ascii_space(src_[pos_]) && src_[pos_] != '>') {
                        ++pos_;
                    }
                    value = decode_entities(src_.substr(start, pos_ - start));
                }
            }
            const bool duplicate = std::any_of(tok.attributes.begin(), tok.attributes.end(),
                                               [&](const Attribute& a) { return a.name == name; });
            if (!duplicate) {
                tok.attributes.push_back({std::move(name), std::move(value)});
            }
        }
        return true;
    }

    bool raw_text(Token& tok) {
        std::size_t end = src_.size();
        if (mode_ != TextMode::plaintext) {
            std::size_t search = pos_;
            while (true) {
                const std::size_t lt = src_.find("</", search);
                if (lt == std::string_view::npos) {
                    break;
                }
                const auto candidate = src_.substr(lt + 2, raw_tag_.size());
                const std::size_t after = lt + 2 + raw_tag_.size();
                if (text::iequals(candidate, raw_tag_) &&
                    (after >= src_.size() || is_ascii_space(src_[after]) || src_[after] == '/' ||
                     src_[after] == '>')) {
                    end = lt;
                    break;
                }
                search = lt + 2;
            }
        }
        const auto raw = src_.substr(pos_, end - pos_);
        tok = Token{Token::Kind::text, {}, {}, mode_ == TextMode::rcdata ? decode_entities(raw) : std::string(raw)};
        pos_ = end;
        mode_ = TextMode::data;
        if (tok.data.empty()) {
            return next(tok);
        }
        return true;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    TextMode mode_ = TextMode::data;
    std::string raw_tag_;
};

bool is_formatting(std::string_view tag) noexcept {
    return in_set(tag, {"a", "b", "big", "code", "em", "font", "i", "nobr", "s", "small", "strike", "strong", "tt",
                        "u"});
}

// Simplified HTML5 tree construction: implied head/body, implied end tags
// for p/li/dd/dt/tr/td/option, implied tbody, void elements, raw-text
// elements, and reopening of formatting elements cut off by a block.
// No adoption agency: a misnested formatting end tag just closes up to it.
class TreeBuilder {
public:
    explicit TreeBuilder(NodeTree& tree) : tree_(tree) { stack_.push_back(tree.html()); }

    void build(std::string_view markup) {
        Tokenizer tokenizer(markup);
        Token tok;
        while (tokenizer.next(tok)) {
            const bool skip_newline = skip_newline_;
            skip_newline_ = false;
            switch (tok.kind) {
            case Token::Kind::start_tag: {
                const NodeId inserted = start_tag(tok);
                if (inserted != kNoNode) {
                    const TextMode mode = text_mode_for(tok.name);
                    if (mode != TextMode::data) {
                        tokenizer.set_mode(mode, tok.name);
                    }
                }
                break;
            }
            case Token::Kind::end_tag:
                end_tag(tok.name);
                break;
            case Token::Kind::text:
                if (skip_newline && !tok.data.empty() && tok.data.front() == '\n') {
                    tok.data.erase(0, 1);
                }
                if (!tok.data.empty()) {
                    text(tok.data);
                }
                break;
            case Token::Kind::comment:
                tree_.append_comment(current(), std::move(tok.data));
                break;
            }
        }
    }

private:
    enum class Mode { before_head, in_head, after_head, in_body };

    NodeId current() const { return stack_.back(); }
    const std::string& tag_of(NodeId id) const { return tree_.node(id).tag; }

    void enter_body() {
        if (mode_ == Mode::in_body) {
            return;
        }
        mode_ = Mode::in_body;
        stack_.assign({tree_.html(), tree_.body()});
    }

    bool on_stack(NodeId id) const { return std::find(stack_.begin(), stack_.end(), id) != stack_.end(); }

    // kNoNode entries are scope markers pushed by table cells.
    void reconstruct_formatting() {
        std::size_t first = formatting_.size();
        while (first > 0 && formatting_[first - 1] != kNoNode && !on_stack(formatting_[first - 1])) {
            --first;
        }
        for (std::size_t i = first; i < formatting_.size(); ++i) {
            const Node& old = tree_.node(formatting_[i]);
            const NodeId clone = tree_.append_element(current(), old.tag, old.attributes);
            stack_.push_back(clone);
            formatting_[i] = clone;
        }
    }

    void forget_formatting(std::string_view tag) {
        for (std::size_t i = formatting_.size(); i-- > 0;) {
            if (formatting_[i] == kNoNode) {
                return;
            }
            if (tag_of(formatting_[i]) == tag) {
                formatting_.erase(formatting_.begin() + static_cast<std::ptrdiff_t>(i));
                return;
            }
        }
    }

    void clear_to_marker() {
        while (!formatting_.empty()) {
            const NodeId last = formatting_.back();
            formatting_.pop_back();
            if (last == kNoNode) {
                return;
            }
        }
    }

    // Returns the inserted element, or kNoNode when the token was absorbed.
    NodeId start_tag(Token& tok) {
        const std::string& name = tok.name;
        if (name == "html") {
            tree_.merge_attributes(tree_.html(), tok.attributes);
            return kNoNode;
        }
        if (mode_ != Mode::in_body) {
            if (name == "head") {
                if (mode_ == Mode::before_head) {
                    tree_.merge_attributes(tree_.head(), tok.attributes);
                    mode_ = Mode::in_head;
                    stack_.assign({tree_.html(), tree_.head()});
                }
                return kNoNode;
            }
            if (is_head_content(name)) {
                if (mode_ != Mode::in_head || current() == tree_.html()) {
                    stack_.assign({tree_.html(), tree_.head()});
                    if (mode_ == Mode::before_head) {
                        mode_ = Mode::in_head;
                    }
                }
                return insert(tok);
            }
            if (name == "frameset") {
                return kNoNode;
            }
            enter_body();
        }
        if (name == "body") {
            tree_.merge_attributes(tree_.body(), tok.attributes);
            return kNoNode;
        }
        if (name == "head" || name == "frameset") {
            return kNoNode;
        }
        if (name == "li") {
            close_list_item({"li"});
        } else if (name == "dd" || name == "dt") {
            close_list_item({"dd", "dt"});
        }
        if (closes_paragraph(name)) {
            close_paragraph();
        }
        if (is_heading(name) && is_heading(tag_of(current()))) {
            stack_.pop_back();
        }
        if (name == "a") {
            close_if_open("a");
            forget_formatting("a");
        } else if (name == "option") {
            if (tag_of(current()) == "option") {
                stack_.pop_back();
            }
        } else if (name == "tr") {
            close_in_table_scope("tr");
            if (tag_of(current()) == "table") {
                push_implied("tbody");
            }
        } else if (name == "td" || name == "th") {
            close_cell();
            if (tag_of(current()) == "table") {
                push_implied("tbody");
            }
            if (in_set(tag_of(current()), {"tbody", "thead", "tfoot"})) {
                push_implied("tr");
            }
        }
        if (in_set(name, {"td", "th", "caption", "table"})) {
            if (name == "table") {
                reconstruct_formatting();
            }
            const NodeId id = insert(tok);
            formatting_.push_back(kNoNode);
            return id;
        }
        if (!is_special(name) || is_formatting(name)) {
            reconstruct_formatting();
        }
        const NodeId id = insert(tok);
        if (is_formatting(name) && !is_void_element(name)) {
            formatting_.push_back(id);
        }
        if (in_set(name, {"pre", "listing", "textarea"})) {
            skip_newline_ = true;
        }
        return id;
    }

    void push_implied(std::string tag) { stack_.push_back(tree_.append_element(current(), std::move(tag))); }

    void close_cell() {
        for (std::size_t i = stack_.size(); i-- > 1;) {
            const auto& t = tag_of(stack_[i]);
            if (t == "td" || t == "th") {
                stack_.resize(i);
                clear_to_marker();
                return;
            }
            if (in_set(t, {"tr", "table", "html"})) {
                return;
            }
        }
    }

    NodeId insert(Token& tok) {
        const NodeId id = tree_.append_element(current(), tok.name, std::move(tok.attributes));
        if (!is_void_element(tok.name)) {
            stack_.push_back(id);
        }
        return id;
    }

    void close_paragraph() {
        for (std::size_t i = stack_.size(); i-- > 1;) {
            const auto& tag = tag_of(stack_[i]);
            if (tag == "p") {
                stack_.resize(i);
                return;
            }
            if (in_set(tag, {"button", "table", "td", "th", "caption", "marquee", "object", "applet", "template",
                             "html"})) {
                return;
            }
        }
    }

    void close_list_item(std::initializer_list<std::string_view> items) {
        for (std::size_t i = stack_.size(); i-- > 1;) {
            const auto& tag = tag_of(stack_[i]);
            if (in_set(tag, items)) {
                stack_.resize(i);
                return;
            }
            if (is_special(tag) && tag != "address" && tag != "div" && tag != "p") {
                return;
            }
        }
    }

    void close_if_open(std::string_view tag) {
        for (std::size_t i = stack_.size(); i-- > 1;) {
            if (tag_of(stack_[i]) == tag) {
                stack_.resize(i);
                return;
            }
        }
    }

    void close_in_table_scope(std::string_view tag) {
        for (std::size_t i = stack_.size(); i-- > 1;) {
            const auto& t = tag_of(stack_[i]);
            if (t == tag) {
                stack_.resize(i);
                return;
            }
            if (t == "table" || t == "html" || (tag == "td" && t == "tr") || (tag == "th" && t == "tr")) {
                return;
            }
        }
    }

    void end_tag(const std::string& name) {
        if (mode_ != Mode::in_body) {
            if (name == "head") {
                if (mode_ == Mode::in_head) {
                    mode_ = Mode::after_head;
                    stack_.assign({tree_.html()});
                }
                return;
            }
            if (name == "br") {
                enter_body();
            } else {
                for (std::size_t i = stack_.size(); i-- > 1;) {
                    if (tag_of(stack_[i]) == name) {
                        stack_.resize(i);
                        break;
                    }
                }
                return;
            }
        }
        if (name == "body" || name == "html") {
            return;
        }
        if (name == "br") {
            tree_.append_element(current(), "br");
            return;
        }
        if (name == "p") {
            const bool open = std::any_of(stack_.begin(), stack_.end(), [&](NodeId id) { return tag_of(id) == "p"; });
            if (!open) {
                tree_.append_element(current(), "p");
                return;
            }
        }
        if (is_formatting(name)) {
            forget_formatting(name);
        }
        for (std::size_t i = stack_.size(); i-- > 2;) {
            if (tag_of(stack_[i]) == name) {
                stack_.resize(i);
                if (in_set(name, {"td", "th", "caption", "table"})) {
                    clear_to_marker();
                }
                return;
            }
        }
    }

    void text(std::string_view data) {
        if (mode_ != Mode::in_body) {
            const bool blank = std::all_of(data.begin(), data.end(), is_ascii_space);
            if (blank) {
                if (current() != tree_.html()) {
                    tree_.append_text(current(), data);
                }
                return;
            }
            const bool raw_in_head = current() != tree_.html() && current() != tree_.head();
            if (!raw_in_head) {
                enter_body();
            }
        }
        if (mode_ == Mode::in_body) {
            reconstruct_formatting();
        }
        tree_.append_text(current(), data);
    }

    NodeTree& tree_;
    std::vector<NodeId> stack_;
    std::vector<NodeId> formatting_;
    bool skip_newline_ = false;
    Mode mode_ = Mode::before_head;
};

std::string charset_from_content_type(std::string_view content) {
    const std::string lower = text::ascii_lower(content);
    const auto at = lower.find("charset");
    if (at == std::string::npos) {
        return {};
    }
    std::size_t i = at + 7;
    while (i < lower.size() && is_ascii_space(lower[i])) {
        ++i;
    }
    if (i >= lower.size() || lower[i] != '=') {
        return {};
    }
    ++i;
    while (i < lower.size() && is_ascii_space(lower[i])) {
        ++i;
    }
    if (i < lower.size() && (lower[i] == '"' || lower[i] == '\'')) {
        ++i;
    }
    const std::size_t start = i;
    while (i < lower.size() && !is_ascii_space(lower[i]) && lower[i] != ';' && lower[i] != '"' && lower[i] != '\'') {
        ++i;
    }
    return lower.substr(start, i - start);
}

// Scans the first bytes of the payload for <meta charset> or an http-equiv
// content-type declaration.
std::string prescan_meta_charset(std::string_view payload) {
    const auto prefix = payload.substr(0, std::min<std::size_t>(payload.size(), 4096));
    Tokenizer tokenizer(prefix);
    Token tok;
    while (tokenizer.next(tok)) {
        if (tok.kind != Token::Kind::start_tag) {
            if (tok.kind == Token::Kind::end_tag && tok.name == "head") {
                break;
            }
            continue;
        }
        if (tok.name != "meta") {
            const TextMode mode = text_mode_for(tok.name);
            if (mode != TextMode::data) {
                tokenizer.set_mode(mode, tok.name);
            }
            continue;
        }
        std::string http_equiv;
        std::string content;
        for (const auto& attr : tok.attributes) {
            if (attr.name == "charset") {
                return text::ascii_lower(text::trim(attr.value));
            }
            if (attr.name == "http-equiv") {
                http_equiv = text::ascii_lower(attr.value);
            } else if (attr.name == "content") {
                content = attr.value;
            }
        }
        if (http_equiv == "content-type") {
            if (auto cs = charset_from_content_type(content); !cs.empty()) {
                return cs;
            }
        }
    }
    return {};
}

std::string canonical_charset(std::string label) {
    label = text::ascii_lower(text::trim(label));
    if (label == "iso-8859-1" || label == "latin1" || label == "us-ascii" || label == "ascii" ||
        label == "iso8859-1" || label == "l1") {
        return "windows-1252";
    }
    if (label == "utf8") {
        return "utf-8";
    }
    return label;
}

} // namespace

const std::string* Node::attribute(std::string_view name) const noexcept {
    for (const auto& attr : attributes) {
        if (attr.name == name) {
            return &attr.value;
        }
    }
    return nullptr;
}

NodeTree::NodeTree() {
    nodes_.push_back(Node{NodeKind::document, "#document", {}, {}, kNoNode, {}});
    html_ = append_element(0, "html");
    head_ = append_element(html_, "head");
    body_ = append_element(html_, "body");
}

NodeId NodeTree::append_element(NodeId parent, std::string tag, std::vector<Attribute> attributes) {
    const auto id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(Node{NodeKind::element, std::move(tag), std::move(attributes), {}, parent, {}});
    nodes_[parent].children.push_back(id);
    return id;
}

void NodeTree::append_text(NodeId parent, std::string_view text) {
    if (text.empty()) {
        return;
    }
    auto& siblings = nodes_[parent].children;
    if (!siblings.empty() && nodes_[siblings.back()].kind == NodeKind::text) {
        nodes_[siblings.back()].text.append(text);
        return;
    }
    const auto id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(Node{NodeKind::text, {}, {}, std::string(text), parent, {}});
    nodes_[parent].children.push_back(id);
}

void NodeTree::append_comment(NodeId parent, std::string text) {
    const auto id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(Node{NodeKind::comment, {}, {}, std::move(text), parent, {}});
    nodes_[parent].children.push_back(id);
}

void NodeTree::merge_attributes(NodeId target, const std::vector<Attribute>& attributes) {
    auto& node = nodes_[target];
    for (const auto& attr : attributes) {
        if (node.attribute(attr.name) == nullptr) {
            node.attributes.push_back(attr);
        }
    }
}

bool NodeTree::is_ancestor(NodeId ancestor, NodeId id) const {
    for (NodeId cur = node(id).parent; cur != kNoNode; cur = node(cur).parent) {
        if (cur == ancestor) {
            return true;
        }
    }
    return false;
}

void NodeTree::visit(NodeId from, const std::function<void(NodeId)>& fn) const {
    std::vector<NodeId> stack{from};
    while (!stack.empty()) {
        const NodeId id = stack.back();
        stack.pop_back();
        fn(id);
        const auto& children = node(id).children;
        for (auto it = children.rbegin(); it != children.rend(); ++it) {
            stack.push_back(*it);
        }
    }
}

std::string NodeTree::text_content(NodeId id) const {
    std::string out;
    visit(id, [&](NodeId n) {
        if (node(n).kind == NodeKind::text) {
            out += node(n).text;
        }
    });
    return out;
}

std::vector<NodeId> NodeTree::elements_by_tag(std::string_view tag) const {
    std::vector<NodeId> out;
    visit(root(), [&](NodeId n) {
        if (node(n).is_element(tag)) {
            out.push_back(n);
        }
    });
    return out;
}

std::string NodeTree::serialize() const {
    std::string out;
    serialize_node(html_, out);
    return out;
}

void NodeTree::serialize_node(NodeId id, std::string& out) const {
    const Node& n = node(id);
    switch (n.kind) {
    case NodeKind::document:
        for (NodeId c : n.children) {
            serialize_node(c, out);
        }
        return;
    case NodeKind::text: {
        const Node& parent = node(n.parent);
        if (text_mode_for(parent.tag) == TextMode::rawtext) {
            out += n.text;
        } else {
            out += escape_html(n.text);
        }
        return;
    }
    case NodeKind::comment:
        out += "<!--" + n.text + "-->";
        return;
    case NodeKind::element:
        break;
    }
    out += "<" + n.tag;
    for (const auto& attr : n.attributes) {
        out += " " + attr.name + "=\"" + escape_html(attr.value) + "\"";
    }
    out += ">";
    if (is_void_element(n.tag)) {
        return;
    }
    for (NodeId c : n.children) {
        serialize_node(c, out);
    }
    out += "</" + n.tag + ">";
}

std::string decode_entities(std::string_view raw) {
    if (raw.find('&') == std::string_view::npos) {
        return std::string(raw);
    }
    std::string out;
    out.reserve(raw.size());
    std::size_t i = 0;
    while (i < raw.size()) {
        if (raw[i] != '&') {
            out.push_back(raw[i++]);
            continue;
        }
        std::size_t j = i + 1;
        if (j < raw.size() && raw[j] == '#') {
            ++j;
            const bool hex = j < raw.size() && (raw[j] == 'x' || raw[j] == 'X');
            if (hex) {
                ++j;
            }
            const std::size_t digits_start = j;
            std::uint32_t value = 0;
            while (j < raw.size() && (hex ? std::isxdigit(static_cast<unsigned char>(raw[j])) != 0
                                          : std::isdigit(static_cast<unsigned char>(raw[j])) != 0)) {
                const char c = raw[j];
                const std::uint32_t d = std::isdigit(static_cast<unsigned char>(c)) != 0
                                            ? static_cast<std::uint32_t>(c - '0')
                                            : static_cast<std::uint32_t>((c | 0x20) - 'a' + 10);
                value = std::min<std::uint32_t>(value * (hex ? 16 : 10) + d, 0x110000);
                ++j;
            }
            if (j == digits_start) {
                out.push_back(raw[i++]);
                continue;
            }
            if (j < raw.size() && raw[j] == ';') {
                ++j;
            }
            char32_t cp = value;
            if (cp >= 0x80 && cp <= 0x9F) {
                cp = kC1Remap[cp - 0x80];
            } else if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
                cp = text::kReplacement;
            }
            text::append_utf8(out, cp);
            i = j;
            continue;
        }
        while (j < raw.size() && std::isalnum(static_cast<unsigned char>(raw[j])) != 0 && j - i <= 10) {
            ++j;
        }
        const auto name = raw.substr(i + 1, j - i - 1);
        const auto& table = named_entities();
        if (auto it = table.find(name); it != table.end() && j < raw.size() && raw[j] == ';') {
            text::append_utf8(out, it->second);
            i = j + 1;
            continue;
        }
        // Legacy references without the semicolon (&amp, &nbsp) outside attribute-ish contexts.
        if (auto it = table.find(name); it != table.end() && in_set(name, {"amp", "lt", "gt", "quot", "nbsp", "copy"})) {
            text::append_utf8(out, it->second);
            i = j;
            continue;
        }
        out.push_back(raw[i++]);
    }
    return out;
}

std::string escape_html(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

bool is_void_element(std::string_view tag) noexcept {
    return in_set(tag, {"area", "base", "basefont", "bgsound", "br", "col", "embed", "hr", "img", "input", "keygen",
                        "link", "meta", "param", "source", "track", "wbr"});
}

bool is_block_element(std::string_view tag) noexcept {
    return in_set(tag, {"address", "article", "aside", "blockquote", "body", "br", "caption", "center", "dd",
                        "details", "dialog", "dir", "div", "dl", "dt", "fieldset", "figcaption", "figure", "footer",
                        "form", "h1", "h2", "h3", "h4", "h5", "h6", "header", "hgroup", "hr", "html", "legend", "li",
                        "main", "menu", "nav", "ol", "option", "p", "pre", "section", "summary", "table", "tbody",
                        "td", "tfoot", "th", "thead", "tr", "ul"});
}

NodeTree parse_markup(std::string_view payload, std::optional<std::string_view> charset_hint) {
    NodeTree tree;
    std::string charset;
    std::string_view body = payload;
    if (body.substr(0, 3) == "\xEF\xBB\xBF") {
        charset = "utf-8";
        body = body.substr(3);
    } else if (body.substr(0, 2) == "\xFE\xFF") {
        charset = "utf-16be";
        body = body.substr(2);
    } else if (body.substr(0, 2) == "\xFF\xFE") {
        charset = "utf-16le";
        body = body.substr(2);
    }
    if (charset.empty() && charset_hint && !charset_hint->empty()) {
        auto hint = canonical_charset(std::string(*charset_hint));
        if (text::is_known_charset(hint)) {
            charset = hint;
        }
    }
    if (charset.empty()) {
        auto declared = canonical_charset(prescan_meta_charset(body));
        // A document that could be read as ASCII cannot really be UTF-16.
        if (declared.rfind("utf-16", 0) == 0) {
            declared = "utf-8";
        }
        if (!declared.empty() && text::is_known_charset(declared)) {
            charset = declared;
        }
    }
    if (charset.empty()) {
        charset = "utf-8";
    }
    std::string decoded;
    if (charset == "utf-8") {
        decoded = text::sanitize_utf8(body);
    } else {
        try {
            decoded = text::to_utf8(body, charset);
        } catch (const std::exception&) {
            charset = "utf-8";
            decoded = text::sanitize_utf8(body);
        }
    }
    tree.set_charset(charset);
    TreeBuilder(tree).build(decoded);
    return tree;
}

} // namespace ccurate
