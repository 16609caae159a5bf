#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ccurate {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

enum class NodeKind : std::uint8_t { document, element, text, comment };

struct Attribute {
    std::string name;
    std::string value;
};

struct Node {
    NodeKind kind = NodeKind::element;
    std::string tag;
    std::vector<Attribute> attributes;
    std::string text;
    NodeId parent = kNoNode;
    std::vector<NodeId> children;

    /// Attribute names are stored lowercase; lookup is exact on that form.
    const std::string* attribute(std::string_view name) const noexcept;
    bool is_element(std::string_view name) const noexcept { return kind == NodeKind::element && tag == name; }
};

/// Arena-backed DOM-like tree. Always contains exactly one `html`, `head`
/// and `body` element; parse_markup synthesises whichever the input omits.
class NodeTree {
public:
    NodeTree();

    NodeId root() const noexcept { return 0; }
    NodeId html() const noexcept { return html_; }
    NodeId head() const noexcept { return head_; }
    NodeId body() const noexcept { return body_; }

    const Node& node(NodeId id) const { return nodes_.at(id); }
    std::size_t size() const noexcept { return nodes_.size(); }

    bool is_ancestor(NodeId ancestor, NodeId id) const;
    /// Concatenated text of all descendant text nodes.
    std::string text_content(NodeId id) const;
    /// Pre-order (document order) traversal below and including `from`.
    void visit(NodeId from, const std::function<void(NodeId)>& fn) const;
    std::vector<NodeId> elements_by_tag(std::string_view tag) const;

    /// Re-serialises the tree as HTML.
    std::string serialize() const;

    /// Charset the payload was decoded from.
    const std::string& charset() const noexcept { return charset_; }

    // Construction interface used by the parser.
    NodeId append_element(NodeId parent, std::string tag, std::vector<Attribute> attributes = {});
    void append_text(NodeId parent, std::string_view text);
    void append_comment(NodeId parent, std::string text);
    void merge_attributes(NodeId target, const std::vector<Attribute>& attributes);
    void set_charset(std::string charset) { charset_ = std::move(charset); }

private:
    void serialize_node(NodeId id, std::string& out) const;

    std::vector<Node> nodes_;
    NodeId html_ = kNoNode;
    NodeId head_ = kNoNode;
    NodeId body_ = kNoNode;
    std::string charset_ = "utf-8";
};

/// Error-tolerant HTML parse. Charset is resolved BOM, then hint, then
/// `<meta>` declaration, then UTF-8. Never throws on malformed markup.
NodeTree parse_markup(std::string_view payload, std::optional<std::string_view> charset_hint = std::nullopt);

/// Decodes HTML character references (`&amp;`, `&#233;`, `&#xE9;`).
std::string decode_entities(std::string_view raw);

std::string escape_html(std::string_view text);

bool is_void_element(std::string_view tag) noexcept;
bool is_block_element(std::string_view tag) noexcept;

} // namespace ccurate
