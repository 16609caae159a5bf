#include "ccurate/markup.hpp"

#include "generators.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <fstream>

using namespace ccurate;

namespace {

// Same notation as tools/record_parser_oracle.py.
std::string shape(const NodeTree& tree, NodeId id) {
    std::vector<std::string> parts;
    for (NodeId child : tree.node(id).children) {
        const Node& n = tree.node(child);
        if (n.kind == NodeKind::text) {
            if (!parts.empty() && parts.back().front() == '"') {
                auto merged = nlohmann::json::parse(parts.back()).get<std::string>() + n.text;
                parts.back() = nlohmann::json(merged).dump();
            } else {
                parts.push_back(nlohmann::json(n.text).dump());
            }
        } else if (n.kind == NodeKind::element) {
            parts.push_back(n.tag + "(" + shape(tree, child) + ")");
        }
    }
    std::string out;
    for (const auto& p : parts) {
        out += (out.empty() ? "" : " ") + p;
    }
    return out;
}

} // namespace

TEST(Markup, WellFormedIdentity) {
    const auto tree = parse_markup("<html><head></head><body>x</body></html>");
    const auto& body = tree.node(tree.body());
    ASSERT_EQ(body.children.size(), 1u);
    EXPECT_EQ(tree.node(body.children[0]).kind, NodeKind::text);
    EXPECT_EQ(tree.node(body.children[0]).text, "x");
}

TEST(Markup, EmptyPayload) {
    const auto tree = parse_markup("");
    EXPECT_TRUE(tree.node(tree.head()).children.empty());
    EXPECT_TRUE(tree.node(tree.body()).children.empty());
}

TEST(Markup, UnclosedParagraphsAreSiblings) {
    const auto tree = parse_markup("<p>a<p>b");
    EXPECT_EQ(shape(tree, tree.body()), R"(p("a") p("b"))");
}

TEST(Markup, MatchesRecordedReferenceParser) {
    std::ifstream in(gen::fixtures_dir() / "markup" / "malformed.json");
    const auto j = nlohmann::json::parse(in);
    for (const auto& c : j.at("cases")) {
        const auto input = c.at("input").get<std::string>();
        const auto tree = parse_markup(input);
        EXPECT_EQ(shape(tree, tree.body()), c.at("body").get<std::string>()) << input;
    }
}

TEST(Markup, EntitiesAndAttributes) {
    const auto tree = parse_markup(R"(<a HREF='x?a=1&amp;b=2' title=ok>&lt;&eacute;&#233;&#xE9;</a>)");
    const auto anchors = tree.elements_by_tag("a");
    ASSERT_EQ(anchors.size(), 1u);
    EXPECT_EQ(*tree.node(anchors[0]).attribute("href"), "x?a=1&b=2");
    EXPECT_EQ(*tree.node(anchors[0]).attribute("title"), "ok");
    EXPECT_EQ(tree.text_content(anchors[0]), "<\xc3\xa9\xc3\xa9\xc3\xa9");
}

TEST(Markup, CharsetResolution) {
    // Latin-1 byte for e-acute, declared by meta.
    const std::string latin1 = "<meta charset=\"iso-8859-1\"><p>caf\xe9</p>";
    EXPECT_EQ(parse_markup(latin1).text_content(parse_markup(latin1).body()), "caf\xc3\xa9");
    // Hint beats meta.
    const std::string utf8 = "<meta charset=\"iso-8859-1\"><p>caf\xc3\xa9</p>";
    const auto hinted = parse_markup(utf8, "utf-8");
    EXPECT_EQ(hinted.text_content(hinted.body()), "caf\xc3\xa9");
    // BOM beats hint.
    const std::string bom = "\xef\xbb\xbf<p>caf\xc3\xa9</p>";
    const auto t = parse_markup(bom, "iso-8859-1");
    EXPECT_EQ(t.text_content(t.body()), "caf\xc3\xa9");
    // Undecodable bytes become replacement characters.
    const auto bad = parse_markup("<p>a\xff</p>");
    EXPECT_EQ(bad.text_content(bad.body()), "a\xef\xbf\xbd");
}

TEST(Markup, NeverFailsOnRandomBytes) {
    gen::Rng rng(7);
    for (int i = 0; i < 300; ++i) {
        std::string junk;
        const int n = gen::uniform(rng, 0, 400);
        for (int k = 0; k < n; ++k) {
            static const char* pieces[] = {"<", ">", "</", "<p", "<div ", "=\"", "'", "&", "&#", "<!--", "-->",
                                           "<script>", "</script>", "\xff", "a", " ", "<html>", "<body", "<!"};
            junk += pieces[gen::uniform(rng, 0, 18)];
        }
        NodeTree tree;
        ASSERT_NO_THROW(tree = parse_markup(junk));
        EXPECT_NE(tree.head(), kNoNode);
        EXPECT_NE(tree.body(), kNoNode);
        // Parent links are consistent.
        tree.visit(tree.root(), [&](NodeId id) {
            for (NodeId c : tree.node(id).children) {
                EXPECT_EQ(tree.node(c).parent, id);
            }
        });
    }
}

TEST(Markup, ScriptAndCommentContentStayRaw) {
    const auto tree = parse_markup("<script>if (a < b) { x = '</p>'; }</script><!-- <a href=x> -->");
    const auto scripts = tree.elements_by_tag("script");
    ASSERT_EQ(scripts.size(), 1u);
    EXPECT_EQ(tree.text_content(scripts[0]), "if (a < b) { x = '</p>'; }");
    EXPECT_TRUE(tree.elements_by_tag("a").empty());
}
