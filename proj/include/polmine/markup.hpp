#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Minimal document tree shared by the strict XML parser (feeds, corpus files)
// and the lenient HTML parser (article pages).
namespace polmine::markup {

struct Node {
  enum class Kind { element, text };

  Kind kind = Kind::element;
  std::string name;  // element name; lowercase for HTML
  std::vector<std::pair<std::string, std::string>> attributes;
  std::string text;  // text nodes only, entities decoded
  std::vector<Node> children;
  std::size_t offset = 0;  // byte offset of the node in its source

  bool is_element() const { return kind == Kind::element; }
  bool is_text() const { return kind == Kind::text; }

  // Name without namespace prefix: "dc:date" -> "date".
  std::string_view local_name() const;

  const std::string* attribute(std::string_view key) const;
  bool has_class(std::string_view cls) const;

  // First direct child element with the given local name.
  const Node* child(std::string_view local) const;

  // Concatenated descendant text, verbatim.
  std::string text_content() const;
};

using NodePredicate = std::function<bool(const Node&)>;

// Depth-first, document order. Does not descend into matches.
std::vector<const Node*> find_all(const Node& root, const NodePredicate& pred);
const Node* find_first(const Node& root, const NodePredicate& pred);

// Like find_all, but also returns the chain of matching ancestors for each
// match (outermost first), so callers can reason about nesting.
struct NestedMatch {
  const Node* node;
  std::vector<const Node*> matching_ancestors;
};
std::vector<NestedMatch> find_all_nested(const Node& root, const NodePredicate& pred);

// Well-formed XML. Throws ParseError naming the byte offset. The returned
// node is the document element. Input must already be UTF-8.
Node parse_xml(std::string_view utf8);

// Reads the encoding from the XML declaration (default UTF-8), converts to
// UTF-8 and parses.
Node parse_xml_bytes(std::string_view bytes);

// Lenient HTML. Never throws on bad markup. The returned node is a synthetic
// element named "#document" holding the top-level nodes.
Node parse_html(std::string_view utf8);

// Decodes numeric references and named entities. With html = false only the
// five XML entities are known; unknown references are kept verbatim.
std::string decode_entities(std::string_view s, bool html);

std::string escape_text(std::string_view s);
std::string escape_attribute(std::string_view s);

// HTML serialization of a subtree.
std::string to_html(const Node& node);

// Visible text of an HTML subtree. Block elements start new lines, runs of
// whitespace collapse, empty lines are dropped; lines joined with '\n'.
// script/style/noscript/template are never visible. Subtrees for which
// skip returns true are ignored.
std::string inner_text(const Node& node, const NodePredicate& skip = {});

// Parses an HTML fragment and returns its visible text.
std::string html_to_text(std::string_view html);

// Removes every descendant element with one of the given names.
void remove_elements(Node& node, const std::vector<std::string_view>& names);

}  // namespace polmine::markup
