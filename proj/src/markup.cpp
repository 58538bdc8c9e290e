#include "polmine/markup.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include "polmine/errors.hpp"
#include "polmine/text.hpp"

namespace polmine::markup {

// ---------------------------------------------------------------------------
// Node helpers

std::string_view Node::local_name() const {
  std::string_view n = name;
  if (auto colon = n.find(':'); colon != std::string_view::npos) n.remove_prefix(colon + 1);
  return n;
}

const std::string* Node::attribute(std::string_view key) const {
  for (const auto& [k, v] : attributes) {
    if (text::iequals_ascii(k, key)) return &v;
  }
  return nullptr;
}

bool Node::has_class(std::string_view cls) const {
  const std::string* classes = attribute("class");
  if (!classes) return false;
  for (const auto& token : text::split(*classes, ' ')) {
    if (text::trim(token) == cls) return true;
  }
  return false;
}

const Node* Node::child(std::string_view local) const {
  for (const auto& c : children) {
    if (c.is_element() && c.local_name() == local) return &c;
  }
  return nullptr;
}

std::string Node::text_content() const {
  if (is_text()) return text;
  std::string out;
  for (const auto& c : children) out += c.text_content();
  return out;
}

namespace {

void collect(const Node& node, const NodePredicate& pred, std::vector<const Node*>& out) {
  for (const auto& c : node.children) {
    if (!c.is_element()) continue;
    if (pred(c)) {
      out.push_back(&c);
    } else {
      collect(c, pred, out);
    }
  }
}

void collect_nested(const Node& node, const NodePredicate& pred, std::vector<const Node*>& chain,
                    std::vector<NestedMatch>& out) {
  for (const auto& c : node.children) {
    if (!c.is_element()) continue;
    bool match = pred(c);
    if (match) {
      out.push_back({&c, chain});
      chain.push_back(&c);
    }
    collect_nested(c, pred, chain, out);
    if (match) chain.pop_back();
  }
}

}  // namespace

std::vector<const Node*> find_all(const Node& root, const NodePredicate& pred) {
  std::vector<const Node*> out;
  collect(root, pred, out);
  return out;
}

const Node* find_first(const Node& root, const NodePredicate& pred) {
  for (const auto& c : root.children) {
    if (!c.is_element()) continue;
    if (pred(c)) return &c;
    if (const Node* hit = find_first(c, pred)) return hit;
  }
  return nullptr;
}

std::vector<NestedMatch> find_all_nested(const Node& root, const NodePredicate& pred) {
  std::vector<NestedMatch> out;
  std::vector<const Node*> chain;
  collect_nested(root, pred, chain, out);
  return out;
}

// ---------------------------------------------------------------------------
// Entities

namespace {

const std::unordered_map<std::string_view, char32_t>& html_entities() {
  static const std::unordered_map<std::string_view, char32_t> table = {
      {"amp", '&'},       {"lt", '<'},        {"gt", '>'},        {"quot", '"'},
      {"apos", '\''},     {"nbsp", 0xA0},     {"laquo", 0xAB},    {"raquo", 0xBB},
      {"eacute", 0xE9},   {"egrave", 0xE8},   {"ecirc", 0xEA},    {"euml", 0xEB},
      {"agrave", 0xE0},   {"aacute", 0xE1},   {"acirc", 0xE2},    {"auml", 0xE4},
      {"ccedil", 0xE7},   {"icirc", 0xEE},    {"iuml", 0xEF},     {"iacute", 0xED},
      {"ocirc", 0xF4},    {"ouml", 0xF6},     {"oacute", 0xF3},   {"ugrave", 0xF9},
      {"ucirc", 0xFB},    {"uuml", 0xFC},     {"uacute", 0xFA},   {"ntilde", 0xF1},
      {"oelig", 0x153},   {"OElig", 0x152},   {"aelig", 0xE6},    {"AElig", 0xC6},
      {"Eacute", 0xC9},   {"Egrave", 0xC8},   {"Ecirc", 0xCA},    {"Agrave", 0xC0},
      {"Aacute", 0xC1},   {"Acirc", 0xC2},    {"Ccedil", 0xC7},   {"Icirc", 0xCE},
      {"Iacute", 0xCD},   {"Ocirc", 0xD4},    {"Oacute", 0xD3},   {"Ucirc", 0xDB},
      {"Uacute", 0xDA},   {"Ntilde", 0xD1},   {"yuml", 0xFF},     {"hellip", 0x2026},
      {"mdash", 0x2014},  {"ndash", 0x2013},  {"lsquo", 0x2018},  {"rsquo", 0x2019},
      {"ldquo", 0x201C},  {"rdquo", 0x201D},  {"sbquo", 0x201A},  {"bdquo", 0x201E},
      {"bull", 0x2022},   {"middot", 0xB7},   {"copy", 0xA9},     {"reg", 0xAE},
      {"trade", 0x2122},  {"euro", 0x20AC},   {"deg", 0xB0},      {"times", 0xD7},
      {"iexcl", 0xA1},    {"iquest", 0xBF},   {"thinsp", 0x2009}, {"ensp", 0x2002},
      {"emsp", 0x2003},   {"shy", 0xAD},      {"sect", 0xA7},     {"para", 0xB6},
      {"ordm", 0xBA},     {"ordf", 0xAA},     {"frac12", 0xBD},   {"star", 0x2606},
      {"starf", 0x2605},
  };
  return table;
}

// Parses the reference starting after '&' in s at pos. On success returns
// the code point and sets end to the position after ';'.
bool decode_reference(std::string_view s, std::size_t pos, bool html, char32_t& cp,
                      std::size_t& end) {
  auto semi = s.find(';', pos);
  if (semi == std::string_view::npos || semi == pos || semi - pos > 32) return false;
  std::string_view ref = s.substr(pos, semi - pos);
  if (ref.front() == '#') {
    ref.remove_prefix(1);
    int base = 10;
    if (!ref.empty() && (ref.front() == 'x' || ref.front() == 'X')) {
      base = 16;
      ref.remove_prefix(1);
    }
    if (ref.empty() || ref.size() > 8) return false;
    unsigned long value = 0;
    for (char c : ref) {
      int d;
      if (c >= '0' && c <= '9') {
        d = c - '0';
      } else if (base == 16 && c >= 'a' && c <= 'f') {
        d = c - 'a' + 10;
      } else if (base == 16 && c >= 'A' && c <= 'F') {
        d = c - 'A' + 10;
      } else {
        return false;
      }
      value = value * static_cast<unsigned long>(base) + static_cast<unsigned long>(d);
    }
    if (value == 0 || value > 0x10FFFF) return false;
    cp = static_cast<char32_t>(value);
    end = semi + 1;
    return true;
  }
  if (!html) {
    static const std::array<std::pair<std::string_view, char32_t>, 5> xml = {
        {{"amp", '&'}, {"lt", '<'}, {"gt", '>'}, {"quot", '"'}, {"apos", '\''}}};
    for (const auto& [name, value] : xml) {
      if (ref == name) {
        cp = value;
        end = semi + 1;
        return true;
      }
    }
    return false;
  }
  const auto& table = html_entities();
  auto it = table.find(ref);
  if (it == table.end()) return false;
  cp = it->second;
  end = semi + 1;
  return true;
}

}  // namespace

std::string decode_entities(std::string_view s, bool html) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '&') {
      char32_t cp;
      std::size_t end;
      if (decode_reference(s, i + 1, html, cp, end)) {
        text::append_utf8(out, cp);
        i = end;
        continue;
      }
    }
    out.push_back(s[i++]);
  }
  return out;
}

std::string escape_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '\r': out += "&#13;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string escape_attribute(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\n': out += "&#10;"; break;
      case '\r': out += "&#13;"; break;
      case '\t': out += "&#9;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Strict XML

namespace {

bool is_name_start(unsigned char c) {
  return std::isalpha(c) || c == '_' || c == ':' || c >= 0x80;
}

bool is_name_char(unsigned char c) {
  return is_name_start(c) || std::isdigit(c) || c == '-' || c == '.';
}

bool is_xml_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

class XmlParser {
 public:
  explicit XmlParser(std::string_view in) : in_(in) {}

  Node parse_document() {
    if (in_.starts_with("\xEF\xBB\xBF")) pos_ = 3;
    std::optional<Node> root;
    for (;;) {
      skip_space();
      if (eof()) break;
      if (!looking_at("<")) fail("text outside the document element");
      if (looking_at("<?")) {
        skip_past("?>", "unterminated processing instruction");
      } else if (looking_at("<!--")) {
        skip_past("-->", "unterminated comment");
      } else if (looking_at("<!DOCTYPE")) {
        skip_doctype();
      } else {
        if (root) fail("more than one document element");
        root = parse_element(0);
      }
    }
    if (!root) fail("no document element");
    return std::move(*root);
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError("malformed XML: " + what, pos_); }

  bool eof() const { return pos_ >= in_.size(); }
  bool looking_at(std::string_view s) const { return in_.substr(pos_).starts_with(s); }

  void skip_space() {
    while (!eof() && is_xml_space(in_[pos_])) ++pos_;
  }

  void skip_past(std::string_view terminator, const char* error) {
    auto end = in_.find(terminator, pos_);
    if (end == std::string_view::npos) fail(error);
    pos_ = end + terminator.size();
  }

  void skip_doctype() {
    int depth = 0;
    while (!eof()) {
      char c = in_[pos_++];
      if (c == '[') ++depth;
      if (c == ']') --depth;
      if (c == '>' && depth <= 0) return;
    }
    fail("unterminated DOCTYPE");
  }

  std::string parse_name() {
    std::size_t start = pos_;
    if (eof() || !is_name_start(static_cast<unsigned char>(in_[pos_]))) fail("expected a name");
    while (!eof() && is_name_char(static_cast<unsigned char>(in_[pos_]))) ++pos_;
    return std::string(in_.substr(start, pos_ - start));
  }

  std::string decode(std::string_view raw, std::size_t raw_offset) const {
    std::string out;
    out.reserve(raw.size());
    std::size_t i = 0;
    while (i < raw.size()) {
      if (raw[i] == '&') {
        char32_t cp;
        std::size_t end;
        if (!decode_reference(raw, i + 1, false, cp, end)) {
          throw ParseError("malformed XML: invalid entity reference", raw_offset + i);
        }
        text::append_utf8(out, cp);
        i = end;
      } else if (raw[i] == '\r') {
        // line-end normalization
        out.push_back('\n');
        if (i + 1 < raw.size() && raw[i + 1] == '\n') ++i;
        ++i;
      } else {
        out.push_back(raw[i++]);
      }
    }
    return out;
  }

  Node parse_element(int depth) {
    if (depth > 512) fail("nesting too deep");
    Node node;
    node.offset = pos_;
    ++pos_;  // '<'
    node.name = parse_name();
    for (;;) {
      bool had_space = !eof() && is_xml_space(in_[pos_]);
      skip_space();
      if (eof()) fail("unterminated start tag <" + node.name + ">");
      if (looking_at("/>")) {
        pos_ += 2;
        return node;
      }
      if (in_[pos_] == '>') {
        ++pos_;
        break;
      }
      if (!had_space) fail("expected whitespace between attributes");
      std::string key = parse_name();
      skip_space();
      if (eof() || in_[pos_] != '=') fail("expected '=' after attribute " + key);
      ++pos_;
      skip_space();
      if (eof() || (in_[pos_] != '"' && in_[pos_] != '\'')) fail("expected quoted attribute value");
      char quote = in_[pos_++];
      auto end = in_.find(quote, pos_);
      if (end == std::string_view::npos) fail("unterminated attribute value");
      std::string_view raw = in_.substr(pos_, end - pos_);
      if (raw.find('<') != std::string_view::npos) fail("'<' in attribute value");
      for (const auto& a : node.attributes) {
        if (a.first == key) fail("duplicate attribute " + key);
      }
      node.attributes.emplace_back(std::move(key), decode(raw, pos_));
      pos_ = end + 1;
    }

    std::string pending_text;
    std::size_t text_offset = pos_;
    auto flush_text = [&] {
      if (pending_text.empty()) return;
      Node t;
      t.kind = Node::Kind::text;
      t.text = std::move(pending_text);
      t.offset = text_offset;
      node.children.push_back(std::move(t));
      pending_text.clear();
    };

    for (;;) {
      if (eof()) fail("missing end tag for <" + node.name + ">");
      if (looking_at("</")) {
        flush_text();
        std::size_t tag_at = pos_;
        pos_ += 2;
        std::string closing = parse_name();
        skip_space();
        if (eof() || in_[pos_] != '>') fail("malformed end tag");
        if (closing != node.name) {
          pos_ = tag_at;
          fail("end tag </" + closing + "> does not match <" + node.name + ">");
        }
        ++pos_;
        return node;
      }
      if (looking_at("<!--")) {
        skip_past("-->", "unterminated comment");
      } else if (looking_at("<![CDATA[")) {
        if (pending_text.empty()) text_offset = pos_;
        pos_ += 9;
        auto end = in_.find("]]>", pos_);
        if (end == std::string_view::npos) fail("unterminated CDATA section");
        pending_text.append(in_.substr(pos_, end - pos_));
        pos_ = end + 3;
      } else if (looking_at("<?")) {
        skip_past("?>", "unterminated processing instruction");
      } else if (looking_at("<")) {
        flush_text();
        node.children.push_back(parse_element(depth + 1));
      } else {
        if (pending_text.empty()) text_offset = pos_;
        auto end = in_.find('<', pos_);
        if (end == std::string_view::npos) end = in_.size();
        pending_text += decode(in_.substr(pos_, end - pos_), pos_);
        pos_ = end;
      }
    }
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

Node parse_xml(std::string_view utf8) { return XmlParser(utf8).parse_document(); }

Node parse_xml_bytes(std::string_view bytes) {
  std::string encoding;
  if (bytes.starts_with("<?xml")) {
    auto end = bytes.find("?>");
    std::string_view decl = bytes.substr(0, end);
    if (auto enc = decl.find("encoding"); enc != std::string_view::npos) {
      auto q = decl.find_first_of("\"'", enc);
      if (q != std::string_view::npos) {
        auto close = decl.find(decl[q], q + 1);
        if (close != std::string_view::npos) encoding = std::string(decl.substr(q + 1, close - q - 1));
      }
    }
  }
  if (encoding.empty()) return parse_xml(bytes);
  std::string utf8 = text::to_utf8(bytes, encoding);
  return parse_xml(utf8);
}

// ---------------------------------------------------------------------------
// Lenient HTML

namespace {

const std::unordered_set<std::string_view> kVoid = {"area", "base", "br", "col", "embed", "hr",
                                                    "img", "input", "link", "meta", "param",
                                                    "source", "track", "wbr"};

const std::unordered_set<std::string_view> kRawText = {"script", "style"};
const std::unordered_set<std::string_view> kEscapableRaw = {"title", "textarea"};

const std::unordered_set<std::string_view> kClosesParagraph = {
    "address", "article", "aside", "blockquote", "div", "dl", "fieldset", "figure", "footer",
    "form", "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr", "main", "nav", "ol", "p",
    "pre", "section", "table", "ul"};

const std::unordered_set<std::string_view> kPhrasing = {
    "a", "abbr", "b", "bdi", "bdo", "cite", "code", "em", "font", "i", "kbd", "label", "mark",
    "q", "s", "samp", "small", "span", "strong", "sub", "sup", "time", "u", "var"};

const std::unordered_set<std::string_view> kBlock = {
    "address", "article", "aside", "blockquote", "br", "dd", "div", "dl", "dt", "fieldset",
    "figcaption", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6", "header",
    "hr", "li", "main", "nav", "ol", "p", "pre", "section", "table", "tbody", "td", "tfoot",
    "th", "thead", "tr", "ul", "title"};

const std::unordered_set<std::string_view> kInvisible = {"script", "style", "noscript",
                                                         "template", "head"};

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

class HtmlBuilder {
 public:
  explicit HtmlBuilder(std::string_view in) : in_(in) {
    root_.name = "#document";
    stack_.push_back(&root_);
  }

  Node build() {
    while (pos_ < in_.size()) {
      if (in_[pos_] == '<') {
        if (in_.substr(pos_).starts_with("<!--")) {
          auto end = in_.find("-->", pos_ + 4);
          pos_ = end == std::string_view::npos ? in_.size() : end + 3;
        } else if (pos_ + 1 < in_.size() && (in_[pos_ + 1] == '!' || in_[pos_ + 1] == '?')) {
          auto end = in_.find('>', pos_);
          pos_ = end == std::string_view::npos ? in_.size() : end + 1;
        } else if (pos_ + 1 < in_.size() && in_[pos_ + 1] == '/') {
          end_tag();
        } else if (pos_ + 1 < in_.size() && std::isalpha(static_cast<unsigned char>(in_[pos_ + 1]))) {
          start_tag();
        } else {
          add_text(std::string_view("<"), pos_);
          ++pos_;
        }
      } else {
        auto end = in_.find('<', pos_ + 1);
        if (end == std::string_view::npos) end = in_.size();
        add_text(decode_entities(in_.substr(pos_, end - pos_), true), pos_);
        pos_ = end;
      }
    }
    return std::move(root_);
  }

 private:
  Node* top() { return stack_.back(); }

  void add_text(std::string_view t, std::size_t offset) {
    auto& kids = top()->children;
    if (!kids.empty() && kids.back().is_text()) {
      kids.back().text.append(t);
      return;
    }
    Node n;
    n.kind = Node::Kind::text;
    n.text = std::string(t);
    n.offset = offset;
    kids.push_back(std::move(n));
  }

  // Pops up to and including the innermost open element named name, walking
  // only through elements for which pass_through holds.
  template <typename Pred>
  void close_open(std::string_view name, Pred pass_through) {
    for (std::size_t i = stack_.size(); i-- > 1;) {
      if (stack_[i]->name == name) {
        stack_.resize(i);
        return;
      }
      if (!pass_through(stack_[i]->name)) return;
    }
  }

  void implied_closes(const std::string& name) {
    auto phrasing = [](const std::string& n) { return kPhrasing.count(n) > 0; };
    if (kClosesParagraph.count(name)) close_open("p", phrasing);
    if (name == "li") {
      close_open("li", [](const std::string& n) { return n != "ul" && n != "ol"; });
    } else if (name == "dt" || name == "dd") {
      close_open("dt", [](const std::string& n) { return n != "dl"; });
      close_open("dd", [](const std::string& n) { return n != "dl"; });
    } else if (name == "tr") {
      close_open("tr", [](const std::string& n) { return n != "table" && n != "tbody" && n != "thead"; });
    } else if (name == "td" || name == "th") {
      close_open("td", [](const std::string& n) { return n != "tr" && n != "table"; });
      close_open("th", [](const std::string& n) { return n != "tr" && n != "table"; });
    } else if (name == "option") {
      close_open("option", [](const std::string& n) { return n != "select"; });
    }
  }

  void start_tag() {
    Node node;
    node.offset = pos_;
    ++pos_;
    std::size_t start = pos_;
    while (pos_ < in_.size() && !std::isspace(static_cast<unsigned char>(in_[pos_])) &&
           in_[pos_] != '>' && in_[pos_] != '/') {
      ++pos_;
    }
    node.name = lower_ascii(in_.substr(start, pos_ - start));
    bool self_closing = false;
    while (pos_ < in_.size()) {
      char c = in_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
        continue;
      }
      if (c == '>') {
        ++pos_;
        break;
      }
      if (c == '/') {
        ++pos_;
        if (pos_ < in_.size() && in_[pos_] == '>') {
          self_closing = true;
          ++pos_;
          break;
        }
        continue;
      }
      std::size_t kstart = pos_;
      while (pos_ < in_.size() && !std::isspace(static_cast<unsigned char>(in_[pos_])) &&
             in_[pos_] != '=' && in_[pos_] != '>' && !(in_[pos_] == '/' && pos_ + 1 < in_.size() && in_[pos_ + 1] == '>')) {
        ++pos_;
      }
      std::string key = lower_ascii(in_.substr(kstart, pos_ - kstart));
      while (pos_ < in_.size() && std::isspace(static_cast<unsigned char>(in_[pos_]))) ++pos_;
      std::string value;
      if (pos_ < in_.size() && in_[pos_] == '=') {
        ++pos_;
        while (pos_ < in_.size() && std::isspace(static_cast<unsigned char>(in_[pos_]))) ++pos_;
        if (pos_ < in_.size() && (in_[pos_] == '"' || in_[pos_] == '\'')) {
          char q = in_[pos_++];
          auto end = in_.find(q, pos_);
          if (end == std::string_view::npos) end = in_.size();
          value = decode_entities(in_.substr(pos_, end - pos_), true);
          pos_ = std::min(end + 1, in_.size());
        } else {
          std::size_t vstart = pos_;
          while (pos_ < in_.size() && !std::isspace(static_cast<unsigned char>(in_[pos_])) && in_[pos_] != '>') ++pos_;
          value = decode_entities(in_.substr(vstart, pos_ - vstart), true);
        }
      }
      if (!key.empty() && node.attribute(key) == nullptr) node.attributes.emplace_back(std::move(key), std::move(value));
    }

    implied_closes(node.name);
    std::string name = node.name;
    top()->children.push_back(std::move(node));
    Node* inserted = &top()->children.back();
    if (kVoid.count(name) || self_closing) return;

    bool raw = kRawText.count(name) > 0;
    if (raw || kEscapableRaw.count(name)) {
      std::string closing = "</" + name;
      std::size_t end = pos_;
      for (;;) {
        end = in_.find("</", end);
        if (end == std::string_view::npos) break;
        if (text::iequals_ascii(in_.substr(end, closing.size()), closing)) break;
        end += 2;
      }
      if (end == std::string_view::npos) end = in_.size();
      std::string_view content = in_.substr(pos_, end - pos_);
      if (!content.empty()) {
        Node t;
        t.kind = Node::Kind::text;
        t.text = raw ? std::string(content) : decode_entities(content, true);
        t.offset = pos_;
        inserted->children.push_back(std::move(t));
      }
      auto gt = in_.find('>', end);
      pos_ = gt == std::string_view::npos ? in_.size() : gt + 1;
      return;
    }
    stack_.push_back(inserted);
  }

  void end_tag() {
    pos_ += 2;
    std::size_t start = pos_;
    while (pos_ < in_.size() && !std::isspace(static_cast<unsigned char>(in_[pos_])) && in_[pos_] != '>') ++pos_;
    std::string name = lower_ascii(in_.substr(start, pos_ - start));
    auto gt = in_.find('>', pos_);
    pos_ = gt == std::string_view::npos ? in_.size() : gt + 1;
    for (std::size_t i = stack_.size(); i-- > 1;) {
      if (stack_[i]->name == name) {
        stack_.resize(i);
        return;
      }
    }
  }

  std::string_view in_;
  std::size_t pos_ = 0;
  Node root_;
  std::vector<Node*> stack_;
};

void serialize(const Node& node, std::string& out) {
  if (node.is_text()) {
    out += escape_text(node.text);
    return;
  }
  bool document = node.name == "#document";
  if (!document) {
    out += '<';
    out += node.name;
    for (const auto& [k, v] : node.attributes) {
      out += ' ';
      out += k;
      out += "=\"";
      out += escape_attribute(v);
      out += '"';
    }
    out += '>';
    if (kVoid.count(node.name)) return;
  }
  bool raw = kRawText.count(node.name) > 0;
  for (const auto& c : node.children) {
    if (raw && c.is_text()) {
      out += c.text;
    } else {
      serialize(c, out);
    }
  }
  if (!document) {
    out += "</";
    out += node.name;
    out += '>';
  }
}

class TextCollector {
 public:
  explicit TextCollector(const NodePredicate& skip) : skip_(skip) {}

  void visit(const Node& node) {
    if (node.is_text()) {
      line_ += node.text;
      return;
    }
    if (kInvisible.count(node.name)) return;
    if (skip_ && skip_(node)) return;
    bool block = kBlock.count(node.name) > 0;
    if (block) break_line();
    for (const auto& c : node.children) visit(c);
    if (block) break_line();
  }

  std::string finish() {
    break_line();
    return text::join(lines_, "\n");
  }

 private:
  void break_line() {
    std::string collapsed = text::collapse_whitespace(line_);
    if (!collapsed.empty()) lines_.push_back(std::move(collapsed));
    line_.clear();
  }

  const NodePredicate& skip_;
  std::string line_;
  std::vector<std::string> lines_;
};

}  // namespace

Node parse_html(std::string_view utf8) { return HtmlBuilder(utf8).build(); }

std::string to_html(const Node& node) {
  std::string out;
  serialize(node, out);
  return out;
}

std::string inner_text(const Node& node, const NodePredicate& skip) {
  TextCollector collector(skip);
  if (node.is_text()) {
    collector.visit(node);
  } else {
    for (const auto& c : node.children) collector.visit(c);
  }
  return collector.finish();
}

std::string html_to_text(std::string_view html) { return inner_text(parse_html(html)); }

void remove_elements(Node& node, const std::vector<std::string_view>& names) {
  auto& kids = node.children;
  kids.erase(std::remove_if(kids.begin(), kids.end(),
                            [&](const Node& c) {
                              return c.is_element() &&
                                     std::find(names.begin(), names.end(), c.name) != names.end();
                            }),
             kids.end());
  for (auto& c : kids) {
    if (c.is_element()) remove_elements(c, names);
  }
}

}  // namespace polmine::markup
