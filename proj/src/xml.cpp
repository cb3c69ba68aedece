#include "xml.hpp"

#include <cctype>
#include <charconv>
#include <unordered_map>

#include "mathsearch/slt.hpp"

namespace mathsearch::xml {

namespace {

// Named entities that show up in MathML produced by common converters.
const std::unordered_map<std::string_view, char32_t>& named_entities() {
  static const std::unordered_map<std::string_view, char32_t> table = {
      {"lt", U'<'},
      {"gt", U'>'},
      {"amp", U'&'},
      {"quot", U'"'},
      {"apos", U'\''},
      {"nbsp", 0x00A0},
      {"InvisibleTimes", 0x2062},
      {"it", 0x2062},
      {"ApplyFunction", 0x2061},
      {"af", 0x2061},
      {"InvisibleComma", 0x2063},
      {"ic", 0x2063},
      {"InvisiblePlus", 0x2064},
      {"ThinSpace", 0x2009},
      {"thinsp", 0x2009},
      {"MediumSpace", 0x205F},
      {"NegativeThinSpace", 0x200B},
      {"ZeroWidthSpace", 0x200B},
      {"alpha", 0x03B1},
      {"beta", 0x03B2},
      {"gamma", 0x03B3},
      {"delta", 0x03B4},
      {"epsilon", 0x03B5},
      {"epsi", 0x03B5},
      {"zeta", 0x03B6},
      {"eta", 0x03B7},
      {"theta", 0x03B8},
      {"iota", 0x03B9},
      {"kappa", 0x03BA},
      {"lambda", 0x03BB},
      {"mu", 0x03BC},
      {"nu", 0x03BD},
      {"xi", 0x03BE},
      {"pi", 0x03C0},
      {"rho", 0x03C1},
      {"sigma", 0x03C3},
      {"tau", 0x03C4},
      {"upsilon", 0x03C5},
      {"phi", 0x03C6},
      {"chi", 0x03C7},
      {"psi", 0x03C8},
      {"omega", 0x03C9},
      {"Gamma", 0x0393},
      {"Delta", 0x0394},
      {"Theta", 0x0398},
      {"Lambda", 0x039B},
      {"Xi", 0x039E},
      {"Pi", 0x03A0},
      {"Sigma", 0x03A3},
      {"Phi", 0x03A6},
      {"Psi", 0x03A8},
      {"Omega", 0x03A9},
      {"times", 0x00D7},
      {"divide", 0x00F7},
      {"minus", 0x2212},
      {"plusmn", 0x00B1},
      {"PlusMinus", 0x00B1},
      {"sdot", 0x22C5},
      {"middot", 0x00B7},
      {"CenterDot", 0x00B7},
      {"le", 0x2264},
      {"leq", 0x2264},
      {"ge", 0x2265},
      {"geq", 0x2265},
      {"ne", 0x2260},
      {"NotEqual", 0x2260},
      {"equiv", 0x2261},
      {"approx", 0x2248},
      {"sim", 0x223C},
      {"infin", 0x221E},
      {"Infinity", 0x221E},
      {"sum", 0x2211},
      {"Sum", 0x2211},
      {"prod", 0x220F},
      {"Product", 0x220F},
      {"int", 0x222B},
      {"Integral", 0x222B},
      {"part", 0x2202},
      {"PartialD", 0x2202},
      {"nabla", 0x2207},
      {"Del", 0x2207},
      {"isin", 0x2208},
      {"in", 0x2208},
      {"Element", 0x2208},
      {"notin", 0x2209},
      {"sub", 0x2282},
      {"sube", 0x2286},
      {"cup", 0x222A},
      {"cap", 0x2229},
      {"forall", 0x2200},
      {"exist", 0x2203},
      {"rarr", 0x2192},
      {"rightarrow", 0x2192},
      {"RightArrow", 0x2192},
      {"larr", 0x2190},
      {"harr", 0x2194},
      {"rArr", 0x21D2},
      {"Rightarrow", 0x21D2},
      {"hArr", 0x21D4},
      {"prime", 0x2032},
      {"hellip", 0x2026},
      {"ctdot", 0x22EF},
      {"langle", 0x27E8},
      {"rangle", 0x27E9},
      {"LeftAngleBracket", 0x27E8},
      {"RightAngleBracket", 0x27E9},
      {"lceil", 0x2308},
      {"rceil", 0x2309},
      {"lfloor", 0x230A},
      {"rfloor", 0x230B},
      {"Vert", 0x2016},
      {"DoubleVerticalBar", 0x2225},
      {"circ", 0x2218},
      {"deg", 0x00B0},
      {"hbar", 0x210F},
      {"ell", 0x2113},
      {"Re", 0x211C},
      {"Im", 0x2111},
      {"aleph", 0x2135},
      {"emptyset", 0x2205},
      {"empty", 0x2205},
  };
  return table;
}

[[noreturn]] void fail(const std::string& what, std::size_t offset) {
  throw ParseError(ParseError::Kind::MalformedInput,
                   "XML: " + what + " at offset " + std::to_string(offset));
}

std::string strip_prefix(std::string_view name) {
  auto colon = name.rfind(':');
  return std::string(colon == std::string_view::npos ? name : name.substr(colon + 1));
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == ':' || c == '_' || c == '-' ||
         c == '.' || static_cast<unsigned char>(c) >= 0x80;
}

class Reader {
 public:
  explicit Reader(std::string_view doc) : doc_(doc) {}

  Element read_document() {
    skip_misc();
    if (!starts_with("<")) fail("expected root element", pos_);
    Element root = read_element();
    skip_misc();
    if (pos_ != doc_.size()) fail("content after root element", pos_);
    return root;
  }

 private:
  bool starts_with(std::string_view s) const { return doc_.substr(pos_, s.size()) == s; }

  void skip_ws() {
    while (pos_ < doc_.size() && std::isspace(static_cast<unsigned char>(doc_[pos_]))) ++pos_;
  }

  void skip_past(std::string_view terminator) {
    auto end = doc_.find(terminator, pos_);
    if (end == std::string_view::npos) fail("unterminated construct", pos_);
    pos_ = end + terminator.size();
  }

  // Prolog, comments, processing instructions and doctype between elements.
  void skip_misc() {
    for (;;) {
      skip_ws();
      if (starts_with("<?")) {
        skip_past("?>");
      } else if (starts_with("<!--")) {
        skip_past("-->");
      } else if (starts_with("<!DOCTYPE") || starts_with("<!doctype")) {
        skip_doctype();
      } else {
        return;
      }
    }
  }

  void skip_doctype() {
    int depth = 0;
    while (pos_ < doc_.size()) {
      char c = doc_[pos_++];
      if (c == '[') ++depth;
      if (c == ']') --depth;
      if (c == '>' && depth <= 0) return;
    }
    fail("unterminated doctype", pos_);
  }

  std::string read_name() {
    auto start = pos_;
    while (pos_ < doc_.size() && is_name_char(doc_[pos_])) ++pos_;
    if (start == pos_) fail("expected name", pos_);
    return std::string(doc_.substr(start, pos_ - start));
  }

  Element read_element() {
    auto open_at = pos_;
    ++pos_;  // '<'
    auto qualified = read_name();
    Element el;
    el.name = strip_prefix(qualified);
    for (;;) {
      skip_ws();
      if (pos_ >= doc_.size()) fail("unterminated start tag <" + qualified + ">", open_at);
      if (starts_with("/>")) {
        pos_ += 2;
        return el;
      }
      if (doc_[pos_] == '>') {
        ++pos_;
        break;
      }
      auto attr = read_name();
      skip_ws();
      if (pos_ >= doc_.size() || doc_[pos_] != '=') fail("expected '=' after attribute", pos_);
      ++pos_;
      skip_ws();
      if (pos_ >= doc_.size() || (doc_[pos_] != '"' && doc_[pos_] != '\'')) {
        fail("expected quoted attribute value", pos_);
      }
      char quote = doc_[pos_++];
      auto end = doc_.find(quote, pos_);
      if (end == std::string_view::npos) fail("unterminated attribute value", pos_);
      std::string value;
      decode(doc_.substr(pos_, end - pos_), value, pos_);
      pos_ = end + 1;
      // xmlns declarations carry no content
      if (attr == "xmlns" || attr.rfind("xmlns:", 0) == 0) continue;
      el.attributes.emplace_back(strip_prefix(attr), std::move(value));
    }
    read_content(el, qualified, open_at);
    return el;
  }

  void read_content(Element& el, const std::string& qualified, std::size_t open_at) {
    for (;;) {
      if (pos_ >= doc_.size()) fail("unclosed element <" + qualified + ">", open_at);
      if (starts_with("</")) {
        pos_ += 2;
        auto closing = read_name();
        if (closing != qualified) fail("mismatched </" + closing + "> for <" + qualified + ">", pos_);
        skip_ws();
        if (pos_ >= doc_.size() || doc_[pos_] != '>') fail("malformed end tag", pos_);
        ++pos_;
        return;
      }
      if (starts_with("<!--")) {
        skip_past("-->");
      } else if (starts_with("<![CDATA[")) {
        pos_ += 9;
        auto end = doc_.find("]]>", pos_);
        if (end == std::string_view::npos) fail("unterminated CDATA", pos_);
        el.text.append(doc_.substr(pos_, end - pos_));
        pos_ = end + 3;
      } else if (starts_with("<?")) {
        skip_past("?>");
      } else if (doc_[pos_] == '<') {
        el.children.push_back(read_element());
      } else {
        auto end = doc_.find('<', pos_);
        if (end == std::string_view::npos) end = doc_.size();
        decode(doc_.substr(pos_, end - pos_), el.text, pos_);
        pos_ = end;
      }
    }
  }

  static void decode(std::string_view raw, std::string& out, std::size_t base) {
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '&') {
        out.push_back(raw[i]);
        continue;
      }
      auto semi = raw.find(';', i);
      if (semi == std::string_view::npos) fail("unterminated entity", base + i);
      auto name = raw.substr(i + 1, semi - i - 1);
      if (!name.empty() && name[0] == '#') {
        std::uint32_t cp = 0;
        bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
        auto digits = name.substr(hex ? 2 : 1);
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
        if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty()) {
          fail("bad character reference", base + i);
        }
        append_utf8(out, static_cast<char32_t>(cp));
      } else {
        auto it = named_entities().find(name);
        if (it == named_entities().end()) fail("unknown entity &" + std::string(name) + ";", base + i);
        append_utf8(out, it->second);
      }
      i = semi;
    }
  }

  std::string_view doc_;
  std::size_t pos_ = 0;
};

}  // namespace

std::optional<std::string_view> Element::attribute(std::string_view key) const {
  for (const auto& [k, v] : attributes) {
    if (k == key) return std::string_view(v);
  }
  return std::nullopt;
}

Element parse(std::string_view document) { return Reader(document).read_document(); }

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace mathsearch::xml
