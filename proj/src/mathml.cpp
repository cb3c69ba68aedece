#include "mathsearch/mathml.hpp"

#include <array>
#include <cstdlib>
#include <span>
#include <unordered_set>

#include "xml.hpp"

namespace mathsearch {

namespace {

using xml::Element;

// --- text helpers -----------------------------------------------------------

// Decodes one code point; invalid bytes are returned as-is.
char32_t next_code_point(std::string_view s, std::size_t& i) {
  auto b0 = static_cast<unsigned char>(s[i]);
  int extra = b0 < 0x80 ? 0 : (b0 >> 5) == 0x6 ? 1 : (b0 >> 4) == 0xE ? 2 : (b0 >> 3) == 0x1E ? 3 : -1;
  if (extra <= 0 || i + extra >= s.size()) {
    ++i;
    return b0;
  }
  char32_t cp = b0 & (0x3F >> extra);
  for (int k = 1; k <= extra; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
  i += extra + 1;
  return cp;
}

bool is_invisible(char32_t cp) {
  return (cp >= 0x2061 && cp <= 0x2064) || (cp >= 0x200B && cp <= 0x200D) || cp == 0xFEFF;
}

bool is_space(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' ||
         cp == 0x00A0 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x202F || cp == 0x205F ||
         cp == 0x3000;
}

// Drops invisible characters, trims whitespace, and replaces interior
// whitespace runs with `joiner` (empty string removes them).
std::string clean_token(std::string_view raw, std::string_view joiner) {
  std::string out;
  bool pending_space = false;
  for (std::size_t i = 0; i < raw.size();) {
    auto start = i;
    char32_t cp = next_code_point(raw, i);
    if (is_invisible(cp)) continue;
    if (is_space(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.append(joiner);
    pending_space = false;
    out.append(raw.substr(start, i - start));
  }
  return out;
}

// --- fences -----------------------------------------------------------------

struct FencePair {
  std::string_view open;
  std::string_view close;
};

constexpr std::array<FencePair, 8> kFences = {{
    {"(", ")"},
    {"[", "]"},
    {"{", "}"},
    {"|", "|"},
    {"‖", "‖"},  // double vertical bar
    {"⟨", "⟩"},  // angle brackets
    {"⌈", "⌉"},  // ceiling
    {"⌊", "⌋"},  // floor
}};

bool is_fence_text(std::string_view t) {
  for (const auto& f : kFences) {
    if (t == f.open || t == f.close) return true;
  }
  return false;
}

bool attribute_is(const Element& el, std::string_view key, std::string_view value) {
  auto a = el.attribute(key);
  return a && *a == value;
}

std::string mo_text(const Element& el) { return clean_token(el.text, ""); }

// An <mo> that may act as an opening fence; returns its pair.
const FencePair* opening_fence(const Element& el) {
  if (el.name != "mo" || attribute_is(el, "fence", "false")) return nullptr;
  auto t = mo_text(el);
  for (const auto& f : kFences) {
    if (t == f.open) return &f;
  }
  return nullptr;
}

bool is_closing(const Element& el, std::string_view close) {
  return el.name == "mo" && !attribute_is(el, "fence", "false") && mo_text(el) == close;
}

bool is_separator(const Element& el) {
  return el.name == "mo" && !attribute_is(el, "separator", "false") && mo_text(el) == ",";
}

bool zero_thickness(const Element& frac) {
  auto lt = frac.attribute("linethickness");
  if (!lt) return false;
  std::string s(*lt);
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  return end != s.c_str() && v == 0.0;
}

const Element& unwrap(const Element& el) {
  const Element* e = &el;
  while (e->name == "mrow" && e->children.size() == 1) e = &e->children.front();
  return *e;
}

bool table_like(const Element& el) {
  return el.name == "mtable" || (el.name == "mfrac" && zero_thickness(el));
}

const std::unordered_set<std::string_view>& container_elements() {
  static const std::unordered_set<std::string_view> names = {
      "math", "mrow", "mstyle", "mpadded", "menclose", "merror", "mtd", "mtr", "mlabeledtr",
  };
  return names;
}

const std::unordered_set<std::string_view>& dropped_elements() {
  static const std::unordered_set<std::string_view> names = {
      "mspace", "mphantom", "maligngroup", "malignmark", "none", "mprescripts",
      "annotation", "annotation-xml", "mglyph",
  };
  return names;
}

// --- conversion -------------------------------------------------------------

struct Piece {
  int root = -1;
  int tail = -1;  // last node on the piece's baseline; receives the next sibling
  bool empty() const { return root < 0; }
};

class Converter {
 public:
  Slt convert_document(const Element& root) {
    Piece p = convert(root);
    if (p.empty()) throw ParseError(ParseError::Kind::EmptyFormula, "formula has no visible symbols");
    Slt slt(nodes_[p.root].label);
    copy(p.root, slt, slt.root());
    return slt;
  }

 private:
  struct Draft {
    std::string label;
    std::array<int, kEdgeLabelCount> child;
  };

  int make(std::string label) {
    if (label == kEndOfLine) {
      throw ParseError(ParseError::Kind::MalformedInput, "reserved label " + label);
    }
    Draft d{std::move(label), {}};
    d.child.fill(-1);
    nodes_.push_back(std::move(d));
    return static_cast<int>(nodes_.size()) - 1;
  }

  int& slot(int node, EdgeLabel e) { return nodes_[node].child[static_cast<std::size_t>(e)]; }

  int baseline_tail(int node) {
    while (slot(node, EdgeLabel::Next) >= 0) node = slot(node, EdgeLabel::Next);
    return node;
  }

  // An occupied edge label is never duplicated: the newcomer continues the
  // baseline of whatever already hangs off that edge.
  void attach(int parent, EdgeLabel e, int child) {
    if (slot(parent, e) < 0) {
      slot(parent, e) = child;
      return;
    }
    int target = e == EdgeLabel::Next ? parent : slot(parent, e);
    slot(baseline_tail(target), EdgeLabel::Next) = child;
  }

  void copy(int draft, Slt& slt, NodeId id) {
    for (auto e : kEdgeLabels) {
      if (int c = nodes_[draft].child[static_cast<std::size_t>(e)]; c >= 0) {
        copy(c, slt, slt.add_child(id, e, nodes_[c].label));
      }
    }
  }

  Piece leaf(std::string label) {
    int n = make(std::move(label));
    return {n, n};
  }

  Piece chain(std::span<const Piece> pieces) {
    Piece out;
    for (const auto& p : pieces) {
      if (p.empty()) continue;
      if (out.empty()) {
        out = p;
      } else {
        attach(out.tail, EdgeLabel::Next, p.root);
        out.tail = p.tail;
      }
    }
    return out;
  }

  Piece convert(const Element& el) {
    const auto& name = el.name;
    if (name == "mi") return identifier(el);
    if (name == "mn") {
      auto t = clean_token(el.text, "");
      return t.empty() ? Piece{} : leaf("N!" + t);
    }
    if (name == "mo") {
      auto t = mo_text(el);
      return t.empty() ? Piece{} : leaf(t);
    }
    if (name == "mtext" || name == "ms") {
      auto t = clean_token(el.text, "-");
      return t.empty() ? Piece{} : leaf("T!" + t);
    }
    if (name == "qvar") return wildcard(el);
    if (container_elements().count(name)) return sequence(el.children);
    if (dropped_elements().count(name)) return {};
    if (name == "semantics" || name == "maction") {
      return el.children.empty() ? Piece{} : convert(el.children.front());
    }
    if (name == "mfrac") return fraction(el);
    if (name == "msqrt") return radical(sequence(el.children), {});
    if (name == "mroot") {
      require_children(el, 2);
      return radical(convert(el.children[0]), convert(el.children[1]));
    }
    if (name == "msub" || name == "munder") {
      require_children(el, 2);
      return scripted(el.children[0], {{&el.children[1], EdgeLabel::Below}});
    }
    if (name == "msup" || name == "mover") {
      require_children(el, 2);
      return scripted(el.children[0], {{&el.children[1], EdgeLabel::Above}});
    }
    if (name == "msubsup" || name == "munderover") {
      require_children(el, 3);
      return scripted(el.children[0], {{&el.children[1], EdgeLabel::Below},
                                       {&el.children[2], EdgeLabel::Above}});
    }
    if (name == "mmultiscripts") return multiscripts(el);
    if (name == "mtable") return table(el, "", "");
    if (name == "mfenced") return mfenced(el);
    throw ParseError(ParseError::Kind::UnsupportedElement, "unsupported MathML element <" + name + ">");
  }

  void require_children(const Element& el, std::size_t n) {
    if (el.children.size() != n) {
      throw ParseError(ParseError::Kind::MalformedInput,
                       "<" + el.name + "> expects " + std::to_string(n) + " children, got " +
                           std::to_string(el.children.size()));
    }
  }

  Piece identifier(const Element& el) {
    auto t = clean_token(el.text, "");
    if (t.empty()) return {};
    if (is_wildcard(t)) return leaf(t);
    return leaf("V!" + t);
  }

  Piece wildcard(const Element& el) {
    std::string name(el.attribute("name").value_or(""));
    if (name.empty()) name = clean_token(el.text, "");
    if (!name.empty() && name.front() == '?') name.erase(0, 1);
    if (name.empty()) throw ParseError(ParseError::Kind::MalformedInput, "wildcard without a name");
    return leaf("?" + name);
  }

  Piece sequence(const std::vector<Element>& items) {
    std::vector<Piece> pieces;
    for (std::size_t i = 0; i < items.size();) {
      if (const auto* fence = opening_fence(items[i])) {
        if (auto j = find_close(items, i, *fence)) {
          std::span<const Element> inner(items.data() + i + 1, *j - i - 1);
          pieces.push_back(fenced(fence->open, fence->close, inner));
          i = *j + 1;
          continue;
        }
      }
      pieces.push_back(convert(items[i]));
      ++i;
    }
    return chain(pieces);
  }

  static std::optional<std::size_t> find_close(const std::vector<Element>& items, std::size_t open,
                                               const FencePair& fence) {
    int depth = 0;
    for (std::size_t k = open + 1; k < items.size(); ++k) {
      const auto& el = items[k];
      if (fence.open != fence.close) {
        if (const auto* f = opening_fence(el); f && f->open == fence.open) {
          ++depth;
          continue;
        }
      }
      if (is_closing(el, fence.close)) {
        if (depth == 0) return k;
        --depth;
      }
    }
    return std::nullopt;
  }

  // Contents of a fence pair: comma-separated arguments become a 1xn
  // matrix, a lone table keeps its shape, anything else is a 1x1 matrix.
  Piece fenced(std::string_view open, std::string_view close, std::span<const Element> inner) {
    std::vector<std::vector<Element>> parts(1);
    for (const auto& el : inner) {
      if (is_separator(el)) {
        parts.emplace_back();
      } else {
        parts.back().push_back(el);
      }
    }
    std::string fences = std::string(open) + std::string(close);
    if (parts.size() > 1) {
      std::vector<Piece> cells;
      for (const auto& p : parts) cells.push_back(sequence(p));
      return matrix(fences, 1, static_cast<int>(parts.size()), cells);
    }
    if (inner.size() == 1 && table_like(unwrap(inner.front()))) {
      return table(unwrap(inner.front()), open, close);
    }
    std::vector<Element> content(inner.begin(), inner.end());
    return matrix(fences, 1, 1, {sequence(content)});
  }

  Piece mfenced(const Element& el) {
    std::string open(el.attribute("open").value_or("("));
    std::string close(el.attribute("close").value_or(")"));
    const auto& kids = el.children;
    if (kids.size() == 1 && table_like(unwrap(kids.front()))) {
      return table(unwrap(kids.front()), open, close);
    }
    std::vector<Piece> cells;
    for (const auto& k : kids) cells.push_back(convert(k));
    int cols = std::max<int>(1, static_cast<int>(kids.size()));
    return matrix(open + close, 1, cols, cells);
  }

  Piece table(const Element& el, std::string_view open, std::string_view close) {
    std::string fences = std::string(open) + std::string(close);
    if (el.name == "mfrac") {
      require_children(el, 2);
      return matrix(fences, 2, 1, {convert(el.children[0]), convert(el.children[1])});
    }
    std::vector<Piece> cells;
    int rows = 0;
    int cols = 0;
    for (const auto& row : el.children) {
      if (dropped_elements().count(row.name)) continue;
      ++rows;
      if (row.name == "mtr" || row.name == "mlabeledtr") {
        std::size_t first = row.name == "mlabeledtr" ? 1 : 0;
        int n = 0;
        for (std::size_t c = first; c < row.children.size(); ++c) {
          cells.push_back(convert(row.children[c]));
          ++n;
        }
        cols = std::max(cols, n);
      } else {
        cells.push_back(convert(row));
        cols = std::max(cols, 1);
      }
    }
    return matrix(fences, std::max(rows, 1), std::max(cols, 1), cells);
  }

  // Empty cells get no node; the Element chain links the non-empty ones.
  Piece matrix(const std::string& fences, int rows, int cols, const std::vector<Piece>& cells) {
    int m = make("M!" + fences + std::to_string(rows) + "x" + std::to_string(cols));
    int prev = -1;
    for (const auto& cell : cells) {
      if (cell.empty()) continue;
      if (prev < 0) {
        attach(m, EdgeLabel::Within, cell.root);
      } else {
        attach(prev, EdgeLabel::Element, cell.root);
      }
      prev = cell.root;
    }
    return {m, m};
  }

  Piece fraction(const Element& el) {
    require_children(el, 2);
    if (zero_thickness(el)) return table(el, "", "");
    int f = make("F!");
    if (auto num = convert(el.children[0]); !num.empty()) attach(f, EdgeLabel::Above, num.root);
    if (auto den = convert(el.children[1]); !den.empty()) attach(f, EdgeLabel::Below, den.root);
    return {f, f};
  }

  Piece radical(Piece radicand, Piece index) {
    int r = make("R!");
    if (!radicand.empty()) attach(r, EdgeLabel::Within, radicand.root);
    if (!index.empty()) attach(r, EdgeLabel::Above, index.root);
    return {r, r};
  }

  struct Script {
    const Element* element;
    EdgeLabel edge;
  };

  Piece scripted(const Element& base_el, std::initializer_list<Script> scripts) {
    return scripted(base_el, std::vector<Script>(scripts));
  }

  Piece scripted(const Element& base_el, const std::vector<Script>& scripts) {
    Piece base = convert(base_el);
    std::vector<Piece> orphans;
    for (const auto& s : scripts) {
      Piece p = convert(*s.element);
      if (p.empty()) continue;
      if (base.empty()) {
        orphans.push_back(p);
      } else {
        attach(base.tail, s.edge, p.root);
      }
    }
    if (base.empty()) return chain(orphans);
    return base;
  }

  Piece multiscripts(const Element& el) {
    if (el.children.empty()) return {};
    std::vector<Script> scripts;
    bool pre = false;
    std::size_t slot_index = 0;
    for (std::size_t i = 1; i < el.children.size(); ++i) {
      const auto& c = el.children[i];
      if (c.name == "mprescripts") {
        pre = true;
        slot_index = 0;
        continue;
      }
      bool sub = slot_index % 2 == 0;
      ++slot_index;
      if (c.name == "none") continue;
      EdgeLabel e = pre ? (sub ? EdgeLabel::PreBelow : EdgeLabel::PreAbove)
                        : (sub ? EdgeLabel::Below : EdgeLabel::Above);
      scripts.push_back({&c, e});
    }
    return scripted(el.children.front(), scripts);
  }

  std::vector<Draft> nodes_;
};

// --- rendering --------------------------------------------------------------

class Renderer {
 public:
  Renderer(const Slt& slt, bool ids) : slt_(slt), ids_(ids) {}

  std::string render() {
    std::string out = "<math xmlns=\"http://www.w3.org/1998/Math/MathML\">";
    row(slt_.root(), out);
    out += "</math>";
    return out;
  }

 private:
  std::string id_attr(NodeId n) const {
    return ids_ ? " data-node=\"" + std::to_string(n) + "\"" : std::string();
  }

  void row(NodeId n, std::string& out) {
    out += "<mrow>";
    for (NodeId cur = n; cur != kNoNode; cur = slt_.child(cur, EdgeLabel::Next)) node(cur, out);
    out += "</mrow>";
  }

  void optional_row(NodeId n, std::string& out) {
    if (n == kNoNode) {
      out += "<mrow/>";
    } else {
      row(n, out);
    }
  }

  void node(NodeId n, std::string& out) {
    auto type = node_type(slt_.label(n));
    bool consumes_above = type.kind == SymbolKind::Fraction || type.kind == SymbolKind::Radical;
    bool consumes_below = type.kind == SymbolKind::Fraction;
    NodeId below = consumes_below ? kNoNode : slt_.child(n, EdgeLabel::Below);
    NodeId above = consumes_above ? kNoNode : slt_.child(n, EdgeLabel::Above);
    NodeId pre_below = slt_.child(n, EdgeLabel::PreBelow);
    NodeId pre_above = slt_.child(n, EdgeLabel::PreAbove);

    if (pre_below != kNoNode || pre_above != kNoNode) {
      out += "<mmultiscripts>";
      core(n, type, out);
      script_or_none(below, out);
      script_or_none(above, out);
      out += "<mprescripts/>";
      script_or_none(pre_below, out);
      script_or_none(pre_above, out);
      out += "</mmultiscripts>";
    } else if (below != kNoNode && above != kNoNode) {
      out += "<msubsup>";
      core(n, type, out);
      row(below, out);
      row(above, out);
      out += "</msubsup>";
    } else if (below != kNoNode || above != kNoNode) {
      out += below != kNoNode ? "<msub>" : "<msup>";
      core(n, type, out);
      row(below != kNoNode ? below : above, out);
      out += below != kNoNode ? "</msub>" : "</msup>";
    } else {
      core(n, type, out);
    }
  }

  void script_or_none(NodeId n, std::string& out) {
    if (n == kNoNode) {
      out += "<none/>";
    } else {
      row(n, out);
    }
  }

  void token(std::string_view tag, NodeId n, std::string_view text, std::string_view extra,
             std::string& out) {
    out += "<";
    out += tag;
    out += id_attr(n);
    out += extra;
    out += ">";
    out += xml::escape(text);
    out += "</";
    out += tag;
    out += ">";
  }

  void core(NodeId n, const SymbolType& type, std::string& out) {
    const auto& label = slt_.label(n);
    switch (type.kind) {
      case SymbolKind::Variable: token("mi", n, std::string_view(label).substr(2), "", out); break;
      case SymbolKind::Wildcard: token("mi", n, label, "", out); break;
      case SymbolKind::Number: token("mn", n, std::string_view(label).substr(2), "", out); break;
      case SymbolKind::Text: token("mtext", n, std::string_view(label).substr(2), "", out); break;
      case SymbolKind::Fraction:
        out += "<mfrac" + id_attr(n) + ">";
        optional_row(slt_.child(n, EdgeLabel::Above), out);
        optional_row(slt_.child(n, EdgeLabel::Below), out);
        out += "</mfrac>";
        break;
      case SymbolKind::Radical:
        if (auto index = slt_.child(n, EdgeLabel::Above); index != kNoNode) {
          out += "<mroot" + id_attr(n) + ">";
          optional_row(slt_.child(n, EdgeLabel::Within), out);
          row(index, out);
          out += "</mroot>";
        } else {
          out += "<msqrt" + id_attr(n) + ">";
          optional_row(slt_.child(n, EdgeLabel::Within), out);
          out += "</msqrt>";
        }
        break;
      case SymbolKind::Matrix: matrix(n, type, out); break;
      default: {
        std::string extra;
        if (is_fence_text(label)) extra = " fence=\"false\"";
        if (label == ",") extra = " separator=\"false\"";
        token("mo", n, label, extra, out);
      }
    }
  }

  void matrix(NodeId n, const SymbolType& type, std::string& out) {
    const auto& label = slt_.label(n);
    auto dims = std::to_string(type.rows) + "x" + std::to_string(type.cols);
    auto fences = label.substr(2, label.size() - 2 - dims.size());
    auto [open, close] = split_fences(fences);

    std::vector<NodeId> cells;
    for (NodeId c = slt_.child(n, EdgeLabel::Within); c != kNoNode; c = slt_.child(c, EdgeLabel::Element)) {
      cells.push_back(c);
    }
    bool fenced = !fences.empty();
    if (fenced) {
      out += "<mfenced" + id_attr(n) + " open=\"" + xml::escape(open) + "\" close=\"" +
             xml::escape(close) + "\" separators=\"\">";
      out += "<mtable>";
    } else {
      out += "<mtable" + id_attr(n) + ">";
    }
    std::size_t next = 0;
    for (int r = 0; r < type.rows; ++r) {
      out += "<mtr>";
      for (int c = 0; c < type.cols; ++c) {
        out += "<mtd>";
        if (next < cells.size()) row(cells[next++], out);
        out += "</mtd>";
      }
      out += "</mtr>";
    }
    out += fenced ? "</mtable></mfenced>" : "</mtable>";
  }

  static std::pair<std::string, std::string> split_fences(const std::string& fences) {
    if (fences.empty()) return {};
    std::size_t i = 0;
    next_code_point(fences, i);
    if (i == fences.size()) {
      bool closing = fences == ")" || fences == "]" || fences == "}" || fences == "⟩" ||
                     fences == "⌉" || fences == "⌋";
      return closing ? std::pair<std::string, std::string>{"", fences}
                     : std::pair<std::string, std::string>{fences, ""};
    }
    return {fences.substr(0, i), fences.substr(i)};
  }

  const Slt& slt_;
  bool ids_;
};

}  // namespace

Slt parse_mathml(std::string_view mathml) {
  auto root = xml::parse(mathml);
  return Converter().convert_document(root).preorder();
}

std::string to_mathml(const Slt& slt, bool node_ids) { return Renderer(slt, node_ids).render(); }

}  // namespace mathsearch
