#include "mathsearch/slt.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace mathsearch {

namespace {

constexpr std::string_view kEdgeChars = "nweabAB";

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

int to_int(std::string_view s) {
  int value = 0;
  std::from_chars(s.data(), s.data() + s.size(), value);
  return value;
}

// "M!" + fences + R + "x" + C
std::optional<SymbolType> matrix_type(std::string_view body) {
  auto x = body.rfind('x');
  if (x == std::string_view::npos) return std::nullopt;
  auto cols = body.substr(x + 1);
  if (!all_digits(cols)) return std::nullopt;
  auto head = body.substr(0, x);
  std::size_t start = head.size();
  while (start > 0 && std::isdigit(static_cast<unsigned char>(head[start - 1]))) --start;
  auto rows = head.substr(start);
  if (!all_digits(rows)) return std::nullopt;
  int r = to_int(rows);
  int c = to_int(cols);
  if (r < 1 || c < 1) return std::nullopt;
  return SymbolType{SymbolKind::Matrix, r, c};
}

}  // namespace

char edge_char(EdgeLabel edge) { return kEdgeChars[static_cast<std::size_t>(edge)]; }

std::optional<EdgeLabel> edge_from_char(char c) {
  auto pos = kEdgeChars.find(c);
  if (pos == std::string_view::npos) return std::nullopt;
  return static_cast<EdgeLabel>(pos);
}

bool is_wildcard(std::string_view label) { return label.size() > 1 && label.front() == '?'; }

SymbolType node_type(std::string_view label) {
  if (label == kEndOfLine) return {SymbolKind::EndOfLine};
  if (is_wildcard(label)) return {SymbolKind::Wildcard};
  if (label.size() >= 2 && label[1] == '!') {
    switch (label[0]) {
      case 'V': return {SymbolKind::Variable};
      case 'N': return {SymbolKind::Number};
      case 'T': return {SymbolKind::Text};
      case 'F': return {SymbolKind::Fraction};
      case 'R': return {SymbolKind::Radical};
      case 'W': return {SymbolKind::Whitespace};
      case 'M':
        if (auto m = matrix_type(label.substr(2))) return *m;
        break;
      default: break;
    }
  }
  return {SymbolKind::Operator};
}

Slt::Slt(std::string root_label) {
  Node root;
  root.label = std::move(root_label);
  root.children.fill(kNoNode);
  nodes_.push_back(std::move(root));
}

NodeId Slt::add_child(NodeId parent, EdgeLabel edge, std::string label) {
  auto& slot = nodes_.at(parent).children[static_cast<std::size_t>(edge)];
  if (slot != kNoNode) {
    throw std::invalid_argument("node already has an outgoing '" + std::string(1, edge_char(edge)) +
                                "' edge");
  }
  auto id = static_cast<NodeId>(nodes_.size());
  Node node;
  node.label = std::move(label);
  node.parent = parent;
  node.parent_edge = edge;
  node.children.fill(kNoNode);
  nodes_.push_back(std::move(node));
  // push_back may have reallocated; re-fetch the slot
  nodes_[parent].children[static_cast<std::size_t>(edge)] = id;
  return id;
}

std::vector<SltEdge> Slt::edges() const {
  std::vector<SltEdge> out;
  out.reserve(nodes_.size());
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    for (auto e : kEdgeLabels) {
      if (auto c = child(id, e); c != kNoNode) out.push_back({id, c, e});
    }
  }
  return out;
}

std::size_t Slt::depth(NodeId id) const {
  std::size_t d = 0;
  while (nodes_.at(id).parent != kNoNode) {
    id = nodes_[id].parent;
    ++d;
  }
  return d;
}

namespace {

void copy_subtree(const Slt& from, NodeId old_id, Slt& to, NodeId new_id) {
  for (auto e : kEdgeLabels) {
    if (auto c = from.child(old_id, e); c != kNoNode) {
      copy_subtree(from, c, to, to.add_child(new_id, e, from.label(c)));
    }
  }
}

}  // namespace

Slt Slt::preorder() const {
  Slt out(nodes_[0].label);
  copy_subtree(*this, 0, out, 0);
  return out;
}

bool Slt::operator==(const Slt& other) const {
  if (nodes_.size() != other.nodes_.size()) return false;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& a = nodes_[i];
    const auto& b = other.nodes_[i];
    if (a.label != b.label || a.parent != b.parent || a.children != b.children) return false;
    if (a.parent != kNoNode && a.parent_edge != b.parent_edge) return false;
  }
  return true;
}

namespace {

void append_escaped(std::string& out, std::string_view label) {
  for (char c : label) {
    if (c == '[' || c == ']' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
}

void write_node(const Slt& slt, NodeId id, std::string& out) {
  out.push_back('[');
  if (id != slt.root()) {
    out.push_back(edge_char(slt.parent_edge(id)));
    out.push_back(':');
  }
  append_escaped(out, slt.label(id));
  for (auto e : kEdgeLabels) {
    if (auto c = slt.child(id, e); c != kNoNode) write_node(slt, c, out);
  }
  out.push_back(']');
}

class CanonicalReader {
 public:
  explicit CanonicalReader(std::string_view text) : text_(text) {}

  Slt read() {
    expect('[');
    auto label = read_label();
    Slt slt(std::move(label));
    read_children(slt, slt.root());
    if (pos_ != text_.size()) fail("trailing characters");
    return slt;
  }

 private:
  void read_children(Slt& slt, NodeId parent) {
    while (peek() == '[') {
      ++pos_;
      auto edge = edge_from_char(next());
      if (!edge) fail("bad edge label");
      expect(':');
      auto label = read_label();
      NodeId id;
      try {
        id = slt.add_child(parent, *edge, std::move(label));
      } catch (const std::invalid_argument& e) {
        fail(e.what());
      }
      read_children(slt, id);
    }
    expect(']');
  }

  std::string read_label() {
    std::string label;
    while (pos_ < text_.size() && text_[pos_] != '[' && text_[pos_] != ']') {
      if (text_[pos_] == '\\') {
        ++pos_;
        if (pos_ >= text_.size()) fail("dangling escape");
      }
      label.push_back(text_[pos_++]);
    }
    if (label.empty()) fail("empty label");
    if (label == kEndOfLine) fail("reserved end-of-line label");
    return label;
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  char next() {
    if (pos_ >= text_.size()) fail("unexpected end");
    return text_[pos_++];
  }
  void expect(char c) {
    if (next() != c) fail(std::string("expected '") + c + "'");
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(ParseError::Kind::MalformedInput,
                     "canonical string: " + what + " at offset " + std::to_string(pos_));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string canonical_string(const Slt& slt) {
  std::string out;
  write_node(slt, slt.root(), out);
  return out;
}

Slt parse_canonical(std::string_view text) { return CanonicalReader(text).read(); }

}  // namespace mathsearch
