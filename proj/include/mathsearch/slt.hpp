#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mathsearch {

/// Spatial relationship between two symbols in a layout tree.
enum class EdgeLabel : std::uint8_t {
  Next,      // adjacent object to the right on the same line
  Within,    // radicand, or first cell of a matrix
  Element,   // next matrix cell in row-major order
  Above,     // superscript, numerator, over-script, radical index
  Below,     // subscript, denominator, under-script
  PreAbove,  // prescript superscript
  PreBelow,  // prescript subscript
};

inline constexpr std::size_t kEdgeLabelCount = 7;

/// Fixed serialization order: n, w, e, a, b, A, B.
inline constexpr std::array<EdgeLabel, kEdgeLabelCount> kEdgeLabels = {
    EdgeLabel::Next,  EdgeLabel::Within,   EdgeLabel::Element, EdgeLabel::Above,
    EdgeLabel::Below, EdgeLabel::PreAbove, EdgeLabel::PreBelow,
};

char edge_char(EdgeLabel edge);
std::optional<EdgeLabel> edge_from_char(char c);

enum class SymbolKind : std::uint8_t {
  Variable,
  Number,
  Text,
  Fraction,
  Radical,
  Matrix,
  Whitespace,
  Wildcard,
  Operator,
  EndOfLine,
};

/// Type of a node. Matrices carry their dimensions but not their fences.
struct SymbolType {
  SymbolKind kind = SymbolKind::Operator;
  int rows = 0;
  int cols = 0;

  bool operator==(const SymbolType&) const = default;
};

/// Label of the end-of-line terminal; only ever appears inside tuples.
inline constexpr std::string_view kEndOfLine = "!0";

SymbolType node_type(std::string_view label);
bool is_wildcard(std::string_view label);

class ParseError : public std::runtime_error {
 public:
  enum class Kind { MalformedInput, UnsupportedElement, EmptyFormula };

  ParseError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

struct SltEdge {
  NodeId parent;
  NodeId child;
  EdgeLabel label;
};

/// Symbol Layout Tree: a rooted tree of labeled symbols where each node has
/// at most one outgoing edge per EdgeLabel. Node 0 is always the root.
class Slt {
 public:
  explicit Slt(std::string root_label);

  /// Adds a child below `parent`. Throws std::invalid_argument if `parent`
  /// already has an outgoing edge with this label.
  NodeId add_child(NodeId parent, EdgeLabel edge, std::string label);

  std::size_t size() const noexcept { return nodes_.size(); }
  NodeId root() const noexcept { return 0; }

  const std::string& label(NodeId id) const { return nodes_.at(id).label; }
  NodeId parent(NodeId id) const { return nodes_.at(id).parent; }
  EdgeLabel parent_edge(NodeId id) const { return nodes_.at(id).parent_edge; }
  NodeId child(NodeId id, EdgeLabel edge) const {
    return nodes_.at(id).children[static_cast<std::size_t>(edge)];
  }
  bool has_child(NodeId id, EdgeLabel edge) const { return child(id, edge) != kNoNode; }

  std::vector<SltEdge> edges() const;

  /// Depth of a node (number of edges from the root).
  std::size_t depth(NodeId id) const;

  /// Copy renumbered in canonical pre-order (children visited in
  /// kEdgeLabels order). Parsers always return trees in this numbering.
  Slt preorder() const;

  bool operator==(const Slt& other) const;

 private:
  struct Node {
    std::string label;
    NodeId parent = kNoNode;
    EdgeLabel parent_edge = EdgeLabel::Next;
    std::array<NodeId, kEdgeLabelCount> children;
  };

  std::vector<Node> nodes_;
};

/// Deterministic bracketed serialization, e.g. "[V!a[n:+[n:V!b]]]".
/// Equal strings iff the trees are isomorphic with identical labels.
std::string canonical_string(const Slt& slt);

/// Inverse of canonical_string. Throws ParseError(MalformedInput).
Slt parse_canonical(std::string_view text);

}  // namespace mathsearch
