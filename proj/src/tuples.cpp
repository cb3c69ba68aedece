#include "mathsearch/tuples.hpp"

#include <stdexcept>
#include <vector>

namespace mathsearch {

std::string serialize(const Tuple& tuple) {
  std::string out;
  out.reserve(tuple.ancestor.size() + tuple.descendant.size() + tuple.path.size() + 2);
  out += tuple.ancestor;
  out += '\t';
  out += tuple.descendant;
  out += '\t';
  out += tuple.path;
  return out;
}

std::optional<Tuple> parse_tuple(std::string_view text) {
  auto first = text.find('\t');
  if (first == std::string_view::npos) return std::nullopt;
  auto second = text.find('\t', first + 1);
  if (second == std::string_view::npos) return std::nullopt;
  Tuple t{std::string(text.substr(0, first)), std::string(text.substr(first + 1, second - first - 1)),
          std::string(text.substr(second + 1))};
  if (t.path.empty()) return std::nullopt;
  for (char c : t.path) {
    if (!edge_from_char(c)) return std::nullopt;
  }
  return t;
}

void TupleBag::add(const Tuple& tuple, std::uint32_t count) {
  if (count == 0) return;
  entries_[tuple] += count;
  total_ += count;
}

std::uint32_t TupleBag::count(const Tuple& tuple) const {
  auto it = entries_.find(tuple);
  return it == entries_.end() ? 0 : it->second;
}

namespace {

struct PathStep {
  NodeId node;
  EdgeLabel incoming;  // edge from the previous step (unused for the root)
};

void walk(const Slt& slt, NodeId id, std::vector<PathStep>& stack, const TupleOptions& options,
          TupleBag& bag) {
  // stack holds the root path ending at `id`
  const std::size_t depth = stack.size() - 1;
  const std::size_t reach = options.window ? std::min<std::size_t>(*options.window, depth) : depth;
  std::string path;
  for (std::size_t d = 1; d <= reach; ++d) {
    const auto& step = stack[depth - d + 1];
    path.insert(path.begin(), edge_char(step.incoming));
    bag.add(Tuple{slt.label(stack[depth - d].node), slt.label(id), path});
  }
  if (options.eol && !slt.has_child(id, EdgeLabel::Next)) {
    bag.add(Tuple{slt.label(id), std::string(kEndOfLine), std::string(1, edge_char(EdgeLabel::Next))});
  }
  for (auto e : kEdgeLabels) {
    if (auto c = slt.child(id, e); c != kNoNode) {
      stack.push_back({c, e});
      walk(slt, c, stack, options, bag);
      stack.pop_back();
    }
  }
}

}  // namespace

TupleBag extract_tuples(const Slt& slt, const TupleOptions& options) {
  TupleBag bag;
  if (options.window && *options.window == 0) throw std::invalid_argument("window size must be at least 1");
  std::vector<PathStep> stack{{slt.root(), EdgeLabel::Next}};
  walk(slt, slt.root(), stack, options, bag);
  return bag;
}

QueryTupleClass classify_query_tuple(const Tuple& tuple) {
  bool anc = is_wildcard(tuple.ancestor);
  bool desc = is_wildcard(tuple.descendant);
  if (anc && desc) return {QueryTupleClass::Kind::MultiWildcard};
  if (anc) return {QueryTupleClass::Kind::SingleWildcard, WildcardEnd::Ancestor};
  if (desc) return {QueryTupleClass::Kind::SingleWildcard, WildcardEnd::Descendant};
  return {QueryTupleClass::Kind::Concrete};
}

std::string wildcard_pattern_key(const Tuple& tuple, WildcardEnd end) {
  Tuple pattern = tuple;
  if (end == WildcardEnd::Ancestor) {
    pattern.ancestor.clear();
  } else {
    pattern.descendant.clear();
  }
  return serialize(pattern);
}

}  // namespace mathsearch
