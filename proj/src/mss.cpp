#include "mathsearch/mss.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace mathsearch {

bool unifies(std::string_view query_label, std::string_view candidate_label) {
  auto q = node_type(query_label).kind;
  auto c = node_type(candidate_label).kind;
  if (q == SymbolKind::Wildcard) return true;
  if (q == SymbolKind::Variable || q == SymbolKind::Number) return q == c;
  return query_label == candidate_label;
}

namespace {

void align(const Slt& tq, const Slt& tc, NodeId q, NodeId c, Alignment& out) {
  out.pairs.emplace_back(q, c);
  for (auto e : kEdgeLabels) {
    auto qc = tq.child(q, e);
    auto cc = tc.child(c, e);
    // a unified child subtree always raises 2m/(|T1|+|Tq|) above the bare root
    if (qc != kNoNode && cc != kNoNode && unifies(tq.label(qc), tc.label(cc))) {
      align(tq, tc, qc, cc, out);
    }
  }
}

}  // namespace

std::optional<Alignment> maximally_similar_subtree(const Slt& tq, const Slt& tc, NodeId rq, NodeId rc) {
  if (!unifies(tq.label(rq), tc.label(rc))) return std::nullopt;
  Alignment a;
  align(tq, tc, rq, rc, a);
  return a;
}

std::vector<AlignmentPartition> alignment_partitions(const Slt& tq, const Slt& tc, const Alignment& a) {
  std::map<std::pair<std::string, std::string>, std::vector<NodeId>> groups;
  for (auto [q, c] : a.pairs) {
    if (unifies(tq.label(q), tc.label(c))) groups[{tq.label(q), tc.label(c)}].push_back(q);
  }
  std::vector<AlignmentPartition> out;
  out.reserve(groups.size());
  for (auto& [labels, nodes] : groups) {
    std::sort(nodes.begin(), nodes.end());
    out.push_back({std::move(nodes), labels.first, labels.second});
  }
  return out;
}

std::size_t induced_edges(const Slt& tq, NodeId root, std::span<const NodeId> members) {
  std::unordered_set<NodeId> in(members.begin(), members.end());
  std::size_t edges = 0;
  for (auto n : members) {
    if (n != root && in.count(tq.parent(n))) ++edges;
  }
  return edges;
}

MatchedSet greedy_matched_set(const Slt& tq, const Slt& /*tc*/, const Alignment& a,
                              std::span<const AlignmentPartition> partitions) {
  std::vector<const AlignmentPartition*> order;
  for (const auto& p : partitions) order.push_back(&p);
  std::sort(order.begin(), order.end(), [](const auto* x, const auto* y) {
    if (x->nodes.size() != y->nodes.size()) return x->nodes.size() > y->nodes.size();
    if (x->exact() != y->exact()) return x->exact();
    return x->nodes.front() < y->nodes.front();
  });

  std::unordered_set<std::string_view> query_used, candidate_used;
  std::vector<NodeId> members;
  std::size_t exact = 0;
  for (const auto* p : order) {
    if (query_used.count(p->query_label) || candidate_used.count(p->candidate_label)) continue;
    query_used.insert(p->query_label);
    candidate_used.insert(p->candidate_label);
    members.insert(members.end(), p->nodes.begin(), p->nodes.end());
    if (p->exact()) exact += p->nodes.size();
  }
  std::sort(members.begin(), members.end());

  MatchedSet m;
  m.exact = exact;
  if (a.pairs.empty()) return m;
  std::map<NodeId, NodeId> image(a.pairs.begin(), a.pairs.end());
  for (auto n : members) m.pairs.emplace_back(n, image.at(n));
  m.edges = induced_edges(tq, a.pairs.front().first, members);
  return m;
}

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den <= 0 || num < 0) throw std::invalid_argument("Rational expects num >= 0 and den > 0");
  auto g = std::gcd(num, den);
  num_ = num / g;
  den_ = den / g;
}

std::strong_ordering Rational::operator<=>(const Rational& o) const {
  return num_ * o.den_ <=> o.num_ * den_;
}

ScoreTriple score(std::size_t query_size, std::size_t candidate_size, std::size_t matched,
                  std::size_t edges, std::size_t exact) {
  ScoreTriple t;
  t.neg_unmatched = static_cast<std::int64_t>(matched) - static_cast<std::int64_t>(candidate_size);
  t.exact = static_cast<std::int64_t>(exact);
  if (matched == 0) return t;
  // with e2 = 2 max(|E|, 1/2): h = 2 M e2 / (Tq e2 + 2 (Tq-1) M)
  auto m = static_cast<std::int64_t>(matched);
  auto tq = static_cast<std::int64_t>(query_size);
  std::int64_t e2 = edges == 0 ? 1 : 2 * static_cast<std::int64_t>(edges);
  t.h = Rational(2 * m * e2, tq * e2 + 2 * (tq - 1) * m);
  return t;
}

ScoreTriple score(const Slt& tq, const Slt& tc, const MatchedSet& m) {
  return score(tq.size(), tc.size(), m.size(), m.edges, m.exact);
}

MssResult mss(const Slt& tq, const Slt& tc) {
  MssResult best;
  best.triple = score(tq.size(), tc.size(), 0, 0, 0);
  bool found = false;
  for (NodeId rq = 0; rq < tq.size(); ++rq) {
    for (NodeId rc = 0; rc < tc.size(); ++rc) {
      auto a = maximally_similar_subtree(tq, tc, rq, rc);
      if (!a) continue;
      auto parts = alignment_partitions(tq, tc, *a);
      auto m = greedy_matched_set(tq, tc, *a, parts);
      auto t = score(tq, tc, m);
      if (!found || t > best.triple) {
        found = true;
        best = {t, std::move(*a), std::move(m)};
      }
    }
  }
  return best;
}

std::vector<NodeMatch> candidate_highlight(const Slt& tq, const Slt& tc, const MssResult& r) {
  std::vector<NodeMatch> out(tc.size(), NodeMatch::Unmatched);
  for (auto [q, c] : r.matched.pairs) {
    out[c] = tq.label(q) == tc.label(c) ? NodeMatch::Exact : NodeMatch::Unified;
  }
  return out;
}

std::vector<NodeMatch> query_highlight(const Slt& tq, const Slt& tc, const MssResult& r) {
  std::vector<NodeMatch> out(tq.size(), NodeMatch::Unmatched);
  for (auto [q, c] : r.matched.pairs) {
    out[q] = tq.label(q) == tc.label(c) ? NodeMatch::Exact : NodeMatch::Unified;
  }
  return out;
}

namespace {

void write_key(const Slt& tq, NodeId q, bool root, const std::map<NodeId, char>& flags, std::string& out) {
  out.push_back('[');
  if (!root) {
    out.push_back(edge_char(tq.parent_edge(q)));
    out.push_back(':');
  }
  for (char ch : tq.label(q)) {
    if (ch == '[' || ch == ']' || ch == '\\' || ch == '|') out.push_back('\\');
    out.push_back(ch);
  }
  out.push_back('|');
  out.push_back(flags.at(q));
  for (auto e : kEdgeLabels) {
    auto c = tq.child(q, e);
    if (c != kNoNode && flags.count(c)) write_key(tq, c, false, flags, out);
  }
  out.push_back(']');
}

}  // namespace

std::string structure_key(const Slt& tq, const Slt& tc, const MssResult& r) {
  if (r.alignment.pairs.empty()) return {};
  std::map<NodeId, char> flags;
  for (auto [q, c] : r.alignment.pairs) flags[q] = '.';
  for (auto [q, c] : r.matched.pairs) flags[q] = tq.label(q) == tc.label(c) ? '=' : '~';
  std::string out;
  write_key(tq, r.alignment.pairs.front().first, true, flags, out);
  return out;
}

}  // namespace mathsearch
