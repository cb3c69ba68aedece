#include "oracles.hpp"

#include <algorithm>
#include <set>

#include "mathsearch/mss.hpp"

using mathsearch::EdgeLabel;
using mathsearch::kNoNode;
using mathsearch::NodeId;
using mathsearch::Rational;
using mathsearch::ScoreTriple;
using mathsearch::Slt;
using mathsearch::Tuple;

namespace testing_support {

std::map<Tuple, std::uint32_t> brute_force_tuples(const Slt& tree, std::optional<std::uint32_t> window,
                                                  bool eol) {
  std::map<Tuple, std::uint32_t> out;
  for (NodeId d = 0; d < tree.size(); ++d) {
    std::string path;
    std::uint32_t distance = 0;
    for (NodeId n = d; n != tree.root(); n = tree.parent(n)) {
      path.insert(path.begin(), mathsearch::edge_char(tree.parent_edge(n)));
      ++distance;
      if (window && distance > *window) break;
      ++out[Tuple{tree.label(tree.parent(n)), tree.label(d), path}];
    }
    if (eol && !tree.has_child(d, EdgeLabel::Next)) ++out[Tuple{tree.label(d), "!0", "n"}];
  }
  return out;
}

namespace {

bool wild(const std::string& label) { return label.size() > 1 && label[0] == '?'; }

std::string key_of(const Tuple& t) { return t.ancestor + "\t" + t.descendant + "\t" + t.path; }

std::uint32_t total(const std::map<Tuple, std::uint32_t>& bag) {
  std::uint32_t n = 0;
  for (const auto& [t, c] : bag) n += c;
  return n;
}

}  // namespace

std::uint32_t greedy_overlap(const std::map<Tuple, std::uint32_t>& query,
                             const std::map<Tuple, std::uint32_t>& candidate, std::uint32_t* query_size) {
  std::map<std::string, std::uint32_t> left;  // by serialized key
  std::map<std::string, Tuple> tuple_of;
  for (const auto& [t, c] : candidate) {
    left[key_of(t)] = c;
    tuple_of[key_of(t)] = t;
  }
  std::uint32_t size = 0, matched = 0;
  struct Pattern {
    bool ancestor_erased;
    std::string kept;
    std::string path;
    std::uint32_t count = 0;
  };
  std::map<std::string, Pattern> patterns;
  for (const auto& [t, c] : query) {
    bool wa = wild(t.ancestor), wd = wild(t.descendant);
    if (wa && wd) continue;
    size += c;
    if (!wa && !wd) {
      auto it = left.find(key_of(t));
      if (it != left.end()) {
        auto take = std::min(c, it->second);
        it->second -= take;
        matched += take;
      }
      continue;
    }
    std::string pkey = wa ? "\t" + t.descendant + "\t" + t.path : t.ancestor + "\t\t" + t.path;
    auto& p = patterns[pkey];
    p.ancestor_erased = wa;
    p.kept = wa ? t.descendant : t.ancestor;
    p.path = t.path;
    p.count += c;
  }
  for (auto& [pkey, p] : patterns) {
    auto budget = p.count;
    for (auto& [key, remaining] : left) {
      if (budget == 0) break;
      const auto& t = tuple_of[key];
      bool fits = p.ancestor_erased ? (t.descendant == p.kept && t.path == p.path)
                                    : (t.ancestor == p.kept && t.path == p.path && t.descendant != "!0");
      if (!fits) continue;
      auto take = std::min(budget, remaining);
      remaining -= take;
      budget -= take;
      matched += take;
    }
  }
  if (query_size) *query_size = size;
  return matched;
}

std::vector<OracleHit> dice_oracle(const std::vector<Slt>& corpus, const Slt& query,
                                   const mathsearch::TupleOptions& options, std::size_t k,
                                   const std::map<std::string, std::uint32_t>& rank_key) {
  auto q = brute_force_tuples(query, options.window, options.eol);
  std::set<std::string> seen;
  std::vector<OracleHit> hits;
  for (const auto& tree : corpus) {
    auto canonical = mathsearch::canonical_string(tree);
    if (!seen.insert(canonical).second) continue;
    auto c = brute_force_tuples(tree, options.window, options.eol);
    std::uint32_t nq = 0;
    auto m = greedy_overlap(q, c, &nq);
    if (m == 0) continue;
    hits.push_back({canonical, m, nq + total(c)});
  }
  std::sort(hits.begin(), hits.end(), [&](const OracleHit& a, const OracleHit& b) {
    // 2ma/da vs 2mb/db
    auto l = static_cast<std::uint64_t>(a.matched) * b.denom;
    auto r = static_cast<std::uint64_t>(b.matched) * a.denom;
    if (l != r) return l > r;
    return rank_key.at(a.canonical) < rank_key.at(b.canonical);
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

namespace {

struct Part {
  std::string q, c;
  std::vector<NodeId> nodes;
};

ScoreTriple triple_of(std::size_t tq, std::size_t tc, const std::vector<NodeId>& members,
                      const std::vector<NodeId>& image, const Slt& q, const Slt& c, NodeId root) {
  ScoreTriple t;
  const auto m = static_cast<std::int64_t>(members.size());
  t.neg_unmatched = m - static_cast<std::int64_t>(tc);
  std::int64_t exact = 0, edges = 0;
  std::set<NodeId> in(members.begin(), members.end());
  for (auto n : members) {
    if (q.label(n) == c.label(image[n])) ++exact;
    if (n != root && in.count(q.parent(n))) ++edges;
  }
  t.exact = exact;
  if (m == 0) return t;
  const auto n = static_cast<std::int64_t>(tq);
  // 2 / (n/m + (n-1)/e), e = 1/2 when there are no edges
  t.h = edges == 0 ? Rational(2 * m, n + 2 * (n - 1) * m) : Rational(2 * m * edges, n * edges + (n - 1) * m);
  return t;
}

std::vector<Part> partitions_of(const Slt& q, const Slt& c, const std::vector<NodeId>& subset,
                                const std::vector<NodeId>& image) {
  std::vector<Part> parts;
  for (auto n : subset) {
    auto it = std::find_if(parts.begin(), parts.end(), [&](const Part& p) {
      return p.q == q.label(n) && p.c == c.label(image[n]);
    });
    if (it == parts.end()) {
      parts.push_back({q.label(n), c.label(image[n]), {n}});
    } else {
      it->nodes.push_back(n);
    }
  }
  return parts;
}

std::vector<NodeId> greedy_members(std::vector<Part> parts) {
  for (auto& p : parts) std::sort(p.nodes.begin(), p.nodes.end());
  std::vector<NodeId> members;
  std::set<std::string> used_q, used_c;
  while (true) {
    const Part* best = nullptr;
    for (const auto& p : parts) {
      if (used_q.count(p.q) || used_c.count(p.c)) continue;
      if (!best) {
        best = &p;
        continue;
      }
      bool pe = p.q == p.c, be = best->q == best->c;
      if (p.nodes.size() > best->nodes.size() ||
          (p.nodes.size() == best->nodes.size() &&
           (pe > be || (pe == be && p.nodes.front() < best->nodes.front())))) {
        best = &p;
      }
    }
    if (!best) break;
    used_q.insert(best->q);
    used_c.insert(best->c);
    members.insert(members.end(), best->nodes.begin(), best->nodes.end());
  }
  return members;
}

}  // namespace

MssOracleResult mss_oracle(const Slt& tq, const Slt& tc) {
  const ScoreTriple none{Rational(), -static_cast<std::int64_t>(tc.size()), 0};
  MssOracleResult out{none, none, none};
  const std::size_t n = tq.size();
  for (NodeId rq = 0; rq < n; ++rq) {
    for (NodeId rc = 0; rc < tc.size(); ++rc) {
      if (!mathsearch::unifies(tq.label(rq), tc.label(rc))) continue;
      std::size_t largest = 0;
      ScoreTriple largest_triple;
      for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (!(mask & (1u << rq))) continue;
        std::vector<NodeId> subset;
        std::vector<NodeId> image(n, kNoNode);
        bool ok = true;
        // pre-order numbering puts parents before children
        for (NodeId v = 0; v < n && ok; ++v) {
          if (!(mask & (1u << v))) continue;
          if (v == rq) {
            image[v] = rc;
          } else {
            NodeId p = tq.parent(v);
            if (p == kNoNode || !(mask & (1u << p)) || image[p] == kNoNode) {
              ok = false;
              break;
            }
            image[v] = tc.child(image[p], tq.parent_edge(v));
            if (image[v] == kNoNode || !mathsearch::unifies(tq.label(v), tc.label(image[v]))) ok = false;
          }
          subset.push_back(v);
        }
        if (!ok) continue;
        auto parts = partitions_of(tq, tc, subset, image);
        auto greedy = triple_of(n, tc.size(), greedy_members(parts), image, tq, tc, rq);
        if (subset.size() > largest) {
          largest = subset.size();
          largest_triple = greedy;
        }
        out.best_any_subtree = std::max(out.best_any_subtree, greedy);
        for (std::uint32_t pick = 0; pick < (1u << parts.size()); ++pick) {
          std::set<std::string> used_q, used_c;
          std::vector<NodeId> members;
          bool legal = true;
          for (std::size_t i = 0; i < parts.size() && legal; ++i) {
            if (!(pick & (1u << i))) continue;
            legal = used_q.insert(parts[i].q).second && used_c.insert(parts[i].c).second;
            members.insert(members.end(), parts[i].nodes.begin(), parts[i].nodes.end());
          }
          if (legal) out.best_any_matched = std::max(out.best_any_matched, triple_of(n, tc.size(), members, image, tq, tc, rq));
        }
      }
      out.triple = std::max(out.triple, largest_triple);
    }
  }
  return out;
}

}  // namespace testing_support
