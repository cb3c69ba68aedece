#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mathsearch/slt.hpp"

namespace mathsearch {

/// Node-level unification of a query label with a candidate label:
/// variables with variables, numbers with numbers, a query wildcard with
/// anything, everything else by identical label.
bool unifies(std::string_view query_label, std::string_view candidate_label);

/// Edge-preserving correspondence between a pruned subtree T1 of the query
/// and a pruned subtree T2 of the candidate. pairs[0] is the root pair;
/// the rest follow the query's pre-order.
struct Alignment {
  std::vector<std::pair<NodeId, NodeId>> pairs;  // (query node, candidate node)

  std::size_t size() const noexcept { return pairs.size(); }
};

/// Largest connected alignment rooted at (rq, rc) in which every query node
/// unifies with its image, or nullopt if the roots do not unify.
std::optional<Alignment> maximally_similar_subtree(const Slt& tq, const Slt& tc, NodeId rq, NodeId rc);

struct AlignmentPartition {
  std::vector<NodeId> nodes;  // query nodes, ascending
  std::string query_label;
  std::string candidate_label;

  bool exact() const { return query_label == candidate_label; }
};

/// Groups the aligned query nodes by (query label, candidate label).
std::vector<AlignmentPartition> alignment_partitions(const Slt& tq, const Slt& tc, const Alignment& a);

struct MatchedSet {
  std::vector<std::pair<NodeId, NodeId>> pairs;  // members of M with their images, ascending query node
  std::size_t edges = 0;                         // |E(M)|
  std::size_t exact = 0;                         // members whose label equals the image's

  std::size_t size() const noexcept { return pairs.size(); }
};

/// Greedy selection: partitions by size descending, identical-label
/// partitions first among equals, then smallest node id; a partition is
/// taken if neither its query label nor its candidate label is used yet.
MatchedSet greedy_matched_set(const Slt& tq, const Slt& tc, const Alignment& a,
                              std::span<const AlignmentPartition> partitions);

/// |E(M)| for a set of query nodes inside the aligned subtree rooted at `root`.
std::size_t induced_edges(const Slt& tq, NodeId root, std::span<const NodeId> members);

/// Non-negative fraction kept in lowest terms.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t num, std::int64_t den);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  double value() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

  bool operator==(const Rational&) const = default;
  std::strong_ordering operator<=>(const Rational& o) const;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Compared lexicographically, larger is better.
struct ScoreTriple {
  Rational h;                      // harmonic mean of node and edge coverage
  std::int64_t neg_unmatched = 0;  // |M| - |Tc|
  std::int64_t exact = 0;

  bool operator==(const ScoreTriple&) const = default;
  std::strong_ordering operator<=>(const ScoreTriple&) const = default;
};

/// h = 2 / (|Tq|/|M| + (|Tq|-1)/max(|E(M)|, 1/2)), or 0 for an empty M.
/// A single-node query gives h = 2 on any match.
ScoreTriple score(std::size_t query_size, std::size_t candidate_size, std::size_t matched,
                  std::size_t edges, std::size_t exact);
ScoreTriple score(const Slt& tq, const Slt& tc, const MatchedSet& m);

struct MssResult {
  ScoreTriple triple;
  Alignment alignment;  // empty if no node pair unifies
  MatchedSet matched;
};

/// Best score over every unifiable (query node, candidate node) root pair.
/// Ties keep the first pair in (query node, candidate node) order.
MssResult mss(const Slt& tq, const Slt& tc);

enum class NodeMatch { Exact, Unified, Unmatched };

/// Class of every candidate node under the best matched set.
std::vector<NodeMatch> candidate_highlight(const Slt& tq, const Slt& tc, const MssResult& r);

/// Class of every query node; aligned nodes left out of M and nodes
/// outside the alignment are Unmatched.
std::vector<NodeMatch> query_highlight(const Slt& tq, const Slt& tc, const MssResult& r);

/// Canonical string of the aligned query subtree with a per-node flag
/// appended to each label: '=' exact, '~' unified, '.' aligned but unmatched.
std::string structure_key(const Slt& tq, const Slt& tc, const MssResult& r);

}  // namespace mathsearch
