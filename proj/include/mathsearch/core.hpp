#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mathsearch/index.hpp"
#include "mathsearch/tuples.hpp"

namespace mathsearch {

/// Evaluation shortcuts. None of them changes the result of search().
struct Optimizations {
  bool galloping = true;           // O1: doubling search when skipping ahead in a postings list
  bool size_bounds = true;         // O2: skip formulae whose size cannot beat the k-th score
  bool skip_wildcard_only = true;  // O3: skip formulae reachable only through wildcards
  bool wildcard_early_stop = true; // O4: stop reading a wildcard's expansion once it is satisfied
  bool iterator_order = true;      // O5: larger postings lists are evaluated first

  static Optimizations all() { return {}; }
  static Optimizations none() { return {false, false, false, false, false}; }
};

struct QueryPlan {
  struct Concrete {
    std::string key;                // serialized tuple
    std::optional<TupleId> tuple;   // absent if the index has never seen it
    std::uint32_t count = 0;
  };
  struct Wildcard {
    std::string pattern;            // see wildcard_pattern_key()
    std::uint32_t count = 0;        // summed over tuples sharing the pattern
    std::vector<TupleId> expansion; // ascending
  };

  std::vector<Concrete> concrete;   // ascending key
  std::vector<Wildcard> wildcard;   // ascending pattern; also the allocation order
  std::vector<Tuple> ignored;       // tuples with a wildcard at both ends
  std::uint32_t query_size = 0;     // concrete and wildcard counts only
};

QueryPlan plan_query(const Index& index, const TupleBag& query);

struct CandidateHit {
  FormulaId formula = 0;
  std::uint32_t matched = 0;
  std::uint32_t query_size = 0;
  std::uint32_t candidate_size = 0;
  double score = 0.0;  // 2 matched / (query_size + candidate_size)
  std::vector<DocRef> docs;
};

/// Exact comparison of Dice values by cross-multiplication.
/// Returns <0, 0, >0 like a three-way comparison.
int compare_scores(std::uint32_t matched_a, std::uint32_t denom_a, std::uint32_t matched_b,
                   std::uint32_t denom_b);

struct SearchStats {
  std::size_t candidates = 0;          // formulae seen in any postings list
  std::size_t scored = 0;              // formulae whose overlap was computed
  std::size_t pruned_by_size = 0;
  std::size_t skipped_wildcard_only = 0;
};

/// Top-k formulae by Dice's coefficient over tuple multisets, best first,
/// ties by ascending formula id. Only formulae sharing at least one tuple
/// with the query are returned. Throws std::invalid_argument if k is 0.
std::vector<CandidateHit> search(const Index& index, const QueryPlan& plan, std::size_t k,
                                 const Optimizations& opts = {}, SearchStats* stats = nullptr);

}  // namespace mathsearch
