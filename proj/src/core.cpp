#include "mathsearch/core.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <stdexcept>
#include <unordered_map>

namespace mathsearch {

QueryPlan plan_query(const Index& index, const TupleBag& query) {
  QueryPlan plan;
  std::map<std::string, std::uint32_t> patterns;
  for (const auto& [tuple, count] : query.entries()) {
    auto cls = classify_query_tuple(tuple);
    switch (cls.kind) {
      case QueryTupleClass::Kind::Concrete: {
        auto key = serialize(tuple);
        auto id = index.find_tuple(key);
        plan.concrete.push_back({std::move(key), id, count});
        plan.query_size += count;
        break;
      }
      case QueryTupleClass::Kind::SingleWildcard:
        patterns[wildcard_pattern_key(tuple, cls.end)] += count;
        plan.query_size += count;
        break;
      case QueryTupleClass::Kind::MultiWildcard:
        for (std::uint32_t i = 0; i < count; ++i) plan.ignored.push_back(tuple);
        break;
    }
  }
  std::sort(plan.concrete.begin(), plan.concrete.end(),
            [](const auto& a, const auto& b) { return a.key < b.key; });
  for (auto& [pattern, count] : patterns) {
    QueryPlan::Wildcard w{pattern, count, {}};
    if (auto id = index.find_wildcard(pattern)) {
      auto expansion = index.expansion(*id);
      w.expansion.assign(expansion.begin(), expansion.end());
    }
    plan.wildcard.push_back(std::move(w));
  }
  return plan;
}

int compare_scores(std::uint32_t matched_a, std::uint32_t denom_a, std::uint32_t matched_b,
                   std::uint32_t denom_b) {
  auto lhs = static_cast<std::uint64_t>(matched_a) * denom_b;
  auto rhs = static_cast<std::uint64_t>(matched_b) * denom_a;
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

namespace {

constexpr FormulaId kExhausted = std::numeric_limits<FormulaId>::max();

class Cursor {
 public:
  explicit Cursor(std::span<const Posting> list) : list_(list) {}

  bool done() const { return pos_ >= list_.size(); }
  FormulaId formula() const { return done() ? kExhausted : list_[pos_].formula; }
  std::uint32_t count() const { return list_[pos_].count; }
  std::size_t size() const { return list_.size(); }

  void next() { ++pos_; }

  void next_geq(FormulaId target, bool galloping) {
    if (done() || list_[pos_].formula >= target) return;
    if (!galloping) {
      while (!done() && list_[pos_].formula < target) ++pos_;
      return;
    }
    std::size_t lo = pos_, step = 1;
    while (lo + step < list_.size() && list_[lo + step].formula < target) {
      lo += step;
      step *= 2;
    }
    auto hi = std::min(lo + step + 1, list_.size());
    auto it = std::lower_bound(list_.begin() + static_cast<std::ptrdiff_t>(lo),
                               list_.begin() + static_cast<std::ptrdiff_t>(hi), target,
                               [](const Posting& p, FormulaId f) { return p.formula < f; });
    pos_ = static_cast<std::size_t>(it - list_.begin());
  }

 private:
  std::span<const Posting> list_;
  std::size_t pos_ = 0;
};

struct Slot {
  Cursor cursor;
  bool concrete = false;
  std::uint32_t query_count = 0;  // concrete only
};

struct Scored {
  FormulaId formula;
  std::uint32_t matched;
  std::uint32_t denom;
};

// true if a ranks strictly before b
bool better(const Scored& a, const Scored& b) {
  int c = compare_scores(a.matched, a.denom, b.matched, b.denom);
  return c != 0 ? c > 0 : a.formula < b.formula;
}

using HeapEntry = std::pair<FormulaId, std::size_t>;
using CursorHeap = std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>>;

}  // namespace

std::vector<CandidateHit> search(const Index& index, const QueryPlan& plan, std::size_t k,
                                 const Optimizations& opts, SearchStats* stats) {
  if (k == 0) throw std::invalid_argument("k must be positive");
  SearchStats local_stats;
  SearchStats& st = stats ? *stats : local_stats;
  const std::uint32_t nq = plan.query_size;
  if (nq == 0) return {};

  std::vector<Slot> slots;
  std::unordered_map<TupleId, std::size_t> slot_of;
  auto slot_for = [&](TupleId t) {
    auto [it, inserted] = slot_of.try_emplace(t, slots.size());
    if (inserted) slots.push_back(Slot{Cursor(index.postings(t))});
    return it->second;
  };

  std::vector<std::size_t> concrete_slots;
  for (const auto& c : plan.concrete) {
    if (!c.tuple) continue;
    auto s = slot_for(*c.tuple);
    slots[s].concrete = true;
    slots[s].query_count = c.count;
    concrete_slots.push_back(s);
  }
  std::uint32_t wq = 0;
  std::vector<std::vector<std::size_t>> wildcard_slots;
  std::vector<std::uint32_t> wildcard_budget;
  for (const auto& w : plan.wildcard) {
    wq += w.count;
    std::vector<std::size_t> list;
    for (auto t : w.expansion) list.push_back(slot_for(t));
    wildcard_slots.push_back(std::move(list));
    wildcard_budget.push_back(w.count);
  }

  if (opts.iterator_order) {
    auto larger = [&](std::size_t a, std::size_t b) {
      return slots[a].cursor.size() > slots[b].cursor.size();
    };
    std::stable_sort(concrete_slots.begin(), concrete_slots.end(), larger);
    // within one wildcard the order only matters if another wildcard competes for the same tuples
    std::vector<int> uses(slots.size(), 0);
    bool disjoint = true;
    for (const auto& list : wildcard_slots) {
      for (auto s : list) disjoint &= ++uses[s] == 1;
    }
    if (disjoint) {
      for (auto& list : wildcard_slots) std::stable_sort(list.begin(), list.end(), larger);
    }
  }

  CursorHeap concrete_heap, wildcard_heap;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    (slots[s].concrete ? concrete_heap : wildcard_heap).emplace(slots[s].cursor.formula(), s);
  }

  std::vector<Scored> top;  // heap whose front is the worst kept hit
  auto worse_on_top = [](const Scored& a, const Scored& b) { return better(a, b); };
  std::vector<std::uint32_t> avail(slots.size(), 0);
  std::vector<std::size_t> at_candidate;

  while (true) {
    const bool full = top.size() == k;
    const Scored* kth = full ? &top.front() : nullptr;
    const bool no_wildcard_only =
        opts.skip_wildcard_only && full && compare_scores(wq, nq + wq, kth->matched, kth->denom) <= 0;

    FormulaId f = concrete_heap.empty() ? kExhausted : concrete_heap.top().first;
    if (!no_wildcard_only && !wildcard_heap.empty()) f = std::min(f, wildcard_heap.top().first);
    if (f == kExhausted) break;

    if (no_wildcard_only) {
      while (!wildcard_heap.empty() && wildcard_heap.top().first < f) {
        auto s = wildcard_heap.top().second;
        wildcard_heap.pop();
        slots[s].cursor.next_geq(f, opts.galloping);
        if (!slots[s].cursor.done()) wildcard_heap.emplace(slots[s].cursor.formula(), s);
      }
    }
    at_candidate.clear();
    bool concrete_hit = false;
    for (auto* heap : {&concrete_heap, &wildcard_heap}) {
      while (!heap->empty() && heap->top().first == f) {
        auto s = heap->top().second;
        heap->pop();
        at_candidate.push_back(s);
        avail[s] = slots[s].cursor.count();
        concrete_hit |= slots[s].concrete;
      }
    }
    ++st.candidates;

    const std::uint32_t nc = index.tuple_total(f);
    const std::uint32_t denom = nq + nc;
    if (full && opts.size_bounds && compare_scores(std::min(nq, nc), denom, kth->matched, kth->denom) <= 0) {
      ++st.pruned_by_size;
    } else if (full && opts.skip_wildcard_only && !concrete_hit &&
               compare_scores(std::min(wq, nc), denom, kth->matched, kth->denom) <= 0) {
      ++st.skipped_wildcard_only;
    } else {
      ++st.scored;
      std::uint32_t matched = 0;
      for (auto s : concrete_slots) {
        auto take = std::min(slots[s].query_count, avail[s]);
        avail[s] -= take;
        matched += take;
      }
      for (std::size_t w = 0; w < wildcard_slots.size(); ++w) {
        auto budget = wildcard_budget[w];
        for (auto s : wildcard_slots[w]) {
          if (budget == 0 && opts.wildcard_early_stop) break;
          auto take = std::min(budget, avail[s]);
          avail[s] -= take;
          budget -= take;
          matched += take;
        }
      }
      if (matched > 0) {
        Scored hit{f, matched, denom};
        if (!full) {
          top.push_back(hit);
          std::push_heap(top.begin(), top.end(), worse_on_top);
        } else if (better(hit, top.front())) {
          std::pop_heap(top.begin(), top.end(), worse_on_top);
          top.back() = hit;
          std::push_heap(top.begin(), top.end(), worse_on_top);
        }
      }
    }

    for (auto s : at_candidate) {
      avail[s] = 0;
      slots[s].cursor.next();
      if (!slots[s].cursor.done()) {
        (slots[s].concrete ? concrete_heap : wildcard_heap).emplace(slots[s].cursor.formula(), s);
      }
    }
  }

  std::sort(top.begin(), top.end(), better);
  std::vector<CandidateHit> hits;
  hits.reserve(top.size());
  for (const auto& t : top) {
    auto docs = index.documents_of(t.formula);
    hits.push_back({t.formula, t.matched, nq, t.denom - nq,
                    2.0 * t.matched / static_cast<double>(t.denom), {docs.begin(), docs.end()}});
  }
  return hits;
}

}  // namespace mathsearch
