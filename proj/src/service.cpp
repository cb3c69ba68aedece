#include "mathsearch/service.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>
#include <unordered_map>

#include "mathsearch/mathml.hpp"

namespace mathsearch {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// equal Dice values compare equal exactly
int compare_dice(const FormulaHit& a, const FormulaHit& b) {
  return compare_scores(a.matched, a.dice_denom, b.matched, b.dice_denom);
}

const char* match_name(NodeMatch m) {
  switch (m) {
    case NodeMatch::Exact: return "exact";
    case NodeMatch::Unified: return "unified";
    case NodeMatch::Unmatched: return "unmatched";
  }
  return "unmatched";
}

nlohmann::json triple_json(const ScoreTriple& t) {
  return {{"h", t.h.value()},
          {"hFraction", {t.h.num(), t.h.den()}},
          {"negUnmatched", t.neg_unmatched},
          {"exact", t.exact}};
}

std::string triple_text(const ScoreTriple& t) {
  std::ostringstream s;
  s << '(' << t.h.num();
  if (t.h.den() != 1) s << '/' << t.h.den();
  s << ", " << t.neg_unmatched << ", " << t.exact << ')';
  return s.str();
}

}  // namespace

SearchResponse run_query(const Index* index, std::string_view mathml, const QueryOptions& options) {
  if (!index) throw IndexNotLoaded();
  return run_query(*index, parse_mathml(mathml), options);
}

SearchResponse run_query(const Index& index, const Slt& query, const QueryOptions& options) {
  if (options.k == 0) throw std::invalid_argument("k must be positive");
  SearchResponse response;
  response.query = canonical_string(query);
  response.reranked = options.rerank;

  auto start = Clock::now();
  auto plan = plan_query(index, extract_tuples(query, index.params()));
  auto candidates = search(index, plan, options.k, options.optimizations);
  response.core_ms = ms_since(start);

  start = Clock::now();
  std::vector<FormulaHit> hits;
  hits.reserve(candidates.size());
  for (const auto& c : candidates) {
    FormulaHit hit;
    hit.formula = c.formula;
    hit.canonical = index.formula(c.formula);
    hit.dice = c.score;
    hit.matched = c.matched;
    hit.dice_denom = c.query_size + c.candidate_size;
    for (const auto& d : c.docs) hit.docs.push_back({index.document(d.doc), d.position});
    auto tree = parse_canonical(hit.canonical);
    hit.mathml = to_mathml(tree, true);
    if (options.rerank) {
      auto r = mss(query, tree);
      hit.triple = r.triple;
      hit.highlight = candidate_highlight(query, tree, r);
      hit.structure_key = structure_key(query, tree, r);
    }
    hits.push_back(std::move(hit));
  }
  if (options.rerank) {
    std::stable_sort(hits.begin(), hits.end(), [](const FormulaHit& a, const FormulaHit& b) {
      if (*a.triple != *b.triple) return *a.triple > *b.triple;
      if (int c = compare_dice(a, b); c != 0) return c > 0;
      return a.formula < b.formula;
    });
  }

  std::unordered_map<std::string, std::size_t> group_of;
  for (auto& hit : hits) {
    auto [it, inserted] = group_of.try_emplace(hit.structure_key, response.groups.size());
    if (inserted) response.groups.push_back({hit.structure_key, {}});
    response.groups[it->second].hits.push_back(hit);
  }
  response.documents = rank_documents(hits);
  response.rerank_ms = options.rerank ? ms_since(start) : 0.0;
  return response;
}

std::vector<DocumentRank> rank_documents(const std::vector<FormulaHit>& hits) {
  std::vector<DocumentRank> docs;
  std::vector<const FormulaHit*> best_hit;
  std::unordered_map<std::string, std::size_t> slot;
  for (const auto& hit : hits) {
    for (const auto& d : hit.docs) {
      auto [it, inserted] = slot.try_emplace(d.name, docs.size());
      if (inserted) {
        docs.push_back({d.name, hit.triple, hit.dice, 0});
        best_hit.push_back(&hit);
      }
      auto& row = docs[it->second];
      ++row.hit_count;
      if (hit.triple && (!row.best_triple || *hit.triple > *row.best_triple)) row.best_triple = hit.triple;
      if (compare_dice(hit, *best_hit[it->second]) > 0) {
        best_hit[it->second] = &hit;
        row.best_dice = hit.dice;
      }
    }
  }
  std::vector<std::size_t> order(docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const auto& a = docs[x];
    const auto& b = docs[y];
    if (a.best_triple && b.best_triple && *a.best_triple != *b.best_triple) {
      return *a.best_triple > *b.best_triple;
    }
    if (!a.best_triple || !b.best_triple) {
      if (int c = compare_dice(*best_hit[x], *best_hit[y]); c != 0) return c > 0;
    }
    if (a.hit_count != b.hit_count) return a.hit_count > b.hit_count;
    return a.name < b.name;
  });
  std::vector<DocumentRank> out;
  out.reserve(docs.size());
  for (auto i : order) out.push_back(std::move(docs[i]));
  return out;
}

std::vector<FormulaHit> flatten(const SearchResponse& response) {
  std::vector<FormulaHit> hits;
  for (const auto& g : response.groups) hits.insert(hits.end(), g.hits.begin(), g.hits.end());
  std::stable_sort(hits.begin(), hits.end(), [&](const FormulaHit& a, const FormulaHit& b) {
    if (response.reranked && *a.triple != *b.triple) return *a.triple > *b.triple;
    if (int c = compare_dice(a, b); c != 0) return c > 0;
    return a.formula < b.formula;
  });
  return hits;
}

nlohmann::json to_json(const SearchResponse& response, std::string_view view) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : response.groups) {
    nlohmann::json hits = nlohmann::json::array();
    for (const auto& h : g.hits) {
      nlohmann::json docs = nlohmann::json::array();
      for (const auto& d : h.docs) docs.push_back({{"docName", d.name}, {"position", d.position}});
      nlohmann::json highlight = nlohmann::json::array();
      for (auto m : h.highlight) highlight.push_back(match_name(m));
      hits.push_back({{"formId", h.formula},
                      {"canonical", h.canonical},
                      {"mathml", h.mathml},
                      {"triple", h.triple ? triple_json(*h.triple) : nlohmann::json(nullptr)},
                      {"diceScore", h.dice},
                      {"highlight", std::move(highlight)},
                      {"docs", std::move(docs)}});
    }
    groups.push_back({{"structureKey", g.structure_key}, {"hits", std::move(hits)}});
  }
  nlohmann::json documents = nlohmann::json::array();
  for (const auto& d : response.documents) {
    documents.push_back({{"docName", d.name},
                         {"bestTriple", d.best_triple ? triple_json(*d.best_triple) : nlohmann::json(nullptr)},
                         {"bestDice", d.best_dice},
                         {"hitCount", d.hit_count}});
  }
  return {{"query", response.query},
          {"timingMs", {{"coreMs", response.core_ms}, {"rerankMs", response.rerank_ms}}},
          {"reranked", response.reranked},
          {"view", view},
          {"groups", std::move(groups)},
          {"documents", std::move(documents)}};
}

nlohmann::json health_json(const Index* index) {
  if (!index) return {{"status", "unavailable"}};
  const auto& p = index->params();
  return {{"status", "ok"},
          {"formulae", index->formula_count()},
          {"w", p.window ? nlohmann::json(*p.window) : nlohmann::json("all")},
          {"eol", p.eol}};
}

std::string render_text(const SearchResponse& response, bool by_document) {
  std::ostringstream out;
  out << "query: " << response.query << '\n';
  if (by_document) {
    std::size_t rank = 1;
    for (const auto& d : response.documents) {
      out << rank++ << ". " << d.name << "  hits=" << d.hit_count;
      if (d.best_triple) out << "  best=" << triple_text(*d.best_triple);
      out << "  dice=" << d.best_dice << '\n';
    }
    return out.str();
  }
  std::size_t rank = 1;
  for (const auto& g : response.groups) {
    if (response.reranked) out << "group " << g.structure_key << '\n';
    for (const auto& h : g.hits) {
      out << "  " << rank++ << ". " << h.canonical;
      if (h.triple) out << "  " << triple_text(*h.triple);
      out << "  dice=" << h.dice;
      for (const auto& d : h.docs) out << "  " << d.name << '@' << d.position;
      out << '\n';
    }
  }
  if (rank == 1) out << "no hits\n";
  return out.str();
}

}  // namespace mathsearch
