#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "fixtures.hpp"
#include "generators.hpp"
#include "mathsearch/core.hpp"
#include "mathsearch/mathml.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace mathsearch;
using namespace testing_support;

namespace {

Index small_index(const std::vector<std::string>& canonicals, const TupleOptions& options) {
  std::vector<Slt> trees;
  for (const auto& c : canonicals) trees.push_back(parse_canonical(c));
  return index_trees(trees, options).index;
}

std::vector<CandidateHit> run(const Index& index, const Slt& query, std::size_t k,
                              const Optimizations& opts = {}, SearchStats* stats = nullptr) {
  return search(index, plan_query(index, extract_tuples(query, index.params())), k, opts, stats);
}

std::vector<Optimizations> toggles() {
  std::vector<Optimizations> out{Optimizations::none(), Optimizations::all()};
  for (int i = 0; i < 5; ++i) {
    auto o = Optimizations::none();
    bool* flags[] = {&o.galloping, &o.size_bounds, &o.skip_wildcard_only, &o.wildcard_early_stop,
                     &o.iterator_order};
    *flags[i] = true;
    out.push_back(o);
  }
  return out;
}

}  // namespace

TEST_CASE("three formulae, query a+b") {
  auto index = small_index({"[V!a[n:+[n:V!b]]]", "[V!a[n:+[n:V!c]]]", "[V!x[n:-[n:V!y]]]"}, {1, false});
  auto hits = run(index, parse_canonical("[V!a[n:+[n:V!b]]]"), 10);
  REQUIRE(hits.size() == 2);
  CHECK(index.formula(hits[0].formula) == "[V!a[n:+[n:V!b]]]");
  CHECK(hits[0].score == 1.0);
  CHECK(hits[0].matched == 2);
  CHECK(index.formula(hits[1].formula) == "[V!a[n:+[n:V!c]]]");
  CHECK(hits[1].matched == 1);
  CHECK(hits[1].score == doctest::Approx(0.5).epsilon(1e-15));
  REQUIRE(hits[0].docs.size() == 1);

  CHECK(run(index, parse_canonical("[V!a[n:+[n:V!b]]]"), 1).size() == 1);
  CHECK_THROWS_AS(run(index, parse_canonical("[V!a]"), 0), std::invalid_argument);
}

TEST_CASE("plan of the wildcard query") {
  auto q = parse_mathml(fixtures::kWildcardQuery);
  auto index = small_index({"[V!a[n:+[n:V!b]]]"}, {1, false});
  auto plan = plan_query(index, extract_tuples(q, {1, false}));
  CHECK(plan.query_size == 7);
  CHECK(plan.concrete.size() == 6);
  REQUIRE(plan.wildcard.size() == 1);
  CHECK(plan.wildcard[0].pattern == "N!2\t\ta");
  CHECK(plan.wildcard[0].expansion.empty());
  CHECK(plan.ignored.empty());
  for (const auto& c : plan.concrete) CHECK_FALSE(c.tuple.has_value());
}

TEST_CASE("queries that cannot match") {
  auto index = small_index({"[V!a[n:+[n:V!b]]]", "[V!x[n:-[n:V!y]]]"}, {2, true});
  CHECK(run(index, parse_canonical("[V!q[n:=[n:N!9]]]"), 10).empty());
  CHECK(run(index, parse_canonical("[V!z]"), 10).empty());

  Slt both("?a");
  both.add_child(both.root(), EdgeLabel::Next, "?b");
  auto plan = plan_query(index, extract_tuples(both, {1, false}));
  CHECK(plan.ignored.size() == 1);
  CHECK(plan.query_size == 0);
  CHECK(search(index, plan, 10).empty());
}

TEST_CASE("wildcards only take unallocated tuples") {
  // a + a: the concrete (+, a) takes the only such candidate tuple first
  auto index = small_index({"[V!a[n:+[n:V!a]]]"}, {1, false});
  auto hits = run(index, parse_canonical("[?w[n:+[n:V!a]]]"), 5);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].matched == 2);
  hits = run(index, parse_canonical("[V!a[n:+[n:?w]]]"), 5);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].matched == 2);

  // the wildcard pattern (+, ?, n) occurs twice in the query, twice in the candidate
  index = small_index({"[V!a[n:+[n:V!b[n:+[n:V!c]]]]]"}, {1, false});
  hits = run(index, parse_canonical("[V!a[n:+[n:?u[n:+[n:?v]]]]]"), 5);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].query_size == 4);
  CHECK(hits[0].matched == 4);
}

TEST_CASE("end-of-line tuples match wildcards only on the ancestor side") {
  auto index = small_index({"[V!a[n:+[n:V!b]]]"}, {1, true});
  auto hits = run(index, parse_canonical("[V!a[n:+[n:?w]]]"), 5);
  REQUIRE(hits.size() == 1);
  // query: (a,+) (+,?w) (?w,!0); the EOL tuple of b satisfies (?w,!0)
  CHECK(hits[0].query_size == 3);
  CHECK(hits[0].matched == 3);
  CHECK(hits[0].score == 1.0);
}

TEST_CASE("identical bag scores one") {
  std::mt19937_64 rng(17);
  auto trees = random_trees(rng, 200);
  for (auto options : {TupleOptions{1, false}, TupleOptions{std::nullopt, true}}) {
    auto si = index_trees(trees, options);
    for (int i = 0; i < 40; ++i) {
      auto hits = run(si.index, trees[i], 3);
      REQUIRE_FALSE(hits.empty());
      CHECK(hits[0].score == 1.0);
      // equal bags may come from distinct trees; the tree itself must score 1
      bool found = false;
      for (const auto& h : run(si.index, trees[i], 1000)) {
        if (h.score < 1.0) break;
        found |= si.index.formula(h.formula) == canonical_string(trees[i]);
      }
      CHECK(found);
    }
  }
}

TEST_CASE("agrees with exhaustive scoring") {
  std::mt19937_64 rng(23);
  auto trees = random_trees(rng, 300);
  auto queries = random_queries(rng, trees, 60, 20);
  for (auto options : {TupleOptions{1, false}, TupleOptions{2, true}, TupleOptions{std::nullopt, false}}) {
    auto si = index_trees(trees, options);
    for (const auto& q : queries) {
      auto expected = dice_oracle(trees, q, options, 25, si.rank_key);
      for (const auto& opts : toggles()) {
        auto got = hit_rows(si.index, run(si.index, q, 25, opts));
        REQUIRE(got.size() == expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
          CHECK(got[i].canonical == expected[i].canonical);
          CHECK(got[i].matched == expected[i].matched);
          CHECK(got[i].denom == expected[i].denom);
        }
      }
    }
  }
}

TEST_CASE("optimizations skip work") {
  std::mt19937_64 rng(29);
  auto trees = random_trees(rng, 1000);
  auto si = index_trees(trees, {1, false});
  SearchStats fast, slow;
  for (int i = 0; i < 100; ++i) {
    run(si.index, trees[i], 1, Optimizations::all(), &fast);
    run(si.index, trees[i], 1, Optimizations::none(), &slow);
  }
  CHECK(fast.scored < slow.scored);
  CHECK(fast.pruned_by_size > 0);
  CHECK(slow.pruned_by_size == 0);
}

TEST_CASE("formula id order does not change results") {
  std::mt19937_64 rng(31);
  auto trees = random_trees(rng, 300);
  auto queries = random_queries(rng, trees, 40, 10);
  auto a = index_trees(trees, {2, false}, false);
  auto b = index_trees(trees, {2, false}, true);
  for (const auto& q : queries) {
    auto ra = hit_rows(a.index, run(a.index, q, 1000));
    auto rb = hit_rows(b.index, run(b.index, q, 1000));
    std::sort(ra.begin(), ra.end(), [](auto& x, auto& y) { return x.canonical < y.canonical; });
    std::sort(rb.begin(), rb.end(), [](auto& x, auto& y) { return x.canonical < y.canonical; });
    CHECK(ra == rb);
  }
}

TEST_CASE("score comparison") {
  CHECK(compare_scores(1, 2, 2, 4) == 0);
  CHECK(compare_scores(1, 3, 1, 2) < 0);
  CHECK(compare_scores(3, 4, 2, 4) > 0);
  CHECK(compare_scores(0, 5, 0, 9) == 0);
}
