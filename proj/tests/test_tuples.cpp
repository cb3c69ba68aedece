#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "fixtures.hpp"
#include "generators.hpp"
#include "mathsearch/mathml.hpp"
#include "mathsearch/tuples.hpp"
#include "oracles.hpp"

using namespace mathsearch;

namespace {

std::size_t longest_path(const TupleBag& bag) {
  std::size_t n = 0;
  for (const auto& [t, c] : bag.entries()) n = std::max(n, t.path.size());
  return n;
}

std::size_t eol_entries(const TupleBag& bag) {
  std::size_t n = 0;
  for (const auto& [t, c] : bag.entries()) n += t.descendant == kEndOfLine;
  return n;
}

}  // namespace

TEST_CASE("tuple counts of the wildcard query") {
  auto t = parse_mathml(fixtures::kWildcardQuery);
  auto all = extract_tuples(t, {std::nullopt, true});
  CHECK(all.distinct() == 23);
  CHECK(eol_entries(all) == 4);
  CHECK(all.total() == 24);
  CHECK(all.count({"V!i", "!0", "n"}) == 2);
  CHECK(longest_path(all) == 5);
  CHECK(all.count({"V!π", "V!i", "b"}) == 1);
  CHECK(all.count({"V!π", "V!i", "nnnwe"}) == 1);
  CHECK(all.count({"N!2", "?x0", "a"}) == 1);
  CHECK(all.count({"M!()2x1", "V!N", "w"}) == 1);
  CHECK(all.count({"V!N", "V!i", "e"}) == 1);
  CHECK(all.count({"=", "?x0", "na"}) == 1);

  CHECK(extract_tuples(t, {2, true}).distinct() == 16);

  auto w1 = extract_tuples(t, {1, false});
  CHECK(w1.distinct() == 7);
  CHECK(w1.total() == 7);
}

TEST_CASE("single node") {
  Slt x("V!x");
  auto with_eol = extract_tuples(x, {1, true});
  CHECK(with_eol.distinct() == 1);
  CHECK(with_eol.count({"V!x", "!0", "n"}) == 1);
  auto plain = extract_tuples(x, {1, false});
  CHECK(plain.total() == 0);
  CHECK(plain.distinct() == 0);
}

TEST_CASE("window zero is rejected") {
  CHECK_THROWS_AS(extract_tuples(Slt("V!x"), {0, false}), std::invalid_argument);
}

TEST_CASE("serialization") {
  Tuple t{"V!a", "+", "n"};
  CHECK(serialize(t) == "V!a\t+\tn");
  CHECK(parse_tuple("V!a\t+\tn") == t);
  CHECK_FALSE(parse_tuple("V!a\t+").has_value());
  CHECK_FALSE(parse_tuple("V!a\t+\t").has_value());
  CHECK_FALSE(parse_tuple("V!a\t+\tq").has_value());
}

TEST_CASE("query tuple classes") {
  using K = QueryTupleClass::Kind;
  auto c = classify_query_tuple({"N!2", "?x0", "a"});
  CHECK(c.kind == K::SingleWildcard);
  CHECK(c.end == WildcardEnd::Descendant);
  c = classify_query_tuple({"?x0", "!0", "n"});
  CHECK(c.kind == K::SingleWildcard);
  CHECK(c.end == WildcardEnd::Ancestor);
  CHECK(classify_query_tuple({"?a", "?b", "n"}).kind == K::MultiWildcard);
  CHECK(classify_query_tuple({"V!a", "!0", "n"}).kind == K::Concrete);
  CHECK(wildcard_pattern_key({"N!2", "?x0", "a"}, WildcardEnd::Descendant) == "N!2\t\ta");
  CHECK(wildcard_pattern_key({"N!2", "?x7", "a"}, WildcardEnd::Descendant) == "N!2\t\ta");
  CHECK(wildcard_pattern_key({"?x0", "!0", "n"}, WildcardEnd::Ancestor) == "\t!0\tn");
}

TEST_CASE("extraction matches all-pairs enumeration on random trees") {
  std::mt19937_64 rng(11);
  const std::optional<std::uint32_t> windows[] = {1, 2, 3, std::nullopt};
  for (int i = 0; i < 500; ++i) {
    auto t = testing_support::random_slt(rng, {1, 12});
    for (auto w : windows) {
      for (bool eol : {false, true}) {
        auto bag = extract_tuples(t, {w, eol});
        auto expected = testing_support::brute_force_tuples(t, w, eol);
        CHECK(bag.entries() == expected);
      }
    }
  }
}

TEST_CASE("tuple properties on random trees") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 300; ++i) {
    auto t = testing_support::random_slt(rng, {1, 14});
    auto w1 = extract_tuples(t, {1, false});
    auto w2 = extract_tuples(t, {2, false});
    auto inf = extract_tuples(t, {std::nullopt, false});
    for (const auto& [tuple, count] : w1.entries()) CHECK(w2.count(tuple) == count);
    for (const auto& [tuple, count] : w2.entries()) {
      CHECK(inf.count(tuple) == count);
      CHECK(tuple.path.size() <= 2);
    }
    std::uint64_t depth_sum = 0, no_next = 0;
    for (NodeId n = 0; n < t.size(); ++n) {
      depth_sum += t.depth(n);
      no_next += !t.has_child(n, EdgeLabel::Next);
    }
    CHECK(inf.total() == depth_sum);
    CHECK(w1.total() == t.size() - 1);
    for (std::optional<std::uint32_t> w : {std::optional<std::uint32_t>(1), std::optional<std::uint32_t>()}) {
      CHECK(extract_tuples(t, {w, true}).total() - extract_tuples(t, {w, false}).total() == no_next);
    }
  }
}
