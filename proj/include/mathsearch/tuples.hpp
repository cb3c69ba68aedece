#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "mathsearch/slt.hpp"

namespace mathsearch {

/// A symbol pair and the edge-label path from ancestor to descendant.
/// End-of-line tuples use "!0" as descendant with path "n".
struct Tuple {
  std::string ancestor;
  std::string descendant;
  std::string path;  // edge characters, see edge_char()

  auto operator<=>(const Tuple&) const = default;
};

/// "ancestor \t descendant \t path", the dictionary key used by the index.
std::string serialize(const Tuple& tuple);
std::optional<Tuple> parse_tuple(std::string_view text);

struct TupleOptions {
  std::optional<std::uint32_t> window;  // nullopt: unbounded
  bool eol = false;

  bool operator==(const TupleOptions&) const = default;
};

/// Multiset of tuples for one formula.
class TupleBag {
 public:
  void add(const Tuple& tuple, std::uint32_t count = 1);

  const std::map<Tuple, std::uint32_t>& entries() const noexcept { return entries_; }
  std::uint64_t total() const noexcept { return total_; }
  std::size_t distinct() const noexcept { return entries_.size(); }
  std::uint32_t count(const Tuple& tuple) const;

  bool operator==(const TupleBag&) const = default;

 private:
  std::map<Tuple, std::uint32_t> entries_;
  std::uint64_t total_ = 0;
};

TupleBag extract_tuples(const Slt& slt, const TupleOptions& options);

enum class WildcardEnd { Ancestor, Descendant };

struct QueryTupleClass {
  enum class Kind { Concrete, SingleWildcard, MultiWildcard };
  Kind kind = Kind::Concrete;
  WildcardEnd end = WildcardEnd::Ancestor;  // meaningful for SingleWildcard only
};

QueryTupleClass classify_query_tuple(const Tuple& tuple);

/// Key of the single-wildcard pattern obtained by erasing one end of a
/// tuple; the erased symbol is serialized as an empty field, so wildcard
/// names (?x0, ?x1, ...) do not matter.
std::string wildcard_pattern_key(const Tuple& tuple, WildcardEnd end);

}  // namespace mathsearch
