#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mathsearch/slt.hpp"
#include "mathsearch/tuples.hpp"

namespace mathsearch {

using FormulaId = std::uint32_t;
using DocId = std::uint32_t;
using TupleId = std::uint32_t;
using WildcardId = std::uint32_t;

struct Posting {
  FormulaId formula;
  std::uint32_t count;

  bool operator==(const Posting&) const = default;
};

struct DocRef {
  DocId doc;
  std::uint32_t position;

  bool operator==(const DocRef&) const = default;
};

class IndexError : public std::runtime_error {
 public:
  enum class Kind { IoError, FormatVersionMismatch, ChecksumMismatch, EmptyCorpus, Corrupt };

  IndexError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct FormulaOccurrence {
  std::uint32_t position = 0;
  std::string mathml;
};

/// One document and its formulae in document order.
struct CorpusRecord {
  std::string document;
  std::vector<FormulaOccurrence> formulae;
};

/// Immutable inverted index over symbol-pair tuples.
///
///   D1 formula (canonical string) -> FormulaId    PL1 TupleId    -> (FormulaId, count)+
///   D2 document name -> DocId                     PL2 FormulaId  -> (DocId, position)+
///   D3 tuple -> TupleId                           PL3 WildcardId -> TupleId+
///   D4 single-wildcard pattern -> WildcardId      A1  FormulaId  -> total tuple count
///
/// Tuple and wildcard ids follow the byte order of their serialized keys.
/// A loaded index is safe to share between threads.
class Index {
 public:
  Index() = default;

  /// An index with no formulae, e.g. to persist parameters alone.
  static Index empty(const TupleOptions& params);

  const TupleOptions& params() const noexcept { return params_; }

  std::size_t formula_count() const noexcept { return formulae_.size(); }
  std::size_t document_count() const noexcept { return documents_.size(); }
  std::size_t tuple_count() const noexcept { return tuple_keys_.size(); }
  std::size_t wildcard_pattern_count() const noexcept { return wildcard_keys_.size(); }

  const std::string& formula(FormulaId id) const { return formulae_.at(id); }
  const std::string& document(DocId id) const { return documents_.at(id); }
  const std::string& tuple_key(TupleId id) const { return tuple_keys_.at(id); }
  const std::string& wildcard_key(WildcardId id) const { return wildcard_keys_.at(id); }

  std::optional<FormulaId> find_formula(std::string_view canonical) const;
  std::optional<TupleId> find_tuple(std::string_view key) const;
  std::optional<WildcardId> find_wildcard(std::string_view key) const;

  std::span<const Posting> postings(TupleId id) const { return postings_.at(id); }
  std::span<const DocRef> documents_of(FormulaId id) const { return formula_docs_.at(id); }
  std::span<const TupleId> expansion(WildcardId id) const { return expansions_.at(id); }
  std::uint32_t tuple_total(FormulaId id) const { return tuple_totals_.at(id); }

  /// Throws std::logic_error naming the first violated structural invariant.
  void check_invariants() const;

  std::string serialize() const;
  static Index deserialize(std::string_view bytes);
  void save(const std::filesystem::path& path) const;
  static Index load(const std::filesystem::path& path);

  bool operator==(const Index&) const;

 private:
  friend class IndexBuilder;
  friend Index reorder_formula_ids(const Index& index);

  void rebuild_lookups();

  TupleOptions params_;
  std::vector<std::string> formulae_;       // D1
  std::vector<std::string> documents_;      // D2
  std::vector<std::string> tuple_keys_;     // D3
  std::vector<std::string> wildcard_keys_;  // D4
  std::vector<std::vector<Posting>> postings_;     // PL1
  std::vector<std::vector<DocRef>> formula_docs_;  // PL2
  std::vector<std::vector<TupleId>> expansions_;   // PL3
  std::vector<std::uint32_t> tuple_totals_;        // A1

  std::unordered_map<std::string, FormulaId> formula_lookup_;
  std::unordered_map<std::string, TupleId> tuple_lookup_;
  std::unordered_map<std::string, WildcardId> wildcard_lookup_;
};

/// Renumbers formulae by tuple count: sort ascending, split into quartiles
/// q1..q4 and lay them out as q2, reverse(q1), q3, q4.
Index reorder_formula_ids(const Index& index);

/// Permutation used by reorder_formula_ids: result[i] is the old id placed
/// at new id i. Exposed for testing.
std::vector<FormulaId> quartile_order(std::span<const std::uint32_t> sizes);

struct BuildReport {
  std::size_t documents = 0;
  std::size_t formulae_seen = 0;
  std::size_t parse_failures = 0;
  std::size_t duplicate_in_document = 0;
  std::vector<std::string> warnings;  // first few parse failures
};

class IndexBuilder {
 public:
  explicit IndexBuilder(TupleOptions options);

  /// Parses and adds every formula of a record; parse failures are counted.
  void add(const CorpusRecord& record);

  /// Adds one already-parsed formula. Only the first occurrence of a formula
  /// within a document is recorded.
  void add_formula(std::string_view document, std::uint32_t position, const Slt& slt);

  /// Throws IndexError(EmptyCorpus) if nothing was indexed.
  Index finish(bool reorder = true);

  const BuildReport& report() const noexcept { return report_; }

 private:
  DocId document_id(std::string_view name);

  TupleOptions options_;
  BuildReport report_;
  std::unordered_map<std::string, DocId> doc_ids_;
  std::vector<std::string> documents_;
  std::unordered_map<std::string, FormulaId> formula_ids_;
  std::vector<std::string> formulae_;
  std::vector<std::vector<std::pair<std::string, std::uint32_t>>> formula_tuples_;
  std::vector<std::vector<DocRef>> formula_docs_;
  std::unordered_set<std::uint64_t> seen_in_document_;
};

Index build_index(std::span<const CorpusRecord> corpus, const TupleOptions& options,
                  BuildReport* report = nullptr);

}  // namespace mathsearch
