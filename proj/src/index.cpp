#include "mathsearch/index.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <sstream>

#include <boost/crc.hpp>

#include "mathsearch/mathml.hpp"

namespace mathsearch {

namespace {

constexpr char kMagic[4] = {'T', 'G', 'N', 'T'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::size_t kHeaderSize = 4 + 4 + 4 + 1;
constexpr std::size_t kMaxWarnings = 20;

std::uint32_t crc32(std::string_view bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void varint(std::uint64_t v) {
    while (v >= 0x80) {
      u8(static_cast<std::uint8_t>(v | 0x80));
      v >>= 7;
    }
    u8(static_cast<std::uint8_t>(v));
  }

  void str(std::string_view s) {
    varint(s.size());
    out_.append(s);
  }

  void strings(const std::vector<std::string>& list) {
    varint(list.size());
    for (const auto& s : list) str(s);
  }

  std::string& bytes() { return out_; }

 private:
  std::string out_;
};

[[noreturn]] void corrupt(const std::string& what) {
  throw IndexError(IndexError::Kind::Corrupt, "corrupt index: " + what);
}

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  std::uint8_t u8() {
    if (pos_ >= in_.size()) corrupt("unexpected end of data");
    return static_cast<std::uint8_t>(in_[pos_++]);
  }

  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }

  std::uint32_t varint() {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 35; shift += 7) {
      auto b = u8();
      v |= static_cast<std::uint64_t>(b & 0x7f) << shift;
      if (!(b & 0x80)) {
        if (v > 0xffffffffu) corrupt("varint overflow");
        return static_cast<std::uint32_t>(v);
      }
    }
    corrupt("varint too long");
  }

  // guards against absurd counts before allocating
  std::uint32_t count() {
    auto n = varint();
    if (n > in_.size() - pos_) corrupt("count exceeds remaining data");
    return n;
  }

  std::string str() {
    auto n = count();
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  std::vector<std::string> strings() {
    std::vector<std::string> list(count());
    for (auto& s : list) s = str();
    return list;
  }

  bool done() const { return pos_ == in_.size(); }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

std::uint32_t checked_add(std::uint32_t a, std::uint32_t b) {
  if (b > 0xffffffffu - a) corrupt("delta overflow");
  return a + b;
}

void check(bool ok, const char* what) {
  if (!ok) throw std::logic_error(what);
}

}  // namespace

Index Index::empty(const TupleOptions& params) {
  Index index;
  index.params_ = params;
  return index;
}

std::optional<FormulaId> Index::find_formula(std::string_view canonical) const {
  auto it = formula_lookup_.find(std::string(canonical));
  if (it == formula_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<TupleId> Index::find_tuple(std::string_view key) const {
  auto it = tuple_lookup_.find(std::string(key));
  if (it == tuple_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<WildcardId> Index::find_wildcard(std::string_view key) const {
  auto it = wildcard_lookup_.find(std::string(key));
  if (it == wildcard_lookup_.end()) return std::nullopt;
  return it->second;
}

void Index::rebuild_lookups() {
  formula_lookup_.clear();
  tuple_lookup_.clear();
  wildcard_lookup_.clear();
  for (FormulaId i = 0; i < formulae_.size(); ++i) formula_lookup_.emplace(formulae_[i], i);
  for (TupleId i = 0; i < tuple_keys_.size(); ++i) tuple_lookup_.emplace(tuple_keys_[i], i);
  for (WildcardId i = 0; i < wildcard_keys_.size(); ++i) wildcard_lookup_.emplace(wildcard_keys_[i], i);
}

void Index::check_invariants() const {
  const auto nf = formulae_.size();
  check(formula_docs_.size() == nf, "PL2 size differs from D1");
  check(tuple_totals_.size() == nf, "A1 size differs from D1");
  check(postings_.size() == tuple_keys_.size(), "PL1 size differs from D3");
  check(expansions_.size() == wildcard_keys_.size(), "PL3 size differs from D4");
  check(formula_lookup_.size() == nf, "D1 has duplicate formulae");
  check(std::adjacent_find(tuple_keys_.begin(), tuple_keys_.end(), std::greater_equal<>()) ==
            tuple_keys_.end(),
        "D3 keys not strictly increasing");
  check(std::adjacent_find(wildcard_keys_.begin(), wildcard_keys_.end(), std::greater_equal<>()) ==
            wildcard_keys_.end(),
        "D4 keys not strictly increasing");

  std::vector<std::uint64_t> sums(nf, 0);
  for (const auto& list : postings_) {
    check(!list.empty(), "PL1 list empty");
    for (std::size_t i = 0; i < list.size(); ++i) {
      check(list[i].formula < nf, "PL1 formId out of range");
      check(list[i].count > 0, "PL1 count is zero");
      check(i == 0 || list[i - 1].formula < list[i].formula, "PL1 not strictly increasing");
      sums[list[i].formula] += list[i].count;
    }
  }
  for (std::size_t f = 0; f < nf; ++f) {
    check(sums[f] == tuple_totals_[f], "A1 differs from PL1 counts");
    const auto& docs = formula_docs_[f];
    check(!docs.empty(), "formula without documents in PL2");
    for (std::size_t i = 0; i < docs.size(); ++i) {
      check(docs[i].doc < documents_.size(), "PL2 docId out of range");
      check(i == 0 || docs[i - 1].doc < docs[i].doc, "PL2 not strictly increasing");
    }
  }

  // D4/PL3 must be exactly the generalizations of D3
  std::map<std::string, std::vector<TupleId>> expected;
  for (TupleId t = 0; t < tuple_keys_.size(); ++t) {
    auto tuple = parse_tuple(tuple_keys_[t]);
    check(tuple.has_value(), "D3 key is not a tuple");
    expected[wildcard_pattern_key(*tuple, WildcardEnd::Ancestor)].push_back(t);
    if (tuple->descendant != kEndOfLine) {
      expected[wildcard_pattern_key(*tuple, WildcardEnd::Descendant)].push_back(t);
    }
  }
  check(expected.size() == wildcard_keys_.size(), "D4 does not cover D3 generalizations");
  WildcardId w = 0;
  for (const auto& [key, list] : expected) {
    check(wildcard_keys_[w] == key, "D4 key mismatch");
    check(expansions_[w] == list, "PL3 expansion mismatch");
    ++w;
  }
}

std::string Index::serialize() const {
  Writer w;
  for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kFormatVersion);
  w.u32(params_.window.value_or(0));
  w.u8(params_.eol ? 1 : 0);

  w.strings(documents_);
  w.strings(tuple_keys_);
  w.strings(formulae_);
  w.strings(wildcard_keys_);
  for (auto total : tuple_totals_) w.varint(total);
  for (const auto& list : postings_) {
    w.varint(list.size());
    FormulaId prev = 0;
    for (const auto& p : list) {
      w.varint(p.formula - prev);
      w.varint(p.count);
      prev = p.formula;
    }
  }
  for (const auto& list : formula_docs_) {
    w.varint(list.size());
    DocId prev = 0;
    for (const auto& d : list) {
      w.varint(d.doc - prev);
      w.varint(d.position);
      prev = d.doc;
    }
  }
  for (const auto& list : expansions_) {
    w.varint(list.size());
    TupleId prev = 0;
    for (auto t : list) {
      w.varint(t - prev);
      prev = t;
    }
  }
  auto crc = crc32(w.bytes());
  w.u32(crc);
  return std::move(w.bytes());
}

Index Index::deserialize(std::string_view bytes) {
  if (bytes.size() < kHeaderSize + 4 || !std::equal(kMagic, kMagic + 4, bytes.begin())) {
    throw IndexError(IndexError::Kind::FormatVersionMismatch, "not an index file (bad magic)");
  }
  Reader header(bytes.substr(4, 4));
  if (auto version = header.u32(); version != kFormatVersion) {
    throw IndexError(IndexError::Kind::FormatVersionMismatch,
                     "unsupported index format version " + std::to_string(version));
  }
  auto body = bytes.substr(0, bytes.size() - 4);
  Reader trailer(bytes.substr(bytes.size() - 4));
  if (trailer.u32() != crc32(body)) {
    throw IndexError(IndexError::Kind::ChecksumMismatch, "index checksum mismatch");
  }

  Reader r(body.substr(8));
  Index index;
  auto window = r.u32();
  if (window != 0) index.params_.window = window;
  auto eol = r.u8();
  if (eol > 1) corrupt("bad eol flag");
  index.params_.eol = eol == 1;

  index.documents_ = r.strings();
  index.tuple_keys_ = r.strings();
  index.formulae_ = r.strings();
  index.wildcard_keys_ = r.strings();
  const auto nf = index.formulae_.size();
  index.tuple_totals_.resize(nf);
  for (auto& total : index.tuple_totals_) total = r.varint();

  index.postings_.resize(index.tuple_keys_.size());
  for (auto& list : index.postings_) {
    list.resize(r.count());
    FormulaId prev = 0;
    for (auto& p : list) {
      p.formula = checked_add(prev, r.varint());
      p.count = r.varint();
      prev = p.formula;
    }
  }
  index.formula_docs_.resize(nf);
  for (auto& list : index.formula_docs_) {
    list.resize(r.count());
    DocId prev = 0;
    for (auto& d : list) {
      d.doc = checked_add(prev, r.varint());
      d.position = r.varint();
      prev = d.doc;
    }
  }
  index.expansions_.resize(index.wildcard_keys_.size());
  for (auto& list : index.expansions_) {
    list.resize(r.count());
    TupleId prev = 0;
    for (auto& t : list) {
      t = checked_add(prev, r.varint());
      if (t >= index.tuple_keys_.size()) corrupt("PL3 tupleId out of range");
      prev = t;
    }
  }
  if (!r.done()) corrupt("trailing bytes");

  index.rebuild_lookups();
  try {
    index.check_invariants();
  } catch (const std::logic_error& e) {
    corrupt(e.what());
  }
  return index;
}

void Index::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IndexError(IndexError::Kind::IoError, "cannot write " + path.string());
  auto bytes = serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IndexError(IndexError::Kind::IoError, "write failed: " + path.string());
}

Index Index::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IndexError(IndexError::Kind::IoError, "cannot read " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IndexError(IndexError::Kind::IoError, "read failed: " + path.string());
  return deserialize(bytes);
}

bool Index::operator==(const Index& o) const {
  return params_ == o.params_ && formulae_ == o.formulae_ && documents_ == o.documents_ &&
         tuple_keys_ == o.tuple_keys_ && wildcard_keys_ == o.wildcard_keys_ &&
         postings_ == o.postings_ && formula_docs_ == o.formula_docs_ &&
         expansions_ == o.expansions_ && tuple_totals_ == o.tuple_totals_;
}

std::vector<FormulaId> quartile_order(std::span<const std::uint32_t> sizes) {
  const std::size_t n = sizes.size();
  std::vector<FormulaId> by_size(n);
  std::iota(by_size.begin(), by_size.end(), 0);
  std::stable_sort(by_size.begin(), by_size.end(),
                   [&](FormulaId a, FormulaId b) { return sizes[a] < sizes[b]; });
  const std::size_t b1 = n / 4, b2 = n / 2;  // q3 and q4 keep ascending order
  std::vector<FormulaId> order;
  order.reserve(n);
  order.insert(order.end(), by_size.begin() + b1, by_size.begin() + b2);
  order.insert(order.end(), std::make_reverse_iterator(by_size.begin() + b1),
               std::make_reverse_iterator(by_size.begin()));
  order.insert(order.end(), by_size.begin() + b2, by_size.end());
  return order;
}

Index reorder_formula_ids(const Index& index) {
  auto order = quartile_order(index.tuple_totals_);
  std::vector<FormulaId> new_id(order.size());
  for (FormulaId i = 0; i < order.size(); ++i) new_id[order[i]] = i;

  Index out;
  out.params_ = index.params_;
  out.documents_ = index.documents_;
  out.tuple_keys_ = index.tuple_keys_;
  out.wildcard_keys_ = index.wildcard_keys_;
  out.expansions_ = index.expansions_;
  out.formulae_.reserve(order.size());
  out.formula_docs_.reserve(order.size());
  out.tuple_totals_.reserve(order.size());
  for (auto old : order) {
    out.formulae_.push_back(index.formulae_[old]);
    out.formula_docs_.push_back(index.formula_docs_[old]);
    out.tuple_totals_.push_back(index.tuple_totals_[old]);
  }
  out.postings_ = index.postings_;
  for (auto& list : out.postings_) {
    for (auto& p : list) p.formula = new_id[p.formula];
    std::sort(list.begin(), list.end(),
              [](const Posting& a, const Posting& b) { return a.formula < b.formula; });
  }
  out.rebuild_lookups();
  return out;
}

IndexBuilder::IndexBuilder(TupleOptions options) : options_(options) {
  if (options_.window && *options_.window == 0) {
    throw std::invalid_argument("window size must be at least 1");
  }
}

DocId IndexBuilder::document_id(std::string_view name) {
  auto [it, inserted] = doc_ids_.try_emplace(std::string(name), static_cast<DocId>(documents_.size()));
  if (inserted) documents_.emplace_back(name);
  return it->second;
}

void IndexBuilder::add(const CorpusRecord& record) {
  ++report_.documents;
  for (const auto& occurrence : record.formulae) {
    ++report_.formulae_seen;
    try {
      add_formula(record.document, occurrence.position, parse_mathml(occurrence.mathml));
    } catch (const ParseError& e) {
      ++report_.parse_failures;
      if (report_.warnings.size() < kMaxWarnings) {
        report_.warnings.push_back(record.document + " #" + std::to_string(occurrence.position) +
                                   ": " + e.what());
      }
    }
  }
}

void IndexBuilder::add_formula(std::string_view document, std::uint32_t position, const Slt& slt) {
  auto canonical = canonical_string(slt);
  auto [it, inserted] =
      formula_ids_.try_emplace(canonical, static_cast<FormulaId>(formulae_.size()));
  const FormulaId fid = it->second;
  if (inserted) {
    formulae_.push_back(std::move(canonical));
    auto bag = extract_tuples(slt, options_);
    std::vector<std::pair<std::string, std::uint32_t>> tuples;
    tuples.reserve(bag.distinct());
    for (const auto& [tuple, count] : bag.entries()) tuples.emplace_back(serialize(tuple), count);
    formula_tuples_.push_back(std::move(tuples));
    formula_docs_.emplace_back();
  }
  const DocId doc = document_id(document);
  if (!seen_in_document_.insert((static_cast<std::uint64_t>(doc) << 32) | fid).second) {
    ++report_.duplicate_in_document;
    return;
  }
  formula_docs_[fid].push_back(DocRef{doc, position});
}

Index IndexBuilder::finish(bool reorder) {
  if (formulae_.empty()) throw IndexError(IndexError::Kind::EmptyCorpus, "no formulae to index");

  Index index;
  index.params_ = options_;
  index.documents_ = documents_;
  index.formulae_ = formulae_;

  std::map<std::string, std::vector<Posting>> lists;
  index.tuple_totals_.resize(formulae_.size());
  for (FormulaId f = 0; f < formulae_.size(); ++f) {
    std::uint32_t total = 0;
    for (const auto& [key, count] : formula_tuples_[f]) {
      lists[key].push_back(Posting{f, count});
      total += count;
    }
    index.tuple_totals_[f] = total;
  }
  index.tuple_keys_.reserve(lists.size());
  index.postings_.reserve(lists.size());
  for (auto& [key, list] : lists) {
    index.tuple_keys_.push_back(key);
    index.postings_.push_back(std::move(list));
  }

  // wildcard descendants never stand for the end-of-line marker
  std::map<std::string, std::vector<TupleId>> patterns;
  for (TupleId t = 0; t < index.tuple_keys_.size(); ++t) {
    auto tuple = parse_tuple(index.tuple_keys_[t]);
    patterns[wildcard_pattern_key(*tuple, WildcardEnd::Ancestor)].push_back(t);
    if (tuple->descendant != kEndOfLine) {
      patterns[wildcard_pattern_key(*tuple, WildcardEnd::Descendant)].push_back(t);
    }
  }
  for (auto& [key, list] : patterns) {
    index.wildcard_keys_.push_back(key);
    index.expansions_.push_back(std::move(list));
  }

  index.formula_docs_ = formula_docs_;
  for (auto& list : index.formula_docs_) {
    std::sort(list.begin(), list.end(), [](const DocRef& a, const DocRef& b) { return a.doc < b.doc; });
  }
  index.rebuild_lookups();
  return reorder ? reorder_formula_ids(index) : index;
}

Index build_index(std::span<const CorpusRecord> corpus, const TupleOptions& options,
                  BuildReport* report) {
  IndexBuilder builder(options);
  for (const auto& record : corpus) builder.add(record);
  if (report) *report = builder.report();
  return builder.finish();
}

}  // namespace mathsearch
