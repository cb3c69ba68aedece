#include "mathsearch/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <optional>

#include "json.hpp"

namespace mathsearch {

namespace {

constexpr std::size_t kMaxProblems = 20;

std::optional<CorpusRecord> parse_record(const nlohmann::json& j) {
  if (!j.is_object()) return std::nullopt;
  auto doc = j.find("doc");
  auto formulae = j.find("formulae");
  if (doc == j.end() || !doc->is_string() || formulae == j.end() || !formulae->is_array()) {
    return std::nullopt;
  }
  CorpusRecord record{doc->get<std::string>(), {}};
  for (const auto& f : *formulae) {
    if (!f.is_object()) return std::nullopt;
    auto pos = f.find("pos");
    auto mathml = f.find("mathml");
    if (pos == f.end() || !pos->is_number_unsigned() || mathml == f.end() || !mathml->is_string()) {
      return std::nullopt;
    }
    auto p = pos->get<std::uint64_t>();
    if (p > 0xffffffffu) return std::nullopt;
    if (!record.formulae.empty() && p <= record.formulae.back().position) return std::nullopt;
    record.formulae.push_back({static_cast<std::uint32_t>(p), mathml->get<std::string>()});
  }
  return record;
}

bool is_page(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".html" || ext == ".htm" || ext == ".xhtml";
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IndexError(IndexError::Kind::IoError, "cannot read " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// start of a <math> or <prefix:math> open tag at or after `from`
std::size_t find_math_open(std::string_view s, std::size_t from, std::string& close_tag) {
  while ((from = s.find('<', from)) != std::string_view::npos) {
    std::size_t i = from + 1;
    std::size_t name_end = i;
    while (name_end < s.size() && (std::isalnum(static_cast<unsigned char>(s[name_end])) ||
                                   s[name_end] == ':' || s[name_end] == '-' || s[name_end] == '_')) {
      ++name_end;
    }
    auto name = s.substr(i, name_end - i);
    auto colon = name.rfind(':');
    auto local = colon == std::string_view::npos ? name : name.substr(colon + 1);
    if (local == "math" && name_end < s.size() &&
        (s[name_end] == '>' || s[name_end] == '/' || std::isspace(static_cast<unsigned char>(s[name_end])))) {
      close_tag = "</" + std::string(name) + ">";
      return from;
    }
    from = i;
  }
  return std::string_view::npos;
}

}  // namespace

std::vector<CorpusRecord> read_jsonl(std::istream& in, CorpusStats* stats) {
  CorpusStats local;
  CorpusStats& st = stats ? *stats : local;
  std::vector<CorpusRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    ++st.lines;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    auto record = j.is_discarded() ? std::nullopt : parse_record(j);
    if (!record) {
      ++st.skipped_lines;
      if (st.problems.size() < kMaxProblems) {
        st.problems.push_back("line " + std::to_string(st.lines) + ": malformed record");
      }
      continue;
    }
    records.push_back(std::move(*record));
  }
  return records;
}

std::vector<FormulaOccurrence> extract_math_elements(std::string_view html) {
  std::vector<FormulaOccurrence> out;
  std::string close_tag;
  std::size_t from = 0;
  std::uint32_t ordinal = 0;
  while ((from = find_math_open(html, from, close_tag)) != std::string_view::npos) {
    auto tag_end = html.find('>', from);
    if (tag_end == std::string_view::npos) break;
    if (html[tag_end - 1] == '/') {  // <math/>
      from = tag_end + 1;
      continue;
    }
    auto end = html.find(close_tag, tag_end);
    if (end == std::string_view::npos) break;
    end += close_tag.size();
    out.push_back({ordinal++, std::string(html.substr(from, end - from))});
    from = end;
  }
  return out;
}

std::vector<CorpusRecord> load_corpus(const std::filesystem::path& input, CorpusStats* stats) {
  CorpusStats local;
  CorpusStats& st = stats ? *stats : local;
  std::error_code ec;
  if (std::filesystem::is_directory(input, ec)) {
    std::vector<std::filesystem::path> pages;
    for (auto it = std::filesystem::recursive_directory_iterator(input, ec);
         !ec && it != std::filesystem::recursive_directory_iterator(); it.increment(ec)) {
      if (it->is_regular_file() && is_page(it->path())) pages.push_back(it->path());
    }
    if (ec) throw IndexError(IndexError::Kind::IoError, "cannot walk " + input.string() + ": " + ec.message());
    std::sort(pages.begin(), pages.end());
    std::vector<CorpusRecord> records;
    for (const auto& page : pages) {
      ++st.files;
      records.push_back({std::filesystem::relative(page, input).generic_string(),
                         extract_math_elements(slurp(page))});
    }
    return records;
  }
  std::ifstream in(input);
  if (!in) throw IndexError(IndexError::Kind::IoError, "cannot read " + input.string());
  ++st.files;
  return read_jsonl(in, &st);
}

}  // namespace mathsearch
