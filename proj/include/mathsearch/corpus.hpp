#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "mathsearch/index.hpp"

namespace mathsearch {

struct CorpusStats {
  std::size_t lines = 0;
  std::size_t skipped_lines = 0;  // malformed JSON or wrong shape
  std::size_t files = 0;
  std::vector<std::string> problems;  // first few skipped lines
};

/// One record per line: {"doc": name, "formulae": [{"pos": int, "mathml": string}]}.
/// Blank lines are ignored; malformed lines are skipped and counted.
std::vector<CorpusRecord> read_jsonl(std::istream& in, CorpusStats* stats = nullptr);

/// The <math> elements of an HTML/XHTML page in document order, positions
/// numbered by occurrence.
std::vector<FormulaOccurrence> extract_math_elements(std::string_view html);

/// A JSON-lines file, or a directory walked recursively for .html/.htm/.xhtml
/// files (sorted by path; the document name is the path relative to `input`).
/// Throws IndexError(IoError) if the input cannot be read.
std::vector<CorpusRecord> load_corpus(const std::filesystem::path& input, CorpusStats* stats = nullptr);

}  // namespace mathsearch
