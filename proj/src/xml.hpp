#pragma once

// Minimal non-validating XML reader, sufficient for MathML fragments
// embedded in corpus files. Namespace prefixes are stripped from element
// and attribute names.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mathsearch::xml {

struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<Element> children;
  std::string text;  // concatenated character data directly inside this element

  std::optional<std::string_view> attribute(std::string_view key) const;
};

/// Parses a document holding exactly one root element.
/// Throws ParseError(MalformedInput) on failure.
Element parse(std::string_view document);

/// Appends the UTF-8 encoding of `code_point`.
void append_utf8(std::string& out, char32_t code_point);

/// Escapes &, <, > and quotes for use in text or attribute values.
std::string escape(std::string_view text);

}  // namespace mathsearch::xml
