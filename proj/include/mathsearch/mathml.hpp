#pragma once

#include <string>
#include <string_view>

#include "mathsearch/slt.hpp"

namespace mathsearch {

/// Builds a Symbol Layout Tree from Presentation MathML.
///
/// Whitespace and invisible operators are dropped. Parenthesized groups,
/// function argument lists, tables and zero-thickness fractions (binomials)
/// become M! matrix nodes; scripts attach to the last symbol of their base.
/// The result is numbered in canonical pre-order.
///
/// Throws ParseError: MalformedInput for bad XML, UnsupportedElement for an
/// unknown element (message names it), EmptyFormula if nothing visible is left.
Slt parse_mathml(std::string_view mathml);

/// Renders an SLT back to Presentation MathML such that
/// parse_mathml(to_mathml(t)) reproduces t for trees produced by parse_mathml.
/// With `node_ids`, each symbol element carries a data-node="<id>" attribute.
std::string to_mathml(const Slt& slt, bool node_ids = false);

}  // namespace mathsearch
