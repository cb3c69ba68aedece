#pragma once

// Shared MathML inputs.
namespace fixtures {

// pi_i = 2^{?x0} binom(N, i)
inline constexpr const char* kWildcardQuery =
    "<math xmlns=\"http://www.w3.org/1998/Math/MathML\">"
    "<msub><mi>&#x3C0;</mi><mi>i</mi></msub><mo>=</mo>"
    "<msup><mn>2</mn><mws:qvar xmlns:mws=\"http://search.mathweb.org/ns\" name=\"x0\"/></msup>"
    "<mrow><mo>(</mo><mfrac linethickness=\"0\"><mi>N</mi><mi>i</mi></mfrac><mo>)</mo></mrow>"
    "</math>";

// pi_i = 2^{-N} binom(N, i)
inline constexpr const char* kHitExact =
    "<math xmlns=\"http://www.w3.org/1998/Math/MathML\">"
    "<msub><mi>&#x3C0;</mi><mi>i</mi></msub><mo>=</mo>"
    "<msup><mn>2</mn><mrow><mo>&#x2212;</mo><mi>N</mi></mrow></msup>"
    "<mrow><mo>(</mo><mfrac linethickness=\"0\"><mi>N</mi><mi>i</mi></mfrac><mo>)</mo></mrow>"
    "</math>";

// E_{m,n} = 2^{n-m} binom(n, m)
inline constexpr const char* kHitSubstituted =
    "<math xmlns=\"http://www.w3.org/1998/Math/MathML\">"
    "<msub><mi>E</mi><mrow><mi>m</mi><mo>,</mo><mi>n</mi></mrow></msub><mo>=</mo>"
    "<msup><mn>2</mn><mrow><mi>n</mi><mo>&#x2212;</mo><mi>m</mi></mrow></msup>"
    "<mrow><mo>(</mo><mfrac linethickness=\"0\"><mi>n</mi><mi>m</mi></mfrac><mo>)</mo></mrow>"
    "</math>";

}  // namespace fixtures
