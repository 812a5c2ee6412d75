#pragma once

#include <array>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gecrag {

/// Deterministic text canonicalization applied to every ground truth,
/// hypothesis and generator output before indexing, retrieval and scoring.
///
/// Loaded from a UTF-8 TSV file: one `<kind>\t<from>\t<to>` rule per line,
/// kind in {unicode, digit, space, dict}; `#` starts a comment line.
/// Immutable after load; normalize() is pure and thread-safe.
struct NormalizationConfig {
    /// Ordered codepoint-sequence rewrites, applied first.
    std::vector<std::pair<std::string, std::string>> unicode_map;
    /// ASCII digit -> target-script digit. Empty entry = pass through.
    std::array<std::string, 10> digit_map{};
    /// Ordered literal rewrites for whitespace / ZWNJ repair. Patterns are
    /// matched against the text padded with one leading and one trailing
    /// space, so word-boundary rules are expressible.
    std::vector<std::pair<std::string, std::string>> spacing_rules;
    /// Exact whole-token replacements; keys unique, values single tokens.
    std::unordered_map<std::string, std::string> dictionary;

    bool empty() const;
};

/// Stage order is fixed: unicode -> digits -> spacing -> dictionary.
/// The spacing stage collapses whitespace, applies the rules, then collapses
/// and trims again, so output whitespace is always single ASCII spaces.
std::string normalize(std::string_view raw, const NormalizationConfig& cfg);

NormalizationConfig load_normalization_config(const std::string& path);

/// Same grammar as the file loader; `origin` labels error messages.
NormalizationConfig parse_normalization_config(std::string_view content,
                                               const std::string& origin = "<string>");

} // namespace gecrag
