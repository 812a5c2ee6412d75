#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gecrag::text {

inline constexpr char32_t kZwnj = U'‌'; // Persian half-space; a letter, not whitespace

// Unicode whitespace (White_Space property). ZWNJ/ZWSP/ZWJ are excluded on purpose.
bool is_space(char32_t cp);

// Decodes the codepoint starting at `pos` and advances `pos` past it.
// Invalid bytes decode as themselves (one byte each) so no input can wedge the scanner.
char32_t decode(std::string_view s, std::size_t& pos);

void append_utf8(std::string& out, char32_t cp);

// Number of Unicode scalar values in a UTF-8 string.
std::size_t count_scalars(std::string_view s);

// Collapses every run of Unicode whitespace into a single ASCII space and trims the ends.
std::string collapse_whitespace(std::string_view s);

// Splits on runs of Unicode whitespace. ZWNJ-joined compounds stay one token.
std::vector<std::string> split_tokens(std::string_view s);

// Replaces every occurrence of `from` left to right, continuing after each replacement.
std::string replace_all(std::string_view s, std::string_view from, std::string_view to);

bool contains_whitespace(std::string_view s);

uint64_t fnv1a64(std::string_view s);

} // namespace gecrag::text
