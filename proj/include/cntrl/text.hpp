#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cntrl::text {

// Splits on runs of ASCII whitespace; never yields empty tokens.
std::vector<std::string> split_whitespace(std::string_view s);

std::vector<std::string> split(std::string_view s, char delim);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string trim(std::string_view s);

std::string to_lower(std::string_view s);

// Collapses every whitespace run to one space and trims both ends.
std::string collapse_spaces(std::string_view s);

// [MALE], [FEMALE], [NEUTRAL], [PLACE] (exact case).
bool is_placeholder(std::string_view token);

// True when the token has no alphanumeric character.
bool is_punctuation(std::string_view token);

// Word tokens of a sentence: lowercased, punctuation split off and dropped.
// Placeholders are kept verbatim.
std::vector<std::string> words(std::string_view sentence);

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 0);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace cntrl::text
