#pragma once

// Generator input format. A context block x^j = [R^j, s^j] renders as
//   r1 SEP r2 EOK s OS
// the knowledge for the next step as "r1 SEP r2 EOK", and a finished story
// ends in "<|endoftext|>". Tokens are joined by single spaces.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cntrl {

inline constexpr std::string_view kSepMarker = "SEP";
inline constexpr std::string_view kEndOfKnowledgeMarker = "EOK";
inline constexpr std::string_view kEndOfSentenceMarker = "OS";
inline constexpr std::string_view kEndOfTextMarker = "<|endoftext|>";

bool is_reserved_marker(std::string_view token);

// Throws ContractError if any whitespace token of text is a reserved marker.
void check_no_markers(std::string_view text, std::string_view what = "text");

struct ContextBlock {
  std::vector<std::string> knowledge;
  std::string sentence;

  friend bool operator==(const ContextBlock&, const ContextBlock&) = default;
};

std::string serialize_context(std::span<const ContextBlock> blocks);
std::string serialize_input(std::span<const ContextBlock> blocks, std::span<const std::string> next_knowledge);
std::string serialize_story(std::span<const ContextBlock> blocks);

// Sentences only, each closed by OS. Sent to the keyword predictor.
std::string serialize_sentences(std::span<const ContextBlock> blocks);

struct ParsedSerialization {
  std::vector<ContextBlock> blocks;
  std::optional<std::vector<std::string>> next_knowledge;
  bool end_of_text = false;

  friend bool operator==(const ParsedSerialization&, const ParsedSerialization&) = default;
};

// Inverse of the serialize_* functions for marker-free, single-spaced text.
// Throws ParseError on a malformed marker sequence.
ParsedSerialization parse_serialized(std::string_view serialized);

}  // namespace cntrl
