#include "cntrl/serialization.hpp"

#include "cntrl/error.hpp"
#include "cntrl/text.hpp"

namespace cntrl {
namespace {

void append_knowledge(std::vector<std::string>& out, std::span<const std::string> knowledge) {
  for (std::size_t k = 0; k < knowledge.size(); ++k) {
    if (k) out.emplace_back(kSepMarker);
    check_no_markers(knowledge[k], "knowledge sentence");
    out.push_back(text::trim(knowledge[k]));
  }
  out.emplace_back(kEndOfKnowledgeMarker);
}

std::vector<std::string> context_parts(std::span<const ContextBlock> blocks) {
  std::vector<std::string> parts;
  for (const auto& b : blocks) {
    append_knowledge(parts, b.knowledge);
    check_no_markers(b.sentence, "story sentence");
    parts.push_back(text::trim(b.sentence));
    parts.emplace_back(kEndOfSentenceMarker);
  }
  return parts;
}

}  // namespace

bool is_reserved_marker(std::string_view token) {
  return token == kSepMarker || token == kEndOfKnowledgeMarker || token == kEndOfSentenceMarker ||
         token == kEndOfTextMarker;
}

void check_no_markers(std::string_view s, std::string_view what) {
  for (const auto& tok : text::split_whitespace(s)) {
    if (is_reserved_marker(tok)) {
      throw ContractError(std::string(what) + " contains reserved marker '" + tok + "'");
    }
  }
}

std::string serialize_context(std::span<const ContextBlock> blocks) { return text::join(context_parts(blocks), " "); }

std::string serialize_input(std::span<const ContextBlock> blocks, std::span<const std::string> next_knowledge) {
  auto parts = context_parts(blocks);
  append_knowledge(parts, next_knowledge);
  return text::join(parts, " ");
}

std::string serialize_story(std::span<const ContextBlock> blocks) {
  auto parts = context_parts(blocks);
  parts.emplace_back(kEndOfTextMarker);
  return text::join(parts, " ");
}

std::string serialize_sentences(std::span<const ContextBlock> blocks) {
  std::vector<std::string> parts;
  for (const auto& b : blocks) {
    parts.push_back(text::trim(b.sentence));
    parts.emplace_back(kEndOfSentenceMarker);
  }
  return text::join(parts, " ");
}

ParsedSerialization parse_serialized(std::string_view serialized) {
  ParsedSerialization out;
  std::vector<std::string> knowledge;  // finished knowledge sentences of the open block
  std::vector<std::string> words;      // tokens of the segment being read
  bool knowledge_closed = false;       // EOK seen, reading a sentence

  auto segment = [&words] {
    std::string s = text::join(words, " ");
    words.clear();
    return s;
  };

  for (const auto& tok : text::split_whitespace(serialized)) {
    if (out.end_of_text) throw ParseError("tokens after end-of-text marker");
    if (tok == kSepMarker) {
      if (knowledge_closed || words.empty()) throw ParseError("misplaced SEP");
      knowledge.push_back(segment());
    } else if (tok == kEndOfKnowledgeMarker) {
      if (knowledge_closed) throw ParseError("EOK inside a sentence");
      if (!words.empty()) {
        knowledge.push_back(segment());
      } else if (!knowledge.empty()) {
        throw ParseError("empty knowledge sentence before EOK");
      }
      knowledge_closed = true;
    } else if (tok == kEndOfSentenceMarker) {
      if (!knowledge_closed || words.empty()) throw ParseError("misplaced OS");
      out.blocks.push_back({std::move(knowledge), segment()});
      knowledge.clear();
      knowledge_closed = false;
    } else if (tok == kEndOfTextMarker) {
      if (knowledge_closed || !words.empty() || !knowledge.empty()) {
        throw ParseError("end-of-text inside a block");
      }
      out.end_of_text = true;
    } else {
      words.push_back(tok);
    }
  }
  if (knowledge_closed) {
    if (!words.empty()) throw ParseError("sentence missing its OS marker");
    out.next_knowledge = std::move(knowledge);
  } else if (!words.empty() || !knowledge.empty()) {
    throw ParseError("knowledge block missing its EOK marker");
  }
  return out;
}

}  // namespace cntrl
