#include "cntrl/backend.hpp"

#include "cntrl/error.hpp"

namespace cntrl {

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::kEmbed:
      return "embed";
    case BackendKind::kKeywords:
      return "keywords";
    case BackendKind::kGenerate:
      return "generate";
  }
  return "unknown";
}

Embedding EmbeddingBackend::embed_one(const std::string& text) {
  auto out = embed(std::span<const std::string>(&text, 1));
  if (out.size() != 1) throw ProtocolError("embedding backend returned wrong vector count");
  return std::move(out.front());
}

}  // namespace cntrl
