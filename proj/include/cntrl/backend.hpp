#pragma once

// Contracts for the three model services the pipeline depends on: a sentence
// encoder, a keyword predictor and a conditional sentence generator. HTTP
// clients and in-process mocks both implement these.

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cntrl {

// Fixed-length embedding; dimension is constant per backend session.
using Embedding = std::vector<double>;

enum class BackendKind { kEmbed, kKeywords, kGenerate };

std::string_view to_string(BackendKind kind);

struct BackendEndpoint {
  BackendKind kind = BackendKind::kEmbed;
  std::string url;
  std::chrono::milliseconds timeout{10000};
  int retries = 2;
};

struct GenerationRequest {
  std::string input;
  int top_k = 40;
  double temperature = 0.7;
  std::uint64_t seed = 0;
  std::string stop = "OS";
};

struct Generation {
  std::string text;
  std::vector<double> token_logprobs;
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  // One vector per text, all of the same dimension.
  virtual std::vector<Embedding> embed(std::span<const std::string> texts) = 0;

  Embedding embed_one(const std::string& text);
};

class KeywordBackend {
 public:
  virtual ~KeywordBackend() = default;
  // Returns the raw ';'-separated keyword string.
  virtual std::string predict(std::string_view context) = 0;
};

class GeneratorBackend {
 public:
  virtual ~GeneratorBackend() = default;
  virtual Generation generate(const GenerationRequest& request) = 0;
};

// Non-owning bundle handed to the planner.
struct Backends {
  EmbeddingBackend* embed = nullptr;
  KeywordBackend* keywords = nullptr;
  GeneratorBackend* generator = nullptr;
};

}  // namespace cntrl
