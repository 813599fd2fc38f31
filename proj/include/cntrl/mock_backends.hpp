#pragma once

// Deterministic in-process backends. They stand in for the model services in
// tests, in `--mock` CLI runs and behind `cntrl mock-serve`.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cntrl/backend.hpp"
#include "cntrl/keywords.hpp"

namespace cntrl {

// Bag-of-words hashing encoder: each token maps to a seeded pseudo-random
// vector, the text vector is their normalized sum. Texts without tokens hash
// as a whole. Always unit length.
class HashEmbeddingBackend final : public EmbeddingBackend {
 public:
  explicit HashEmbeddingBackend(std::size_t dim = 16, std::uint64_t seed = 0);

  std::vector<Embedding> embed(std::span<const std::string> texts) override;

  std::size_t dim() const { return dim_; }
  std::size_t calls() const { return calls_; }

 private:
  Embedding token_vector(std::string_view token) const;

  std::size_t dim_;
  std::uint64_t seed_;
  std::atomic<std::size_t> calls_{0};
};

// Fixed text -> vector table; unknown texts throw ProtocolError.
class TableEmbeddingBackend final : public EmbeddingBackend {
 public:
  void set(const std::string& text, Embedding vector) { table_[text] = std::move(vector); }
  std::vector<Embedding> embed(std::span<const std::string> texts) override;

 private:
  std::map<std::string, Embedding> table_;
};

// Either replies with a fixed keyword string, or runs RAKE on the last
// sentence of the context.
class MockKeywordBackend final : public KeywordBackend {
 public:
  static MockKeywordBackend fixed(std::string reply);
  static MockKeywordBackend rake(StopwordList stopwords, std::size_t max_keywords = 3);

  std::string predict(std::string_view context) override;

 private:
  MockKeywordBackend() = default;

  std::optional<std::string> fixed_;
  StopwordList stopwords_;
  std::size_t max_keywords_ = 3;
};

enum class MockGeneratorMode { kEcho, kSample };

struct MockGeneratorOptions {
  MockGeneratorMode mode = MockGeneratorMode::kSample;
  // When set, every emitted token reports this log-probability.
  std::optional<double> fixed_logprob;
  std::size_t min_tokens = 5;
  std::size_t max_tokens = 9;
};

// Echo mode returns the tokens of the first knowledge sentence of R^i
// followed by " ."; with no knowledge it falls back to sampling. Sample mode
// draws words by seeded top-k sampling from a fixed toy distribution, with
// the words of R^i boosted.
class MockGeneratorBackend final : public GeneratorBackend {
 public:
  explicit MockGeneratorBackend(MockGeneratorOptions options = {});

  Generation generate(const GenerationRequest& request) override;

  // Every request seen, in order.
  std::vector<GenerationRequest> requests() const;

 private:
  Generation sample(const GenerationRequest& request, const std::vector<std::string>& knowledge) const;

  MockGeneratorOptions options_;
  mutable std::mutex mu_;
  std::vector<GenerationRequest> requests_;
};

}  // namespace cntrl
