#include "cntrl/mock_backends.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string_view>

#include "cntrl/error.hpp"
#include "cntrl/random.hpp"
#include "cntrl/sampling.hpp"
#include "cntrl/serialization.hpp"
#include "cntrl/text.hpp"

namespace cntrl {
namespace {

constexpr std::array<std::string_view, 48> kToyVocabulary = {
    "she",    "he",     "they",   "went",   "decided", "wanted", "home",    "store",  "friend", "day",
    "happy",  "sad",    "found",  "new",    "car",     "dog",    "walked",  "park",   "school", "work",
    "tired",  "bought", "food",   "night",  "morning", "family", "finally", "called", "saw",    "lost",
    "money",  "played", "game",   "rain",   "long",    "road",   "trip",    "late",   "early",  "ate",
    "dinner", "town",   "house",  "book",   "read",    "music",  "danced",  "smiled"};

double base_logit(std::string_view word) { return static_cast<double>(text::fnv1a(word) % 1000) / 250.0; }

constexpr double kKnowledgeBoost = 3.0;
constexpr double kBlocked = -1e30;

}  // namespace

HashEmbeddingBackend::HashEmbeddingBackend(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim == 0) throw ContractError("embedding dimension must be >= 1");
}

Embedding HashEmbeddingBackend::token_vector(std::string_view token) const {
  Embedding v(dim_);
  const std::uint64_t h = text::fnv1a(token, seed_);
  for (std::size_t d = 0; d < dim_; ++d) {
    const std::uint64_t x = text::splitmix64(h + d);
    v[d] = static_cast<double>(x >> 11) * 0x1.0p-52 - 1.0;
  }
  return v;
}

std::vector<Embedding> HashEmbeddingBackend::embed(std::span<const std::string> texts) {
  ++calls_;
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    auto tokens = text::split_whitespace(text::to_lower(t));
    Embedding v(dim_, 0.0);
    if (tokens.empty()) {
      v = token_vector(t);
    } else {
      for (const auto& tok : tokens) {
        auto tv = token_vector(tok);
        for (std::size_t d = 0; d < dim_; ++d) v[d] += tv[d];
      }
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) {
      v.assign(dim_, 0.0);
      v[0] = 1.0;
    } else {
      for (double& x : v) x /= norm;
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<Embedding> TableEmbeddingBackend::embed(std::span<const std::string> texts) {
  std::vector<Embedding> out;
  for (const auto& t : texts) {
    auto it = table_.find(t);
    if (it == table_.end()) throw ProtocolError("no embedding registered for '" + t + "'");
    out.push_back(it->second);
  }
  return out;
}

MockKeywordBackend MockKeywordBackend::fixed(std::string reply) {
  MockKeywordBackend b;
  b.fixed_ = std::move(reply);
  return b;
}

MockKeywordBackend MockKeywordBackend::rake(StopwordList stopwords, std::size_t max_keywords) {
  MockKeywordBackend b;
  b.stopwords_ = std::move(stopwords);
  b.max_keywords_ = max_keywords;
  return b;
}

std::string MockKeywordBackend::predict(std::string_view context) {
  if (fixed_) return *fixed_;
  // Last sentence of "s1 OS s2 OS ...".
  auto tokens = text::split_whitespace(context);
  if (!tokens.empty() && tokens.back() == kEndOfSentenceMarker) tokens.pop_back();
  auto it = std::find(tokens.rbegin(), tokens.rend(), std::string(kEndOfSentenceMarker));
  std::vector<std::string> last(it.base(), tokens.end());
  return format_keyword_string(rake_extract(text::join(last, " "), stopwords_, max_keywords_));
}

MockGeneratorBackend::MockGeneratorBackend(MockGeneratorOptions options) : options_(options) {
  if (options_.min_tokens == 0 || options_.max_tokens < options_.min_tokens) {
    throw ContractError("mock generator token bounds are inconsistent");
  }
}

std::vector<GenerationRequest> MockGeneratorBackend::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

Generation MockGeneratorBackend::generate(const GenerationRequest& request) {
  {
    std::lock_guard lock(mu_);
    requests_.push_back(request);
  }
  std::vector<std::string> knowledge;
  try {
    auto parsed = parse_serialized(request.input);
    if (parsed.next_knowledge) knowledge = *parsed.next_knowledge;
  } catch (const ParseError& e) {
    throw ProtocolError(std::string("mock generator: malformed input: ") + e.what());
  }

  if (options_.mode == MockGeneratorMode::kEcho && !knowledge.empty()) {
    Generation g;
    auto tokens = text::split_whitespace(knowledge.front());
    tokens.emplace_back(".");
    g.text = text::join(tokens, " ");
    g.token_logprobs.assign(tokens.size(), options_.fixed_logprob.value_or(0.0));
    return g;
  }
  return sample(request, knowledge);
}

Generation MockGeneratorBackend::sample(const GenerationRequest& request,
                                        const std::vector<std::string>& knowledge) const {
  std::vector<std::string> pool(kToyVocabulary.begin(), kToyVocabulary.end());
  std::vector<double> logits;
  for (const auto& w : pool) logits.push_back(base_logit(w));
  for (const auto& k : knowledge) {
    for (const auto& w : text::split_whitespace(k)) {
      auto it = std::find(pool.begin(), pool.end(), w);
      if (it == pool.end()) {
        pool.push_back(w);
        logits.push_back(base_logit(w) + kKnowledgeBoost);
      } else {
        auto idx = static_cast<std::size_t>(it - pool.begin());
        logits[idx] = base_logit(w) + kKnowledgeBoost;
      }
    }
  }

  Rng rng(request.seed ^ text::fnv1a(request.input));
  const std::size_t length = options_.min_tokens + uniform_index(rng, options_.max_tokens - options_.min_tokens + 1);
  Generation g;
  std::vector<std::string> words;
  for (std::size_t t = 0; t < length && t < pool.size(); ++t) {
    auto pick = sample_top_k(logits, request.top_k, request.temperature, rng);
    words.push_back(pool[pick.index]);
    g.token_logprobs.push_back(options_.fixed_logprob.value_or(pick.logprob));
    logits[pick.index] = kBlocked;  // no word twice in a sentence
  }
  words.emplace_back(".");
  g.token_logprobs.push_back(options_.fixed_logprob.value_or(0.0));
  g.text = text::join(words, " ");
  return g;
}

}  // namespace cntrl
