#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cntrl/backend.hpp"
#include "cntrl/corpus.hpp"
#include "cntrl/kb.hpp"
#include "cntrl/keywords.hpp"

namespace cntrl {

// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  // y = M x
  std::vector<double> apply(std::span<const double> x) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

inline constexpr double kDefaultMargin = 5.0;
inline constexpr std::size_t kDefaultProjectionDim = 128;

// Bilinear relevance model: score = (W1 ctx) . (W2 cand).
struct RankerHeads {
  std::size_t d_in = 0;
  std::size_t d_out = 0;
  double margin = kDefaultMargin;
  Matrix context_head;    // W1, d_out x d_in
  Matrix knowledge_head;  // W2, d_out x d_in

  // Entries uniform in [-1/sqrt(d_in), 1/sqrt(d_in)].
  static RankerHeads random(std::size_t d_in, std::size_t d_out, std::uint64_t seed, double margin = kDefaultMargin);
  static RankerHeads identity(std::size_t dim, double margin = kDefaultMargin);

  // Throws ContractError on inconsistent shapes or non-finite entries.
  void validate() const;

  friend bool operator==(const RankerHeads&, const RankerHeads&) = default;
};

double score(const RankerHeads& heads, std::span<const double> context, std::span<const double> candidate);

// max(0, M - c_pos + c_neg)
double margin_loss(double c_pos, double c_neg, double margin);

struct RankTrainingExample {
  Embedding context;
  Embedding positive;
  Embedding negative;
};

struct TrainingSetOptions {
  std::size_t n = 10;
  std::size_t negatives_per_context = 40;
  std::size_t pairs_per_context = 50;
  std::size_t max_keywords = 3;
  std::uint64_t seed = 0;
};

struct TrainingSet {
  std::vector<RankTrainingExample> examples;
  std::size_t contexts = 0;       // steps that produced pairs
  std::size_t skipped_steps = 0;  // steps without positives or negatives
};

// Pseudo-labels every step of every story, then samples (positive, negative)
// pairs against the embedded story context X^{i-1}. When keywords is given,
// the candidate pool comes from predicted keywords instead of RAKE ones.
TrainingSet build_training_set(std::span<const Story> stories, const KnowledgeIndex& index,
                               EmbeddingBackend& embed, const StopwordList& stopwords,
                               const TrainingSetOptions& options, KeywordBackend* keywords = nullptr);

struct LossAndGradient {
  double loss = 0.0;  // mean hinge loss
  Matrix context_grad;
  Matrix knowledge_grad;
};

LossAndGradient loss_and_gradient(const RankerHeads& heads, std::span<const RankTrainingExample> batch);
double mean_loss(const RankerHeads& heads, std::span<const RankTrainingExample> data);

struct TrainOptions {
  std::size_t epochs = 10;
  double learning_rate = 0.01;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
};

struct TrainResult {
  RankerHeads heads;
  std::vector<double> epoch_loss;  // mean loss seen during each epoch
};

// Mini-batch gradient descent on the mean margin loss, updating only the heads.
TrainResult train(RankerHeads heads, std::span<const RankTrainingExample> data, const TrainOptions& options);

// Fraction of examples with score(pos) > score(neg).
double pairwise_accuracy(const RankerHeads& heads, std::span<const RankTrainingExample> data);

struct RankCandidate {
  std::size_t triple_id = 0;
  Embedding vector;
};

struct RankedCandidate {
  std::size_t triple_id = 0;
  double score = 0.0;
};

// All candidates scored and sorted by (score desc, id asc). A null heads
// pointer scores with the plain inner product.
std::vector<RankedCandidate> rank_scored(const RankerHeads* heads, std::span<const double> context,
                                         std::span<const RankCandidate> candidates);

std::vector<std::size_t> rank(const RankerHeads& heads, std::span<const double> context,
                              std::span<const RankCandidate> candidates, std::size_t n);

// Binary checkpoint: magic, version, d_in, d_out, margin, W1, W2 (little-endian).
void save_heads(const RankerHeads& heads, std::ostream& out);
RankerHeads load_heads(std::istream& in);
void save_heads(const RankerHeads& heads, const std::string& path);
RankerHeads load_heads(const std::string& path);

// "epoch<TAB>loss" per line, epochs 1-based.
std::string format_training_report(std::span<const double> epoch_loss);

}  // namespace cntrl
