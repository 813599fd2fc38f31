#include "cntrl/ranker.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <sstream>

#include "cntrl/error.hpp"
#include "cntrl/kernels.hpp"
#include "cntrl/random.hpp"
#include "cntrl/serialization.hpp"
#include "cntrl/weaklabel.hpp"

namespace cntrl {
namespace {

constexpr char kMagic[8] = {'C', 'N', 'T', 'R', 'L', 'H', 'D', '\0'};
constexpr std::uint32_t kCheckpointVersion = 1;

void check_dim(const RankerHeads& heads, std::span<const double> v, const char* what) {
  if (v.size() != heads.d_in) {
    throw ContractError(std::string(what) + " has dimension " + std::to_string(v.size()) + ", heads expect " +
                        std::to_string(heads.d_in));
  }
}

template <typename T>
void write_le(std::ostream& out, T value) {
  auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T read_le(std::istream& in) {
  std::array<char, sizeof(T)> bytes{};
  if (!in.read(bytes.data(), bytes.size())) throw ParseError("truncated heads checkpoint");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

// Embeddings of knowledge sentences, fetched in batches and kept per triple id.
class KnowledgeEmbeddings {
 public:
  KnowledgeEmbeddings(const KnowledgeIndex& index, EmbeddingBackend& embed) : index_(index), embed_(embed) {}

  void ensure(std::span<const std::size_t> ids) {
    std::vector<std::size_t> missing;
    for (std::size_t id : ids) {
      if (!cache_.count(id)) missing.push_back(id);
    }
    if (missing.empty()) return;
    std::vector<std::string> texts;
    for (std::size_t id : missing) texts.push_back(index_.sentence(id).text);
    auto vectors = embed_.embed(texts);
    if (vectors.size() != texts.size()) throw ProtocolError("embedding backend returned wrong vector count");
    for (std::size_t k = 0; k < missing.size(); ++k) cache_.emplace(missing[k], std::move(vectors[k]));
  }

  const Embedding& get(std::size_t id) const { return cache_.at(id); }

 private:
  const KnowledgeIndex& index_;
  EmbeddingBackend& embed_;
  std::map<std::size_t, Embedding> cache_;
};

}  // namespace

std::vector<double> Matrix::apply(std::span<const double> x) const {
  std::vector<double> y(rows);
  kernels::gemv(data, rows, cols, x, y);
  return y;
}

RankerHeads RankerHeads::random(std::size_t d_in, std::size_t d_out, std::uint64_t seed, double margin) {
  if (d_in == 0 || d_out == 0) throw ContractError("ranker heads need non-zero dimensions");
  RankerHeads h;
  h.d_in = d_in;
  h.d_out = d_out;
  h.margin = margin;
  h.context_head = Matrix(d_out, d_in);
  h.knowledge_head = Matrix(d_out, d_in);
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(d_in));
  for (double& w : h.context_head.data) w = (2.0 * uniform_unit(rng) - 1.0) * bound;
  for (double& w : h.knowledge_head.data) w = (2.0 * uniform_unit(rng) - 1.0) * bound;
  return h;
}

RankerHeads RankerHeads::identity(std::size_t dim, double margin) {
  RankerHeads h;
  h.d_in = h.d_out = dim;
  h.margin = margin;
  h.context_head = Matrix(dim, dim);
  h.knowledge_head = Matrix(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) h.context_head.at(i, i) = h.knowledge_head.at(i, i) = 1.0;
  return h;
}

void RankerHeads::validate() const {
  for (const Matrix* m : {&context_head, &knowledge_head}) {
    if (m->rows != d_out || m->cols != d_in || m->data.size() != d_in * d_out) {
      throw ContractError("ranker head shape does not match (d_out, d_in)");
    }
    if (!std::all_of(m->data.begin(), m->data.end(), [](double w) { return std::isfinite(w); })) {
      throw ContractError("ranker head has non-finite weights");
    }
  }
  if (!(margin > 0.0)) throw ContractError("ranker margin must be positive");
}

double score(const RankerHeads& heads, std::span<const double> context, std::span<const double> candidate) {
  check_dim(heads, context, "context embedding");
  check_dim(heads, candidate, "candidate embedding");
  auto vx = heads.context_head.apply(context);
  auto vj = heads.knowledge_head.apply(candidate);
  return kernels::dot(vx, vj);
}

double margin_loss(double c_pos, double c_neg, double margin) { return std::max(0.0, margin - c_pos + c_neg); }

LossAndGradient loss_and_gradient(const RankerHeads& heads, std::span<const RankTrainingExample> batch) {
  LossAndGradient out;
  out.context_grad = Matrix(heads.d_out, heads.d_in);
  out.knowledge_grad = Matrix(heads.d_out, heads.d_in);
  if (batch.empty()) return out;

  const double inv = 1.0 / static_cast<double>(batch.size());
  std::vector<double> diff_proj(heads.d_out), diff_in(heads.d_in);
  for (const auto& ex : batch) {
    check_dim(heads, ex.context, "context embedding");
    check_dim(heads, ex.positive, "positive embedding");
    check_dim(heads, ex.negative, "negative embedding");
    auto vx = heads.context_head.apply(ex.context);
    auto vp = heads.knowledge_head.apply(ex.positive);
    auto vn = heads.knowledge_head.apply(ex.negative);
    const double hinge = heads.margin - kernels::dot(vx, vp) + kernels::dot(vx, vn);
    if (hinge <= 0.0) continue;
    out.loss += hinge * inv;
    // dL/dW1 = -(W2 p - W2 n) x^T,  dL/dW2 = -(W1 x)(p - n)^T
    for (std::size_t r = 0; r < heads.d_out; ++r) diff_proj[r] = vp[r] - vn[r];
    for (std::size_t c = 0; c < heads.d_in; ++c) diff_in[c] = ex.positive[c] - ex.negative[c];
    kernels::ger(out.context_grad.data, heads.d_out, heads.d_in, -inv, diff_proj, ex.context);
    kernels::ger(out.knowledge_grad.data, heads.d_out, heads.d_in, -inv, vx, diff_in);
  }
  return out;
}

double mean_loss(const RankerHeads& heads, std::span<const RankTrainingExample> data) {
  if (data.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& ex : data) {
    sum += margin_loss(score(heads, ex.context, ex.positive), score(heads, ex.context, ex.negative), heads.margin);
  }
  return sum / static_cast<double>(data.size());
}

TrainResult train(RankerHeads heads, std::span<const RankTrainingExample> data, const TrainOptions& options) {
  if (data.empty()) throw ContractError("train: empty training set");
  if (options.batch_size == 0) throw ContractError("train: batch size must be >= 1");
  heads.validate();

  TrainResult result;
  Rng rng(options.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<RankTrainingExample> batch;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
    double epoch_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t end = std::min(order.size(), start + options.batch_size);
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(data[order[k]]);
      auto g = loss_and_gradient(heads, batch);
      if (!std::isfinite(g.loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch starting at " +
                           std::to_string(start));
      }
      epoch_sum += g.loss * static_cast<double>(end - start);
      kernels::axpy(-options.learning_rate, g.context_grad.data, heads.context_head.data);
      kernels::axpy(-options.learning_rate, g.knowledge_grad.data, heads.knowledge_head.data);
    }
    result.epoch_loss.push_back(epoch_sum / static_cast<double>(data.size()));
  }
  result.heads = std::move(heads);
  return result;
}

double pairwise_accuracy(const RankerHeads& heads, std::span<const RankTrainingExample> data) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& ex : data) {
    if (score(heads, ex.context, ex.positive) > score(heads, ex.context, ex.negative)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainingSet build_training_set(std::span<const Story> stories, const KnowledgeIndex& index,
                               EmbeddingBackend& embed, const StopwordList& stopwords,
                               const TrainingSetOptions& options, KeywordBackend* keywords) {
  TrainingSet set;
  KnowledgeEmbeddings knowledge(index, embed);
  Rng rng(options.seed);
  const PseudoLabelOptions label_options{options.n, options.max_keywords};

  for (const auto& story : stories) {
    const auto& s = story.sentences;
    if (s.size() < 2) throw ContractError("story " + story.story_id + " has fewer than 2 sentences");

    // labels[j] is the pseudo R^{j+1}; the first one has no preceding sentence.
    std::vector<PseudoLabel> labels;
    for (std::size_t j = 0; j < s.size(); ++j) {
      labels.push_back(build_pseudo_label(j ? s[j - 1] : std::string(), s[j], index, embed, stopwords, label_options));
    }

    std::vector<ContextBlock> blocks;
    for (std::size_t i = 1; i < s.size(); ++i) {
      ContextBlock block;
      for (std::size_t id : labels[i - 1].positives) block.knowledge.push_back(index.sentence(id).text);
      block.sentence = s[i - 1];
      blocks.push_back(std::move(block));

      std::vector<std::size_t> pool = labels[i].candidates;
      if (keywords) {
        auto predicted = predict_keywords(*keywords, serialize_sentences(blocks), i + 1);
        pool = index.retrieve_ids(predicted.keywords);
      }
      std::vector<std::size_t> positives = labels[i].positives;
      std::vector<std::size_t> sorted_pos = positives;
      std::sort(sorted_pos.begin(), sorted_pos.end());
      std::vector<std::size_t> negatives;
      std::set_difference(pool.begin(), pool.end(), sorted_pos.begin(), sorted_pos.end(),
                          std::back_inserter(negatives));
      if (positives.empty() || negatives.empty() || options.pairs_per_context == 0) {
        ++set.skipped_steps;
        continue;
      }

      // Up to negatives_per_context negatives without replacement.
      const std::size_t keep = std::min(options.negatives_per_context, negatives.size());
      for (std::size_t k = 0; k < keep; ++k) {
        std::swap(negatives[k], negatives[k + uniform_index(rng, negatives.size() - k)]);
      }
      negatives.resize(keep);
      if (negatives.empty()) {
        ++set.skipped_steps;
        continue;
      }

      const Embedding context = embed.embed_one(serialize_context(blocks));
      knowledge.ensure(positives);
      knowledge.ensure(negatives);
      for (std::size_t p = 0; p < options.pairs_per_context; ++p) {
        const std::size_t pos = positives[uniform_index(rng, positives.size())];
        const std::size_t neg = negatives[uniform_index(rng, negatives.size())];
        set.examples.push_back({context, knowledge.get(pos), knowledge.get(neg)});
      }
      ++set.contexts;
    }
  }
  return set;
}

std::vector<RankedCandidate> rank_scored(const RankerHeads* heads, std::span<const double> context,
                                         std::span<const RankCandidate> candidates) {
  std::vector<RankedCandidate> out;
  out.reserve(candidates.size());
  if (heads) {
    check_dim(*heads, context, "context embedding");
    auto vx = heads->context_head.apply(context);
    for (const auto& c : candidates) {
      check_dim(*heads, c.vector, "candidate embedding");
      out.push_back({c.triple_id, kernels::dot(vx, heads->knowledge_head.apply(c.vector))});
    }
  } else {
    for (const auto& c : candidates) out.push_back({c.triple_id, kernels::dot(context, c.vector)});
  }
  std::sort(out.begin(), out.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.triple_id < b.triple_id;
  });
  return out;
}

std::vector<std::size_t> rank(const RankerHeads& heads, std::span<const double> context,
                              std::span<const RankCandidate> candidates, std::size_t n) {
  auto scored = rank_scored(&heads, context, candidates);
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < scored.size() && k < n; ++k) out.push_back(scored[k].triple_id);
  return out;
}

void save_heads(const RankerHeads& heads, std::ostream& out) {
  heads.validate();
  out.write(kMagic, sizeof(kMagic));
  write_le<std::uint32_t>(out, kCheckpointVersion);
  write_le<std::uint64_t>(out, heads.d_in);
  write_le<std::uint64_t>(out, heads.d_out);
  write_le<double>(out, heads.margin);
  for (double w : heads.context_head.data) write_le<double>(out, w);
  for (double w : heads.knowledge_head.data) write_le<double>(out, w);
  if (!out) throw Error("failed writing heads checkpoint");
}

RankerHeads load_heads(std::istream& in) {
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("not a ranker heads checkpoint");
  }
  const auto version = read_le<std::uint32_t>(in);
  if (version != kCheckpointVersion) throw ParseError("unsupported checkpoint version " + std::to_string(version));
  RankerHeads h;
  h.d_in = read_le<std::uint64_t>(in);
  h.d_out = read_le<std::uint64_t>(in);
  h.margin = read_le<double>(in);
  if (h.d_in == 0 || h.d_out == 0 || h.d_in > (1u << 20) || h.d_out > (1u << 20)) {
    throw ParseError("implausible checkpoint dimensions");
  }
  h.context_head = Matrix(h.d_out, h.d_in);
  h.knowledge_head = Matrix(h.d_out, h.d_in);
  for (double& w : h.context_head.data) w = read_le<double>(in);
  for (double& w : h.knowledge_head.data) w = read_le<double>(in);
  try {
    h.validate();
  } catch (const ContractError& e) {
    throw ParseError(e.what());
  }
  return h;
}

void save_heads(const RankerHeads& heads, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  save_heads(heads, out);
}

RankerHeads load_heads(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  return load_heads(in);
}

std::string format_training_report(std::span<const double> epoch_loss) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t e = 0; e < epoch_loss.size(); ++e) out << (e + 1) << '\t' << epoch_loss[e] << '\n';
  return out.str();
}

}  // namespace cntrl
