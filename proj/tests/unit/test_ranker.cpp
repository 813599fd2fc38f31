#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <set>
#include <sstream>

#include "cntrl/corpus.hpp"
#include "cntrl/error.hpp"
#include "cntrl/mock_backends.hpp"
#include "cntrl/random.hpp"
#include "cntrl/ranker.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace cntrl {
namespace {

using Ids = std::vector<std::size_t>;

RankerHeads zero_heads(std::size_t d_in, std::size_t d_out) {
  RankerHeads h = RankerHeads::random(d_in, d_out, 0);
  std::fill(h.context_head.data.begin(), h.context_head.data.end(), 0.0);
  std::fill(h.knowledge_head.data.begin(), h.knowledge_head.data.end(), 0.0);
  return h;
}

TEST(Score, Examples) {
  auto id = RankerHeads::identity(2);
  EXPECT_DOUBLE_EQ(score(id, std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(score(id, std::vector<double>{1, 2}, std::vector<double>{1, 2}), 5.0);
  auto h = RankerHeads::random(2, 3, 1);
  std::fill(h.context_head.data.begin(), h.context_head.data.end(), 0.0);
  EXPECT_EQ(score(h, std::vector<double>{1, 2}, std::vector<double>{3, -4}), 0.0);
}

TEST(Score, DimensionMismatchThrows) {
  auto id = RankerHeads::identity(2);
  EXPECT_THROW(score(id, std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}), ContractError);
}

TEST(MarginLoss, Examples) {
  EXPECT_EQ(margin_loss(10, 2, 5), 0.0);
  EXPECT_EQ(margin_loss(2, 1, 5), 4.0);
  EXPECT_EQ(kDefaultMargin, 5.0);
  EXPECT_EQ(RankerHeads::identity(3).margin, 5.0);
}

TEST(Heads, RandomInitWithinBound) {
  auto h = RankerHeads::random(16, 8, 42);
  EXPECT_EQ(h.context_head.rows, 8u);
  EXPECT_EQ(h.context_head.cols, 16u);
  for (double w : h.context_head.data) EXPECT_LE(std::abs(w), 0.25);
  for (double w : h.knowledge_head.data) EXPECT_LE(std::abs(w), 0.25);
  EXPECT_EQ(h, RankerHeads::random(16, 8, 42));
  EXPECT_NE(h, RankerHeads::random(16, 8, 43));
  EXPECT_THROW(RankerHeads::random(0, 8, 1), ContractError);
}

TEST(Heads, ValidateCatchesBadShapesAndValues) {
  auto h = RankerHeads::identity(2);
  h.context_head.data.pop_back();
  EXPECT_THROW(h.validate(), ContractError);
  auto n = RankerHeads::identity(2);
  n.knowledge_head.data[0] = std::nan("");
  EXPECT_THROW(n.validate(), ContractError);
}

TEST(Heads, CheckpointRoundTripsBitExactly) {
  auto h = RankerHeads::random(5, 3, 9, 2.5);
  h.context_head.data[0] = -0.0;
  h.knowledge_head.data[1] = 1e-310;
  std::stringstream buf;
  save_heads(h, buf);
  auto back = load_heads(buf);
  EXPECT_EQ(back.d_in, 5u);
  EXPECT_EQ(back.margin, 2.5);
  ASSERT_EQ(back.context_head.data.size(), h.context_head.data.size());
  for (std::size_t i = 0; i < h.context_head.data.size(); ++i) {
    EXPECT_EQ(std::memcmp(&back.context_head.data[i], &h.context_head.data[i], sizeof(double)), 0);
  }
  EXPECT_EQ(back.knowledge_head.data, h.knowledge_head.data);
}

TEST(Heads, CheckpointRejectsGarbage) {
  std::stringstream bad("not a checkpoint at all");
  EXPECT_THROW(load_heads(bad), ParseError);
  auto h = RankerHeads::identity(3);
  std::stringstream buf;
  save_heads(h, buf);
  std::string bytes = buf.str();
  std::stringstream cut(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(load_heads(cut), ParseError);
}

TEST(Gradient, MatchesFiniteDifferences) {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto heads = RankerHeads::random(4, 3, 100 + trial);
    std::vector<RankTrainingExample> batch;
    for (int b = 0; b < 5; ++b) {
      auto vec = [&] {
        Embedding v(4);
        for (double& x : v) x = 2.0 * uniform_unit(rng) - 1.0;
        return v;
      };
      batch.push_back({vec(), vec(), vec()});
    }
    auto g = loss_and_gradient(heads, batch);
    EXPECT_NEAR(g.loss, testing::naive_mean_loss(heads, batch), 1e-12);
    auto fd = testing::central_difference(heads, batch, 1e-6);
    for (std::size_t i = 0; i < fd.context_grad.data.size(); ++i) {
      EXPECT_NEAR(g.context_grad.data[i], fd.context_grad.data[i], 1e-6);
      EXPECT_NEAR(g.knowledge_grad.data[i], fd.knowledge_grad.data[i], 1e-6);
    }
  }
}

TEST(Gradient, ZeroWhenMarginSatisfied) {
  auto heads = RankerHeads::identity(2, 1.0);
  std::vector<RankTrainingExample> data{{{1, 0}, {5, 0}, {-5, 0}}};
  auto g = loss_and_gradient(heads, data);
  EXPECT_EQ(g.loss, 0.0);
  for (double x : g.context_grad.data) EXPECT_EQ(x, 0.0);
  auto trained = train(heads, data, TrainOptions{});
  EXPECT_EQ(trained.heads, heads);
}

TEST(Train, LossTraceStartsAtMarginFromZeroScores) {
  auto heads = zero_heads(2, 2);
  std::vector<RankTrainingExample> data{{{1, 0}, {1, 0}, {0, 1}}};
  TrainOptions opts;
  opts.epochs = 3;
  auto r = train(heads, data, opts);
  ASSERT_EQ(r.epoch_loss.size(), 3u);
  EXPECT_DOUBLE_EQ(r.epoch_loss[0], 5.0);
}

TEST(Train, SeparableSetReachesHighAccuracy) {
  auto data = testing::separable_set(8, 400, 5);
  auto heads = RankerHeads::random(8, 4, 1);
  TrainOptions opts;
  opts.epochs = 30;
  auto r = train(heads, data, opts);
  EXPECT_GE(pairwise_accuracy(r.heads, data), 0.95);
  EXPECT_DOUBLE_EQ(pairwise_accuracy(r.heads, data), testing::brute_force_accuracy(r.heads, data));
  EXPECT_LT(r.epoch_loss.back(), r.epoch_loss.front());
}

TEST(Train, DeterministicForSeed) {
  auto data = testing::separable_set(4, 64, 2);
  TrainOptions opts;
  opts.epochs = 2;
  opts.seed = 11;
  auto a = train(RankerHeads::random(4, 2, 1), data, opts);
  auto b = train(RankerHeads::random(4, 2, 1), data, opts);
  EXPECT_EQ(a.heads, b.heads);
  EXPECT_EQ(a.epoch_loss, b.epoch_loss);
}

TEST(Train, NonFiniteLossThrows) {
  auto heads = RankerHeads::identity(1);
  std::vector<RankTrainingExample> data{{{1e300}, {-1e300}, {1e300}}};
  EXPECT_THROW(train(heads, data, TrainOptions{}), NumericError);
}

TEST(Train, Defaults) {
  TrainOptions t;
  EXPECT_EQ(t.batch_size, 32u);
  EXPECT_EQ(t.learning_rate, 0.01);
  TrainingSetOptions s;
  EXPECT_EQ(s.negatives_per_context, 40u);
  EXPECT_EQ(s.pairs_per_context, 50u);
  EXPECT_EQ(s.n, 10u);
}

TEST(Train, ReportFormat) {
  EXPECT_EQ(format_training_report(std::vector<double>{5.0, 0.25}), "1\t5\n2\t0.25\n");
}

TEST(Rank, OrderingRules) {
  auto id = RankerHeads::identity(1);
  std::vector<RankCandidate> cands{{4, {1.0}}, {2, {3.0}}};
  std::vector<double> ctx{1.0};
  EXPECT_EQ(rank(id, ctx, cands, 1), (Ids{2}));
  std::vector<RankCandidate> ties{{9, {1.0}}, {3, {1.0}}, {5, {1.0}}};
  EXPECT_EQ(rank(id, ctx, ties, 2), (Ids{3, 5}));
  EXPECT_EQ(rank(id, ctx, cands, 10), (Ids{2, 4}));
}

TEST(Rank, NullHeadsUseInnerProduct) {
  std::vector<RankCandidate> cands{{0, {1.0, 0.0}}, {1, {0.0, 2.0}}};
  std::vector<double> ctx{1.0, 1.0};
  auto r = rank_scored(nullptr, ctx, cands);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].triple_id, 1u);
  EXPECT_DOUBLE_EQ(r[0].score, 2.0);
  auto id = RankerHeads::identity(2);
  auto same = rank_scored(&id, ctx, cands);
  EXPECT_EQ(same[0].triple_id, r[0].triple_id);
  EXPECT_DOUBLE_EQ(same[1].score, r[1].score);
}

TEST(TrainingSet, ToyStoryDrawsIdenticalPairs) {
  // Step 2 retrieves two sentences; with N = 1 one is positive and the other
  // the only negative, so every sampled pair is the same.
  auto index = testing::make_index({{"dog", "IsA", "pet"}, {"dog", "CapableOf", "bark"}});
  Story story{"1", {"a cat sat .", "the dog ."}, Split::kTrain};
  HashEmbeddingBackend embed;
  TrainingSetOptions opts;
  opts.n = 1;
  opts.pairs_per_context = 3;
  opts.seed = 4;
  auto set = build_training_set(std::span<const Story>(&story, 1), index, embed,
                                StopwordList({"a", "the"}), opts);
  ASSERT_EQ(set.examples.size(), 3u);
  EXPECT_EQ(set.contexts, 1u);
  for (const auto& ex : set.examples) {
    EXPECT_EQ(ex.context, set.examples[0].context);
    EXPECT_EQ(ex.positive, set.examples[0].positive);
    EXPECT_EQ(ex.negative, set.examples[0].negative);
    EXPECT_NE(ex.positive, ex.negative);
  }
  auto again = build_training_set(std::span<const Story>(&story, 1), index, embed, StopwordList({"a", "the"}), opts);
  EXPECT_EQ(again.examples.size(), 3u);
  EXPECT_EQ(again.examples[0].positive, set.examples[0].positive);
}

TEST(TrainingSet, StepsWithoutNegativesAreSkipped) {
  auto index = testing::make_index({{"dog", "IsA", "pet"}});
  Story story{"1", {"a cat sat .", "the dog .", "zebra ."}, Split::kTrain};
  HashEmbeddingBackend embed;
  auto set = build_training_set(std::span<const Story>(&story, 1), index, embed, StopwordList({"a", "the"}),
                                TrainingSetOptions{});
  EXPECT_TRUE(set.examples.empty());
  EXPECT_EQ(set.skipped_steps, 2u);
}

TEST(TrainingSet, NegativesCappedPerContext) {
  std::vector<std::vector<std::string>> triples;
  for (int i = 0; i < 60; ++i) triples.push_back({"dog", "IsA", "thing" + std::to_string(i)});
  auto index = testing::make_index(triples);
  Story story{"1", {"a cat sat .", "the dog ."}, Split::kTrain};
  HashEmbeddingBackend embed;
  TrainingSetOptions opts;
  opts.n = 1;
  opts.pairs_per_context = 2000;
  auto set = build_training_set(std::span<const Story>(&story, 1), index, embed, StopwordList({"a", "the"}), opts);
  std::set<std::vector<double>> negatives;
  for (const auto& ex : set.examples) negatives.insert(ex.negative);
  EXPECT_EQ(negatives.size(), 40u);
}

}  // namespace
}  // namespace cntrl
