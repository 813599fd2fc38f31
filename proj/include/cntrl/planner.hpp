#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cntrl/backend.hpp"
#include "cntrl/kb.hpp"
#include "cntrl/keywords.hpp"
#include "cntrl/ranker.hpp"
#include "cntrl/serialization.hpp"

namespace cntrl {

enum class PlanningMode { kDynamic, kStatic };
enum class Provenance { kGiven, kGenerated };

std::string_view to_string(PlanningMode mode);
PlanningMode planning_mode_from_string(std::string_view s);
std::string_view to_string(Provenance provenance);

struct GenerationConfig {
  std::size_t n = 10;  // knowledge sentences per step
  int top_k = 40;
  double temperature = 0.7;
  PlanningMode mode = PlanningMode::kDynamic;
  std::uint64_t seed = 0;
  std::size_t length = 5;  // target story length l

  void validate() const;
};

struct StoryStep {
  std::string sentence;
  std::vector<KnowledgeSentence> knowledge;  // R^i, rank order
  KeywordSet keywords;                       // K^i
  Provenance provenance = Provenance::kGenerated;
  std::vector<double> token_logprobs;        // generator scores for the sentence

  std::vector<std::size_t> knowledge_ids() const;
};

class StoryState {
 public:
  // Step 1 holds the given sentence with empty keywords and knowledge.
  static StoryState start(std::string_view first_sentence, const GenerationConfig& config);

  const std::vector<StoryStep>& steps() const { return steps_; }
  const GenerationConfig& config() const { return config_; }
  std::size_t size() const { return steps_.size(); }
  std::size_t target_length() const { return config_.length; }
  bool complete() const { return steps_.size() >= config_.length; }

  // Throws ContractError when the story is complete or the step breaks an invariant.
  void append(StoryStep step);

  std::vector<ContextBlock> blocks() const;
  std::vector<std::string> sentences() const;

  // Steps [0, count); used to restart generation from a prefix.
  StoryState prefix(std::size_t count) const;

 private:
  std::vector<StoryStep> steps_;
  GenerationConfig config_;
};

std::string serialize_input(const StoryState& state, std::span<const KnowledgeSentence> next_knowledge);
std::string serialize_story(const StoryState& state);

// Seed sent to the generator for a given step.
std::uint64_t step_seed(std::uint64_t seed, std::size_t step_index);

// Runs the four-step loop: predict keywords, retrieve knowledge, rank it
// against the context, generate the next sentence.
class Planner {
 public:
  // heads may be null, in which case candidates are ranked by the plain inner
  // product of their embeddings with the context embedding.
  Planner(const KnowledgeIndex& index, const RankerHeads* heads, Backends backends);

  const KnowledgeIndex& index() const { return index_; }

  KeywordSet predict(const StoryState& state) const;

  // Retrieves knowledge for the keywords and scores every candidate against
  // the current context, best first.
  std::vector<RankedCandidate> candidates(const StoryState& state, const KeywordSet& keywords) const;

  // Calls the generator with the given knowledge as R^i.
  StoryStep realize(const StoryState& state, KeywordSet keywords, std::vector<KnowledgeSentence> knowledge) const;

  // One full planning step. The caller appends the result.
  StoryStep next_sentence(const StoryState& state, const std::optional<KeywordSet>& keyword_override = {}) const;

  // Continues a story to its target length in dynamic mode.
  void extend(StoryState& state) const;

  StoryState generate_story(std::string_view first_sentence, const GenerationConfig& config) const;

 private:
  std::vector<KnowledgeSentence> top_knowledge(const std::vector<RankedCandidate>& ranked, std::size_t n) const;

  const KnowledgeIndex& index_;
  const RankerHeads* heads_;
  Backends backends_;
};

// One story per line, sentences joined by TAB.
std::string format_story_line(const StoryState& state);
// "step<TAB>keywords<TAB>triple_ids" per step.
std::string format_plan_log(const StoryState& state);

}  // namespace cntrl
