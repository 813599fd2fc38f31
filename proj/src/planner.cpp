#include "cntrl/planner.hpp"

#include <algorithm>

#include "cntrl/error.hpp"
#include "cntrl/text.hpp"

namespace cntrl {
namespace {

std::vector<std::string> texts_of(std::span<const KnowledgeSentence> knowledge) {
  std::vector<std::string> out;
  out.reserve(knowledge.size());
  for (const auto& k : knowledge) out.push_back(k.text);
  return out;
}

}  // namespace

std::string_view to_string(PlanningMode mode) { return mode == PlanningMode::kStatic ? "static" : "dynamic"; }

PlanningMode planning_mode_from_string(std::string_view s) {
  if (s == "dynamic") return PlanningMode::kDynamic;
  if (s == "static") return PlanningMode::kStatic;
  throw ConfigError("unknown planning mode '" + std::string(s) + "'");
}

std::string_view to_string(Provenance provenance) {
  return provenance == Provenance::kGiven ? "given" : "generated";
}

void GenerationConfig::validate() const {
  if (n == 0) throw ContractError("N must be >= 1");
  if (top_k < 1) throw ContractError("top_k must be >= 1");
  if (!(temperature > 0.0)) throw ContractError("temperature must be > 0");
  if (length < 1) throw ContractError("story length must be >= 1");
}

std::vector<std::size_t> StoryStep::knowledge_ids() const {
  std::vector<std::size_t> out;
  for (const auto& k : knowledge) out.push_back(k.triple_id);
  return out;
}

StoryState StoryState::start(std::string_view first_sentence, const GenerationConfig& config) {
  config.validate();
  std::string s = text::collapse_spaces(first_sentence);
  if (s.empty()) throw ContractError("first sentence is empty");
  check_no_markers(s, "first sentence");
  StoryState state;
  state.config_ = config;
  StoryStep step;
  step.sentence = std::move(s);
  step.provenance = Provenance::kGiven;
  step.keywords.step_index = 1;
  state.steps_.push_back(std::move(step));
  return state;
}

void StoryState::append(StoryStep step) {
  if (complete()) throw ContractError("story already has " + std::to_string(steps_.size()) + " sentences");
  if (steps_.empty()) throw ContractError("story has no first sentence");
  if (step.knowledge.size() > config_.n) throw ContractError("step carries more than N knowledge sentences");
  if (text::trim(step.sentence).empty()) throw ContractError("empty sentence");
  check_no_markers(step.sentence, "sentence");
  step.keywords.step_index = steps_.size() + 1;
  steps_.push_back(std::move(step));
}

std::vector<ContextBlock> StoryState::blocks() const {
  std::vector<ContextBlock> out;
  out.reserve(steps_.size());
  for (const auto& s : steps_) out.push_back({texts_of(s.knowledge), s.sentence});
  return out;
}

std::vector<std::string> StoryState::sentences() const {
  std::vector<std::string> out;
  for (const auto& s : steps_) out.push_back(s.sentence);
  return out;
}

StoryState StoryState::prefix(std::size_t count) const {
  if (count == 0 || count > steps_.size()) throw ContractError("prefix length out of range");
  StoryState out;
  out.config_ = config_;
  out.steps_.assign(steps_.begin(), steps_.begin() + static_cast<std::ptrdiff_t>(count));
  return out;
}

std::string serialize_input(const StoryState& state, std::span<const KnowledgeSentence> next_knowledge) {
  auto blocks = state.blocks();
  auto next = texts_of(next_knowledge);
  return serialize_input(blocks, next);
}

std::string serialize_story(const StoryState& state) {
  auto blocks = state.blocks();
  return serialize_story(blocks);
}

std::uint64_t step_seed(std::uint64_t seed, std::size_t step_index) {
  return text::splitmix64(seed ^ text::splitmix64(static_cast<std::uint64_t>(step_index)));
}

Planner::Planner(const KnowledgeIndex& index, const RankerHeads* heads, Backends backends)
    : index_(index), heads_(heads), backends_(backends) {}

KeywordSet Planner::predict(const StoryState& state) const {
  if (!backends_.keywords) throw ContractError("no keyword backend configured");
  auto blocks = state.blocks();
  return predict_keywords(*backends_.keywords, serialize_sentences(blocks), state.size() + 1);
}

std::vector<RankedCandidate> Planner::candidates(const StoryState& state, const KeywordSet& keywords) const {
  auto ids = index_.retrieve_ids(keywords.keywords);
  if (ids.empty()) return {};
  if (!backends_.embed) throw ContractError("no embedding backend configured");

  auto blocks = state.blocks();
  std::vector<std::string> texts;
  texts.reserve(ids.size() + 1);
  texts.push_back(serialize_context(blocks));
  for (std::size_t id : ids) texts.push_back(index_.sentence(id).text);
  auto vectors = backends_.embed->embed(texts);
  if (vectors.size() != texts.size()) throw ProtocolError("embedding backend returned wrong vector count");

  std::vector<RankCandidate> cands;
  cands.reserve(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) cands.push_back({ids[k], std::move(vectors[k + 1])});
  return rank_scored(heads_, vectors[0], cands);
}

std::vector<KnowledgeSentence> Planner::top_knowledge(const std::vector<RankedCandidate>& ranked,
                                                      std::size_t n) const {
  std::vector<KnowledgeSentence> out;
  for (std::size_t k = 0; k < ranked.size() && k < n; ++k) out.push_back(index_.sentence(ranked[k].triple_id));
  return out;
}

StoryStep Planner::realize(const StoryState& state, KeywordSet keywords,
                           std::vector<KnowledgeSentence> knowledge) const {
  if (state.complete()) throw ContractError("story is already complete");
  if (knowledge.size() > state.config().n) throw ContractError("more than N knowledge sentences");
  if (!backends_.generator) throw ContractError("no generator backend configured");

  const std::size_t step_index = state.size() + 1;
  GenerationRequest request;
  request.input = serialize_input(state, knowledge);
  request.top_k = state.config().top_k;
  request.temperature = state.config().temperature;
  request.seed = step_seed(state.config().seed, step_index);
  request.stop = std::string(kEndOfSentenceMarker);

  Generation gen = backends_.generator->generate(request);
  std::string sentence = text::collapse_spaces(gen.text);
  if (sentence.empty()) throw ProtocolError("generator returned an empty sentence");
  for (const auto& tok : text::split_whitespace(sentence)) {
    if (is_reserved_marker(tok)) throw ProtocolError("generator output contains marker '" + tok + "'");
  }

  StoryStep step;
  step.sentence = std::move(sentence);
  step.knowledge = std::move(knowledge);
  step.keywords = std::move(keywords);
  step.keywords.step_index = step_index;
  step.provenance = Provenance::kGenerated;
  step.token_logprobs = std::move(gen.token_logprobs);
  return step;
}

StoryStep Planner::next_sentence(const StoryState& state, const std::optional<KeywordSet>& keyword_override) const {
  if (state.complete()) throw ContractError("story already has its target length");
  KeywordSet keywords;
  if (keyword_override) {
    keywords = *keyword_override;
    keywords.source = KeywordSource::kHuman;
  } else {
    keywords = predict(state);
  }
  keywords.step_index = state.size() + 1;
  auto ranked = candidates(state, keywords);
  return realize(state, std::move(keywords), top_knowledge(ranked, state.config().n));
}

void Planner::extend(StoryState& state) const {
  while (!state.complete()) state.append(next_sentence(state));
}

StoryState Planner::generate_story(std::string_view first_sentence, const GenerationConfig& config) const {
  StoryState state = StoryState::start(first_sentence, config);
  if (state.complete()) return state;
  if (config.mode == PlanningMode::kDynamic) {
    extend(state);
    return state;
  }

  // Static: one plan from the first sentence, knowledge dealt out in rank
  // order as equal contiguous slices over the remaining steps.
  const std::size_t remaining = config.length - 1;
  KeywordSet keywords = predict(state);
  auto ranked = candidates(state, keywords);
  auto plan = top_knowledge(ranked, config.n * remaining);
  const std::size_t slice = (plan.size() + remaining - 1) / remaining;
  for (std::size_t k = 0; k < remaining; ++k) {
    const std::size_t begin = std::min(plan.size(), k * slice);
    const std::size_t end = std::min(plan.size(), begin + slice);
    std::vector<KnowledgeSentence> knowledge(plan.begin() + static_cast<std::ptrdiff_t>(begin),
                                             plan.begin() + static_cast<std::ptrdiff_t>(end));
    state.append(realize(state, keywords, std::move(knowledge)));
  }
  return state;
}

std::string format_story_line(const StoryState& state) { return text::join(state.sentences(), "\t"); }

std::string format_plan_log(const StoryState& state) {
  std::string out;
  for (std::size_t i = 0; i < state.steps().size(); ++i) {
    const auto& step = state.steps()[i];
    std::string ids;
    for (std::size_t id : step.knowledge_ids()) {
      if (!ids.empty()) ids += ',';
      ids += std::to_string(id);
    }
    out += std::to_string(i + 1) + '\t' + format_keyword_string(step.keywords) + '\t' + ids + '\n';
  }
  return out;
}

}  // namespace cntrl
