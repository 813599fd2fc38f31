#pragma once

// Interactive generation sessions. Each step walks
//   awaiting_keywords -> keywords_ready -> knowledge_ready -> (next step | complete)
// with human checkpoints at keyword override and knowledge pinning.

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cntrl/planner.hpp"

namespace cntrl {

enum class Phase { kAwaitingKeywords, kKeywordsReady, kKnowledgeReady, kComplete };

std::string_view to_string(Phase phase);

struct Session {
  std::string id;
  StoryState state;
  Phase phase = Phase::kAwaitingKeywords;
  std::optional<KeywordSet> pending_keywords;
  std::optional<std::vector<RankedCandidate>> pending_knowledge;
  std::optional<std::vector<std::size_t>> pinned;
};

struct StepOutcome {
  StoryStep step;
  // Set when predicting the following keywords failed; the session then
  // waits in awaiting_keywords.
  std::optional<std::string> keyword_error;
};

class SessionController {
 public:
  explicit SessionController(const Planner& planner) : planner_(planner) {}

  // New session in awaiting_keywords (or complete when length is 1).
  Session open(std::string id, std::string_view first_sentence, const GenerationConfig& config) const;

  // awaiting_keywords -> keywords_ready by asking the keyword backend.
  void predict_keywords(Session& session) const;

  // Uses the override (human source) or the pending prediction, retrieves and
  // ranks knowledge: -> knowledge_ready. Predicts first when nothing is pending.
  void set_keywords(Session& session, const std::optional<KeywordSet>& keyword_override) const;

  // Pins at most N of the pending candidates as R^i.
  void pin_knowledge(Session& session, const std::vector<std::size_t>& triple_ids) const;

  // Generates the next sentence from the pinned (or top-N) knowledge.
  StepOutcome step(Session& session) const;

 private:
  const Planner& planner_;
};

// Thread-safe map of sessions; each session has its own lock so mutations of
// one session are serialized while distinct sessions proceed in parallel.
class SessionStore {
 public:
  struct Entry {
    std::mutex mu;
    Session session;
  };

  std::string new_id();
  void put(Session session);
  std::shared_ptr<Entry> get(const std::string& id) const;  // NotFoundError if absent
  bool erase(const std::string& id);
  std::vector<std::shared_ptr<Entry>> all() const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::size_t counter_ = 0;
};

}  // namespace cntrl
