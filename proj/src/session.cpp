#include "cntrl/session.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

#include "cntrl/error.hpp"

namespace cntrl {
namespace {

void require_phase(const Session& s, std::initializer_list<Phase> allowed, std::string_view action) {
  if (std::find(allowed.begin(), allowed.end(), s.phase) == allowed.end()) {
    throw ConflictError(std::string(action) + " not allowed in phase " + std::string(to_string(s.phase)));
  }
}

}  // namespace

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::kAwaitingKeywords:
      return "awaiting_keywords";
    case Phase::kKeywordsReady:
      return "keywords_ready";
    case Phase::kKnowledgeReady:
      return "knowledge_ready";
    case Phase::kComplete:
      return "complete";
  }
  return "unknown";
}

Session SessionController::open(std::string id, std::string_view first_sentence,
                                const GenerationConfig& config) const {
  Session s;
  s.id = std::move(id);
  s.state = StoryState::start(first_sentence, config);
  s.phase = s.state.complete() ? Phase::kComplete : Phase::kAwaitingKeywords;
  return s;
}

void SessionController::predict_keywords(Session& s) const {
  require_phase(s, {Phase::kAwaitingKeywords}, "keyword prediction");
  s.pending_keywords = planner_.predict(s.state);
  s.phase = Phase::kKeywordsReady;
}

void SessionController::set_keywords(Session& s, const std::optional<KeywordSet>& keyword_override) const {
  require_phase(s, {Phase::kAwaitingKeywords, Phase::kKeywordsReady, Phase::kKnowledgeReady}, "setting keywords");
  if (keyword_override) {
    KeywordSet kw = *keyword_override;
    kw.source = KeywordSource::kHuman;
    kw.step_index = s.state.size() + 1;
    s.pending_keywords = std::move(kw);
    s.phase = Phase::kKeywordsReady;
  } else if (s.phase == Phase::kAwaitingKeywords) {
    predict_keywords(s);
  }
  s.pending_knowledge.reset();
  s.pinned.reset();
  s.phase = Phase::kKeywordsReady;
  s.pending_knowledge = planner_.candidates(s.state, *s.pending_keywords);
  s.phase = Phase::kKnowledgeReady;
}

void SessionController::pin_knowledge(Session& s, const std::vector<std::size_t>& triple_ids) const {
  require_phase(s, {Phase::kKnowledgeReady}, "pinning knowledge");
  if (triple_ids.size() > s.state.config().n) {
    throw ContractError("at most " + std::to_string(s.state.config().n) + " knowledge sentences can be pinned");
  }
  std::vector<std::size_t> pinned;
  for (const auto& cand : *s.pending_knowledge) {
    if (std::find(triple_ids.begin(), triple_ids.end(), cand.triple_id) != triple_ids.end()) {
      pinned.push_back(cand.triple_id);
    }
  }
  std::vector<std::size_t> unique = triple_ids;
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  if (pinned.size() != unique.size() || unique.size() != triple_ids.size()) {
    throw ContractError("pinned ids must be distinct members of the candidate list");
  }
  s.pinned = std::move(pinned);  // candidate rank order
}

StepOutcome SessionController::step(Session& s) const {
  require_phase(s, {Phase::kKnowledgeReady}, "generating a step");
  std::vector<KnowledgeSentence> knowledge;
  if (s.pinned) {
    for (std::size_t id : *s.pinned) knowledge.push_back(planner_.index().sentence(id));
  } else {
    for (std::size_t k = 0; k < s.pending_knowledge->size() && k < s.state.config().n; ++k) {
      knowledge.push_back(planner_.index().sentence((*s.pending_knowledge)[k].triple_id));
    }
  }
  StepOutcome out;
  out.step = planner_.realize(s.state, *s.pending_keywords, std::move(knowledge));
  s.state.append(out.step);
  s.pending_keywords.reset();
  s.pending_knowledge.reset();
  s.pinned.reset();
  if (s.state.complete()) {
    s.phase = Phase::kComplete;
    return out;
  }
  s.phase = Phase::kAwaitingKeywords;
  try {
    predict_keywords(s);
  } catch (const TransportError& e) {
    out.keyword_error = e.what();
  } catch (const ProtocolError& e) {
    out.keyword_error = e.what();
  }
  return out;
}

std::string SessionStore::new_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu_);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%06zx%016llx", ++counter_, static_cast<unsigned long long>(rng()));
  return buf;
}

void SessionStore::put(Session session) {
  auto entry = std::make_shared<Entry>();
  std::string id = session.id;
  entry->session = std::move(session);
  std::lock_guard lock(mu_);
  sessions_[id] = std::move(entry);
}

std::shared_ptr<SessionStore::Entry> SessionStore::get(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("unknown session " + id);
  return it->second;
}

bool SessionStore::erase(const std::string& id) {
  std::lock_guard lock(mu_);
  return sessions_.erase(id) > 0;
}

std::vector<std::shared_ptr<SessionStore::Entry>> SessionStore::all() const {
  std::lock_guard lock(mu_);
  std::vector<std::shared_ptr<Entry>> out;
  for (const auto& [id, e] : sessions_) out.push_back(e);
  return out;
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

}  // namespace cntrl
