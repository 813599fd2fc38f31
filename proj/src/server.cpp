#include "cntrl/server.hpp"

#include "httplib.h"

#include "cntrl/error.hpp"
#include "cntrl/text.hpp"

namespace cntrl {
namespace {

using Json = wire::Json;

Json keywords_json(const KeywordSet& kw) {
  return Json{{"step_index", kw.step_index}, {"source", std::string(to_string(kw.source))}, {"phrases", kw.phrases()}};
}

Json knowledge_json(const KnowledgeSentence& k) { return Json{{"triple_id", k.triple_id}, {"text", k.text}}; }

Json step_json(const StoryStep& step, std::size_t index) {
  Json knowledge = Json::array();
  for (const auto& k : step.knowledge) knowledge.push_back(knowledge_json(k));
  return Json{{"index", index},
              {"sentence", step.sentence},
              {"provenance", std::string(to_string(step.provenance))},
              {"keywords", keywords_json(step.keywords)},
              {"knowledge", knowledge}};
}

Json candidates_json(const std::vector<RankedCandidate>& ranked, const KnowledgeIndex& index) {
  Json out = Json::array();
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    out.push_back({{"rank", r + 1},
                   {"triple_id", ranked[r].triple_id},
                   {"text", index.sentence(ranked[r].triple_id).text},
                   {"score", ranked[r].score}});
  }
  return out;
}

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message, bool retry = false) {
  reply(res, status, Json{{"error", message}, {"retry", retry}});
}

// Runs fn and maps library errors onto HTTP statuses.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const NotFoundError& e) {
    reply_error(res, 404, e.what());
  } catch (const ConflictError& e) {
    reply_error(res, 409, e.what());
  } catch (const TransportError& e) {
    reply_error(res, 502, e.what(), true);
  } catch (const ProtocolError& e) {
    reply_error(res, 502, e.what(), true);
  } catch (const ContractError& e) {
    reply_error(res, 400, e.what());
  } catch (const ParseError& e) {
    reply_error(res, 400, e.what());
  } catch (const ConfigError& e) {
    reply_error(res, 400, e.what());
  } catch (const std::exception& e) {
    reply_error(res, 500, e.what());
  }
}

Json body_of(const httplib::Request& req) {
  if (text::trim(req.body).empty()) return Json::object();
  try {
    Json j = Json::parse(req.body);
    if (!j.is_object()) throw ContractError("request body must be a JSON object");
    return j;
  } catch (const Json::parse_error& e) {
    throw ContractError(std::string("invalid JSON body: ") + e.what());
  }
}

std::optional<KeywordSet> keywords_from(const Json& body) {
  auto it = body.find("keywords");
  if (it == body.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return parse_keyword_string(it->get<std::string>(), KeywordSource::kHuman);
  if (!it->is_array()) throw ContractError("'keywords' must be a list of phrases or a ';'-separated string");
  KeywordSet kw;
  kw.source = KeywordSource::kHuman;
  for (const auto& p : *it) {
    if (!p.is_string()) throw ContractError("'keywords' entries must be strings");
    kw.add(text::split_whitespace(text::to_lower(p.get<std::string>())));
  }
  return kw;
}

}  // namespace

GenerationConfig parse_generation_config(const Json& body, const GenerationConfig& defaults) {
  GenerationConfig c = defaults;
  if (!body.is_object()) throw ContractError("'config' must be an object");
  try {
    if (body.contains("n")) c.n = body.at("n").get<std::size_t>();
    if (body.contains("top_k")) c.top_k = body.at("top_k").get<int>();
    if (body.contains("temperature")) c.temperature = body.at("temperature").get<double>();
    if (body.contains("seed")) c.seed = body.at("seed").get<std::uint64_t>();
    if (body.contains("length")) c.length = body.at("length").get<std::size_t>();
    if (body.contains("mode")) c.mode = planning_mode_from_string(body.at("mode").get<std::string>());
  } catch (const Json::exception& e) {
    throw ContractError(std::string("bad config: ") + e.what());
  }
  c.validate();
  return c;
}

ApiServer::ApiServer(const Planner& planner, ServerOptions options)
    : planner_(planner), controller_(planner), options_(std::move(options)) {}

Json ApiServer::session_json(const Session& s) {
  Json steps = Json::array();
  for (std::size_t i = 0; i < s.state.steps().size(); ++i) steps.push_back(step_json(s.state.steps()[i], i + 1));
  Json out{{"session_id", s.id},
           {"phase", std::string(to_string(s.phase))},
           {"target_length", s.state.target_length()},
           {"steps", steps},
           {"pending_keywords", s.pending_keywords ? keywords_json(*s.pending_keywords) : Json(nullptr)},
           {"pinned", s.pinned ? Json(*s.pinned) : Json(nullptr)}};
  if (s.pending_knowledge) {
    Json cands = Json::array();
    for (std::size_t r = 0; r < s.pending_knowledge->size(); ++r) {
      const auto& c = (*s.pending_knowledge)[r];
      cands.push_back({{"rank", r + 1}, {"triple_id", c.triple_id}, {"score", c.score}});
    }
    out["pending_knowledge"] = cands;
  } else {
    out["pending_knowledge"] = nullptr;
  }
  return out;
}

void ApiServer::mount(httplib::Server& server) {
  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, Json{{"status", "ok"}});
  });

  server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      Json body = body_of(req);
      if (!body.contains("first_sentence") || !body["first_sentence"].is_string()) {
        throw ContractError("'first_sentence' is required");
      }
      GenerationConfig config = options_.defaults;
      if (body.contains("config") && !body["config"].is_null()) {
        config = parse_generation_config(body["config"], options_.defaults);
      }
      Session s = controller_.open(store_.new_id(), body["first_sentence"].get<std::string>(), config);
      const std::string id = s.id;
      std::optional<std::string> keyword_error;
      if (s.phase == Phase::kAwaitingKeywords) {
        try {
          controller_.predict_keywords(s);
        } catch (const TransportError& e) {
          keyword_error = e.what();
        } catch (const ProtocolError& e) {
          keyword_error = e.what();
        }
      }
      Json predicted = s.pending_keywords ? Json(s.pending_keywords->phrases()) : Json(nullptr);
      const std::string phase(to_string(s.phase));
      store_.put(std::move(s));
      if (keyword_error) {
        reply(res, 502, Json{{"session_id", id}, {"phase", phase}, {"error", *keyword_error}, {"retry", true}});
        return;
      }
      reply(res, 201, Json{{"session_id", id}, {"phase", phase}, {"predicted_keywords", predicted}});
    });
  });

  server.Get(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto entry = store_.get(req.matches[1]);
      std::lock_guard lock(entry->mu);
      reply(res, 200, session_json(entry->session));
    });
  });

  server.Delete(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.matches[1];
      if (!store_.erase(id)) throw NotFoundError("unknown session " + id);
      reply(res, 200, Json{{"deleted", id}});
    });
  });

  server.Post(R"(/sessions/([^/]+)/keywords)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      Json body = body_of(req);
      auto entry = store_.get(req.matches[1]);
      std::lock_guard lock(entry->mu);
      Session& s = entry->session;
      controller_.set_keywords(s, keywords_from(body));
      reply(res, 200,
            Json{{"session_id", s.id},
                 {"phase", std::string(to_string(s.phase))},
                 {"keywords", keywords_json(*s.pending_keywords)},
                 {"candidates", candidates_json(*s.pending_knowledge, planner_.index())}});
    });
  });

  server.Post(R"(/sessions/([^/]+)/knowledge)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      Json body = body_of(req);
      if (!body.contains("triple_ids") || !body["triple_ids"].is_array()) {
        throw ContractError("'triple_ids' must be a list");
      }
      std::vector<std::size_t> ids;
      for (const auto& v : body["triple_ids"]) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
          throw ContractError("'triple_ids' must hold non-negative integers");
        }
        ids.push_back(v.get<std::size_t>());
      }
      auto entry = store_.get(req.matches[1]);
      std::lock_guard lock(entry->mu);
      Session& s = entry->session;
      controller_.pin_knowledge(s, ids);
      reply(res, 200, Json{{"session_id", s.id}, {"phase", std::string(to_string(s.phase))}, {"pinned", *s.pinned}});
    });
  });

  server.Post(R"(/sessions/([^/]+)/step)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      body_of(req);
      auto entry = store_.get(req.matches[1]);
      std::lock_guard lock(entry->mu);
      Session& s = entry->session;
      StepOutcome outcome = controller_.step(s);
      Json body{{"session_id", s.id},
                {"phase", std::string(to_string(s.phase))},
                {"step", step_json(outcome.step, s.state.size())},
                {"complete", s.phase == Phase::kComplete},
                {"predicted_keywords", s.pending_keywords ? Json(s.pending_keywords->phrases()) : Json(nullptr)}};
      if (outcome.keyword_error) {
        body["keyword_error"] = *outcome.keyword_error;
        body["retry"] = true;
      }
      reply(res, 200, body);
    });
  });

  if (options_.ui_dir) server.set_mount_point("/ui", *options_.ui_dir);
}

std::string ApiServer::snapshot() const {
  std::string out;
  for (const auto& entry : store_.all()) {
    std::lock_guard lock(entry->mu);
    const Session& s = entry->session;
    auto blocks = s.state.blocks();
    out += s.id + '\t' + std::string(to_string(s.phase)) + '\t' +
           (s.phase == Phase::kComplete ? serialize_story(blocks) : serialize_context(blocks)) + '\n';
  }
  return out;
}

}  // namespace cntrl
