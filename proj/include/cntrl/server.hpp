#pragma once

#include <optional>
#include <string>

#include "cntrl/planner.hpp"
#include "cntrl/session.hpp"
#include "cntrl/wire.hpp"

namespace httplib {
class Server;
}

namespace cntrl {

struct ServerOptions {
  GenerationConfig defaults;
  std::optional<std::string> ui_dir;  // static bundle served under /ui
};

// HTTP API over SessionController:
//   POST   /sessions                 {first_sentence, config?}
//   GET    /sessions/{id}
//   POST   /sessions/{id}/keywords   {keywords?}
//   POST   /sessions/{id}/knowledge  {triple_ids}
//   POST   /sessions/{id}/step       {}
//   DELETE /sessions/{id}
//   GET    /healthz
// Errors: 400 bad request, 404 unknown session, 409 phase conflict,
// 502 backend failure (body carries "retry": true).
class ApiServer {
 public:
  ApiServer(const Planner& planner, ServerOptions options);

  void mount(httplib::Server& server);

  SessionStore& sessions() { return store_; }

  // One line per session: "id<TAB>phase<TAB>serialized story so far".
  std::string snapshot() const;

  static wire::Json session_json(const Session& session);

 private:
  const Planner& planner_;
  SessionController controller_;
  ServerOptions options_;
  SessionStore store_;
};

GenerationConfig parse_generation_config(const wire::Json& body, const GenerationConfig& defaults);

}  // namespace cntrl
