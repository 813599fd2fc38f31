#pragma once

#include <atomic>
#include <cstddef>
#include <string>

#include "cntrl/backend.hpp"
#include "cntrl/wire.hpp"

namespace httplib {
class Server;
}

namespace cntrl {

// POSTs JSON to an endpoint. Connection failures, timeouts and 5xx replies are
// retried endpoint.retries times, then surface as TransportError; other
// non-200 replies and undecodable bodies are ProtocolError.
class HttpJsonClient {
 public:
  explicit HttpJsonClient(BackendEndpoint endpoint);

  wire::Json post(const std::string& path, const wire::Json& body);

  const BackendEndpoint& endpoint() const { return endpoint_; }
  std::size_t attempts() const { return attempts_; }

 private:
  BackendEndpoint endpoint_;
  std::string origin_;     // scheme://host:port
  std::string base_path_;  // path prefix from the URL, no trailing '/'
  std::atomic<std::size_t> attempts_{0};
};

class HttpEmbeddingBackend final : public EmbeddingBackend {
 public:
  explicit HttpEmbeddingBackend(BackendEndpoint endpoint) : client_(std::move(endpoint)) {}
  std::vector<Embedding> embed(std::span<const std::string> texts) override;
  const HttpJsonClient& client() const { return client_; }

 private:
  HttpJsonClient client_;
  std::size_t dim_ = 0;  // pinned by the first reply
};

class HttpKeywordBackend final : public KeywordBackend {
 public:
  explicit HttpKeywordBackend(BackendEndpoint endpoint) : client_(std::move(endpoint)) {}
  std::string predict(std::string_view context) override;
  const HttpJsonClient& client() const { return client_; }

 private:
  HttpJsonClient client_;
};

class HttpGeneratorBackend final : public GeneratorBackend {
 public:
  explicit HttpGeneratorBackend(BackendEndpoint endpoint) : client_(std::move(endpoint)) {}
  Generation generate(const GenerationRequest& request) override;
  const HttpJsonClient& client() const { return client_; }

 private:
  HttpJsonClient client_;
};

// Serves the backend protocol (/embed, /keywords, /generate) from in-process
// backends; null members are not mounted.
void mount_backend_routes(httplib::Server& server, Backends backends);

}  // namespace cntrl
