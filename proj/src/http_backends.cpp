#include "cntrl/http_backends.hpp"

#include "httplib.h"

#include "cntrl/error.hpp"

namespace cntrl {
namespace {

void split_url(const std::string& url, std::string& origin, std::string& base_path) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("backend URL needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  origin = url.substr(0, path_start);
  base_path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!base_path.empty() && base_path.back() == '/') base_path.pop_back();
}

void reply_json(httplib::Response& res, int status, const wire::Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename Fn>
void handle(httplib::Response& res, const httplib::Request& req, Fn&& fn) {
  try {
    reply_json(res, 200, fn(wire::parse(req.body)));
  } catch (const ProtocolError& e) {
    reply_json(res, 400, {{"error", e.what()}});
  } catch (const ContractError& e) {
    reply_json(res, 400, {{"error", e.what()}});
  } catch (const std::exception& e) {
    reply_json(res, 500, {{"error", e.what()}});
  }
}

}  // namespace

HttpJsonClient::HttpJsonClient(BackendEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  if (endpoint_.retries < 0) throw ConfigError("retries must be >= 0");
  split_url(endpoint_.url, origin_, base_path_);
}

wire::Json HttpJsonClient::post(const std::string& path, const wire::Json& body) {
  httplib::Client client(origin_);
  const auto timeout = endpoint_.timeout;
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  const std::string payload = body.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= endpoint_.retries; ++attempt) {
    ++attempts_;
    auto res = client.Post(base_path_ + path, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw ProtocolError(std::string(to_string(endpoint_.kind)) + " backend replied HTTP " +
                          std::to_string(res->status) + ": " + res->body);
    }
    return wire::parse(res->body);
  }
  throw TransportError(std::string(to_string(endpoint_.kind)) + " backend at " + endpoint_.url + " failed after " +
                       std::to_string(endpoint_.retries + 1) + " attempt(s): " + last_error);
}

std::vector<Embedding> HttpEmbeddingBackend::embed(std::span<const std::string> texts) {
  auto vectors = wire::parse_embed_response(client_.post("/embed", wire::embed_request(texts)), texts.size());
  for (const auto& v : vectors) {
    if (dim_ == 0) dim_ = v.size();
    if (v.size() != dim_) throw ProtocolError("embedding dimension changed within a session");
  }
  return vectors;
}

std::string HttpKeywordBackend::predict(std::string_view context) {
  return wire::parse_keywords_response(client_.post("/keywords", wire::keywords_request(context)));
}

Generation HttpGeneratorBackend::generate(const GenerationRequest& request) {
  return wire::parse_generate_response(client_.post("/generate", wire::generate_request(request)));
}

void mount_backend_routes(httplib::Server& server, Backends backends) {
  if (backends.embed) {
    server.Post("/embed", [embed = backends.embed](const httplib::Request& req, httplib::Response& res) {
      handle(res, req, [&](const wire::Json& body) {
        auto texts = wire::parse_embed_request(body);
        return wire::embed_response(embed->embed(texts));
      });
    });
  }
  if (backends.keywords) {
    server.Post("/keywords", [kw = backends.keywords](const httplib::Request& req, httplib::Response& res) {
      handle(res, req, [&](const wire::Json& body) {
        return wire::keywords_response(kw->predict(wire::parse_keywords_request(body)));
      });
    });
  }
  if (backends.generator) {
    server.Post("/generate", [gen = backends.generator](const httplib::Request& req, httplib::Response& res) {
      handle(res, req, [&](const wire::Json& body) {
        return wire::generate_response(gen->generate(wire::parse_generate_request(body)));
      });
    });
  }
}

}  // namespace cntrl
