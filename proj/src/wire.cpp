#include "cntrl/wire.hpp"

#include <cmath>

#include "cntrl/error.hpp"

namespace cntrl::wire {
namespace {

const Json& field(const Json& body, const char* name) {
  if (!body.is_object()) throw ProtocolError("body is not a JSON object");
  auto it = body.find(name);
  if (it == body.end()) throw ProtocolError(std::string("missing field '") + name + "'");
  return *it;
}

std::string string_field(const Json& body, const char* name) {
  const Json& v = field(body, name);
  if (!v.is_string()) throw ProtocolError(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> number_array(const Json& v, const char* name) {
  if (!v.is_array()) throw ProtocolError(std::string("field '") + name + "' must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if (!x.is_number()) throw ProtocolError(std::string("field '") + name + "' must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

Json parse(std::string_view body) {
  try {
    return Json::parse(body);
  } catch (const Json::parse_error& e) {
    throw ProtocolError(std::string("invalid JSON: ") + e.what());
  }
}

Json embed_request(std::span<const std::string> texts) {
  return Json{{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
}

std::vector<std::string> parse_embed_request(const Json& body) {
  const Json& v = field(body, "texts");
  if (!v.is_array()) throw ProtocolError("field 'texts' must be an array");
  std::vector<std::string> out;
  for (const auto& t : v) {
    if (!t.is_string()) throw ProtocolError("field 'texts' must hold strings");
    out.push_back(t.get<std::string>());
  }
  return out;
}

Json embed_response(const std::vector<Embedding>& vectors) {
  Json out;
  out["vectors"] = vectors;
  out["dim"] = vectors.empty() ? 0 : vectors.front().size();
  return out;
}

std::vector<Embedding> parse_embed_response(const Json& body, std::size_t expected_count) {
  const Json& vs = field(body, "vectors");
  const Json& dim = field(body, "dim");
  if (!dim.is_number_integer() || dim.get<long long>() < 0) throw ProtocolError("field 'dim' must be a count");
  if (!vs.is_array()) throw ProtocolError("field 'vectors' must be an array");
  if (vs.size() != expected_count) {
    throw ProtocolError("expected " + std::to_string(expected_count) + " vectors, got " + std::to_string(vs.size()));
  }
  const auto d = static_cast<std::size_t>(dim.get<long long>());
  std::vector<Embedding> out;
  for (const auto& v : vs) {
    auto e = number_array(v, "vectors");
    if (e.size() != d) throw ProtocolError("vector length disagrees with 'dim'");
    for (double x : e) {
      if (!std::isfinite(x)) throw ProtocolError("non-finite embedding value");
    }
    out.push_back(std::move(e));
  }
  return out;
}

Json keywords_request(std::string_view context) { return Json{{"context", std::string(context)}}; }

std::string parse_keywords_request(const Json& body) { return string_field(body, "context"); }

Json keywords_response(std::string_view keywords) { return Json{{"keywords", std::string(keywords)}}; }

std::string parse_keywords_response(const Json& body) { return string_field(body, "keywords"); }

Json generate_request(const GenerationRequest& r) {
  return Json{{"input", r.input}, {"top_k", r.top_k}, {"temperature", r.temperature}, {"seed", r.seed},
              {"stop", r.stop}};
}

GenerationRequest parse_generate_request(const Json& body) {
  GenerationRequest r;
  r.input = string_field(body, "input");
  const Json& k = field(body, "top_k");
  const Json& t = field(body, "temperature");
  const Json& s = field(body, "seed");
  if (!k.is_number_integer()) throw ProtocolError("field 'top_k' must be an integer");
  if (!t.is_number()) throw ProtocolError("field 'temperature' must be a number");
  if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
    throw ProtocolError("field 'seed' must be a non-negative integer");
  }
  r.top_k = k.get<int>();
  r.temperature = t.get<double>();
  r.seed = s.get<std::uint64_t>();
  if (body.contains("stop")) r.stop = string_field(body, "stop");
  return r;
}

Json generate_response(const Generation& g) { return Json{{"text", g.text}, {"token_logprobs", g.token_logprobs}}; }

Generation parse_generate_response(const Json& body) {
  Generation g;
  g.text = string_field(body, "text");
  g.token_logprobs = number_array(field(body, "token_logprobs"), "token_logprobs");
  return g;
}

}  // namespace cntrl::wire
