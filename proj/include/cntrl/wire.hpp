#pragma once

// JSON bodies of the backend protocol:
//   POST /embed     {texts: [..]}                                -> {vectors: [[..],..], dim}
//   POST /keywords  {context}                                    -> {keywords: "kw1 ; kw2"}
//   POST /generate  {input, top_k, temperature, seed, stop}      -> {text, token_logprobs: [..]}
// Decoders throw ProtocolError on missing or mistyped fields.

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "cntrl/backend.hpp"

namespace cntrl::wire {

using Json = nlohmann::json;

Json embed_request(std::span<const std::string> texts);
std::vector<std::string> parse_embed_request(const Json& body);
Json embed_response(const std::vector<Embedding>& vectors);
std::vector<Embedding> parse_embed_response(const Json& body, std::size_t expected_count);

Json keywords_request(std::string_view context);
std::string parse_keywords_request(const Json& body);
Json keywords_response(std::string_view keywords);
std::string parse_keywords_response(const Json& body);

Json generate_request(const GenerationRequest& request);
GenerationRequest parse_generate_request(const Json& body);
Json generate_response(const Generation& generation);
Generation parse_generate_response(const Json& body);

// Parses text as JSON, mapping syntax errors to ProtocolError.
Json parse(std::string_view body);

}  // namespace cntrl::wire
