#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cntrl {

using TokenSequence = std::vector<std::string>;

// Whitespace tokens of a story's sentences joined by single spaces.
TokenSequence story_tokens(std::span<const std::string> sentences);

// Percentage of stories containing some 4-gram at least twice.
double repeat4(std::span<const TokenSequence> stories);

// 100 * distinct 4-grams / all 4-grams over the corpus; 0 when there are no
// 4-grams at all (see has_four_grams).
double distinct4(std::span<const TokenSequence> stories);
bool has_four_grams(std::span<const TokenSequence> stories);

// exp(-sum(logprob) / token count) over every sentence of every story.
// Throws ContractError when no tokens are given.
double aggregate_perplexity(std::span<const std::vector<double>> token_logprobs);

struct MetricReport {
  double repeat4 = 0.0;
  double distinct4 = 0.0;
  std::optional<double> perplexity;
  std::size_t story_count = 0;
};

MetricReport evaluate(std::span<const TokenSequence> stories,
                      std::span<const std::vector<double>> token_logprobs = {});

// "repeat4<TAB>distinct4<TAB>perplexity<TAB>story_count", 4 decimals; a
// missing perplexity prints as "-".
std::string format_report(const MetricReport& report);

}  // namespace cntrl
