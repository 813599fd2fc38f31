#include "cntrl/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "cntrl/error.hpp"
#include "cntrl/text.hpp"

namespace cntrl {
namespace {

constexpr std::size_t kOrder = 4;

// Joined with '\x1f' so that tokens never collide across boundaries.
std::string gram_key(const TokenSequence& tokens, std::size_t start) {
  std::string key;
  for (std::size_t k = 0; k < kOrder; ++k) {
    if (k) key += '\x1f';
    key += tokens[start + k];
  }
  return key;
}

}  // namespace

TokenSequence story_tokens(std::span<const std::string> sentences) {
  TokenSequence out;
  for (const auto& s : sentences) {
    auto toks = text::split_whitespace(s);
    out.insert(out.end(), std::make_move_iterator(toks.begin()), std::make_move_iterator(toks.end()));
  }
  return out;
}

double repeat4(std::span<const TokenSequence> stories) {
  if (stories.empty()) return 0.0;
  std::size_t repeating = 0;
  for (const auto& story : stories) {
    if (story.size() < kOrder) continue;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i + kOrder <= story.size(); ++i) {
      if (!seen.insert(gram_key(story, i)).second) {
        ++repeating;
        break;
      }
    }
  }
  return 100.0 * static_cast<double>(repeating) / static_cast<double>(stories.size());
}

bool has_four_grams(std::span<const TokenSequence> stories) {
  for (const auto& s : stories) {
    if (s.size() >= kOrder) return true;
  }
  return false;
}

double distinct4(std::span<const TokenSequence> stories) {
  std::unordered_set<std::string> unique;
  std::size_t total = 0;
  for (const auto& story : stories) {
    for (std::size_t i = 0; i + kOrder <= story.size(); ++i) {
      unique.insert(gram_key(story, i));
      ++total;
    }
  }
  if (total == 0) return 0.0;
  return 100.0 * static_cast<double>(unique.size()) / static_cast<double>(total);
}

double aggregate_perplexity(std::span<const std::vector<double>> token_logprobs) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& story : token_logprobs) {
    for (double lp : story) sum += lp;
    count += story.size();
  }
  if (count == 0) throw ContractError("perplexity needs at least one token log-probability");
  return std::exp(-sum / static_cast<double>(count));
}

MetricReport evaluate(std::span<const TokenSequence> stories, std::span<const std::vector<double>> token_logprobs) {
  MetricReport r;
  r.story_count = stories.size();
  r.repeat4 = repeat4(stories);
  r.distinct4 = distinct4(stories);
  if (!token_logprobs.empty()) r.perplexity = aggregate_perplexity(token_logprobs);
  return r;
}

std::string format_report(const MetricReport& report) {
  char buf[160];
  if (report.perplexity) {
    std::snprintf(buf, sizeof(buf), "%.4f\t%.4f\t%.4f\t%zu", report.repeat4, report.distinct4, *report.perplexity,
                  report.story_count);
  } else {
    std::snprintf(buf, sizeof(buf), "%.4f\t%.4f\t-\t%zu", report.repeat4, report.distinct4, report.story_count);
  }
  return buf;
}

}  // namespace cntrl
