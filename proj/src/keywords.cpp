#include "cntrl/keywords.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <unordered_map>

#include "cntrl/backend.hpp"
#include "cntrl/error.hpp"
#include "cntrl/text.hpp"

namespace cntrl {
namespace {

// RAKE token stream: word tokens and phrase boundaries (stopwords,
// punctuation, placeholders) marked by an empty string.
std::vector<std::string> rake_stream(std::string_view sentence, const StopwordList& stopwords) {
  std::vector<std::string> out;
  auto boundary = [&out] {
    if (!out.empty() && !out.back().empty()) out.emplace_back();
  };
  for (const auto& raw : text::split_whitespace(sentence)) {
    if (text::is_placeholder(raw)) {
      boundary();
      continue;
    }
    std::string cur;
    auto flush = [&] {
      if (cur.empty()) return;
      if (text::is_punctuation(cur) || stopwords.contains(cur)) {
        boundary();
      } else {
        out.push_back(cur);
      }
      cur.clear();
    };
    for (char c : raw) {
      auto uc = static_cast<unsigned char>(c);
      if (std::isalnum(uc) || c == '\'' || c == '-') {
        cur += static_cast<char>(std::tolower(uc));
      } else {
        flush();
        boundary();
      }
    }
    flush();
  }
  return out;
}

}  // namespace

std::string_view to_string(KeywordSource source) {
  switch (source) {
    case KeywordSource::kPredicted:
      return "predicted";
    case KeywordSource::kExtracted:
      return "extracted";
    case KeywordSource::kHuman:
      return "human";
  }
  return "unknown";
}

KeywordSource keyword_source_from_string(std::string_view s) {
  if (s == "predicted") return KeywordSource::kPredicted;
  if (s == "extracted") return KeywordSource::kExtracted;
  if (s == "human") return KeywordSource::kHuman;
  throw ParseError("unknown keyword source '" + std::string(s) + "'");
}

bool KeywordSet::add(KeywordPhrase phrase) {
  if (phrase.empty()) return false;
  if (std::find(keywords.begin(), keywords.end(), phrase) != keywords.end()) return false;
  keywords.push_back(std::move(phrase));
  return true;
}

std::vector<std::string> KeywordSet::phrases() const {
  std::vector<std::string> out;
  out.reserve(keywords.size());
  for (const auto& p : keywords) out.push_back(text::join(p, " "));
  return out;
}

StopwordList::StopwordList(const std::vector<std::string>& words) {
  for (const auto& w : words) {
    auto t = text::to_lower(text::trim(w));
    if (!t.empty()) words_.insert(std::move(t));
  }
}

StopwordList StopwordList::parse(std::istream& in) {
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    words.push_back(std::move(t));
  }
  return StopwordList(words);
}

StopwordList StopwordList::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return parse(in);
}

bool StopwordList::contains(std::string_view word) const { return words_.count(text::to_lower(word)) != 0; }

std::vector<ScoredPhrase> rake_candidates(std::string_view sentence, const StopwordList& stopwords) {
  // Maximal runs of content words, in order of appearance.
  std::vector<KeywordPhrase> runs;
  KeywordPhrase cur;
  for (auto& tok : rake_stream(sentence, stopwords)) {
    if (tok.empty()) {
      if (!cur.empty()) runs.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(std::move(tok));
    }
  }
  if (!cur.empty()) runs.push_back(std::move(cur));

  // freq(w) counts occurrences; deg(w) adds the length of every run holding w.
  std::unordered_map<std::string, double> freq, degree;
  for (const auto& run : runs) {
    for (const auto& w : run) {
      freq[w] += 1.0;
      degree[w] += static_cast<double>(run.size());
    }
  }

  std::vector<ScoredPhrase> scored;
  for (auto& run : runs) {
    bool seen = std::any_of(scored.begin(), scored.end(), [&](const auto& s) { return s.phrase == run; });
    if (seen) continue;
    double score = 0.0;
    for (const auto& w : run) score += degree[w] / freq[w];
    scored.push_back({std::move(run), score});
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const ScoredPhrase& a, const ScoredPhrase& b) { return a.score > b.score; });
  return scored;
}

KeywordSet rake_extract(std::string_view sentence, const StopwordList& stopwords, std::size_t max_keywords) {
  if (max_keywords == 0) throw ContractError("rake_extract: max_keywords must be >= 1");
  KeywordSet out;
  out.source = KeywordSource::kExtracted;
  for (auto& sp : rake_candidates(sentence, stopwords)) {
    if (out.size() == max_keywords) break;
    out.add(std::move(sp.phrase));
  }
  return out;
}

KeywordSet parse_keyword_string(std::string_view s, KeywordSource source) {
  KeywordSet out;
  out.source = source;
  for (const auto& part : text::split(s, kKeywordSeparator)) {
    out.add(text::split_whitespace(text::to_lower(part)));
  }
  return out;
}

std::string format_keyword_string(const KeywordSet& keywords) {
  return text::join(keywords.phrases(), std::string(" ") + kKeywordSeparator + " ");
}

KeywordSet predict_keywords(KeywordBackend& backend, std::string_view context, std::size_t step_index) {
  KeywordSet out = parse_keyword_string(backend.predict(context), KeywordSource::kPredicted);
  out.step_index = step_index;
  return out;
}

}  // namespace cntrl
