#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace cntrl {

class KeywordBackend;

enum class KeywordSource { kPredicted, kExtracted, kHuman };

std::string_view to_string(KeywordSource source);
KeywordSource keyword_source_from_string(std::string_view s);

// One keyword phrase: a non-empty list of lowercase tokens.
using KeywordPhrase = std::vector<std::string>;

// Keywords K^i planned for one story step. May be empty.
struct KeywordSet {
  std::size_t step_index = 1;
  std::vector<KeywordPhrase> keywords;
  KeywordSource source = KeywordSource::kExtracted;

  // Appends unless an equal phrase is already present. Empty phrases are ignored.
  bool add(KeywordPhrase phrase);
  bool empty() const { return keywords.empty(); }
  std::size_t size() const { return keywords.size(); }
  // Phrases rendered with single spaces.
  std::vector<std::string> phrases() const;

  friend bool operator==(const KeywordSet&, const KeywordSet&) = default;
};

class StopwordList {
 public:
  StopwordList() = default;
  explicit StopwordList(const std::vector<std::string>& words);

  // One token per line; blank lines and '#' comments skipped.
  static StopwordList parse(std::istream& in);
  static StopwordList load(const std::string& path);

  // Case-insensitive.
  bool contains(std::string_view word) const;
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

 private:
  std::unordered_set<std::string> words_;
};

struct ScoredPhrase {
  KeywordPhrase phrase;
  double score = 0.0;
};

// All distinct RAKE candidate phrases of a sentence, best first. Ties keep
// first-occurrence order.
std::vector<ScoredPhrase> rake_candidates(std::string_view sentence, const StopwordList& stopwords);

// Top max_keywords RAKE phrases; source = extracted.
KeywordSet rake_extract(std::string_view sentence, const StopwordList& stopwords,
                        std::size_t max_keywords = 3);

// Wire format of a keyword string: phrases separated by ';'.
inline constexpr char kKeywordSeparator = ';';
KeywordSet parse_keyword_string(std::string_view s, KeywordSource source = KeywordSource::kPredicted);
std::string format_keyword_string(const KeywordSet& keywords);

// Asks the keyword backend for K^i given the serialized story context.
KeywordSet predict_keywords(KeywordBackend& backend, std::string_view context, std::size_t step_index);

}  // namespace cntrl
