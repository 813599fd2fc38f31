#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cntrl {

enum class Split { kTrain, kValidation, kTest };

std::string_view to_string(Split split);
Split split_from_string(std::string_view s);

// Reference split sizes of the full ROC story corpus.
std::size_t canonical_split_size(Split split);

inline constexpr std::size_t kStorySentences = 5;

struct Story {
  std::string story_id;
  std::vector<std::string> sentences;
  Split split = Split::kTrain;

  friend bool operator==(const Story&, const Story&) = default;
};

struct LoadOptions {
  bool normalize = true;
  // Compare the story count with the canonical split size and warn on mismatch.
  bool expect_canonical = false;
};

struct LoadResult {
  std::vector<Story> stories;
  std::vector<std::string> warnings;
};

// One story per line, sentences joined by TAB. Story ids are 1-based line
// numbers. Throws ParseError naming the line on a wrong sentence count or an
// unknown placeholder.
LoadResult load_stories(std::istream& in, Split split, const LoadOptions& options = {});
LoadResult load_stories(const std::string& path, Split split, const LoadOptions& options = {});

std::string format_story(const Story& story);

// " ." -> ". ", whitespace collapsed and trimmed, lowercased except placeholders.
std::string normalize(std::string_view sentence);

// name (lowercase, may span several words) -> placeholder
class NameLexicon {
 public:
  // Lines "name<TAB>placeholder".
  static NameLexicon parse(std::istream& in);
  static NameLexicon load(const std::string& path);

  void add(std::string_view name, std::string_view placeholder);
  std::size_t size() const { return entries_.size(); }
  std::size_t longest() const { return longest_; }
  const std::string* find(const std::string& name) const;

 private:
  std::map<std::string, std::string> entries_;
  std::size_t longest_ = 0;  // in tokens
};

// Longest-match replacement of lexicon names with placeholders.
std::string delexicalize(std::string_view sentence, const NameLexicon& lexicon);

}  // namespace cntrl
