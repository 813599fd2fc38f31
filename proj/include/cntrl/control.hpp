#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cntrl/planner.hpp"
#include "cntrl/random.hpp"

namespace cntrl {

class AntonymLexicon {
 public:
  // Lines "lemma<TAB>antonym1,antonym2". A lemma listed as its own antonym
  // is a ParseError; repeated lemmas merge.
  static AntonymLexicon parse(std::istream& in);
  static AntonymLexicon load(const std::string& path);

  void add(const std::string& lemma, const std::vector<std::string>& antonyms);
  const std::vector<std::string>* find(const std::string& lemma) const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::map<std::string, std::vector<std::string>> entries_;
};

struct Pivot {
  std::size_t step_index = 0;  // 1-based
  std::size_t keyword_index = 0;
  std::string keyword;
  std::vector<std::string> antonyms;
};

// First keyword, scanning steps then keywords in order, that has an antonym.
std::optional<Pivot> find_pivot(const StoryState& story, const AntonymLexicon& lexicon);

const std::string& choose_antonym(const std::vector<std::string>& antonyms, Rng& rng);

struct ControlRun {
  std::string story_id;
  StoryState original;
  std::optional<Pivot> pivot;  // empty: story is uncontrollable
  std::string chosen_antonym;
  std::optional<StoryState> controlled;

  bool controllable() const { return pivot.has_value(); }
};

// Swaps the pivot keyword for a uniformly chosen antonym, regenerates the
// pivot step with the swapped keywords and lets the planner finish the story.
ControlRun antonym_rerun(const StoryState& original, const AntonymLexicon& lexicon, const Planner& planner,
                         std::uint64_t rng_seed);

// True when the regenerated pivot sentence contains the antonym as a word.
bool antonym_realized(const ControlRun& run);

// "story_id<TAB>pivot_step<TAB>keyword<TAB>antonym<TAB>changed"; changed is
// the automatic proxy (antonym_realized) pending a human label. Uncontrollable
// stories report "-" fields.
std::string format_control_report_line(const ControlRun& run);

}  // namespace cntrl
