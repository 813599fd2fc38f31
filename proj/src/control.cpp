#include "cntrl/control.hpp"

#include <algorithm>
#include <fstream>

#include "cntrl/error.hpp"
#include "cntrl/text.hpp"

namespace cntrl {

AntonymLexicon AntonymLexicon::parse(std::istream& in) {
  AntonymLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = text::split(t, '\t');
    if (fields.size() != 2) throw ParseError("expected lemma<TAB>antonyms", lineno);
    std::vector<std::string> antonyms;
    for (const auto& a : text::split(fields[1], ',')) {
      auto w = text::to_lower(text::trim(a));
      if (!w.empty()) antonyms.push_back(std::move(w));
    }
    try {
      lex.add(text::to_lower(text::trim(fields[0])), antonyms);
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return lex;
}

AntonymLexicon AntonymLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return parse(in);
}

void AntonymLexicon::add(const std::string& lemma, const std::vector<std::string>& antonyms) {
  if (lemma.empty()) throw ConfigError("empty lemma");
  if (antonyms.empty()) throw ConfigError("lemma '" + lemma + "' has no antonyms");
  auto& list = entries_[lemma];
  for (const auto& a : antonyms) {
    if (a == lemma) throw ConfigError("'" + lemma + "' listed as its own antonym");
    if (std::find(list.begin(), list.end(), a) == list.end()) list.push_back(a);
  }
}

const std::vector<std::string>* AntonymLexicon::find(const std::string& lemma) const {
  auto it = entries_.find(lemma);
  return it == entries_.end() ? nullptr : &it->second;
}

std::optional<Pivot> find_pivot(const StoryState& story, const AntonymLexicon& lexicon) {
  const auto& steps = story.steps();
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto phrases = steps[i].keywords.phrases();
    for (std::size_t k = 0; k < phrases.size(); ++k) {
      if (const auto* antonyms = lexicon.find(phrases[k])) return Pivot{i + 1, k, phrases[k], *antonyms};
    }
  }
  return std::nullopt;
}

const std::string& choose_antonym(const std::vector<std::string>& antonyms, Rng& rng) {
  if (antonyms.empty()) throw ContractError("no antonyms to choose from");
  return antonyms[uniform_index(rng, antonyms.size())];
}

ControlRun antonym_rerun(const StoryState& original, const AntonymLexicon& lexicon, const Planner& planner,
                         std::uint64_t rng_seed) {
  ControlRun run;
  run.original = original;
  run.pivot = find_pivot(original, lexicon);
  if (!run.pivot) return run;
  if (run.pivot->step_index < 2) throw ContractError("pivot on the given first sentence");

  Rng rng(rng_seed);
  run.chosen_antonym = choose_antonym(run.pivot->antonyms, rng);

  const auto& pivot_step = original.steps()[run.pivot->step_index - 1];
  KeywordSet swapped;
  swapped.source = KeywordSource::kHuman;
  for (std::size_t k = 0; k < pivot_step.keywords.keywords.size(); ++k) {
    swapped.add(k == run.pivot->keyword_index ? text::split_whitespace(run.chosen_antonym)
                                              : pivot_step.keywords.keywords[k]);
  }

  StoryState controlled = original.prefix(run.pivot->step_index - 1);
  controlled.append(planner.next_sentence(controlled, swapped));
  planner.extend(controlled);
  run.controlled = std::move(controlled);
  return run;
}

bool antonym_realized(const ControlRun& run) {
  if (!run.pivot || !run.controlled) return false;
  const auto words = text::words(run.controlled->steps()[run.pivot->step_index - 1].sentence);
  const auto target = text::split_whitespace(run.chosen_antonym);
  return std::search(words.begin(), words.end(), target.begin(), target.end()) != words.end();
}

std::string format_control_report_line(const ControlRun& run) {
  if (!run.pivot) return run.story_id + "\t-\t-\t-\t-";
  return run.story_id + '\t' + std::to_string(run.pivot->step_index) + '\t' + run.pivot->keyword + '\t' +
         run.chosen_antonym + '\t' + (antonym_realized(run) ? "true" : "false");
}

}  // namespace cntrl
