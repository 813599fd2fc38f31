#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cntrl/backend.hpp"
#include "cntrl/kb.hpp"
#include "cntrl/keywords.hpp"

namespace cntrl {

// dot(u, v) / (|u| |v|); 0 when either vector has zero norm.
double cosine(std::span<const double> u, std::span<const double> v);

// Indices of the n best scores, ordered by (score desc, id asc).
std::vector<std::size_t> top_n(std::span<const std::size_t> ids, std::span<const double> scores,
                               std::size_t n);

// Weakly supervised knowledge label for sentence s^i.
struct PseudoLabel {
  std::string story_id;
  std::size_t step_index = 0;
  std::vector<std::size_t> positives;   // pseudo R^i, best first
  std::vector<std::size_t> candidates;  // every keyword-matched sentence, ascending

  friend bool operator==(const PseudoLabel&, const PseudoLabel&) = default;
};

struct PseudoLabelOptions {
  std::size_t n = 10;
  std::size_t max_keywords = 3;
};

// Extracts RAKE keywords from s_cur, retrieves matching knowledge, embeds
// "s_prev s_cur" and every candidate, and keeps the n candidates closest in
// cosine. s_prev may be empty (first sentence of a story).
PseudoLabel build_pseudo_label(std::string_view s_prev, std::string_view s_cur, const KnowledgeIndex& index,
                               EmbeddingBackend& embed, const StopwordList& stopwords,
                               const PseudoLabelOptions& options = {});

// "story_id<TAB>step<TAB>pos,pos<TAB>cand,cand"
std::string format_pseudo_label(const PseudoLabel& label);
PseudoLabel parse_pseudo_label(std::string_view line);

}  // namespace cntrl
