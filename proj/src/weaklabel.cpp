#include "cntrl/weaklabel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cntrl/error.hpp"
#include "cntrl/kernels.hpp"
#include "cntrl/text.hpp"

namespace cntrl {
namespace {

std::string join_ids(const std::vector<std::size_t>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(ids[i]);
  }
  return out;
}

std::vector<std::size_t> parse_ids(const std::string& field) {
  std::vector<std::size_t> out;
  if (field.empty()) return out;
  for (const auto& part : text::split(field, ',')) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != part.size() || part.empty() || part.front() == '-') {
      throw ParseError("bad triple id '" + part + "'");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

}  // namespace

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ContractError("cosine: dimension mismatch");
  const double nu = std::sqrt(kernels::squared_norm(u));
  const double nv = std::sqrt(kernels::squared_norm(v));
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return kernels::dot(u, v) / (nu * nv);
}

std::vector<std::size_t> top_n(std::span<const std::size_t> ids, std::span<const double> scores,
                               std::size_t n) {
  if (ids.size() != scores.size()) throw ContractError("top_n: ids and scores differ in length");
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  };
  const std::size_t keep = std::min(n, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(), better);
  std::vector<std::size_t> out;
  out.reserve(keep);
  for (std::size_t k = 0; k < keep; ++k) out.push_back(ids[order[k]]);
  return out;
}

PseudoLabel build_pseudo_label(std::string_view s_prev, std::string_view s_cur, const KnowledgeIndex& index,
                               EmbeddingBackend& embed, const StopwordList& stopwords,
                               const PseudoLabelOptions& options) {
  if (text::trim(s_cur).empty()) throw ContractError("build_pseudo_label: empty sentence");
  if (options.n == 0) throw ContractError("build_pseudo_label: N must be >= 1");

  PseudoLabel label;
  KeywordSet keywords = rake_extract(s_cur, stopwords, options.max_keywords);
  label.candidates = index.retrieve_ids(keywords.keywords);
  if (label.candidates.empty()) return label;

  std::string context = text::trim(s_prev);
  if (!context.empty()) context += ' ';
  context += text::trim(s_cur);

  std::vector<std::string> texts;
  texts.reserve(label.candidates.size() + 1);
  texts.push_back(std::move(context));
  for (std::size_t id : label.candidates) texts.push_back(index.sentence(id).text);
  std::vector<Embedding> vectors = embed.embed(texts);
  if (vectors.size() != texts.size()) throw ProtocolError("embedding backend returned wrong vector count");

  std::vector<double> scores;
  scores.reserve(label.candidates.size());
  for (std::size_t j = 0; j < label.candidates.size(); ++j) scores.push_back(cosine(vectors[0], vectors[j + 1]));
  label.positives = top_n(label.candidates, scores, options.n);
  return label;
}

std::string format_pseudo_label(const PseudoLabel& label) {
  return label.story_id + '\t' + std::to_string(label.step_index) + '\t' + join_ids(label.positives) + '\t' +
         join_ids(label.candidates);
}

PseudoLabel parse_pseudo_label(std::string_view line) {
  auto fields = text::split(line, '\t');
  if (fields.size() != 4) throw ParseError("pseudo label needs 4 tab-separated fields");
  PseudoLabel label;
  label.story_id = fields[0];
  auto step = parse_ids(fields[1]);
  if (step.size() != 1) throw ParseError("bad step index");
  label.step_index = step.front();
  label.positives = parse_ids(fields[2]);
  label.candidates = parse_ids(fields[3]);
  return label;
}

}  // namespace cntrl
