#include "cntrl/kb.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <string>

#include "cntrl/error.hpp"
#include "cntrl/text.hpp"

namespace cntrl {
namespace {

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

std::string normalize_entity(std::string_view raw) {
  std::string s(raw);
  std::replace(s.begin(), s.end(), '_', ' ');
  return text::collapse_spaces(text::to_lower(s));
}

bool skip_line(const std::string& line) {
  std::string t = text::trim(line);
  return t.empty() || t.front() == '#';
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return in;
}

}  // namespace

bool KnowledgeSentence::has_token(std::string_view token) const {
  return std::binary_search(tokens.begin(), tokens.end(), token);
}

TemplateTable TemplateTable::parse(std::istream& in) {
  TemplateTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (skip_line(line)) continue;
    auto fields = text::split(line, '\t');
    if (fields.size() != 2) throw ParseError("template line needs Relation<TAB>pattern", lineno);
    table.add(text::trim(fields[0]), text::trim(fields[1]));
  }
  return table;
}

TemplateTable TemplateTable::load(const std::string& path) {
  auto in = open_or_throw(path);
  return parse(in);
}

void TemplateTable::add(std::string relation, std::string pattern) {
  if (relation.empty()) throw ConfigError("template with empty relation name");
  if (count_occurrences(pattern, "{s}") != 1 || count_occurrences(pattern, "{o}") != 1) {
    throw ConfigError("template for " + relation + " must contain exactly one {s} and one {o}");
  }
  if (!patterns_.emplace(std::move(relation), std::move(pattern)).second) {
    throw ConfigError("duplicate template relation");
  }
}

bool TemplateTable::contains(std::string_view relation) const {
  return patterns_.find(relation) != patterns_.end();
}

const std::string& TemplateTable::pattern(std::string_view relation) const {
  auto it = patterns_.find(relation);
  if (it == patterns_.end()) throw ContractError("no template for relation " + std::string(relation));
  return it->second;
}

KnowledgeSentence TemplateTable::render(const KnowledgeTriple& triple) const {
  // Placeholders are substituted through markers so that a subject containing
  // "{o}" cannot be rewritten by the second substitution.
  std::string s = pattern(triple.relation);
  replace_all(s, "{s}", "\x01");
  replace_all(s, "{o}", "\x02");
  replace_all(s, "\x01", triple.subject);
  replace_all(s, "\x02", triple.object);

  KnowledgeSentence out;
  out.triple_id = triple.id;
  out.text = text::collapse_spaces(s);
  out.tokens = text::split_whitespace(out.text);
  std::sort(out.tokens.begin(), out.tokens.end());
  out.tokens.erase(std::unique(out.tokens.begin(), out.tokens.end()), out.tokens.end());
  return out;
}

std::vector<KnowledgeTriple> parse_triples(std::istream& in, const TemplateTable& table) {
  std::vector<KnowledgeTriple> triples;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (skip_line(line)) continue;
    auto fields = text::split(line, '\t');
    if (fields.size() != 3) {
      throw ParseError("expected subject<TAB>relation<TAB>object, got " + std::to_string(fields.size()) +
                           " field(s)",
                       lineno);
    }
    KnowledgeTriple t;
    t.id = triples.size();
    t.subject = normalize_entity(fields[0]);
    t.relation = text::trim(fields[1]);
    t.object = normalize_entity(fields[2]);
    if (!table.contains(t.relation)) throw ParseError("unknown relation '" + t.relation + "'", lineno);
    if (t.subject.empty() || t.object.empty()) throw ParseError("empty subject or object", lineno);
    triples.push_back(std::move(t));
  }
  return triples;
}

std::vector<KnowledgeTriple> load_triples(const std::string& path, const TemplateTable& table) {
  auto in = open_or_throw(path);
  return parse_triples(in, table);
}

std::string format_triple(const KnowledgeTriple& triple) {
  auto entity = [](std::string s) {
    std::replace(s.begin(), s.end(), ' ', '_');
    return s;
  };
  return entity(triple.subject) + '\t' + triple.relation + '\t' + entity(triple.object);
}

KnowledgeIndex KnowledgeIndex::build(std::vector<KnowledgeTriple> triples, const TemplateTable& table) {
  KnowledgeIndex index;
  index.sentences_.reserve(triples.size());
  for (std::size_t i = 0; i < triples.size(); ++i) {
    if (triples[i].id != i) throw ContractError("triple ids must be dense and in order");
    index.sentences_.push_back(table.render(triples[i]));
  }
  // Ids are visited in ascending order, so every postings list comes out sorted.
  for (const auto& s : index.sentences_) {
    for (const auto& tok : s.tokens) index.postings_[tok].push_back(s.triple_id);
  }
  index.triples_ = std::move(triples);
  return index;
}

const KnowledgeSentence& KnowledgeIndex::sentence(std::size_t triple_id) const {
  if (triple_id >= sentences_.size()) {
    throw ContractError("triple id " + std::to_string(triple_id) + " out of range");
  }
  return sentences_[triple_id];
}

std::span<const std::size_t> KnowledgeIndex::postings(std::string_view token) const {
  auto it = postings_.find(std::string(token));
  if (it == postings_.end()) return {};
  return it->second;
}

std::vector<std::size_t> KnowledgeIndex::retrieve_ids(std::span<const KeywordPhrase> keywords) const {
  std::vector<std::size_t> result;
  for (const auto& phrase : keywords) {
    if (phrase.empty()) continue;
    // Intersect shortest-first.
    std::vector<std::span<const std::size_t>> lists;
    lists.reserve(phrase.size());
    for (const auto& tok : phrase) lists.push_back(postings(tok));
    std::sort(lists.begin(), lists.end(), [](auto a, auto b) { return a.size() < b.size(); });
    std::vector<std::size_t> hits(lists.front().begin(), lists.front().end());
    for (std::size_t k = 1; k < lists.size() && !hits.empty(); ++k) {
      std::vector<std::size_t> next;
      std::set_intersection(hits.begin(), hits.end(), lists[k].begin(), lists[k].end(),
                            std::back_inserter(next));
      hits.swap(next);
    }
    std::vector<std::size_t> merged;
    merged.reserve(result.size() + hits.size());
    std::set_union(result.begin(), result.end(), hits.begin(), hits.end(), std::back_inserter(merged));
    result.swap(merged);
  }
  return result;
}

std::vector<KnowledgeSentence> KnowledgeIndex::retrieve(const KeywordSet& keywords) const {
  std::vector<KnowledgeSentence> out;
  for (std::size_t id : retrieve_ids(keywords.keywords)) out.push_back(sentences_[id]);
  return out;
}

}  // namespace cntrl
