#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cntrl/keywords.hpp"

namespace cntrl {

struct KnowledgeTriple {
  std::size_t id = 0;
  std::string subject;
  std::string relation;
  std::string object;

  friend bool operator==(const KnowledgeTriple&, const KnowledgeTriple&) = default;
};

// Natural-language rendering of a triple. tokens is the sorted, deduplicated
// whitespace token set of text.
struct KnowledgeSentence {
  std::size_t triple_id = 0;
  std::string text;
  std::vector<std::string> tokens;

  bool has_token(std::string_view token) const;

  friend bool operator==(const KnowledgeSentence&, const KnowledgeSentence&) = default;
};

// Relation -> pattern with one "{s}" and one "{o}".
class TemplateTable {
 public:
  TemplateTable() = default;

  // Lines "Relation<TAB>pattern". Throws ConfigError on a bad pattern or a
  // repeated relation, ParseError on a malformed line.
  static TemplateTable parse(std::istream& in);
  static TemplateTable load(const std::string& path);

  void add(std::string relation, std::string pattern);
  bool contains(std::string_view relation) const;
  const std::string& pattern(std::string_view relation) const;
  std::size_t size() const { return patterns_.size(); }

  KnowledgeSentence render(const KnowledgeTriple& triple) const;

 private:
  std::map<std::string, std::string, std::less<>> patterns_;
};

// Lines "subject<TAB>relation<TAB>object", '#' comments. Subjects and objects
// are lowercased with '_' mapped to ' '. Ids are dense in file order.
std::vector<KnowledgeTriple> parse_triples(std::istream& in, const TemplateTable& table);
std::vector<KnowledgeTriple> load_triples(const std::string& path, const TemplateTable& table);

// Inverse of parse_triples for one triple (spaces written back as '_').
std::string format_triple(const KnowledgeTriple& triple);

// Immutable after construction; safe for concurrent readers.
class KnowledgeIndex {
 public:
  KnowledgeIndex() = default;

  static KnowledgeIndex build(std::vector<KnowledgeTriple> triples, const TemplateTable& table);

  std::span<const KnowledgeSentence> sentences() const { return sentences_; }
  std::span<const KnowledgeTriple> triples() const { return triples_; }
  const KnowledgeSentence& sentence(std::size_t triple_id) const;
  std::size_t size() const { return sentences_.size(); }

  // Sorted ids of sentences containing the token; empty when unknown.
  std::span<const std::size_t> postings(std::string_view token) const;
  std::size_t vocabulary_size() const { return postings_.size(); }

  // Ids of sentences matching at least one keyword; a multi-word keyword
  // matches when all of its tokens are present. Ascending, deduplicated.
  std::vector<std::size_t> retrieve_ids(std::span<const KeywordPhrase> keywords) const;
  std::vector<KnowledgeSentence> retrieve(const KeywordSet& keywords) const;

 private:
  std::vector<KnowledgeTriple> triples_;
  std::vector<KnowledgeSentence> sentences_;
  std::unordered_map<std::string, std::vector<std::size_t>> postings_;
};

}  // namespace cntrl
