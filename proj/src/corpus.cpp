#include "cntrl/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "cntrl/error.hpp"
#include "cntrl/text.hpp"

namespace cntrl {
namespace {

bool looks_like_placeholder(std::string_view tok) {
  if (tok.size() < 3 || tok.front() != '[' || tok.back() != ']') return false;
  return std::all_of(tok.begin() + 1, tok.end() - 1,
                     [](char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; });
}

std::string lower_except_placeholders(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '[') {
      std::size_t close = s.find(']', i);
      if (close != std::string_view::npos && text::is_placeholder(s.substr(i, close - i + 1))) {
        out.append(s.substr(i, close - i + 1));
        i = close + 1;
        continue;
      }
    }
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(s[i])));
    ++i;
  }
  return out;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

// Splits "paris." into ("paris", ".").
std::pair<std::string, std::string> split_trailing_punct(const std::string& tok) {
  std::size_t end = tok.size();
  while (end > 0 && std::ispunct(static_cast<unsigned char>(tok[end - 1])) && tok[end - 1] != ']') --end;
  return {tok.substr(0, end), tok.substr(end)};
}

}  // namespace

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kValidation:
      return "validation";
    case Split::kTest:
      return "test";
  }
  return "unknown";
}

Split split_from_string(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "validation" || s == "valid" || s == "dev") return Split::kValidation;
  if (s == "test") return Split::kTest;
  throw ConfigError("unknown split '" + std::string(s) + "'");
}

std::size_t canonical_split_size(Split split) {
  switch (split) {
    case Split::kTrain:
      return 88344;
    case Split::kValidation:
      return 4908;
    case Split::kTest:
      return 4909;
  }
  return 0;
}

std::string normalize(std::string_view sentence) {
  std::string cur = text::collapse_spaces(lower_except_placeholders(sentence));
  // Iterate to a fixpoint so that normalize is idempotent on runs like " . .".
  for (;;) {
    std::string next = cur;
    replace_all(next, " .", ". ");
    next = text::collapse_spaces(next);
    if (next == cur) return cur;
    cur = std::move(next);
  }
}

LoadResult load_stories(std::istream& in, Split split, const LoadOptions& options) {
  LoadResult result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    auto fields = text::split(line, '\t');
    if (fields.size() != kStorySentences) {
      throw ParseError("expected " + std::to_string(kStorySentences) + " sentences, got " +
                           std::to_string(fields.size()),
                       lineno);
    }
    Story story;
    story.story_id = std::to_string(lineno);
    story.split = split;
    for (auto& f : fields) {
      for (const auto& tok : text::split_whitespace(f)) {
        auto core = split_trailing_punct(tok).first;
        if (looks_like_placeholder(core) && !text::is_placeholder(core)) {
          throw ParseError("unknown placeholder " + core, lineno);
        }
      }
      std::string s = options.normalize ? normalize(f) : text::trim(f);
      if (s.empty()) throw ParseError("empty sentence", lineno);
      story.sentences.push_back(std::move(s));
    }
    result.stories.push_back(std::move(story));
  }
  if (options.expect_canonical && result.stories.size() != canonical_split_size(split)) {
    result.warnings.push_back("split " + std::string(to_string(split)) + " has " +
                              std::to_string(result.stories.size()) + " stories, expected " +
                              std::to_string(canonical_split_size(split)));
  }
  return result;
}

LoadResult load_stories(const std::string& path, Split split, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return load_stories(in, split, options);
}

std::string format_story(const Story& story) { return text::join(story.sentences, "\t"); }

NameLexicon NameLexicon::parse(std::istream& in) {
  NameLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = text::split(t, '\t');
    if (fields.size() != 2) throw ParseError("expected name<TAB>placeholder", lineno);
    try {
      lex.add(fields[0], text::trim(fields[1]));
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return lex;
}

NameLexicon NameLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return parse(in);
}

void NameLexicon::add(std::string_view name, std::string_view placeholder) {
  if (!text::is_placeholder(placeholder)) {
    throw ConfigError("'" + std::string(placeholder) + "' is not a placeholder");
  }
  auto tokens = text::split_whitespace(text::to_lower(name));
  if (tokens.empty()) throw ConfigError("empty name");
  longest_ = std::max(longest_, tokens.size());
  entries_[text::join(tokens, " ")] = std::string(placeholder);
}

const std::string* NameLexicon::find(const std::string& name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

std::string delexicalize(std::string_view sentence, const NameLexicon& lexicon) {
  auto tokens = text::split_whitespace(sentence);
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    bool replaced = false;
    const std::size_t max_len = std::min(lexicon.longest(), tokens.size() - i);
    for (std::size_t len = max_len; len >= 1 && !replaced; --len) {
      // Only the last token of a match may carry trailing punctuation.
      std::vector<std::string> cand(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                    tokens.begin() + static_cast<std::ptrdiff_t>(i + len));
      auto [core, suffix] = split_trailing_punct(cand.back());
      cand.back() = core;
      if (core.empty()) continue;
      if (const std::string* ph = lexicon.find(text::to_lower(text::join(cand, " ")))) {
        out.push_back(*ph + suffix);
        i += len;
        replaced = true;
      }
    }
    if (!replaced) out.push_back(tokens[i++]);
  }
  return text::join(out, " ");
}

}  // namespace cntrl
