// One PASS/FAIL/SKIP line per acceptance criterion; exit status 1 on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cntrl/control.hpp"
#include "cntrl/corpus.hpp"
#include "cntrl/metrics.hpp"
#include "cntrl/mock_backends.hpp"
#include "cntrl/planner.hpp"
#include "cntrl/random.hpp"
#include "cntrl/ranker.hpp"
#include "cntrl/serialization.hpp"
#include "cntrl/text.hpp"
#include "cntrl/weaklabel.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace {

using namespace cntrl;
using Strings = std::vector<std::string>;
using Clock = std::chrono::steady_clock;

enum class Outcome { kPass, kFail, kSkip };

struct Result {
  Outcome outcome = Outcome::kFail;
  std::string detail;
};

Result pass(std::string detail) { return {Outcome::kPass, std::move(detail)}; }
Result fail(std::string detail) { return {Outcome::kFail, std::move(detail)}; }
Result skip(std::string detail) { return {Outcome::kSkip, std::move(detail)}; }

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c);
  return buf;
}

const Strings kWords = {"the", "cat", "sat", "on", "mat", "dog", "ran", "to", "park", "a",
                        "big", "red", "ball", "he", "she", "went", "home", "and", "it", "was"};

std::string random_word(Rng& rng, const Strings& words) { return words[uniform_index(rng, words.size())]; }

Result metric_oracle() {
  Rng rng(101);
  std::vector<TokenSequence> stories;
  for (int s = 0; s < 1000; ++s) {
    Strings sentences;
    const Strings& vocab = s % 3 == 0 ? Strings(kWords.begin(), kWords.begin() + 5) : kWords;
    for (int k = 0; k < 5; ++k) {
      std::string sentence;
      const std::size_t len = 1 + uniform_index(rng, 10);
      for (std::size_t t = 0; t < len; ++t) sentence += (t ? " " : "") + random_word(rng, vocab);
      sentences.push_back(sentence + " .");
    }
    stories.push_back(story_tokens(sentences));
  }
  stories.push_back({"too", "short"});
  stories.push_back({});
  const auto start = Clock::now();
  const double r = repeat4(stories);
  const double d = distinct4(stories);
  const double elapsed = seconds_since(start);
  const double nr = testing::naive_repeat4(stories);
  const double nd = testing::naive_distinct4(stories);
  const std::string detail = fmt("repeat4 %.6f distinct4 %.6f in %.3f s", r, d, elapsed);
  if (r != nr || d != nd) return fail(detail + fmt(" oracle %.6f %.6f", nr, nd));
  if (elapsed >= 5.0) return fail(detail + " over 5 s");
  return pass(detail);
}

// Canonical CSV (storyid,storytitle,sentence1..5) or one TAB-joined story per line.
std::vector<Strings> read_reference_stories(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<Strings> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    if (line.find('\t') != std::string::npos) {
      out.push_back(text::split(line, '\t'));
      first = false;
      continue;
    }
    Strings fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          field += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(field);
        field.clear();
      } else {
        field += c;
      }
    }
    fields.push_back(field);
    const bool header = first && !fields.empty() && text::to_lower(fields[0]).find("id") != std::string::npos;
    first = false;
    if (header || fields.size() < 7) continue;
    out.emplace_back(fields.end() - 5, fields.end());
  }
  return out;
}

Result roc_anchor() {
  const char* path = std::getenv("CNTRL_ROC_CORPUS");
  if (path == nullptr || *path == '\0') return skip("set CNTRL_ROC_CORPUS to the reference story file to run");
  std::vector<TokenSequence> stories;
  for (const auto& raw : read_reference_stories(path)) {
    Strings sentences;
    for (const auto& s : raw) sentences.push_back(normalize(s));
    stories.push_back(story_tokens(sentences));
  }
  if (stories.empty()) return fail(std::string("no stories in ") + path);
  const double r = repeat4(stories);
  const double d = distinct4(stories);
  const std::string detail = fmt("repeat4 %.2f (7.6) distinct4 %.2f (88.9) over %.0f stories", r, d,
                                 static_cast<double>(stories.size()));
  if (std::abs(r - 7.6) > 2.0 || std::abs(d - 88.9) > 2.0) return fail(detail);
  return pass(detail);
}

const Strings kRelations = {"IsA", "UsedFor", "AtLocation", "CapableOf", "HasProperty", "RelatedTo", "HasA"};

Strings make_vocab(std::size_t size) {
  Strings v;
  for (std::size_t i = 0; i < size; ++i) v.push_back("w" + std::to_string(i));
  return v;
}

KnowledgeIndex random_index(Rng& rng, const Strings& vocab, std::size_t count, const TemplateTable& table) {
  std::vector<KnowledgeTriple> triples;
  for (std::size_t i = 0; i < count; ++i) {
    KnowledgeTriple t;
    t.id = i;
    t.subject = random_word(rng, vocab);
    if (uniform_index(rng, 4) == 0) t.subject += " " + random_word(rng, vocab);
    t.relation = random_word(rng, kRelations);
    t.object = random_word(rng, vocab);
    triples.push_back(std::move(t));
  }
  return KnowledgeIndex::build(std::move(triples), table);
}

Strings sentence_texts(const KnowledgeIndex& index) {
  Strings out;
  for (const auto& s : index.sentences()) out.push_back(s.text);
  return out;
}

Result retrieval_oracle() {
  Rng rng(202);
  const Strings vocab = make_vocab(400);
  const KnowledgeIndex index = random_index(rng, vocab, 10000, testing::default_templates());
  const Strings texts = sentence_texts(index);
  Strings probe = vocab;
  probe.insert(probe.end(), {"is", "used", "for", "absent"});
  std::vector<std::vector<KeywordPhrase>> sets;
  for (int k = 0; k < 200; ++k) {
    std::vector<KeywordPhrase> set;
    const std::size_t phrases = uniform_index(rng, 4);
    for (std::size_t p = 0; p < phrases; ++p) {
      KeywordPhrase phrase;
      const std::size_t len = 1 + uniform_index(rng, 3);
      for (std::size_t t = 0; t < len; ++t) phrase.push_back(random_word(rng, probe));
      set.push_back(std::move(phrase));
    }
    sets.push_back(std::move(set));
  }
  const auto start = Clock::now();
  std::size_t matched = 0;
  for (const auto& set : sets) {
    const auto got = index.retrieve_ids(set);
    const auto want = testing::brute_force_retrieve(texts, set);
    if (got != want) return fail("mismatch on keyword set " + std::to_string(&set - sets.data()));
    matched += got.size();
  }
  const double elapsed = seconds_since(start);
  const std::string detail = fmt("200 sets, %.0f ids matched, %.3f s", static_cast<double>(matched), elapsed);
  if (elapsed >= 10.0) return fail(detail + " over 10 s");
  return pass(detail);
}

// Small integer vectors: every dot product and norm is exact, so ties are
// real ties and not rounding artifacts.
class IntegerEmbedding final : public EmbeddingBackend {
 public:
  std::vector<Embedding> embed(std::span<const std::string> texts) override {
    std::vector<Embedding> out;
    for (const auto& t : texts) {
      Rng rng(std::hash<std::string>{}(t));
      Embedding v(6);
      for (auto& x : v) x = static_cast<double>(static_cast<int>(uniform_index(rng, 5)) - 2);
      out.push_back(std::move(v));
    }
    return out;
  }
};

Result pseudo_label_oracle() {
  Rng rng(303);
  const Strings vocab = make_vocab(30);
  const Strings stop_words = {"the", "was", "and", "then", "it"};
  const StopwordList stop(stop_words);
  KnowledgeIndex index = random_index(rng, vocab, 3000, testing::default_templates());
  const Strings texts = sentence_texts(index);
  IntegerEmbedding embed;
  PseudoLabelOptions options;
  options.n = 10;
  std::size_t with_ties = 0;
  std::size_t labelled = 0;
  auto random_sentence = [&] {
    std::string s;
    const std::size_t len = 3 + uniform_index(rng, 6);
    for (std::size_t t = 0; t < len; ++t) {
      s += (t ? " " : "") + (uniform_index(rng, 2) == 0 ? random_word(rng, stop_words) : random_word(rng, vocab));
    }
    return s + " .";
  };
  for (int c = 0; c < 500; ++c) {
    const std::string prev = c % 5 == 0 ? "" : random_sentence();
    const std::string cur = random_sentence();
    const PseudoLabel got = build_pseudo_label(prev, cur, index, embed, stop, options);

    const KeywordSet keywords = rake_extract(cur, stop, options.max_keywords);
    const auto candidates = testing::brute_force_retrieve(texts, keywords.keywords);
    std::vector<std::size_t> want;
    if (!candidates.empty()) {
      const std::string context = prev.empty() ? cur : prev + " " + cur;
      const Strings one{context};
      const auto ctx = embed.embed(one)[0];
      std::vector<double> scores;
      for (std::size_t id : candidates) {
        const Strings cand{texts[id]};
        scores.push_back(testing::naive_cosine(ctx, embed.embed(cand)[0]));
      }
      want = testing::brute_force_top_n(candidates, scores, options.n);
      std::set<double> distinct(scores.begin(), scores.end());
      if (distinct.size() < scores.size()) ++with_ties;
      ++labelled;
    }
    if (got.candidates != candidates || got.positives != want) {
      return fail("mismatch on context " + std::to_string(c));
    }
  }
  if (labelled < 400) return fail("only " + std::to_string(labelled) + " contexts had candidates");
  return pass(std::to_string(labelled) + " labelled contexts, " + std::to_string(with_ties) + " with tied scores");
}

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (auto& x : m.data) x = 2.0 * uniform_unit(rng) - 1.0;
  return m;
}

Embedding random_vector(Rng& rng, std::size_t dim) {
  Embedding v(dim);
  for (auto& x : v) x = 2.0 * uniform_unit(rng) - 1.0;
  return v;
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double relative_error(const Matrix& a, const Matrix& b) {
  std::vector<double> diff(a.data.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = a.data[i] - b.data[i];
  const double scale = std::max({norm(a.data), norm(b.data), 1e-12});
  return norm(diff) / scale;
}

Result gradient_check() {
  Rng rng(404);
  double worst = 0.0;
  std::size_t inactive_terms = 0;
  for (int instance = 0; instance < 100; ++instance) {
    RankerHeads heads;
    heads.d_in = 2 + uniform_index(rng, 5);
    heads.d_out = 1 + uniform_index(rng, 4);
    heads.margin = instance % 2 == 0 ? kDefaultMargin : 0.3;
    std::vector<RankTrainingExample> batch;
    for (;;) {
      heads.context_head = random_matrix(rng, heads.d_out, heads.d_in);
      heads.knowledge_head = random_matrix(rng, heads.d_out, heads.d_in);
      batch.clear();
      const std::size_t size = 1 + uniform_index(rng, 6);
      bool near_kink = false;
      std::size_t inactive = 0;
      for (std::size_t k = 0; k < size; ++k) {
        RankTrainingExample ex{random_vector(rng, heads.d_in), random_vector(rng, heads.d_in),
                               random_vector(rng, heads.d_in)};
        const double arg = heads.margin - score(heads, ex.context, ex.positive) + score(heads, ex.context, ex.negative);
        near_kink |= std::abs(arg) < 1e-3;
        inactive += arg < 0.0;
        batch.push_back(std::move(ex));
      }
      if (!near_kink) {
        inactive_terms += inactive;
        break;
      }
    }
    const LossAndGradient analytic = loss_and_gradient(heads, batch);
    const testing::FiniteDifference numeric = testing::central_difference(heads, batch, 1e-6);
    const double lerr = std::abs(analytic.loss - testing::naive_mean_loss(heads, batch));
    if (lerr > 1e-12 * std::max(1.0, std::abs(analytic.loss))) {
      return fail("loss differs from oracle on instance " + std::to_string(instance));
    }
    worst = std::max({worst, relative_error(analytic.context_grad, numeric.context_grad),
                      relative_error(analytic.knowledge_grad, numeric.knowledge_grad)});
  }
  const std::string detail = fmt("max relative error %.3g over 100 instances, %.0f inactive hinge terms", worst,
                                 static_cast<double>(inactive_terms));
  if (worst > 1e-4) return fail(detail);
  return pass(detail);
}

Result separability() {
  const std::size_t dim = 16;
  const auto data = testing::separable_set(dim, 2000, 505);
  // Brute-force verification: the first coordinate alone separates every pair.
  for (const auto& ex : data) {
    if (!(ex.context[0] > 0.0 && ex.positive[0] > 0.0 && ex.negative[0] < 0.0)) {
      return fail("generated set is not separable along the first axis");
    }
  }
  RankerHeads witness;
  witness.d_in = dim;
  witness.d_out = 1;
  witness.context_head = Matrix(1, dim);
  witness.knowledge_head = Matrix(1, dim);
  witness.context_head.at(0, 0) = 1.0;
  witness.knowledge_head.at(0, 0) = 1.0;
  if (testing::brute_force_accuracy(witness, data) != 1.0) return fail("witness heads do not separate the set");

  const auto start = Clock::now();
  RankerHeads heads = RankerHeads::random(dim, 8, 505);
  double accuracy = pairwise_accuracy(heads, data);
  const double initial = accuracy;
  std::size_t epochs = 0;
  while (accuracy < 0.95 && epochs < 50) {
    TrainOptions options;
    options.epochs = 1;
    options.seed = epochs + 1;
    heads = train(heads, data, options).heads;
    ++epochs;
    accuracy = pairwise_accuracy(heads, data);
  }
  const double elapsed = seconds_since(start);
  const double oracle = testing::brute_force_accuracy(heads, data);
  const std::string detail =
      fmt("accuracy %.4f (from %.4f) after ", accuracy, initial) + std::to_string(epochs) + fmt(" epochs, %.2f s", elapsed);
  if (oracle != accuracy) return fail(detail + fmt(", oracle accuracy %.4f", oracle));
  if (accuracy < 0.95 || elapsed >= 30.0) return fail(detail);
  return pass(detail);
}

Result cli_determinism() {
  testing::TempDir dir;
  auto run = [&](int seed, const std::string& name) {
    const auto r = testing::run_command("'" + testing::cli_path() + "' generate --mock --seed " +
                                        std::to_string(seed) + " --input " +
                                        testing::data_file("first_sentences.txt") + " --out " + dir.file(name));
    if (r.exit_code != 0) throw std::runtime_error("generate exited " + std::to_string(r.exit_code) + ": " + r.output);
    return testing::read_file(dir.file(name));
  };
  const std::string a = run(7, "a");
  const std::string b = run(7, "b");
  const std::string c = run(8, "c");
  std::istringstream lines(a);
  std::string line;
  std::size_t stories = 0;
  while (std::getline(lines, line)) {
    ++stories;
    if (text::split(line, '\t').size() != 5) return fail("story " + std::to_string(stories) + " is not 5 sentences");
  }
  if (stories == 0) return fail("no stories generated");
  if (a != b) return fail("seed 7 output differs between runs");
  if (a == c) return fail("seed 8 output equals seed 7 output");
  return pass(std::to_string(stories) + " stories byte-identical for seed 7, changed for seed 8");
}

// Keyword backend for the control fixture: before the story's planned pivot
// step it asks for "pause", at the pivot it asks for the lemma named in the
// first sentence ("[MALE] planned day P to LEMMA .").
class PlannedKeywordBackend final : public KeywordBackend {
 public:
  std::string predict(std::string_view context) override {
    const Strings tokens = text::split_whitespace(context);
    const std::size_t sentences = static_cast<std::size_t>(std::count(tokens.begin(), tokens.end(), "OS"));
    const std::size_t pivot = std::stoul(tokens.at(3));
    return sentences + 1 == pivot ? tokens.at(5) : "pause";
  }
};

Result control_harness() {
  const AntonymLexicon lexicon = AntonymLexicon::load(testing::data_file("antonyms.tsv"));
  std::ifstream in(testing::data_file("antonyms.tsv"));
  Strings lemmas;
  std::set<std::string> words{"pause"};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const Strings fields = text::split(line, '\t');
    lemmas.push_back(fields[0]);
    words.insert(fields[0]);
    for (const auto& a : text::split(fields[1], ',')) words.insert(a);
  }
  std::vector<std::vector<std::string>> triples;
  for (const auto& w : words) triples.push_back({w, "IsA", "word"});
  const KnowledgeIndex index = testing::make_index(triples);
  HashEmbeddingBackend embed;
  PlannedKeywordBackend keywords;
  MockGeneratorBackend echo{MockGeneratorOptions{MockGeneratorMode::kEcho, std::nullopt, 5, 9}};
  const Planner planner(index, nullptr, {&embed, &keywords, &echo});

  Rng rng(606);
  std::size_t realized = 0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t pivot_step = 2 + uniform_index(rng, 4);
    const std::string lemma = random_word(rng, lemmas);
    GenerationConfig config;
    config.seed = static_cast<std::uint64_t>(k);
    const std::string first = "[MALE] planned day " + std::to_string(pivot_step) + " to " + lemma + " .";
    const StoryState original = planner.generate_story(first, config);
    const ControlRun run = antonym_rerun(original, lexicon, planner, step_seed(config.seed, 99));
    const std::string where = "story " + std::to_string(k + 1);
    if (!run.controllable() || !run.controlled) return fail(where + " has no pivot");
    if (run.pivot->step_index != pivot_step) return fail(where + " pivots at the wrong step");
    const auto& orig_steps = original.steps();
    const auto& new_steps = run.controlled->steps();
    if (new_steps.size() != orig_steps.size()) return fail(where + " changed length");
    for (std::size_t j = 0; j + 1 < pivot_step; ++j) {
      if (new_steps[j].sentence != orig_steps[j].sentence || new_steps[j].keywords != orig_steps[j].keywords ||
          new_steps[j].knowledge != orig_steps[j].knowledge) {
        return fail(where + " prefix step " + std::to_string(j + 1) + " changed");
      }
    }
    if (serialize_story(original.prefix(pivot_step - 1)) != serialize_story(run.controlled->prefix(pivot_step - 1))) {
      return fail(where + " serialized prefix differs");
    }
    const Strings regenerated = text::split_whitespace(new_steps[pivot_step - 1].sentence);
    if (std::find(regenerated.begin(), regenerated.end(), run.chosen_antonym) == regenerated.end()) {
      return fail(where + " regenerated sentence lacks '" + run.chosen_antonym + "'");
    }
    realized += antonym_realized(run);
  }
  if (realized != 200) return fail("antonym_realized disagrees on " + std::to_string(200 - realized) + " stories");
  return pass("200/200 reruns contain the antonym with the prefix preserved");
}

Result serialization_golden() {
  struct Golden {
    std::string got;
    std::string want;
  };
  const std::vector<ContextBlock> one{{{}, "[MALE] went to the store ."}};
  const std::vector<ContextBlock> two{{{}, "[FEMALE] was hungry ."},
                                      {{"food is used for eating", "kitchen is a room"}, "she went to the kitchen ."}};
  const Strings k2{"bread is a food", "toast is bread"};
  const Strings none;
  const std::vector<Golden> cases = {
      {serialize_input(one, k2), "EOK [MALE] went to the store . OS bread is a food SEP toast is bread EOK"},
      {serialize_input(one, none), "EOK [MALE] went to the store . OS EOK"},
      {serialize_input(two, Strings{"x is y"}),
       "EOK [FEMALE] was hungry . OS food is used for eating SEP kitchen is a room EOK she went to the kitchen . OS "
       "x is y EOK"},
      {serialize_story(two),
       "EOK [FEMALE] was hungry . OS food is used for eating SEP kitchen is a room EOK she went to the kitchen . OS "
       "<|endoftext|>"},
      {serialize_context(two),
       "EOK [FEMALE] was hungry . OS food is used for eating SEP kitchen is a room EOK she went to the kitchen . OS"},
      {serialize_sentences(two), "[FEMALE] was hungry . OS she went to the kitchen . OS"},
  };
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (cases[i].got != cases[i].want) return fail("case " + std::to_string(i + 1) + ": '" + cases[i].got + "'");
  }
  const auto parsed = parse_serialized(cases[2].want);
  if (parsed.blocks != two || !parsed.next_knowledge || *parsed.next_knowledge != Strings{"x is y"}) {
    return fail("golden input does not parse back");
  }
  return pass(std::to_string(cases.size()) + " pinned strings match");
}

Result rake_fixtures() {
  const auto fixtures = testing::load_rake_fixtures();
  if (fixtures.size() != 20) return fail("expected 20 fixtures, found " + std::to_string(fixtures.size()));
  for (const auto& f : fixtures) {
    const StopwordList stop(f.stopwords);
    const KeywordSet kw = rake_extract(f.sentence, stop, f.max_keywords);
    const auto scored = rake_candidates(f.sentence, stop);
    if (kw.size() != f.expected.size()) return fail("'" + f.sentence + "': wrong keyword count");
    for (std::size_t i = 0; i < f.expected.size(); ++i) {
      if (kw.phrases()[i] != f.expected[i].first || scored[i].score != f.expected[i].second) {
        return fail("'" + f.sentence + "': phrase " + std::to_string(i + 1) + " differs");
      }
    }
  }
  return pass("20/20 hand-scored sentences match");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria = {
      {"metric_oracle", metric_oracle},
      {"roc_anchor", roc_anchor},
      {"retrieval_oracle", retrieval_oracle},
      {"pseudo_label_oracle", pseudo_label_oracle},
      {"ranker_gradient_check", gradient_check},
      {"ranker_separability", separability},
      {"cli_determinism", cli_determinism},
      {"control_harness", control_harness},
      {"serialization_golden", serialization_golden},
      {"rake_fixtures", rake_fixtures},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Result r;
    try {
      r = check();
    } catch (const std::exception& e) {
      r = fail(std::string("exception: ") + e.what());
    }
    const char* label = r.outcome == Outcome::kPass ? "PASS" : r.outcome == Outcome::kSkip ? "SKIP" : "FAIL";
    std::printf("%s %s: %s\n", label, name.c_str(), r.detail.c_str());
    failures += r.outcome == Outcome::kFail;
  }
  std::fflush(stdout);
  return failures == 0 ? 0 : 1;
}
