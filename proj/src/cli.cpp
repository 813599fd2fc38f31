#include "cntrl/cli.hpp"

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "httplib.h"

#include "cntrl/control.hpp"
#include "cntrl/corpus.hpp"
#include "cntrl/error.hpp"
#include "cntrl/http_backends.hpp"
#include "cntrl/kb.hpp"
#include "cntrl/metrics.hpp"
#include "cntrl/mock_backends.hpp"
#include "cntrl/planner.hpp"
#include "cntrl/ranker.hpp"
#include "cntrl/server.hpp"
#include "cntrl/text.hpp"
#include "cntrl/weaklabel.hpp"

#ifndef CNTRL_DATA_DIR
#define CNTRL_DATA_DIR "data"
#endif

namespace cntrl {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBackend = 3;

std::string data_path(const char* name) { return std::string(CNTRL_DATA_DIR) + "/" + name; }

struct Options {
  std::string kb = data_path("kb_sample.tsv");
  std::string templates = data_path("templates.tsv");
  std::string stopwords = data_path("stopwords.txt");
  std::string antonyms = data_path("antonyms.tsv");
  std::string heads;
  std::size_t n = 10;
  int top_k = 40;
  double temperature = 0.7;
  std::string mode = "dynamic";
  std::uint64_t seed = 0;
  std::size_t length = 5;
  std::string embed_url;
  std::string kw_url;
  std::string gen_url;
  bool mock = false;
  std::string mock_gen = "sample";
  int timeout_ms = 10000;
  int retries = 2;

  std::string input;
  std::string out;
  std::string plan_log;
  std::string logprobs_out;
  std::string logprobs;
  std::string report;

  std::size_t epochs = 10;
  double learning_rate = 0.01;
  std::size_t batch_size = 32;
  std::size_t d_out = 128;
  double margin = kDefaultMargin;

  std::string host = "127.0.0.1";
  int port = 8080;
  std::string ui_dir;
  std::string snapshot;
};

void add_kb_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--kb", o.kb, "knowledge triples (subject<TAB>relation<TAB>object)");
  cmd->add_option("--templates", o.templates, "relation templates");
}

void add_backend_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--embed-url", o.embed_url, "embedding backend (env CNTRL_EMBED_URL)");
  cmd->add_option("--kw-url", o.kw_url, "keyword backend (env CNTRL_KW_URL)");
  cmd->add_option("--gen-url", o.gen_url, "generator backend (env CNTRL_GEN_URL)");
  cmd->add_flag("--mock", o.mock, "use the built-in mock backends");
  cmd->add_option("--mock-gen", o.mock_gen, "mock generator mode")->check(CLI::IsMember({"echo", "sample"}));
  cmd->add_option("--timeout-ms", o.timeout_ms, "backend timeout")->check(CLI::PositiveNumber);
  cmd->add_option("--retries", o.retries, "extra attempts per backend call")->check(CLI::NonNegativeNumber);
}

void add_generation_flags(CLI::App* cmd, Options& o) {
  add_kb_flags(cmd, o);
  add_backend_flags(cmd, o);
  cmd->add_option("--stopwords", o.stopwords, "stopword list for the mock keyword backend");
  cmd->add_option("--heads", o.heads, "trained ranker heads; plain inner product when absent");
  cmd->add_option("--n", o.n, "knowledge sentences per step");
  cmd->add_option("--top-k", o.top_k, "generator top-k");
  cmd->add_option("--temperature", o.temperature, "generator temperature");
  cmd->add_option("--mode", o.mode, "planning mode")->check(CLI::IsMember({"dynamic", "static"}));
  cmd->add_option("--seed", o.seed, "generation seed");
  cmd->add_option("--length", o.length, "sentences per story");
}

std::string env_or(const std::string& value, const char* name) {
  if (!value.empty()) return value;
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

// Owns whichever backends the flags select.
struct BackendSet {
  std::unique_ptr<EmbeddingBackend> embed;
  std::unique_ptr<KeywordBackend> keywords;
  std::unique_ptr<GeneratorBackend> generator;

  Backends view() const { return Backends{embed.get(), keywords.get(), generator.get()}; }
};

BackendEndpoint endpoint(BackendKind kind, const std::string& url, const Options& o) {
  return BackendEndpoint{kind, url, std::chrono::milliseconds(o.timeout_ms), o.retries};
}

BackendSet make_backends(const Options& o, bool need_keywords, bool need_generator) {
  BackendSet b;
  const std::string embed_url = env_or(o.embed_url, "CNTRL_EMBED_URL");
  const std::string kw_url = env_or(o.kw_url, "CNTRL_KW_URL");
  const std::string gen_url = env_or(o.gen_url, "CNTRL_GEN_URL");

  if (!embed_url.empty()) {
    b.embed = std::make_unique<HttpEmbeddingBackend>(endpoint(BackendKind::kEmbed, embed_url, o));
  } else if (o.mock) {
    b.embed = std::make_unique<HashEmbeddingBackend>();
  } else {
    throw ConfigError("no embedding backend: pass --embed-url or --mock");
  }
  if (need_keywords) {
    if (!kw_url.empty()) {
      b.keywords = std::make_unique<HttpKeywordBackend>(endpoint(BackendKind::kKeywords, kw_url, o));
    } else if (o.mock) {
      b.keywords = std::make_unique<MockKeywordBackend>(MockKeywordBackend::rake(StopwordList::load(o.stopwords)));
    } else {
      throw ConfigError("no keyword backend: pass --kw-url or --mock");
    }
  }
  if (need_generator) {
    if (!gen_url.empty()) {
      b.generator = std::make_unique<HttpGeneratorBackend>(endpoint(BackendKind::kGenerate, gen_url, o));
    } else if (o.mock) {
      MockGeneratorOptions g;
      g.mode = o.mock_gen == "echo" ? MockGeneratorMode::kEcho : MockGeneratorMode::kSample;
      b.generator = std::make_unique<MockGeneratorBackend>(g);
    } else {
      throw ConfigError("no generator backend: pass --gen-url or --mock");
    }
  }
  return b;
}

KnowledgeIndex load_index(const Options& o) {
  const TemplateTable table = TemplateTable::load(o.templates);
  return KnowledgeIndex::build(load_triples(o.kb, table), table);
}

GenerationConfig generation_config(const Options& o) {
  GenerationConfig c;
  c.n = o.n;
  c.top_k = o.top_k;
  c.temperature = o.temperature;
  c.mode = planning_mode_from_string(o.mode);
  c.seed = o.seed;
  c.length = o.length;
  c.validate();
  return c;
}

std::optional<RankerHeads> load_optional_heads(const Options& o) {
  if (o.heads.empty()) return std::nullopt;
  return load_heads(o.heads);
}

// Output sink: a file when a path is given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw ConfigError("cannot write " + path);
    }
  }
  std::ostream& out() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return in;
}

// First sentences, one per line; a TAB-joined story line contributes its
// first field.
std::vector<std::string> read_first_sentences(const std::string& path) {
  auto in = open_input(path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    out.push_back(normalize(text::split(line, '\t').front()));
  }
  return out;
}

std::vector<Story> read_corpus(const std::string& path) {
  auto in = open_input(path);
  LoadResult r = load_stories(in, Split::kTrain);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  return std::move(r.stories);
}

std::string format_logprobs(const StoryState& state) {
  std::ostringstream os;
  os << std::setprecision(17);
  bool first = true;
  for (const auto& step : state.steps()) {
    for (double lp : step.token_logprobs) {
      os << (first ? "" : " ") << lp;
      first = false;
    }
  }
  return os.str();
}

int cmd_index_build(const Options& o) {
  const KnowledgeIndex index = load_index(o);
  Sink sink(o.out);
  for (const auto& s : index.sentences()) sink.out() << s.triple_id << '\t' << s.text << '\n';
  std::cerr << "triples " << index.size() << " vocabulary " << index.vocabulary_size() << '\n';
  return kExitOk;
}

int cmd_label_build(const Options& o) {
  const KnowledgeIndex index = load_index(o);
  const StopwordList stopwords = StopwordList::load(o.stopwords);
  BackendSet backends = make_backends(o, false, false);
  PseudoLabelOptions lo;
  lo.n = o.n;
  Sink sink(o.out);
  for (const Story& story : read_corpus(o.input)) {
    for (std::size_t i = 0; i < story.sentences.size(); ++i) {
      const std::string prev = i == 0 ? std::string() : story.sentences[i - 1];
      PseudoLabel label = build_pseudo_label(prev, story.sentences[i], index, *backends.embed, stopwords, lo);
      label.story_id = story.story_id;
      label.step_index = i + 1;
      sink.out() << format_pseudo_label(label) << '\n';
    }
  }
  return kExitOk;
}

int cmd_ranker_train(const Options& o) {
  if (o.out.empty()) throw ConfigError("--out is required for the heads checkpoint");
  const KnowledgeIndex index = load_index(o);
  const StopwordList stopwords = StopwordList::load(o.stopwords);
  BackendSet backends = make_backends(o, false, false);
  const std::vector<Story> stories = read_corpus(o.input);

  TrainingSetOptions so;
  so.n = o.n;
  so.seed = o.seed;
  const TrainingSet set = build_training_set(stories, index, *backends.embed, stopwords, so);
  std::cerr << "pairs " << set.examples.size() << " contexts " << set.contexts << " skipped_steps "
            << set.skipped_steps << '\n';
  if (set.examples.empty()) throw ContractError("no training pairs could be built from the corpus");

  const std::size_t d_in = set.examples.front().context.size();
  TrainOptions to;
  to.epochs = o.epochs;
  to.learning_rate = o.learning_rate;
  to.batch_size = o.batch_size;
  to.seed = o.seed;
  const TrainResult result = train(RankerHeads::random(d_in, o.d_out, o.seed, o.margin), set.examples, to);
  save_heads(result.heads, o.out);
  if (!o.report.empty()) {
    Sink report(o.report);
    report.out() << format_training_report(result.epoch_loss);
  }
  std::cerr << "pairwise_accuracy " << pairwise_accuracy(result.heads, set.examples) << '\n';
  return kExitOk;
}

int cmd_generate(const Options& o) {
  const GenerationConfig config = generation_config(o);
  const KnowledgeIndex index = load_index(o);
  const std::optional<RankerHeads> heads = load_optional_heads(o);
  BackendSet backends = make_backends(o, true, true);
  const Planner planner(index, heads ? &*heads : nullptr, backends.view());

  Sink out(o.out);
  std::optional<Sink> plan;
  std::optional<Sink> logprobs;
  if (!o.plan_log.empty()) plan.emplace(o.plan_log);
  if (!o.logprobs_out.empty()) logprobs.emplace(o.logprobs_out);

  const std::vector<std::string> firsts = read_first_sentences(o.input);
  for (std::size_t k = 0; k < firsts.size(); ++k) {
    GenerationConfig c = config;
    c.seed = step_seed(config.seed, k + 1);
    const StoryState story = planner.generate_story(firsts[k], c);
    out.out() << format_story_line(story) << '\n';
    if (plan) plan->out() << (k ? "\n" : "") << format_plan_log(story);
    if (logprobs) logprobs->out() << format_logprobs(story) << '\n';
  }
  return kExitOk;
}

int cmd_control_antonym(const Options& o) {
  const GenerationConfig config = generation_config(o);
  const KnowledgeIndex index = load_index(o);
  const std::optional<RankerHeads> heads = load_optional_heads(o);
  const AntonymLexicon lexicon = AntonymLexicon::load(o.antonyms);
  BackendSet backends = make_backends(o, true, true);
  const Planner planner(index, heads ? &*heads : nullptr, backends.view());

  Sink out(o.out);
  std::size_t controllable = 0;
  std::size_t realized = 0;
  const std::vector<std::string> firsts = read_first_sentences(o.input);
  for (std::size_t k = 0; k < firsts.size(); ++k) {
    GenerationConfig c = config;
    c.seed = step_seed(config.seed, k + 1);
    const StoryState story = planner.generate_story(firsts[k], c);
    ControlRun run = antonym_rerun(story, lexicon, planner, c.seed);
    run.story_id = std::to_string(k + 1);
    if (run.controllable()) {
      ++controllable;
      if (antonym_realized(run)) ++realized;
    }
    out.out() << format_control_report_line(run) << '\n';
  }
  std::cerr << "stories " << firsts.size() << " controllable " << controllable << " antonym_realized " << realized
            << '\n';
  return kExitOk;
}

std::vector<std::vector<double>> read_logprobs(const std::string& path) {
  auto in = open_input(path);
  std::vector<std::vector<double>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::vector<double> row;
    for (const auto& tok : text::split_whitespace(line)) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end != tok.c_str() + tok.size()) throw ParseError("bad log-probability '" + tok + "'", lineno);
      row.push_back(v);
    }
    out.push_back(std::move(row));
  }
  return out;
}

int cmd_eval_metrics(const Options& o) {
  auto in = open_input(o.input);
  std::vector<TokenSequence> stories;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    const std::vector<std::string> sentences = text::split(line, '\t');
    stories.push_back(story_tokens(sentences));
  }
  std::vector<std::vector<double>> logprobs;
  if (!o.logprobs.empty()) logprobs = read_logprobs(o.logprobs);
  Sink out(o.out);
  out.out() << format_report(evaluate(stories, logprobs)) << '\n';
  return kExitOk;
}

std::atomic<httplib::Server*> g_server{nullptr};

void stop_server(int) {
  if (auto* s = g_server.load()) s->stop();
}

int listen(httplib::Server& server, const Options& o) {
  g_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  std::cerr << "listening on " << o.host << ':' << o.port << '\n';
  const bool ok = server.listen(o.host, o.port);
  g_server = nullptr;
  if (!ok && !server.is_running()) {
    std::cerr << "error: cannot bind " << o.host << ':' << o.port << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

int cmd_serve(const Options& o) {
  const KnowledgeIndex index = load_index(o);
  const std::optional<RankerHeads> heads = load_optional_heads(o);
  BackendSet backends = make_backends(o, true, true);
  const Planner planner(index, heads ? &*heads : nullptr, backends.view());

  ServerOptions so;
  so.defaults = generation_config(o);
  if (!o.ui_dir.empty()) so.ui_dir = o.ui_dir;
  ApiServer api(planner, so);
  httplib::Server server;
  api.mount(server);
  const int code = listen(server, o);
  if (!o.snapshot.empty()) {
    Sink snap(o.snapshot);
    snap.out() << api.snapshot();
  }
  return code;
}

int cmd_mock_serve(const Options& o) {
  Options m = o;
  m.mock = true;
  m.embed_url.clear();
  m.kw_url.clear();
  m.gen_url.clear();
  BackendSet backends = make_backends(m, true, true);
  httplib::Server server;
  mount_backend_routes(server, backends.view());
  return listen(server, o);
}

}  // namespace

int run_cli(int argc, char** argv) {
  Options o;
  CLI::App app{"Knowledge-guided controllable story generation"};
  app.require_subcommand(1);

  auto* index = app.add_subcommand("index", "knowledge index tools")->require_subcommand(1);
  auto* index_build = index->add_subcommand("build", "render and index a triple file");
  add_kb_flags(index_build, o);
  index_build->add_option("--out", o.out, "rendered sentences (id<TAB>text)");

  auto* label = app.add_subcommand("label", "pseudo labels")->require_subcommand(1);
  auto* label_build = label->add_subcommand("build", "weakly label every sentence of a corpus");
  add_kb_flags(label_build, o);
  add_backend_flags(label_build, o);
  label_build->add_option("--stopwords", o.stopwords, "stopword list");
  label_build->add_option("--n", o.n, "positives per sentence");
  label_build->add_option("--corpus,--input", o.input, "stories, one per line")->required();
  label_build->add_option("--out", o.out, "label dump");

  auto* ranker = app.add_subcommand("ranker", "knowledge ranker")->require_subcommand(1);
  auto* ranker_train = ranker->add_subcommand("train", "train the ranker heads on pseudo labels");
  add_kb_flags(ranker_train, o);
  add_backend_flags(ranker_train, o);
  ranker_train->add_option("--stopwords", o.stopwords, "stopword list");
  ranker_train->add_option("--n", o.n, "positives per sentence");
  ranker_train->add_option("--corpus,--input", o.input, "training stories")->required();
  ranker_train->add_option("--out", o.out, "heads checkpoint")->required();
  ranker_train->add_option("--report", o.report, "per-epoch loss report");
  ranker_train->add_option("--epochs", o.epochs, "epochs");
  ranker_train->add_option("--lr", o.learning_rate, "learning rate");
  ranker_train->add_option("--batch", o.batch_size, "batch size");
  ranker_train->add_option("--d-out", o.d_out, "projection size");
  ranker_train->add_option("--margin", o.margin, "hinge margin");
  ranker_train->add_option("--seed", o.seed, "sampling and init seed");

  auto* generate = app.add_subcommand("generate", "generate stories from first sentences");
  add_generation_flags(generate, o);
  generate->add_option("--input", o.input, "first sentences")->required();
  generate->add_option("--out", o.out, "stories, one per line");
  generate->add_option("--plan-log", o.plan_log, "per-step keywords and knowledge");
  generate->add_option("--logprobs-out", o.logprobs_out, "generator log-probabilities per story");

  auto* control = app.add_subcommand("control", "controllability runs")->require_subcommand(1);
  auto* control_antonym = control->add_subcommand("antonym", "antonym keyword reruns");
  add_generation_flags(control_antonym, o);
  control_antonym->add_option("--antonyms", o.antonyms, "antonym lexicon");
  control_antonym->add_option("--input", o.input, "first sentences")->required();
  control_antonym->add_option("--out", o.out, "control report");

  auto* eval = app.add_subcommand("eval", "evaluation")->require_subcommand(1);
  auto* eval_metrics = eval->add_subcommand("metrics", "repeat-4, distinct-4 and perplexity");
  eval_metrics->add_option("--input,--stories", o.input, "stories, one per line")->required();
  eval_metrics->add_option("--logprobs", o.logprobs, "log-probabilities, one line per story");
  eval_metrics->add_option("--out", o.out, "report");

  auto* serve = app.add_subcommand("serve", "interactive session API");
  add_generation_flags(serve, o);
  serve->add_option("--host", o.host, "bind address");
  serve->add_option("--port", o.port, "port");
  serve->add_option("--ui-dir", o.ui_dir, "static UI bundle served under /ui");
  serve->add_option("--snapshot", o.snapshot, "session log written on shutdown");

  auto* mock_serve = app.add_subcommand("mock-serve", "serve the mock backends over HTTP");
  mock_serve->add_option("--stopwords", o.stopwords, "stopword list");
  mock_serve->add_option("--mock-gen", o.mock_gen, "mock generator mode")->check(CLI::IsMember({"echo", "sample"}));
  mock_serve->add_option("--host", o.host, "bind address");
  mock_serve->add_option("--port", o.port, "port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*index_build) return cmd_index_build(o);
    if (*label_build) return cmd_label_build(o);
    if (*ranker_train) return cmd_ranker_train(o);
    if (*generate) return cmd_generate(o);
    if (*control_antonym) return cmd_control_antonym(o);
    if (*eval_metrics) return cmd_eval_metrics(o);
    if (*serve) return cmd_serve(o);
    if (*mock_serve) return cmd_mock_serve(o);
  } catch (const TransportError& e) {
    std::cerr << "backend error: " << e.what() << '\n';
    return kExitBackend;
  } catch (const ProtocolError& e) {
    std::cerr << "backend error: " << e.what() << '\n';
    return kExitBackend;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace cntrl
