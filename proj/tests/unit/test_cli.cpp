#include <gtest/gtest.h>

#include <sstream>

#include "cntrl/text.hpp"
#include "test_support.hpp"

namespace cntrl {
namespace {

using testing::cli_path;
using testing::data_file;
using testing::read_file;
using testing::run_command;
using testing::TempDir;
using testing::write_file;

std::string cli() { return "'" + cli_path() + "'"; }

TEST(Cli, GenerateIsDeterministicPerSeed) {
  TempDir dir;
  auto gen = [&](int seed, const std::string& name) {
    const auto r = run_command(cli() + " generate --mock --mock-gen sample --seed " + std::to_string(seed) +
                               " --input " + data_file("first_sentences.txt") + " --out " + dir.file(name) +
                               " --plan-log " + dir.file(name + ".plan"));
    EXPECT_EQ(r.exit_code, 0) << r.output;
    return read_file(dir.file(name)) + read_file(dir.file(name + ".plan"));
  };
  const auto a = gen(7, "a");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, gen(7, "b"));
  EXPECT_NE(a, gen(8, "c"));
}

TEST(Cli, GenerateWritesOneStoryPerFirstSentence) {
  TempDir dir;
  const auto r = run_command(cli() + " generate --mock --seed 1 --length 4 --input " +
                             data_file("first_sentences.txt") + " --out " + dir.file("out"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  std::istringstream lines(read_file(dir.file("out")));
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    ++count;
    EXPECT_EQ(text::split(line, '\t').size(), 4u) << line;
  }
  EXPECT_EQ(count, 10u);
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  EXPECT_EQ(run_command(cli() + " generate --no-such-flag").exit_code, 1);
  EXPECT_EQ(run_command(cli() + " generate --mock").exit_code, 1);
  EXPECT_EQ(run_command(cli() + " generate --mock --input " + dir.file("missing.txt")).exit_code, 2);
  write_file(dir.file("stories.tsv"), "a b c d\n");
  write_file(dir.file("bad.lp"), "-1 x\n");
  EXPECT_EQ(run_command(cli() + " eval metrics --input " + dir.file("stories.tsv") + " --logprobs " +
                        dir.file("bad.lp"))
                .exit_code,
            2);
  const auto unreachable = run_command(cli() + " generate --input " + data_file("first_sentences.txt") +
                                       " --embed-url http://127.0.0.1:9 --kw-url http://127.0.0.1:9" +
                                       " --gen-url http://127.0.0.1:9 --retries 0 --timeout-ms 500");
  EXPECT_EQ(unreachable.exit_code, 3) << unreachable.output;
}

TEST(Cli, EvalMetricsMatchesHandComputedValues) {
  TempDir dir;
  write_file(dir.file("stories.tsv"), "a b c d\ta b c d\ne f g h\n");
  write_file(dir.file("lp.txt"), "-1 -1\n-2\n");
  const auto r = run_command(cli() + " eval metrics --input " + dir.file("stories.tsv") + " --logprobs " +
                             dir.file("lp.txt") + " --out " + dir.file("report"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(read_file(dir.file("report")), "50.0000\t83.3333\t3.7937\t2\n");
  const auto no_lp = run_command(cli() + " eval metrics --input " + dir.file("stories.tsv"));
  EXPECT_NE(no_lp.output.find("50.0000\t83.3333\t-\t2"), std::string::npos) << no_lp.output;
}

TEST(Cli, ControlAntonymReportsEveryStory) {
  TempDir dir;
  const auto r = run_command(cli() + " control antonym --mock --seed 3 --input " +
                             data_file("first_sentences.txt") + " --out " + dir.file("report"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("stories 10"), std::string::npos) << r.output;
  std::istringstream lines(read_file(dir.file("report")));
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    ++count;
    const auto fields = text::split(line, '\t');
    ASSERT_EQ(fields.size(), 5u) << line;
    EXPECT_EQ(fields[0], std::to_string(count));
  }
  EXPECT_EQ(count, 10u);
}

TEST(Cli, IndexBuildRendersSentences) {
  TempDir dir;
  write_file(dir.file("kb.tsv"), "car\tUsedFor\tdriving\nmagnet\tUsedFor\tattract\n");
  const auto r = run_command(cli() + " index build --kb " + dir.file("kb.tsv") + " --out " + dir.file("idx"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("triples 2"), std::string::npos) << r.output;
  const auto idx = read_file(dir.file("idx"));
  EXPECT_NE(idx.find("car is used for driving"), std::string::npos) << idx;
  EXPECT_NE(idx.find("magnet is used for attract"), std::string::npos) << idx;
}

TEST(Cli, LabelAndTrainOnSampleCorpus) {
  TempDir dir;
  const auto r = run_command(cli() + " ranker train --mock --n 2 --epochs 2 --corpus " + data_file("stories_sample.tsv") +
                             " --out " + dir.file("heads") + " --report " + dir.file("report"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_FALSE(read_file(dir.file("heads")).empty());
  std::istringstream lines(read_file(dir.file("report")));
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) ++count;
  EXPECT_EQ(count, 2u);
  const auto g = run_command(cli() + " generate --mock --seed 1 --heads " + dir.file("heads") + " --input " +
                             data_file("first_sentences.txt") + " --out " + dir.file("out"));
  EXPECT_EQ(g.exit_code, 0) << g.output;
}

}  // namespace
}  // namespace cntrl
