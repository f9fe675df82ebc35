#include <array>
#include <cstdio>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>
#include <json.hpp>

namespace {

struct CliRun {
  int status;
  std::string out;
};

// Runs the CLI through the shell; stderr is discarded unless redirected in
// `args`. `input`, when given, is fed on stdin.
CliRun cli(const std::string& args, const std::string& input = {}) {
  std::string cmd = std::string(RACEPAIR_CLI) + " " + args;
  std::string tmp;
  if (!input.empty()) {
    char name[] = "/tmp/racepair_cli_XXXXXX";
    int fd = mkstemp(name);
    if (fd < 0 || write(fd, input.data(), input.size()) != static_cast<ssize_t>(input.size())) return {-1, ""};
    close(fd);
    tmp = name;
    cmd += " < " + tmp;
  }
  if (args.find("2>") == std::string::npos) cmd += " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  int raw = pclose(pipe);
  if (!tmp.empty()) std::remove(tmp.c_str());
  return {WEXITSTATUS(raw), out};
}

std::string sample(const std::string& name) { return std::string(RACEPAIR_SAMPLES_DIR) + "/" + name + ".csv"; }

}  // namespace

TEST(Cli, AnalyzeIntro) {
  CliRun r = cli("analyze --algo shbee --post --trace " + sample("intro"));
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "x E1@1 <-> E4@4 [WW/-/2]\nx E2@2 <-> E4@4 [WW/-/1]\n");
}

TEST(Cli, StatsGoToStderr) {
  CliRun r = cli("analyze --trace " + sample("intro") + " 2>&1 >/dev/null");
  EXPECT_NE(r.out.find("races: 1+1"), std::string::npos);
}

TEST(Cli, AnalyzeShbFlagsThreeLocations) {
  CliRun r = cli("analyze --algo shb --trace " + sample("recall"));
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "x 3@3 [rw]\nx 4@4 [w]\nx 5@5 [w]\n");
}

TEST(Cli, AnalyzeJson) {
  CliRun r = cli("analyze --format json --lockset --trace " + sample("intro"));
  ASSERT_EQ(r.status, 0);
  auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["locksetClass"], "C1");
}

TEST(Cli, LocksetSummary) {
  CliRun r = cli("analyze --lockset-summary --trace " + sample("intro"));
  EXPECT_NE(r.out.find("2\t0\t0\t0\t2"), std::string::npos);
}

TEST(Cli, EmptyTraceFromStdin) {
  CliRun r = cli("analyze < /dev/null");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "");
}

TEST(Cli, ParseErrorExitsTwoWithLine) {
  CliRun r = cli("analyze 2>&1", "1,wr,x\n1,bogus,x\n");
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.out.find("line 2"), std::string::npos);
}

TEST(Cli, ValidationErrorExitsTwoWithPosition) {
  CliRun r = cli("analyze 2>&1", "1,acq,m\n1,wr,x\n");
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.out.find("position 1"), std::string::npos);
  EXPECT_EQ(cli("analyze --repair", "1,acq,m\n1,wr,x\n").status, 0);
}

TEST(Cli, MissingFileExitsTwo) { EXPECT_EQ(cli("analyze --trace /nonexistent.csv").status, 2); }

TEST(Cli, BadOptionExitsThree) {
  EXPECT_EQ(cli("analyze --algo nope").status, 3);
  EXPECT_EQ(cli("gen --threads 1 --fork-join").status, 3);
}

TEST(Cli, Oracle) {
  CliRun r = cli("oracle --trace " + sample("dependency"));
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("x 2@2 <-> 4@4 [WRD]"), std::string::npos);
  EXPECT_EQ(r.out.find("2@2 <-> 3@3"), std::string::npos);
  CliRun intro = cli("oracle --format json --trace " + sample("intro"));
  auto j = nlohmann::json::parse(intro.out);
  EXPECT_EQ(j["races"].size(), 2u);
  EXPECT_EQ(cli("oracle < /dev/null").out, "");
}

TEST(Cli, CheckPassesAndDetectsCorruption) {
  CliRun ok = cli("check --seeds 300 --max-events 12");
  EXPECT_EQ(ok.status, 0);
  EXPECT_EQ(cli("check --seeds 0").status, 0);
  CliRun bad = cli("check --seeds 50 --corrupt");
  EXPECT_EQ(bad.status, 1);
  EXPECT_NE(bad.out.find("mismatch at seed"), std::string::npos);
  EXPECT_NE(bad.out.find("minimal failing trace"), std::string::npos);
}

TEST(Cli, GenIsDeterministicAndAnalyzable) {
  CliRun a = cli("gen --seed 5 --threads 3 --events 30 --fork-join");
  CliRun b = cli("gen --seed 5 --threads 3 --events 30 --fork-join");
  EXPECT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(cli("gen --seed 5 --threads 3 --events 30 --fork-join | " + std::string(RACEPAIR_CLI) + " analyze").status,
            0);
}

TEST(Cli, Filter) {
  CliRun r = cli("filter " + sample("intro_repaired"));
  EXPECT_EQ(r.status, 0);
  // E2b replaced E1 in the buffer before thread 2 touched x.
  EXPECT_EQ(r.out.find("E1"), std::string::npos);
  EXPECT_NE(r.out.find("E2b"), std::string::npos);
  EXPECT_NE(r.out.find("E4"), std::string::npos);
}
