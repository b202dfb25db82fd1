#include <gtest/gtest.h>

#include <cstdlib>
#include <sys/wait.h>

#include "fixtures.hpp"
#include "hivead/events.hpp"

namespace fs = std::filesystem;
using namespace hivead;

namespace {

/// Runs the CLI with `args`; returns its exit status, stderr goes to `err`.
int run(const std::string& args, const fs::path& err = "/dev/null") {
  const std::string cmd = std::string(HIVEAD_BIN) + " " + args + " >/dev/null 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

/// synth -> train -> calibrate -> detect -> rba -> report in `dir`.
void pipeline(const fs::path& dir) {
  ASSERT_EQ(run("synth --days 5 --layout single --seed 3 --schedule 3:swarm:600,4:opening:300 --out-dir " + q(dir)), 0);
  std::ofstream(dir / "manual.csv") << "date,label\n2019-05-04,anomalous\n2019-05-05,anomalous\n";
  const std::string in = " --input " + q(dir / "trace.csv") + " --sensor T --out-dir " + q(dir);
  ASSERT_EQ(run("train" + in + " --labels " + q(dir / "manual.csv") +
                " --hs 3 --layers 1 --window-size 16 --stride 8 --epochs 2 --seed 5"),
            0);
  ASSERT_EQ(run("calibrate" + in + " --model " + q(dir / "model.json") + " --splits " + q(dir / "splits.txt") +
                " --stride 4"),
            0);
  ASSERT_EQ(run("detect" + in + " --model " + q(dir / "model.json") + " --threshold " + q(dir / "threshold.json") +
                " --window-size 16 --stride 4"),
            0);
  ASSERT_EQ(run("rba" + in), 0);
  ASSERT_EQ(run("report --ae " + q(dir / "events.csv") + " --rba " + q(dir / "rba_events.csv") + " --truth " +
                q(dir / "truth.csv") + " --window-size 16 --out-dir " + q(dir)),
            0);
}

}  // namespace

TEST(Cli, SynthThenRbaMatchesTruthSwarms) {
  const auto dir = fixture::scratch("cli_rba");
  ASSERT_EQ(run("synth --days 3 --seed 1 --schedule 0:swarm:300,1:opening:600,2:swarm:900 --out-dir " + q(dir)), 0);
  ASSERT_EQ(run("rba --input " + q(dir / "trace.csv") + " --sensor T6 --out-dir " + q(dir)), 0);
  const auto rba = read_events(dir / "rba_events.csv");
  const auto truth = read_truth(dir / "truth.csv");
  std::vector<DetectionEvent> swarms;
  for (const auto& t : truth)
    if (t.kind == AnomalyClass::Swarm) swarms.push_back(t.event);
  ASSERT_EQ(swarms.size(), 2u);
  ASSERT_EQ(rba.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_TRUE(rba[i].start <= swarms[i].end && swarms[i].start <= rba[i].end);
  EXPECT_TRUE(fs::exists(dir / "synth.manifest.json"));
  EXPECT_TRUE(fs::exists(dir / "rba.manifest.json"));
}

TEST(Cli, DetectWindowMismatchIsUsageErrorWithoutOutputs) {
  const auto dir = fixture::scratch("cli_mismatch");
  ASSERT_EQ(run("synth --days 2 --layout single --out-dir " + q(dir)), 0);
  const std::string in = " --input " + q(dir / "trace.csv") + " --sensor T --out-dir " + q(dir);
  ASSERT_EQ(run("train" + in + " --hs 2 --layers 1 --window-size 8 --stride 16 --epochs 1"), 0);
  const auto out = fixture::scratch("cli_mismatch_out");
  const auto err = out / "stderr.txt";
  EXPECT_EQ(run("detect --input " + q(dir / "trace.csv") + " --sensor T --model " + q(dir / "model.json") +
                    " --alpha 1 --window-size 60 --out-dir " + q(out),
                err),
            2);
  std::vector<fs::path> produced;
  for (const auto& e : fs::directory_iterator(out))
    if (e.path() != err) produced.push_back(e.path());
  EXPECT_TRUE(produced.empty());
  EXPECT_EQ(fixture::slurp(err).rfind("error: code=", 0), 0u);
}

TEST(Cli, ErrorLinesAndExitCodes) {
  const auto dir = fixture::scratch("cli_errors");
  const auto err = dir / "stderr.txt";
  ASSERT_EQ(run("synth --days 1 --layout single --out-dir " + q(dir)), 0);
  EXPECT_EQ(run("rba --input " + q(dir / "trace.csv") + " --sensor nope --out-dir " + q(dir), err), 3);
  const auto line = fixture::slurp(err);
  EXPECT_EQ(line.rfind("error: code=UnknownSensor message=\"", 0), 0u) << line;
  EXPECT_EQ(std::count(line.begin(), line.end(), '\n'), 1);
  EXPECT_EQ(run("rba --sensor T", err), 2);
  EXPECT_EQ(run("no-such-command", err), 2);
  EXPECT_EQ(run("synth --days 1 --schedule 3:swarm:10 --out-dir " + q(dir), err), 2);
  EXPECT_EQ(fixture::slurp(err).rfind("error: code=InvalidSchedule", 0), 0u);
  EXPECT_EQ(run("rba --input " + q(dir / "absent.csv") + " --sensor T --out-dir " + q(dir), err), 2);
  std::ofstream(dir / "bad.csv") << "when,T\n1,2\n";
  EXPECT_EQ(run("rba --input " + q(dir / "bad.csv") + " --sensor T --out-dir " + q(dir), err), 3);
  EXPECT_EQ(fixture::slurp(err).rfind("error: code=MalformedHeader", 0), 0u);
}

TEST(Cli, PipelineTwiceIsByteIdenticalAndRerunReproduces) {
  const auto a = fixture::scratch("cli_pipe_a");
  const auto b = fixture::scratch("cli_pipe_b");
  pipeline(a);
  pipeline(b);
  for (const char* f : {"trace.csv", "truth.csv", "model.json", "history.csv", "threshold.json", "events.csv",
                        "rba_events.csv", "report.csv"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(fixture::slurp(a / f), fixture::slurp(b / f)) << f;
  }

  const auto c = fixture::scratch("cli_pipe_c");
  fs::copy_file(a / "manual.csv", c / "manual.csv");
  ASSERT_EQ(run("rerun --manifest " + q(a / "train.manifest.json") + " --out-dir " + q(c)), 0);
  EXPECT_EQ(fixture::slurp(a / "model.json"), fixture::slurp(c / "model.json"));
  ASSERT_EQ(run("rerun --manifest " + q(a / "detect.manifest.json") + " --out-dir " + q(c)), 0);
  EXPECT_EQ(fixture::slurp(a / "events.csv"), fixture::slurp(c / "events.csv"));
  ASSERT_EQ(run("rerun --manifest " + q(a / "report.manifest.json") + " --out-dir " + q(c)), 0);
  EXPECT_EQ(fixture::slurp(a / "report.csv"), fixture::slurp(c / "report.csv"));
}
