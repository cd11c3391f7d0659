#include <filesystem>
#include <regex>

#include <gtest/gtest.h>

#include "fwdlearn/config.h"
#include "fwdlearn/metrics.h"
#include "fwdlearn/report.h"
#include "fwdlearn/status.h"
#include "test_util.h"

namespace fwdlearn {
namespace {

namespace fs = std::filesystem;

TEST(Config, ParsesKeysAndComments) {
  const RunConfig c = ParseRunConfig(
      "# pendulum comparison\n"
      "system = msd\n"
      "seed = 7   # trailing comment\n"
      "hidden = 32,32,16\n"
      "env.window_w = 10\n"
      "env.reward_mode = fully_sparse\n"
      "env.similarity = simplified\n"
      "sac.target_entropy = -0.5\n"
      "eval.lengths = 50,100\n");
  EXPECT_EQ(c.system, "msd");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.sac.hidden, (std::vector<int>{32, 32, 16}));
  EXPECT_EQ(c.sl.window_w, 10);
  EXPECT_EQ(c.env.reward_mode, RewardMode::kFullySparse);
  EXPECT_EQ(c.env.similarity, SimilarityKind::kSimplified);
  EXPECT_EQ(c.sac.target_entropy, -0.5);
  EXPECT_EQ(c.eval_lengths, (std::vector<int>{50, 100}));
}

TEST(Config, UnknownKeyIsError) {
  try {
    ParseRunConfig("seed = 1\nsac.batchsize = 12\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("sac.batchsize"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    EXPECT_EQ(e.exit_code(), kExitConfigError);
  }
  EXPECT_THROW(ParseRunConfig("seed\n"), ConfigError);
  EXPECT_THROW(ParseRunConfig("episodes = ten\n"), ConfigError);
  EXPECT_THROW(ParseRunConfig("episodes = 0\n"), ConfigError);
  EXPECT_THROW(ParseRunConfig("env.reward_mode = dense\n"), ConfigError);
}

TEST(Config, EveryKeyRoundTrips) {
  RunConfig c;
  c.seed = 42;
  c.sac.target_entropy = -2.0;
  c.eval_lengths = {10, 20};
  c.Finalize();
  const std::string echo = EchoConfig(c);
  for (const auto& key : ConfigKeys()) {
    EXPECT_NE(echo.find(key + " = "), std::string::npos) << key;
  }
  EXPECT_EQ(EchoConfig(ParseRunConfig(echo)), echo);
  EXPECT_EQ(EchoConfig(c, {"out"}).find("out = "), std::string::npos);
}

TEST(Config, FileNotFound) {
  EXPECT_THROW(LoadRunConfig("/nonexistent/fwdlearn.cfg"), ConfigError);
}

TEST(Metrics, RowRoundTrip) {
  MetricsRecord r;
  r.round = 12;
  r.critic_loss = 0.1;
  r.alpha = 1.0 / 3.0;
  r.rmse_rollout = 2.5e-7;
  const std::string row = FormatMetricsRow(r);
  EXPECT_EQ(row.substr(0, 4), "12,0");
  EXPECT_EQ(ParseMetricsRow(row, 2), r);
  EXPECT_EQ(FormatMetricsRow(MetricsRecord{}), "0,,,,,,,,");
}

TEST(Metrics, MalformedRowNamesLine) {
  try {
    ParseMetricsRow("3,0.5,abc,,,,,,", 17);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("17"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ParseMetricsRow("3,0.5", 4), DataError);
  const auto dir = testing::TempDir();
  std::ofstream(dir / "m.csv") << kMetricsHeader << "\n1,,,,,,,,\n2,x,,,,,,,\n";
  try {
    ReadMetricsCsv((dir / "m.csv").string());
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos) << e.what();
  }
  std::ofstream(dir / "h.csv") << "round,loss\n1,2\n";
  EXPECT_THROW(ReadMetricsCsv((dir / "h.csv").string()), DataError);
}

TEST(Metrics, WriterFlushesEveryRow) {
  const auto path = (testing::TempDir() / "m.csv").string();
  MetricsWriter w(path);
  MetricsRecord r;
  r.round = 1;
  r.actor_loss = 0.5;
  w.Append(r);
  // readable before the writer is closed
  EXPECT_EQ(ReadMetricsCsv(path), std::vector<MetricsRecord>{r});
}

std::vector<std::string> SeriesPoints(const std::string& svg) {
  static const std::regex re("class=\"series\"[^>]*points=\"([^\"]*)\"");
  std::vector<std::string> out;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator();
       ++it) {
    out.push_back((*it)[1]);
  }
  return out;
}

TEST(Report, EmptyMetricsDrawsLabelledAxes) {
  const auto dir = testing::TempDir();
  const auto files = RenderReport({}, {}, dir.string());
  ASSERT_FALSE(files.empty());
  const std::string svg = testing::ReadFile(dir / "critic_loss.svg");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find(">round<"), std::string::npos);
  EXPECT_NE(svg.find(">critic_loss<"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "summary.txt"));
}

TEST(Report, TwoRunComparisonHasBands) {
  auto run = [](double scale) {
    std::vector<MetricsRecord> rows;
    for (int i = 1; i <= 5; ++i) {
      MetricsRecord r;
      r.round = i;
      r.supervised_mse = scale / i;
      rows.push_back(r);
    }
    return rows;
  };
  const std::vector<LabeledMetrics> metrics = {
      {"rl", run(1.0)}, {"rl", run(1.5)}, {"sl", run(0.5)}, {"sl", run(0.7)}};
  const auto dir = testing::TempDir();
  RenderReport(metrics, {}, dir.string());
  const std::string svg = testing::ReadFile(dir / "supervised_mse.svg");
  EXPECT_EQ(SeriesPoints(svg).size(), 2u);
  std::size_t bands = 0;
  for (auto pos = svg.find("class=\"band\""); pos != std::string::npos;
       pos = svg.find("class=\"band\"", pos + 1)) {
    ++bands;
  }
  EXPECT_EQ(bands, 2u);
  EXPECT_NE(svg.find(">rl (n=2)<"), std::string::npos);
  EXPECT_NE(svg.find(">sl (n=2)<"), std::string::npos);

  const std::vector<const std::vector<MetricsRecord>*> pair = {&metrics[0].records,
                                                               &metrics[1].records};
  const BandCurve c = AggregateRuns(pair, &MetricsRecord::supervised_mse);
  ASSERT_EQ(c.round.size(), 5u);
  EXPECT_DOUBLE_EQ(c.mean[0], 1.25);
  EXPECT_DOUBLE_EQ(c.std_dev[0], 0.25);
}

TEST(Report, OracleOverlayTracesCoincide) {
  RolloutRun run;
  run.truth = Trajectory::Random(30, 2);
  run.predicted = run.truth;
  run.rollout_ends = {9, 19, 29};
  const std::string svg = RenderOverlay(run, {"qpos[0]", "qvel[0]"}, "oracle");
  const auto points = SeriesPoints(svg);
  ASSERT_EQ(points.size(), 4u);
  EXPECT_EQ(points[0], points[1]);
  EXPECT_EQ(points[2], points[3]);
  std::size_t marks = 0;
  for (auto pos = svg.find("class=\"mark\""); pos != std::string::npos;
       pos = svg.find("class=\"mark\"", pos + 1)) {
    ++marks;
  }
  EXPECT_EQ(marks, 6u);
}

}  // namespace
}  // namespace fwdlearn
