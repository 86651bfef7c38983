#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "heavyset/errors.hpp"
#include "heavyset/experiment.hpp"

using namespace heavyset;

namespace {

Experiment make(const std::string& text, std::optional<std::uint64_t> seed = std::nullopt) {
  RunOptions opts;
  opts.seed = seed;
  return Experiment(Config::parse(text), opts);
}

}  // namespace

TEST(Experiment, BoundValues) {
  const Experiment golden = make("set = intervals [[0, \"(sqrt5-1)/2\"]]\nalpha = \"sqrt2-1\"\n");
  EXPECT_FALSE(golden.rational_branch());
  EXPECT_EQ(golden.bound(), Rational(1, 2));

  const Experiment half = make("set = intervals [[0, \"1/2\"]]\nalpha = \"sqrt2-1\"\n");
  EXPECT_TRUE(half.rational_branch());
  EXPECT_EQ(half.bound(), 0);

  const Experiment box =
      make("dim = 2\nset = boxes [[[0, \"(sqrt5-1)/2\"], [0, \"1/2\"]]]\nalpha = [\"sqrt2-1\", \"1/3\"]\n");
  EXPECT_FALSE(box.rational_branch());
  EXPECT_EQ(box.psi(), 1);
  EXPECT_EQ(box.bound(), Rational(3, 2));

  const Experiment k3 = make("set = intervals [[0, \"(sqrt5-1)/2\"]]\nk = 3\nalpha = \"1/3\"\n");
  EXPECT_EQ(k3.bound(), Rational(1, 3));

  const Experiment liouville = make("below = \"liouville\"\nk = 3\nliouville_levels = 3\nalpha = \"1/3\"\n");
  EXPECT_FALSE(liouville.rational_branch());
  EXPECT_EQ(liouville.bound(), Rational(1, 3));
  EXPECT_EQ(liouville.below().entries.size(), 3u);
}

TEST(Experiment, ScheduleFromConfig) {
  const Experiment e = make("set = intervals [[0, \"(sqrt5-1)/2\"]]\nalpha = \"sqrt2-1\"\nbelow_count = 3\n");
  const auto s = e.schedules();
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[1].q, 2);
  EXPECT_EQ(s[1].n, 16);
  EXPECT_EQ(s[2].n, 625);
  EXPECT_EQ(s[2].eps, Rational(1, 25));

  const Experiment r = make("set = intervals [[0, \"1/2\"]]\nalpha = \"sqrt2-1\"\nhorizons = [100, 1000]\n");
  EXPECT_EQ(r.schedules().size(), 2u);
  EXPECT_THROW((void)r.below(), ConfigError);
}

TEST(Experiment, AlphaSamplingNeedsSeedAndIsDeterministic) {
  const std::string text = "set = intervals [[0, \"1/2\"]]\nalpha_samples = 3\nhorizons = [10]\n";
  EXPECT_THROW((void)make(text).alphas(), ConfigError);
  const auto a = make(text, 7).alphas();
  const auto b = make(text, 7).alphas();
  const auto c = make(text, 8).alphas();
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].g, b[i].g);
  EXPECT_NE(a[0].g, c[0].g);
}

TEST(Experiment, RationalStepIsFlagged) {
  const auto alphas = make("set = intervals [[0, \"1/2\"]]\nalpha = [\"1/3\", \"sqrt2-1\"]\nhorizons = [10]\n").alphas();
  ASSERT_EQ(alphas.size(), 2u);
  EXPECT_TRUE(alphas[0].flag.has_value());
  EXPECT_FALSE(alphas[1].flag.has_value());
}

TEST(Experiment, HeavyScanNesting) {
  const Experiment e = make(
      "set = intervals [[0, \"1/2\"]]\nalpha = \"sqrt2-1\"\nhorizons = [1, 10, 100, 1000]\nresolution = 10000\n");
  const auto r = heavy_scan(e);
  ASSERT_EQ(r.rows.size(), 4u);
  // horizon 1 is exactly the grid points of A
  EXPECT_EQ(r.rows[0].heavy_count, 5001u);
  for (std::size_t i = 1; i < r.rows.size(); ++i) EXPECT_LT(r.rows[i].heavy_count, r.rows[i - 1].heavy_count);
}

TEST(Experiment, HeavyScanShortcuts) {
  const auto full = heavy_scan(make("set = whole\nalpha = \"sqrt2-1\"\nhorizons = [5]\nresolution = 100\n"));
  ASSERT_TRUE(full.shortcut.has_value());
  EXPECT_EQ(full.rows[0].heavy_count, 0u);
}

TEST(Experiment, BoundCheckGoldenSmall) {
  const Experiment e = make(
      "set = intervals [[0, \"(sqrt5-1)/2\"]]\nalpha = \"sqrt2-1\"\nbelow_count = 3\nresolution = 20000\n");
  const BoundReport r = bound_check(e);
  ASSERT_EQ(r.alphas.size(), 1u);
  EXPECT_EQ(r.alphas[0].stages.size(), 3u);
  EXPECT_TRUE(r.alphas[0].bound_ok);
}

TEST(Experiment, CoarseGridIsAConfigError) {
  const Experiment e = make(
      "set = intervals [[0, \"(sqrt5-1)/2\"]]\nalpha = \"sqrt2-1\"\nbelow_count = 3\nresolution = 50\n");
  EXPECT_THROW((void)bound_check(e), ConfigError);
}

TEST(Experiment, ShallowPAdicDepthIsAConfigError) {
  const Experiment e = make(
      "group = \"padic\"\nprime = 2\ndepth = 3\nset = padic_balls [[0, 1]]\nalpha = 3\n"
      "horizons = [16, 64]\nresolution = 8\n");
  EXPECT_THROW((void)bound_check(e), ConfigError);
}

TEST(Experiment, CorruptedBelowSequenceFailsVerify) {
  const Experiment e = make(
      "set = intervals [[0, \"(sqrt5-1)/2\"]]\nalpha = \"sqrt2-1\"\nbelow = \"explicit\"\n"
      "below_list = [[0, 1], [1, 2], [2, 3]]\nresolution = 1000\n",
      1);
  const auto rows = verify(e);
  ASSERT_FALSE(rows.empty());
  EXPECT_EQ(rows.back().name, "below-sequence");
  EXPECT_FALSE(rows.back().passed);
}

TEST(Experiment, ExitCodes) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "heavyset_exit_codes";
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return dir / name;
  };
  RunOptions opts;
  opts.out = dir / "out";
  std::ostringstream log, err;
  EXPECT_EQ(run_command("cf", write("missing.cfg", "seed = 1\n"), opts, log, err), kExitConfig);
  EXPECT_EQ(run_command("cf", write("rational.cfg", "gamma = \"3/8\"\n"), opts, log, err), kExitOk);
  EXPECT_EQ(run_command("cf", write("golden.cfg", "gamma = \"(sqrt5-1)/2\"\ncf_count = 10\n"), opts, log, err),
            kExitOk);
  EXPECT_TRUE(fs::exists(opts.out / "below.csv"));
  EXPECT_EQ(run_command("heavy-scan",
                        write("cap.cfg", "dim = 3\nset = whole\nalpha = [[0, 0, 0]]\nhorizons = [1]\n"
                                         "resolution = 10000\n"),
                        opts, log, err),
            kExitResource);
  EXPECT_EQ(run_command("nope", write("x.cfg", "seed = 1\n"), opts, log, err), kExitConfig);
  fs::remove_all(dir);
}
