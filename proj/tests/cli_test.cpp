// Apache License, Version 2.0, refer to LICENSE.txt
//
// Drives the mcomp executable end to end.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <string>

#include <unistd.h>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "mcomp/io.hpp"

using namespace mcomp;
namespace fs = std::filesystem;

namespace {

// one directory per process so ctest -j runs do not collide
const fs::path kDir =
    fs::temp_directory_path() / ("mcomp_cli_test_" + std::to_string(::getpid()));

std::string path(const std::string& name) { return (kDir / name).string(); }

int run(const std::string& args) {
  const std::string cmd = std::string(MCOMP_CLI) + " " + args + " > " +
                          path("last.log") + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Varying baseline, one size-and-slope component.
ModelParams truth(const ModelSpacePtr& space) {
  ModelParams theta = fixture::constant_rate(space, 1.0);
  const double shift = std::log(30.0 / 1.0635);
  theta.c0 = oracle::interpolate(space->basis, [&](double t) {
    return shift + 0.5 * std::sin(2.0 * std::numbers::pi * t);
  });
  Eigen::VectorXd phi =
      oracle::interpolate(space->basis, [](double t) { return 1.0 + 0.4 * t; });
  theta.C = phi / std::sqrt(phi.dot(space->gram * phi));
  theta.sigma = Eigen::VectorXd::Constant(1, 0.6);
  return theta;
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    fs::create_directories(kDir);
    space_ = ModelSpace::create(
        make_bspline_basis(ObservationDomain::interval(0.0, 1.0), 8, 3));
    save_model(truth(space_), FitMetadata{}, path("truth.json"));
    write_file(path("config.json"),
               R"({"p": 1, "nu1": 1e-4, "nu2": 1e-4, "S": 1000, "seed": 7,
                   "interior_knots": 8, "eval_draws": 4000})");
  }
  static ModelSpacePtr space_;
};

ModelSpacePtr Cli::space_;

}  // namespace

TEST_F(Cli, SimulateIsReproducible) {
  ASSERT_EQ(run("simulate --model " + path("truth.json") +
                " --n 30 --seed 5 --out " + path("sim_a.csv")), 0);
  ASSERT_EQ(run("simulate --model " + path("truth.json") +
                " --n 30 --seed 5 --threads 3 --out " + path("sim_b.csv")), 0);
  EXPECT_EQ(read_file(path("sim_a.csv")), read_file(path("sim_b.csv")));
  const auto sim = simulate_replicates(truth(space_), 30, 5);
  const auto load = load_events(path("sim_a.csv"), space_->domain());
  ASSERT_EQ(load.dataset.n(), 30);
  for (int i = 0; i < 30; ++i) {
    EXPECT_EQ(load.dataset.patterns[i].points, sim.dataset.patterns[i].points);
  }
}

TEST_F(Cli, FitThenScoresRecoversComponent) {
  ASSERT_EQ(run("simulate --model " + path("truth.json") +
                " --n 200 --seed 2024 --out " + path("events.csv")), 0);
  ASSERT_EQ(run("fit --events " + path("events.csv") + " --config " +
                path("config.json") + " --threads 4 --out " + path("fit.json")), 0)
      << read_file(path("last.log"));
  ASSERT_TRUE(fs::exists(path("fit.json.report.json")));
  ASSERT_EQ(run("scores --model " + path("fit.json") + " --events " +
                path("events.csv") + " --threads 4 --out " + path("scores.csv")), 0)
      << read_file(path("last.log"));

  const ModelParams real = truth(space_);
  const auto fitted = load_model(path("fit.json"));
  EXPECT_GE(std::abs(fitted.theta.C.col(0).dot(space_->gram * real.C.col(0))), 0.95);
  EXPECT_NEAR(fitted.theta.sigma(0), 0.6, 0.15);

  const auto sim = simulate_replicates(real, 200, 2024);
  const auto rec = parse_csv(read_file(path("scores.csv")));
  ASSERT_EQ(rec.size(), 201u);
  std::vector<double> u, uh;
  for (int i = 0; i < 200; ++i) {
    u.push_back(sim.scores[i](0));
    uh.push_back(std::stod(rec[i + 1][2]));
  }
  EXPECT_GE(std::abs(oracle::pearson(u, uh)), 0.9);

  ASSERT_EQ(run("export-curves --model " + path("fit.json") +
                " --resolution 50 --out " + path("curves.csv")), 0);
  const auto curves = parse_csv(read_file(path("curves.csv")));
  ASSERT_EQ(curves.size(), 51u);
  EXPECT_EQ(curves[0][0], "t");
}

TEST_F(Cli, SinglePointGridIsItsOwnArgmax) {
  ASSERT_EQ(run("simulate --model " + path("truth.json") +
                " --n 12 --seed 3 --out " + path("small.csv")), 0);
  write_file(path("grid.csv"), "nu1,nu2,p\n0.001,0.001,1\n");
  write_file(path("small_config.json"),
             R"({"S": 100, "eval_draws": 500, "interior_knots": 8})");
  ASSERT_EQ(run("cv --events " + path("small.csv") + " --grid " + path("grid.csv") +
                " --folds 3 --config " + path("small_config.json") + " --out " +
                path("cv.csv")), 0)
      << read_file(path("last.log"));
  const auto rec = parse_csv(read_file(path("cv.csv")));
  ASSERT_EQ(rec.size(), 2u);
  EXPECT_EQ(rec[1][6], "1");
  EXPECT_EQ(rec[1][7], "1");
  EXPECT_TRUE(std::isfinite(std::stod(rec[1][5])));
}

TEST_F(Cli, ErrorsExitNonZeroWithMessage) {
  write_file(path("bad.csv"), "replicate_id,t\nA,0.1\nA,zzz\n");
  EXPECT_EQ(run("fit --events " + path("bad.csv") + " --out " + path("bad.json")), 1);
  EXPECT_NE(read_file(path("last.log")).find("line 3"), std::string::npos);
  EXPECT_NE(run("fit --out " + path("bad.json")), 0);
  EXPECT_NE(run("bogus"), 0);
}
