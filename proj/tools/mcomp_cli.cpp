// Apache License, Version 2.0, refer to LICENSE.txt
//
// mcomp: simulate, fit, cross-validate, score and export multiplicative
// component models for replicated point patterns.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mcomp/errors.hpp"
#include "mcomp/estimation.hpp"
#include "mcomp/io.hpp"
#include "mcomp/point_process.hpp"
#include "mcomp/scores.hpp"

namespace {

using namespace mcomp;

RunConfig config_or_default(const std::string& path) {
  return path.empty() ? RunConfig{} : load_config(path);
}

void report_drops(const EventLoad& load) {
  std::cerr << "read " << load.rows << " rows into " << load.dataset.n()
            << " replicates";
  if (load.dropped_outside > 0) {
    std::cerr << "; dropped " << load.dropped_outside << " outside the domain";
  }
  if (load.dropped_missing > 0) {
    std::cerr << "; " << load.dropped_missing << " rows without coordinates";
  }
  std::cerr << "\n";
}

int run_simulate(const std::string& model_path, int n, std::uint64_t seed,
                 int threads, const std::string& out) {
  const ModelFile model = load_model(model_path);
  const auto sim = simulate_replicates(model.theta, n, seed, threads);
  write_events(sim.dataset, out);
  return 0;
}

int run_fit(const std::string& events, const std::string& config_path,
            std::optional<int> threads, const std::string& out) {
  RunConfig cfg = config_or_default(config_path);
  if (threads) cfg.fit.threads = *threads;
  const EventLoad load = load_events(events, cfg.domain, cfg.columns);
  report_drops(load);
  const auto space = ModelSpace::create(make_basis(cfg), cfg.quadrature_resolution);
  FitResult result = fit(load.dataset, space, cfg.fit);
  save_model(result.theta, metadata_of(result), out);
  write_fit_report(result, load, out + ".report.json");
  std::printf("objective %.10g  converged %s  q %d  p %d\n", result.objective,
              result.converged ? "yes" : "no", result.theta.q(), result.theta.p());
  if (!result.converged) {
    std::cerr << "warning: the optimizer stopped before convergence\n";
  }
  return 0;
}

int run_cv(const std::string& events, const std::string& grid_path, int folds,
           const std::string& config_path, std::optional<int> threads,
           const std::string& out) {
  RunConfig cfg = config_or_default(config_path);
  if (threads) cfg.fit.threads = *threads;
  const EventLoad load = load_events(events, cfg.domain, cfg.columns);
  report_drops(load);
  const auto space = ModelSpace::create(make_basis(cfg), cfg.quadrature_resolution);
  const CVTable table =
      cross_validate(load.dataset, space, load_grid(grid_path), folds, cfg.fit);
  write_cv_table(table, out);
  const auto& best = table.entries[table.argmax];
  std::printf("argmax nu1 %.6g  nu2 %.6g  p %d  cv %.10g\n", best.point.nu1,
              best.point.nu2, best.point.p, best.cv);
  for (const auto& e : table.entries) {
    if (!e.valid) std::cerr << "invalid grid point: " << e.message << "\n";
  }
  return 0;
}

int run_scores(const std::string& model_path, const std::string& events, int draws,
               std::optional<std::uint64_t> seed, const std::string& config_path,
               std::optional<int> threads, const std::string& out) {
  const ModelFile model = load_model(model_path);
  const RunConfig cfg = config_or_default(config_path);
  const EventLoad load =
      load_events(events, model.theta.space->domain(), cfg.columns);
  report_drops(load);
  FitResult result;
  result.theta = model.theta;
  result.config.p = model.theta.p();
  result.config.eval_draws = draws;
  result.config.seed = seed.value_or(model.meta.seed);
  result.config.threads = threads.value_or(cfg.fit.threads);
  const int low = compute_scores(result, load.dataset);
  if (low > 0) {
    std::cerr << "warning: " << low
              << " replicates have importance-sampling ESS below 10\n";
  }
  const ScoreTable table = score_summary(result, load.dataset);
  write_score_table(table, out);
  if (model.theta.p() > 0) std::printf("corr(u1, m) %.6f\n", table.corr_u1_count);
  return 0;
}

int run_export(const std::string& model_path, int resolution,
               std::optional<double> multiplier, const std::string& config_path,
               const std::string& out) {
  const ModelFile model = load_model(model_path);
  const double m = multiplier.value_or(config_or_default(config_path).multiplier);
  const auto curves = component_curves(model.theta, resolution, m);
  write_curves(curves, model.theta.space->domain().dim(), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiplicative component models for replicated point processes"};
  app.require_subcommand(1);

  std::string model, events, config, grid, out;
  int n = 0, folds = 5, draws = 10000, resolution = 200;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> score_seed;
  std::optional<int> threads;
  std::optional<double> multiplier;

  auto* sim = app.add_subcommand("simulate", "Simulate replicates from a model file");
  sim->add_option("--model", model, "Model file")->required()->check(CLI::ExistingFile);
  sim->add_option("--n", n, "Number of replicates")->required()->check(CLI::PositiveNumber);
  sim->add_option("--seed", seed, "Random seed");
  sim->add_option("--threads", threads, "Worker threads");
  sim->add_option("--out", out, "Event CSV to write")->required();

  auto* fit_cmd = app.add_subcommand("fit", "Fit a model to event data");
  fit_cmd->add_option("--events", events, "Event file (CSV or JSON)")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--config", config, "Config file (JSON)")->check(CLI::ExistingFile);
  fit_cmd->add_option("--threads", threads, "Worker threads");
  fit_cmd->add_option("--out", out, "Model file to write")->required();

  auto* cv = app.add_subcommand("cv", "Cross-validate over a grid of (nu1, nu2, p)");
  cv->add_option("--events", events, "Event file")->required()->check(CLI::ExistingFile);
  cv->add_option("--grid", grid, "Grid CSV")->required()->check(CLI::ExistingFile);
  cv->add_option("--folds", folds, "Number of folds");
  cv->add_option("--config", config, "Config file (JSON)")->check(CLI::ExistingFile);
  cv->add_option("--threads", threads, "Worker threads");
  cv->add_option("--out", out, "CV table CSV to write")->required();

  auto* sc = app.add_subcommand("scores", "Posterior component scores per replicate");
  sc->add_option("--model", model, "Model file")->required()->check(CLI::ExistingFile);
  sc->add_option("--events", events, "Event file")->required()->check(CLI::ExistingFile);
  sc->add_option("--draws", draws, "Monte Carlo draws (even)");
  sc->add_option("--seed", score_seed, "Random seed (default: the fit seed)");
  sc->add_option("--config", config, "Config file for column mappings")->check(CLI::ExistingFile);
  sc->add_option("--threads", threads, "Worker threads");
  sc->add_option("--out", out, "Score CSV to write")->required();

  auto* ex = app.add_subcommand("export-curves", "Evaluate baseline and component curves");
  ex->add_option("--model", model, "Model file")->required()->check(CLI::ExistingFile);
  ex->add_option("--resolution", resolution, "Grid points (1D) or cells per side (2D)");
  ex->add_option("--multiplier", multiplier,
                 "Multiple of sigma_k in lambda_plus/minus (default 2)");
  ex->add_option("--config", config, "Config file for the multiplier")->check(CLI::ExistingFile);
  ex->add_option("--out", out, "Curve CSV to write")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return run_simulate(model, n, seed, threads.value_or(1), out);
    if (fit_cmd->parsed()) return run_fit(events, config, threads, out);
    if (cv->parsed()) return run_cv(events, grid, folds, config, threads, out);
    if (sc->parsed()) {
      return run_scores(model, events, draws, score_seed, config, threads, out);
    }
    if (ex->parsed()) return run_export(model, resolution, multiplier, config, out);
  } catch (const mcomp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
