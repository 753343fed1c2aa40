// Apache License, Version 2.0, refer to LICENSE.txt

#include "mcomp/estimation.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <ceres/ceres.h>

#include "mcomp/errors.hpp"
#include "mcomp/parallel.hpp"

namespace mcomp {

namespace {

constexpr std::uint64_t kInitStream = 1'000'000;
constexpr std::uint64_t kFitDrawStream = 2'000'000;
constexpr std::uint64_t kEvalDrawStream = 3'000'000;

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t stream) {
  return make_stream(seed, stream)();
}

// Packs (c0, vec A) with A = C diag(sigma).  The likelihood depends on C and
// sigma only through A, and the component penalty only on the column space
// of A, so the split between C and sigma is left to canonicalize().
struct Packing {
  int q = 0;
  int p = 0;

  int size() const { return q + q * p; }

  void pack(const ModelParams& theta, double* x) const {
    Eigen::Map<Eigen::VectorXd>(x, q) = theta.c0;
    Eigen::Map<Eigen::MatrixXd>(x + q, q, p) = theta.C * theta.sigma.asDiagonal();
  }

  void unpack(const double* x, ModelParams& theta) const {
    theta.c0 = Eigen::Map<const Eigen::VectorXd>(x, q);
    theta.C = Eigen::Map<const Eigen::MatrixXd>(x + q, q, p);
    theta.sigma = Eigen::VectorXd::Ones(p);
  }

  // Called at sigma = 1, where the C gradient is the A gradient.
  void pack_gradient(const ObjectiveGradient& g, double* out) const {
    Eigen::Map<Eigen::VectorXd>(out, q) = -g.c0;
    Eigen::Map<Eigen::MatrixXd>(out + q, q, p) = -g.C;
  }
};

// Negative penalized objective for the minimizer.
class NegativeObjective : public ceres::FirstOrderFunction {
 public:
  NegativeObjective(const std::vector<PatternStats>& stats,
                    const ModelParams& shape, const FitConfig& config,
                    const MCDraws& draws)
      : stats_(stats), shape_(shape), config_(config), draws_(draws),
        packing_{shape.q(), shape.p()} {}

  bool Evaluate(const double* x, double* cost, double* gradient) const override {
    ModelParams theta = shape_;
    packing_.unpack(x, theta);
    if (!theta.c0.allFinite() || !theta.C.allFinite()) return false;
    try {
      if (gradient) {
        const ObjectiveGradient g = objective_gradient(
            stats_, theta, config_.nu1, config_.nu2, draws_, config_.threads);
        *cost = -g.value;
        packing_.pack_gradient(g, gradient);
      } else {
        *cost = -penalized_objective(stats_, theta, config_.nu1, config_.nu2,
                                     draws_, config_.threads);
      }
    } catch (const NumericError&) {
      return false;
    }
    return std::isfinite(*cost);
  }

  int NumParameters() const override { return packing_.size(); }

 private:
  const std::vector<PatternStats>& stats_;
  const ModelParams& shape_;
  const FitConfig& config_;
  const MCDraws& draws_;
  Packing packing_;
};

class TraceRecorder : public ceres::IterationCallback {
 public:
  explicit TraceRecorder(std::vector<double>& trace) : trace_(trace) {}
  ceres::CallbackReturnType operator()(
      const ceres::IterationSummary& summary) override {
    trace_.push_back(-summary.cost);
    return ceres::SOLVER_CONTINUE;
  }

 private:
  std::vector<double>& trace_;
};

struct StartOutcome {
  ModelParams theta;
  std::vector<double> trace;
  std::vector<int> stage_starts;
  double objective = -std::numeric_limits<double>::infinity();
  bool converged = false;
};

StartOutcome run_start(const Dataset& data, const ModelSpacePtr& space,
                       const std::vector<PatternStats>& stats,
                       const FitConfig& config, int start) {
  StartOutcome out;
  ModelParams theta = initialize(data, space, config, start);
  MCDraws draws = fit_draws(config, 0);

  double initial = 0.0;
  try {
    initial = penalized_objective(stats, theta, config.nu1, config.nu2, draws,
                                  config.threads);
  } catch (const NumericError& e) {
    throw EstimationError(std::string("objective at the starting point: ") +
                          e.what());
  }
  if (!std::isfinite(initial)) {
    throw EstimationError("objective at the starting point is not finite");
  }

  const Packing packing{theta.q(), theta.p()};
  const int stages = theta.p() == 0 ? 1 : config.max_outer_iters;
  double previous = initial;
  for (int stage = 0; stage < stages; ++stage) {
    if (stage > 0 && config.redraw) draws = fit_draws(config, stage);
    std::vector<double> x(packing.size());
    packing.pack(theta, x.data());

    ceres::GradientProblemSolver::Options options;
    options.line_search_direction_type = ceres::BFGS;
    options.max_num_iterations = config.max_inner_iters;
    options.gradient_tolerance = config.gradient_tolerance;
    options.function_tolerance = config.function_tolerance;
    options.parameter_tolerance = 1e-12;
    options.logging_type = ceres::SILENT;
    options.minimizer_progress_to_stdout = false;
    out.stage_starts.push_back(static_cast<int>(out.trace.size()));
    TraceRecorder recorder(out.trace);
    options.callbacks.push_back(&recorder);

    ceres::GradientProblem problem(
        new NegativeObjective(stats, theta, config, draws));
    ceres::GradientProblemSolver::Summary summary;
    ceres::Solve(options, problem, x.data(), &summary);

    packing.unpack(x.data(), theta);
    if (theta.p() > 0) {
      Canonical canon = canonicalize_with_rotation(theta);
      theta = std::move(canon.theta);
      draws.Z = draws.Z * canon.rotation;
    }
    out.objective = penalized_objective(stats, theta, config.nu1, config.nu2,
                                        draws, config.threads);
    out.converged = summary.termination_type == ceres::CONVERGENCE;
    const double gain = out.objective - previous;
    previous = out.objective;
    if (stage > 0 && out.converged && !config.redraw &&
        std::abs(gain) <= config.function_tolerance * (1.0 + std::abs(previous))) {
      break;
    }
  }
  out.theta = std::move(theta);
  return out;
}

}  // namespace

void FitConfig::validate() const {
  if (p < 0) throw UsageError("p must be >= 0");
  if (!(nu1 >= 0.0) || !(nu2 >= 0.0) || !std::isfinite(nu1) ||
      !std::isfinite(nu2)) {
    throw UsageError("nu1 and nu2 must be finite and nonnegative");
  }
  if (S < 2 || S % 2 != 0) throw UsageError("S must be even and >= 2");
  if (eval_draws < 2 || eval_draws % 2 != 0) {
    throw UsageError("eval_draws must be even and >= 2");
  }
  if (max_outer_iters < 1) throw UsageError("max_outer_iters must be >= 1");
  if (max_inner_iters < 1) throw UsageError("max_inner_iters must be >= 1");
  if (!(gradient_tolerance > 0.0) || !(function_tolerance > 0.0)) {
    throw UsageError("tolerances must be positive");
  }
  if (multistart < 1) throw UsageError("multistart must be >= 1");
  if (threads < 1) throw UsageError("threads must be >= 1");
}

std::string to_string(InitMode mode) {
  return mode == InitMode::Poisson ? "poisson" : "constant";
}

InitMode parse_init_mode(const std::string& name) {
  if (name == "poisson") return InitMode::Poisson;
  if (name == "constant") return InitMode::Constant;
  throw UsageError("unknown initialization mode '" + name +
                   "' (expected poisson or constant)");
}

MCDraws fit_draws(const FitConfig& config, int stage) {
  return make_draws(config.S, config.p,
                    derived_seed(config.seed, kFitDrawStream + stage));
}

MCDraws evaluation_draws(const FitConfig& config, int p) {
  return make_draws(config.eval_draws, p,
                    derived_seed(config.seed, kEvalDrawStream));
}

Eigen::VectorXd poisson_baseline(const std::vector<PatternStats>& stats,
                                 const ModelSpace& space, double nu1) {
  if (stats.empty()) throw UsageError("no replicates");
  if (nu1 > 0.0 && !space.has_penalty) {
    throw UsageError("roughness penalty needs a spline of degree >= 2");
  }
  const int q = space.q();
  Eigen::VectorXd mean_sum = Eigen::VectorXd::Zero(q);
  double mean_m = 0.0;
  for (const auto& st : stats) {
    mean_sum += st.basis_sum;
    mean_m += st.m;
  }
  mean_sum /= static_cast<double>(stats.size());
  mean_m /= static_cast<double>(stats.size());
  if (mean_m <= 0.0) {
    throw EstimationError("no events in any replicate; the intensity is not estimable");
  }

  const Eigen::MatrixXd& B = space.quad_basis;
  const Eigen::VectorXd& w = space.quad_weights;
  const Eigen::MatrixXd Omega2 = 2.0 * nu1 * space.penalty;
  auto value = [&](const Eigen::VectorXd& c) {
    const Eigen::VectorXd eta = B * c;
    if (eta.maxCoeff() > 700.0) return -std::numeric_limits<double>::infinity();
    return mean_sum.dot(c) - w.dot(eta.array().exp().matrix()) -
           0.5 * c.dot(Omega2 * c);
  };

  Eigen::VectorXd c =
      Eigen::VectorXd::Constant(q, std::log(mean_m / space.domain().measure()));
  double f = value(c);
  for (int iter = 0; iter < 200; ++iter) {
    const Eigen::VectorXd wl = w.cwiseProduct((B * c).array().exp().matrix());
    const Eigen::VectorXd g = mean_sum - B.transpose() * wl - Omega2 * c;
    const Eigen::MatrixXd H = B.transpose() * wl.asDiagonal() * B + Omega2;
    const Eigen::VectorXd d = H.ldlt().solve(g);
    const double decrement = g.dot(d);
    if (!std::isfinite(decrement)) break;
    if (decrement <= 1e-12 * std::max(1.0, std::abs(f))) return c + d;
    double t = 1.0;
    double next = value(c + d);
    while (!(next >= f + 1e-4 * t * decrement) && t > 1e-12) {
      t *= 0.5;
      next = value(c + t * d);
    }
    if (!(next >= f)) break;
    c += t * d;
    f = next;
  }
  throw EstimationError("the p = 0 Poisson fit for the baseline diverges");
}

ModelParams initialize(const Dataset& data, const ModelSpacePtr& space,
                       const FitConfig& config, int start) {
  config.validate();
  if (!space) throw UsageError("no basis");
  if (data.n() == 0) throw UsageError("dataset has no replicates");
  const auto stats = summarize(data, *space);
  const int q = space->q();

  ModelParams theta;
  theta.space = space;
  if (config.init == InitMode::Poisson) {
    theta.c0 = poisson_baseline(stats, *space, config.nu1);
  } else {
    double mean_m = 0.0;
    for (const auto& st : stats) mean_m += st.m;
    mean_m /= data.n();
    if (mean_m <= 0.0) {
      throw EstimationError("no events in any replicate; the intensity is not estimable");
    }
    theta.c0 = Eigen::VectorXd::Constant(q, std::log(mean_m / space->domain().measure()));
  }

  const int p = config.p;
  theta.C.resize(q, p);
  theta.sigma.resize(p);
  if (p == 0) return theta;
  if (p > q) {
    throw EstimationError("p = " + std::to_string(p) +
                          " exceeds the basis size q = " + std::to_string(q));
  }
  auto rng = make_stream(config.seed, kInitStream + static_cast<std::uint64_t>(start));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd A(q, p);
  for (int k = 0; k < p; ++k) {
    for (int j = 0; j < q; ++j) A(j, k) = normal(rng);
  }
  const Eigen::MatrixXd G = A.transpose() * space->gram * A;
  const Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) {
    throw EstimationError("random starting components are degenerate");
  }
  theta.C = llt.matrixL().solve(A.transpose()).transpose();
  for (int k = 0; k < p; ++k) theta.sigma(k) = 0.5 / (k + 1);
  return canonicalize(theta);
}

Canonical canonicalize_with_rotation(const ModelParams& theta) {
  theta.validate();
  const int p = theta.p();
  Canonical out{theta, Eigen::MatrixXd::Identity(p, p)};
  if (p == 0) return out;

  const Eigen::MatrixXd CS = theta.C * theta.sigma.asDiagonal();
  Eigen::MatrixXd G = CS.transpose() * theta.space->gram * CS;
  G = 0.5 * (G + G.transpose()).eval();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
  if (eig.info() != Eigen::Success) {
    throw EstimationError("eigendecomposition failed while canonicalizing");
  }
  const Eigen::VectorXd ev = eig.eigenvalues().reverse();
  if (!(ev(p - 1) > 1e-12 * ev(0))) {
    throw EstimationError("the " + std::to_string(p) +
                          " components are linearly dependent in L2(B); "
                          "refit with a smaller p");
  }
  Eigen::MatrixXd V = eig.eigenvectors().rowwise().reverse();
  const Eigen::VectorXd s = ev.array().sqrt();
  Eigen::MatrixXd Phi = CS * V * s.cwiseInverse().asDiagonal();
  for (int k = 0; k < p; ++k) {
    if (Phi(max_abs_index(Phi.col(k)), k) < 0.0) {
      Phi.col(k) *= -1.0;
      V.col(k) *= -1.0;
    }
  }
  out.theta.C = std::move(Phi);
  out.theta.sigma = s;
  out.rotation = std::move(V);
  return out;
}

ModelParams canonicalize(const ModelParams& theta) {
  return canonicalize_with_rotation(theta).theta;
}

FitResult fit(const Dataset& data, const ModelSpacePtr& space,
              const FitConfig& config) {
  config.validate();
  if (!space) throw UsageError("no basis");
  if (data.n() == 0) throw UsageError("dataset has no replicates");
  if (!(data.domain == space->domain())) {
    throw UsageError("dataset and basis live on different domains");
  }
  data.validate();
  const auto stats = summarize(data, *space);

  FitResult result;
  result.config = config;
  StartOutcome best;
  for (int start = 0; start < config.multistart; ++start) {
    StartOutcome outcome = run_start(data, space, stats, config, start);
    if (start == 0 || outcome.objective > best.objective) {
      best = std::move(outcome);
      result.best_start = start;
    }
  }
  result.theta = std::move(best.theta);
  result.trace = std::move(best.trace);
  result.stage_starts = std::move(best.stage_starts);
  result.objective = best.objective;
  result.converged = best.converged && std::isfinite(best.objective);

  const MCDraws eval = evaluation_draws(config, config.p);
  const auto est = marginal_logliks(data, result.theta, eval, config.threads);
  result.loglik.reserve(est.size());
  for (const auto& e : est) result.loglik.push_back(e.value);
  return result;
}

CVTable cross_validate(const Dataset& data, const ModelSpacePtr& space,
                       const std::vector<GridPoint>& grid, int folds,
                       const FitConfig& config) {
  config.validate();
  if (grid.empty()) throw UsageError("empty cross-validation grid");
  if (folds < 2 || folds > data.n()) {
    throw UsageError("folds must lie between 2 and n = " + std::to_string(data.n()));
  }
  std::vector<std::vector<int>> train(folds), test(folds);
  for (int i = 0; i < data.n(); ++i) {
    for (int f = 0; f < folds; ++f) (i % folds == f ? test : train)[f].push_back(i);
  }

  struct Cell {
    double value = 0;
    std::string error;
  };
  const std::int64_t jobs = static_cast<std::int64_t>(grid.size()) * folds;
  std::vector<Cell> cells(jobs);
  parallel_for(jobs, config.threads, [&](std::int64_t job) {
    const auto& gp = grid[job / folds];
    const int f = static_cast<int>(job % folds);
    FitConfig cfg = config;
    cfg.nu1 = gp.nu1;
    cfg.nu2 = gp.nu2;
    cfg.p = gp.p;
    cfg.threads = 1;
    try {
      const FitResult r = fit(data.subset(train[f]), space, cfg);
      const MCDraws eval = evaluation_draws(cfg, cfg.p);
      double total = 0.0;
      for (int i : test[f]) {
        total += marginal_loglik(data.patterns[i], r.theta, eval);
      }
      if (!std::isfinite(total)) throw NumericError("held-out log-likelihood is not finite");
      cells[job].value = total;
    } catch (const Error& e) {
      cells[job].error = "fold " + std::to_string(f) + ": " + e.what();
    }
  });

  CVTable table;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    CVEntry entry{grid[g], 0.0, true, {}};
    for (int f = 0; f < folds; ++f) {
      const Cell& c = cells[g * folds + f];
      if (!c.error.empty()) {
        entry.valid = false;
        entry.message = c.error;
        break;
      }
      entry.cv += c.value;
    }
    if (!entry.valid) entry.cv = std::numeric_limits<double>::quiet_NaN();
    if (entry.valid &&
        (table.argmax < 0 || entry.cv > table.entries[table.argmax].cv)) {
      table.argmax = static_cast<int>(g);
    }
    table.entries.push_back(std::move(entry));
  }
  if (table.argmax < 0) {
    throw EstimationError("every cross-validation grid point failed; first: " +
                          table.entries.front().message);
  }
  return table;
}

}  // namespace mcomp
