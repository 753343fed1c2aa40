// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MCOMP_ESTIMATION_HPP_
#define MCOMP_ESTIMATION_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcomp/likelihood.hpp"
#include "mcomp/model.hpp"
#include "mcomp/point_process.hpp"

namespace mcomp {

enum class InitMode {
  Poisson,   // c0 from a penalized p = 0 Poisson fit
  Constant,  // c0 = log(mean count / |B|) everywhere
};

struct FitConfig {
  int p = 1;
  double nu1 = 0.0;
  double nu2 = 0.0;
  int S = 1000;                  // draws held fixed during one SAA stage
  std::uint64_t seed = 1;
  int max_outer_iters = 3;       // SAA stages
  int max_inner_iters = 500;     // quasi-Newton iterations per stage
  double gradient_tolerance = 1e-6;
  double function_tolerance = 1e-10;
  int multistart = 1;
  InitMode init = InitMode::Poisson;
  bool redraw = false;           // fresh draws at every stage
  int eval_draws = 10000;        // reported log-likelihoods, CV, scores
  int threads = 1;

  // Throws UsageError.
  void validate() const;
};

std::string to_string(InitMode mode);
InitMode parse_init_mode(const std::string& name);

struct FitResult {
  ModelParams theta;
  FitConfig config;
  // Penalized objective after every quasi-Newton iteration, all stages
  // concatenated; stage_starts[j] indexes the first entry of stage j.
  std::vector<double> trace;
  std::vector<int> stage_starts;
  double objective = 0;          // at the fit draws
  std::vector<double> loglik;    // per replicate, at evaluation draws
  bool converged = false;
  int best_start = 0;
  Eigen::MatrixXd scores;        // n x p, see compute_scores
};

// Draws used at stage `stage` of every start.
MCDraws fit_draws(const FitConfig& config, int stage);
// Draws used for reported log-likelihoods and held-out evaluation.
MCDraws evaluation_draws(const FitConfig& config, int p);

// Maximizer of mean_i [c0^T s_i] - int exp(c0^T beta) - nu1 c0^T Omega c0
// by damped Newton, started from the constant log(mean count / |B|).
Eigen::VectorXd poisson_baseline(const std::vector<PatternStats>& stats,
                                 const ModelSpace& space, double nu1);

// Starting point for start index `start`: c0 as per config.init, C a
// seeded random matrix orthonormalized in J, sigma_k = 0.5 / k.
ModelParams initialize(const Dataset& data, const ModelSpacePtr& space,
                       const FitConfig& config, int start = 0);

struct Canonical {
  ModelParams theta;
  // Orthogonal p x p matrix R with C diag(sigma) = C' diag(sigma') R^T, so
  // draws Z R give the same latent fields under the new parameters.
  Eigen::MatrixXd rotation;
};

// J-orthonormal columns, sigma descending, largest-magnitude entry of each
// column positive.  The distribution of C U is unchanged.  Throws
// EstimationError when C diag(sigma) is rank deficient in the J metric.
Canonical canonicalize_with_rotation(const ModelParams& theta);
ModelParams canonicalize(const ModelParams& theta);

FitResult fit(const Dataset& data, const ModelSpacePtr& space,
              const FitConfig& config);

struct GridPoint {
  double nu1 = 0;
  double nu2 = 0;
  int p = 0;
};

struct CVEntry {
  GridPoint point;
  double cv = 0;        // sum of held-out marginal log-likelihoods
  bool valid = false;
  std::string message;  // why the entry is invalid
};

struct CVTable {
  std::vector<CVEntry> entries;
  int argmax = -1;
};

// Replicate i belongs to fold i mod folds.  Each training fit uses config
// with (nu1, nu2, p) replaced by the grid point; held-out replicates are
// scored with evaluation_draws(config, p).  A failed fit invalidates its
// grid point.  Throws EstimationError when no grid point is valid.
CVTable cross_validate(const Dataset& data, const ModelSpacePtr& space,
                       const std::vector<GridPoint>& grid, int folds,
                       const FitConfig& config);

}  // namespace mcomp

#endif  // MCOMP_ESTIMATION_HPP_
