// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MCOMP_SCORES_HPP_
#define MCOMP_SCORES_HPP_

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcomp/estimation.hpp"
#include "mcomp/likelihood.hpp"

namespace mcomp {

// Posterior mean of U given one pattern, by self-normalized importance
// sampling with the prior as proposal.
struct ScoreEstimate {
  Eigen::VectorXd mean;
  Eigen::VectorXd std_error;
  double ess = 0;          // 1 / sum w_s^2
  bool low_ess = false;    // ess < 10
};

ScoreEstimate posterior_scores(const PointPattern& pattern,
                               const ModelParams& theta, const MCDraws& draws);
std::vector<ScoreEstimate> posterior_scores(const Dataset& data,
                                            const ModelParams& theta,
                                            const MCDraws& draws,
                                            int threads = 1);

// Fills fit.scores (n x p) using evaluation_draws(fit.config, p).  Returns the
// number of replicates whose effective sample size was below 10.
int compute_scores(FitResult& fit, const Dataset& data);

struct ComponentCurves {
  std::vector<Point> grid;
  double multiplier = 2.0;
  Eigen::VectorXd mu;
  Eigen::VectorXd lambda0;       // exp(mu)
  Eigen::MatrixXd phi;           // #grid x p
  Eigen::MatrixXd xi;            // exp(phi)
  Eigen::MatrixXd lambda_plus;   // exp(mu + multiplier sigma_k phi_k)
  Eigen::MatrixXd lambda_minus;  // exp(mu - multiplier sigma_k phi_k)
};

// 1D: `resolution` equally spaced points from a to b inclusive.  2D: the
// centers of the resolution x resolution cells that pass the mask.
ComponentCurves component_curves(const ModelParams& theta, int resolution,
                                 double multiplier = 2.0);

struct ScoreTable {
  std::vector<std::string> ids;
  std::vector<int> counts;
  Eigen::MatrixXd scores;     // n x p
  double corr_u1_count = 0;   // NaN when p = 0 or undefined
};

// Throws UsageError when fit.scores has not been filled for this dataset.
ScoreTable score_summary(const FitResult& fit, const Dataset& data);

}  // namespace mcomp

#endif  // MCOMP_SCORES_HPP_
