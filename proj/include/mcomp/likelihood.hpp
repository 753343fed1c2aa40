// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MCOMP_LIKELIHOOD_HPP_
#define MCOMP_LIKELIHOOD_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mcomp/model.hpp"
#include "mcomp/point_process.hpp"

namespace mcomp {

// Standard normal draws for the Monte Carlo integral over the latent scores.
// Rows come in antithetic pairs: row s + S/2 is the negative of row s.  Held
// fixed through an optimization (common random numbers).
struct MCDraws {
  Eigen::MatrixXd Z;  // S x p
  std::uint64_t seed = 0;

  int S() const { return static_cast<int>(Z.rows()); }
  int p() const { return static_cast<int>(Z.cols()); }
};

// S must be even when p > 0.
MCDraws make_draws(int S, int p, std::uint64_t seed);

// The part of a pattern the conditional density depends on: the basis sum
// over its points, the count and log m!.
struct PatternStats {
  Eigen::VectorXd basis_sum;
  int m = 0;
  double log_m_factorial = 0;
};

PatternStats summarize(const PointPattern& pattern, const ModelSpace& space);
std::vector<PatternStats> summarize(const Dataset& data, const ModelSpace& space);

// log f(x | u) = -int_B exp{(c0 + C u)^T beta} + (c0 + C u)^T sum_j beta(t_j)
//                - log m!
double cond_loglik(const PointPattern& pattern, const Eigen::VectorXd& u,
                   const ModelParams& theta);

// sum_k (-1/2 log 2 pi sigma_k^2 - u_k^2 / (2 sigma_k^2))
double prior_loglik(const Eigen::VectorXd& u, const Eigen::VectorXd& sigma);

struct MarginalEstimate {
  double value = 0;
  double std_error = 0;  // delta-method s.e. of the log estimate
};

// log[(1/S) sum_s f(x | sigma .* z_s)], computed with log-sum-exp.
double marginal_loglik(const PointPattern& pattern, const ModelParams& theta,
                       const MCDraws& draws);
MarginalEstimate marginal_loglik_estimate(const PointPattern& pattern,
                                          const ModelParams& theta,
                                          const MCDraws& draws);
// Per-replicate marginal log-likelihoods for a whole dataset.
std::vector<MarginalEstimate> marginal_logliks(const Dataset& data,
                                               const ModelParams& theta,
                                               const MCDraws& draws,
                                               int threads = 1);

// Roughness penalty of the components, tr((C^T J C)^{-1} C^T Omega C).
// Equal to sum_k c_k^T Omega c_k when C^T J C = I and invariant to the
// choice of basis of the column space of C.
double component_penalty(const ModelParams& theta);

// rho_n = mean marginal log-likelihood - nu1 c0^T Omega c0
//         - nu2 * component_penalty.
double penalized_objective(const Dataset& data, const ModelParams& theta,
                           double nu1, double nu2, const MCDraws& draws,
                           int threads = 1);

struct ObjectiveGradient {
  double value = 0;
  Eigen::VectorXd c0;
  Eigen::MatrixXd C;
  Eigen::VectorXd log_sigma;
};

// Analytic gradient of penalized_objective for fixed draws, with respect to
// (c0, C, log sigma).
ObjectiveGradient objective_gradient(const Dataset& data,
                                     const ModelParams& theta, double nu1,
                                     double nu2, const MCDraws& draws,
                                     int threads = 1);

// Lower-level entry points working on precomputed pattern statistics; the
// estimation module calls these in its inner loop.
double penalized_objective(const std::vector<PatternStats>& stats,
                           const ModelParams& theta, double nu1, double nu2,
                           const MCDraws& draws, int threads = 1);
ObjectiveGradient objective_gradient(const std::vector<PatternStats>& stats,
                                     const ModelParams& theta, double nu1,
                                     double nu2, const MCDraws& draws,
                                     int threads = 1);

// Self-normalized weights w_s proportional to f(x | sigma .* z_s), for
// posterior summaries.  For p = 0 the single weight is 1.
Eigen::VectorXd posterior_weights(const PatternStats& stats,
                                  const ModelParams& theta, const MCDraws& draws);
// Row i holds the weights for replicate i.
Eigen::MatrixXd posterior_weights(const std::vector<PatternStats>& stats,
                                  const ModelParams& theta,
                                  const MCDraws& draws, int threads = 1);

}  // namespace mcomp

#endif  // MCOMP_LIKELIHOOD_HPP_
