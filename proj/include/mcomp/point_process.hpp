// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MCOMP_POINT_PROCESS_HPP_
#define MCOMP_POINT_PROCESS_HPP_

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcomp/basis.hpp"
#include "mcomp/geometry.hpp"
#include "mcomp/model.hpp"

namespace mcomp {

// One replicate: the events observed on B.
struct PointPattern {
  std::string replicate_id;
  std::vector<Point> points;

  int m() const { return static_cast<int>(points.size()); }
};

// n replicates over a common domain.
struct Dataset {
  ObservationDomain domain;
  std::vector<PointPattern> patterns;

  int n() const { return static_cast<int>(patterns.size()); }
  // Throws UsageError when empty or when a point lies outside the domain.
  void validate() const;
  Dataset subset(const std::vector<int>& indices) const;
};

// lambda(t) = exp{(c0 + C u)^T beta(t)} at each point.
Eigen::VectorXd intensity_at(const Eigen::VectorXd& c0, const Eigen::MatrixXd& C,
                             const Eigen::VectorXd& u, const BasisSystem& basis,
                             std::span<const Point> points);

// Draws the count from Poisson(integral of lambda), then the locations by
// rejection from the uniform distribution on B.  The envelope is 1.2 times
// the largest intensity at a quadrature node; if a proposal exceeds it the
// envelope is raised and the locations are redrawn.
PointPattern simulate_poisson(const Eigen::VectorXd& c0, const Eigen::MatrixXd& C,
                              const Eigen::VectorXd& u, const ModelSpace& space,
                              std::mt19937_64& rng);
PointPattern simulate_poisson(const Eigen::VectorXd& c0, const Eigen::MatrixXd& C,
                              const Eigen::VectorXd& u, const ModelSpace& space,
                              std::uint64_t rng_seed);

struct SimulatedReplicates {
  Dataset dataset;
  std::vector<Eigen::VectorXd> scores;  // generating u for each replicate
};

// Replicate i uses the stream make_stream(seed, i): u ~ N(0, diag sigma^2),
// then a Poisson pattern with intensity exp{(c0 + C u)^T beta}.  sigma
// entries may be zero here (degenerate latent scores).
SimulatedReplicates simulate_replicates(const ModelParams& theta, int n,
                                        std::uint64_t rng_seed,
                                        int threads = 1);

struct Expectation {
  double mean = 0;
  double std_error = 0;
};

using PatternFunctional = std::function<double(const PointPattern&)>;

// Monte Carlo estimate of E h(X_B) under the doubly stochastic model.
Expectation expect_functional(const PatternFunctional& h,
                              const ModelParams& theta, int n_sims,
                              std::uint64_t rng_seed, int threads = 1);

}  // namespace mcomp

#endif  // MCOMP_POINT_PROCESS_HPP_
