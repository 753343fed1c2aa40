// Apache License, Version 2.0, refer to LICENSE.txt

#include "mcomp/point_process.hpp"

#include <cmath>

#include "mcomp/errors.hpp"
#include "mcomp/parallel.hpp"

namespace mcomp {

void Dataset::validate() const {
  if (patterns.empty()) throw UsageError("dataset has no replicates");
  for (const auto& pattern : patterns) {
    for (const Point& p : pattern.points) {
      if (!domain.contains(p)) {
        throw UsageError("replicate '" + pattern.replicate_id + "' has point " +
                         to_string(p) + " outside the domain");
      }
    }
  }
}

Dataset Dataset::subset(const std::vector<int>& indices) const {
  Dataset out{domain, {}};
  out.patterns.reserve(indices.size());
  for (int i : indices) out.patterns.push_back(patterns.at(i));
  return out;
}

namespace {

Eigen::VectorXd linear_predictor(const Eigen::VectorXd& c0,
                                 const Eigen::MatrixXd& C,
                                 const Eigen::VectorXd& u, int q) {
  if (c0.size() != q || C.rows() != q || C.cols() != u.size()) {
    throw UsageError("intensity parameters have mismatched dimensions (q = " +
                     std::to_string(q) + ", c0 " + std::to_string(c0.size()) +
                     ", C " + std::to_string(C.rows()) + "x" +
                     std::to_string(C.cols()) + ", u " +
                     std::to_string(u.size()) + ")");
  }
  if (C.cols() == 0) return c0;
  return c0 + C * u;
}

Point uniform_point(const ObservationDomain& domain, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (domain.kind() == ObservationDomain::Kind::Interval) {
    return Point(domain.a() + (domain.b() - domain.a()) * unif(rng));
  }
  const Rect& r = domain.rect();
  for (;;) {
    Point p(r.xmin + (r.xmax - r.xmin) * unif(rng),
            r.ymin + (r.ymax - r.ymin) * unif(rng));
    if (domain.contains(p)) return p;
  }
}

}  // namespace

Eigen::VectorXd intensity_at(const Eigen::VectorXd& c0, const Eigen::MatrixXd& C,
                             const Eigen::VectorXd& u, const BasisSystem& basis,
                             std::span<const Point> points) {
  const Eigen::VectorXd eta = linear_predictor(c0, C, u, basis.size());
  return (basis.eval(points) * eta).array().exp();
}

PointPattern simulate_poisson(const Eigen::VectorXd& c0, const Eigen::MatrixXd& C,
                              const Eigen::VectorXd& u, const ModelSpace& space,
                              std::mt19937_64& rng) {
  const Eigen::VectorXd eta = linear_predictor(c0, C, u, space.q());
  const Eigen::VectorXd node_lambda = (space.quad_basis * eta).array().exp();
  const double total = space.quad_weights.dot(node_lambda);
  if (!std::isfinite(total) || !node_lambda.allFinite()) {
    throw NumericError("intensity is not finite on the domain");
  }

  PointPattern pattern;
  if (total <= 0.0) return pattern;
  std::poisson_distribution<int> count_dist(total);
  const int m = count_dist(rng);
  if (m == 0) return pattern;

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const BasisSystem& basis = space.basis;
  double envelope = 1.2 * node_lambda.maxCoeff();
  pattern.points.reserve(m);
  while (static_cast<int>(pattern.points.size()) < m) {
    const Point t = uniform_point(space.domain(), rng);
    const double lambda =
        std::exp((basis.eval(std::span<const Point>(&t, 1)) * eta)(0));
    if (!std::isfinite(lambda)) {
      throw NumericError("intensity is not finite at " + to_string(t));
    }
    if (lambda > envelope) {
      // Earlier acceptances used a wrong envelope; start over.
      envelope = 1.2 * lambda;
      pattern.points.clear();
      continue;
    }
    if (unif(rng) * envelope < lambda) pattern.points.push_back(t);
  }
  return pattern;
}

PointPattern simulate_poisson(const Eigen::VectorXd& c0, const Eigen::MatrixXd& C,
                              const Eigen::VectorXd& u, const ModelSpace& space,
                              std::uint64_t rng_seed) {
  auto rng = make_stream(rng_seed, 0);
  return simulate_poisson(c0, C, u, space, rng);
}

namespace {

Eigen::VectorXd draw_scores(const Eigen::VectorXd& sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd u(sigma.size());
  for (Eigen::Index k = 0; k < sigma.size(); ++k) u(k) = sigma(k) * normal(rng);
  return u;
}

void check_simulation_params(const ModelParams& theta) {
  if (!theta.space) throw UsageError("model parameters are not bound to a basis");
  if (theta.sigma.size() != theta.C.cols()) {
    throw UsageError("sigma length does not match the number of components");
  }
  for (Eigen::Index k = 0; k < theta.sigma.size(); ++k) {
    if (!(theta.sigma(k) >= 0.0)) throw UsageError("sigma must be nonnegative");
  }
}

}  // namespace

SimulatedReplicates simulate_replicates(const ModelParams& theta, int n,
                                        std::uint64_t rng_seed, int threads) {
  if (n < 1) throw UsageError("number of replicates must be >= 1");
  check_simulation_params(theta);
  SimulatedReplicates out{Dataset{theta.space->domain(), {}}, {}};
  out.dataset.patterns.resize(n);
  out.scores.resize(n);
  parallel_for(n, threads, [&](std::int64_t i) {
    auto rng = make_stream(rng_seed, static_cast<std::uint64_t>(i));
    out.scores[i] = draw_scores(theta.sigma, rng);
    out.dataset.patterns[i] =
        simulate_poisson(theta.c0, theta.C, out.scores[i], *theta.space, rng);
    out.dataset.patterns[i].replicate_id = "r" + std::to_string(i + 1);
  });
  return out;
}

Expectation expect_functional(const PatternFunctional& h,
                              const ModelParams& theta, int n_sims,
                              std::uint64_t rng_seed, int threads) {
  if (n_sims < 1) throw UsageError("n_sims must be >= 1");
  check_simulation_params(theta);
  std::vector<double> values(n_sims);
  parallel_for(n_sims, threads, [&](std::int64_t i) {
    auto rng = make_stream(rng_seed, static_cast<std::uint64_t>(i));
    const Eigen::VectorXd u = draw_scores(theta.sigma, rng);
    const PointPattern x = simulate_poisson(theta.c0, theta.C, u, *theta.space, rng);
    values[i] = h(x);
    if (!std::isfinite(values[i])) {
      throw NumericError("pattern functional returned a non-finite value");
    }
  });
  double sum = 0.0;
  for (double v : values) sum += v;
  Expectation e;
  e.mean = sum / n_sims;
  if (n_sims > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - e.mean) * (v - e.mean);
    e.std_error = std::sqrt(ss / (n_sims - 1) / n_sims);
  }
  return e;
}

}  // namespace mcomp
