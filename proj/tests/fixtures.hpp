// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MCOMP_TESTS_FIXTURES_HPP_
#define MCOMP_TESTS_FIXTURES_HPP_

#include <cmath>

#include "mcomp/model.hpp"
#include "mcomp/point_process.hpp"
#include "oracles.hpp"

namespace mcomp::fixture {

// Cubic B-splines on [0, 1].
inline ModelSpacePtr unit_cubic_space(int interior_knots = 4) {
  return ModelSpace::create(
      make_bspline_basis(ObservationDomain::interval(0.0, 1.0), interior_knots, 3));
}

// Constant intensity `rate` with no components.
inline ModelParams constant_rate(const ModelSpacePtr& space, double rate) {
  ModelParams theta;
  theta.space = space;
  theta.c0 = Eigen::VectorXd::Constant(space->q(), std::log(rate));
  theta.C.resize(space->q(), 0);
  theta.sigma.resize(0);
  return theta;
}

// lambda0 = 5 on [0, 1], phi_1 = 1, sigma_1 = 0.5.
inline ModelParams size_component(const ModelSpacePtr& space) {
  ModelParams theta = constant_rate(space, 5.0);
  theta.C = Eigen::MatrixXd::Ones(space->q(), 1);
  theta.sigma = Eigen::VectorXd::Constant(1, 0.5);
  return theta;
}

// size_component plus phi_2(t) = sqrt(3) (2t - 1), sigma = (0.5, 0.3).
inline ModelParams size_and_tilt(const ModelSpacePtr& space) {
  ModelParams theta = size_component(space);
  theta.C.conservativeResize(Eigen::NoChange, 2);
  theta.C.col(1) = oracle::interpolate(
      space->basis, [](double t) { return std::sqrt(3.0) * (2.0 * t - 1.0); });
  theta.sigma = Eigen::Vector2d(0.5, 0.3);
  return theta;
}

inline PointPattern five_points() {
  return PointPattern{"fixed", {0.1, 0.25, 0.4, 0.7, 0.95}};
}

}  // namespace mcomp::fixture

#endif  // MCOMP_TESTS_FIXTURES_HPP_
