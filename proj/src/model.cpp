// Apache License, Version 2.0, refer to LICENSE.txt

#include "mcomp/model.hpp"

#include <cmath>

#include "mcomp/errors.hpp"

namespace mcomp {

std::shared_ptr<const ModelSpace> ModelSpace::create(BasisSystem basis,
                                                     int resolution) {
  auto space = std::make_shared<ModelSpace>(std::move(basis));
  space->resolution =
      resolution > 0 ? resolution : default_quadrature_resolution(space->basis);
  space->quad = make_quadrature(space->basis, space->resolution);
  space->quad_basis = space->basis.eval(space->quad.nodes);
  space->quad_weights = Eigen::Map<const Eigen::VectorXd>(
      space->quad.weights.data(),
      static_cast<Eigen::Index>(space->quad.weights.size()));
  space->gram = gram_matrix(space->basis, space->quad);
  space->has_penalty = space->basis.twice_differentiable();
  if (space->has_penalty) {
    space->penalty = penalty_matrix(space->basis, space->quad);
  } else {
    space->penalty = Eigen::MatrixXd::Zero(space->q(), space->q());
  }
  return space;
}

void ModelParams::validate() const {
  if (!space) throw UsageError("model parameters are not bound to a basis");
  if (c0.size() != space->q()) {
    throw UsageError("c0 has length " + std::to_string(c0.size()) +
                     ", basis has q = " + std::to_string(space->q()));
  }
  if (C.rows() != space->q()) {
    throw UsageError("C has " + std::to_string(C.rows()) + " rows, expected " +
                     std::to_string(space->q()));
  }
  if (sigma.size() != C.cols()) {
    throw UsageError("sigma length does not match the number of components");
  }
  for (Eigen::Index k = 0; k < sigma.size(); ++k) {
    if (!(sigma(k) > 0.0) || !std::isfinite(sigma(k))) {
      throw UsageError("sigma must be positive and finite");
    }
  }
  if (!c0.allFinite() || !C.allFinite()) {
    throw UsageError("model coefficients must be finite");
  }
}

double ModelParams::orthonormality_error() const {
  if (p() == 0) return 0.0;
  const Eigen::MatrixXd G = C.transpose() * space->gram * C;
  return (G - Eigen::MatrixXd::Identity(p(), p())).cwiseAbs().maxCoeff();
}

bool ModelParams::sigma_descending() const {
  for (Eigen::Index k = 1; k < sigma.size(); ++k) {
    if (sigma(k) > sigma(k - 1)) return false;
  }
  return true;
}

bool ModelParams::sign_rule_satisfied() const {
  for (Eigen::Index k = 0; k < C.cols(); ++k) {
    if (C(max_abs_index(C.col(k)), k) <= 0.0) return false;
  }
  return true;
}

Eigen::Index max_abs_index(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < v.size(); ++j) {
    if (std::abs(v(j)) > std::abs(v(best))) best = j;
  }
  return best;
}

}  // namespace mcomp
