// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MCOMP_MODEL_HPP_
#define MCOMP_MODEL_HPP_

#include <memory>

#include <Eigen/Dense>

#include "mcomp/basis.hpp"
#include "mcomp/geometry.hpp"

namespace mcomp {

// Everything derived from the basis that the likelihood needs: quadrature,
// basis values at the quadrature nodes, Gram matrix J and penalty Omega.
// Shared read-only between parameter sets.
struct ModelSpace {
  explicit ModelSpace(BasisSystem b) : basis(std::move(b)) {}

  BasisSystem basis;
  int resolution = 0;
  QuadratureRule quad;
  Eigen::MatrixXd quad_basis;   // #nodes x q
  Eigen::VectorXd quad_weights;
  Eigen::MatrixXd gram;         // J
  Eigen::MatrixXd penalty;      // Omega; zero when the basis has no penalty
  bool has_penalty = false;

  int q() const { return basis.size(); }
  const ObservationDomain& domain() const { return basis.domain(); }

  // resolution <= 0 picks default_quadrature_resolution(basis).
  static std::shared_ptr<const ModelSpace> create(BasisSystem basis,
                                                  int resolution = 0);
};

using ModelSpacePtr = std::shared_ptr<const ModelSpace>;

// theta = (c0, C, sigma): log Lambda = (c0 + C U)^T beta with
// U ~ N(0, diag(sigma^2)).  Canonical form has C^T J C = I, sigma
// descending, and the largest-magnitude entry of every column positive.
struct ModelParams {
  Eigen::VectorXd c0;
  Eigen::MatrixXd C;
  Eigen::VectorXd sigma;
  ModelSpacePtr space;

  int q() const { return static_cast<int>(c0.size()); }
  int p() const { return static_cast<int>(C.cols()); }

  // Dimension and positivity checks; throws UsageError.
  void validate() const;
  // Largest deviations from the canonical-form invariants.
  double orthonormality_error() const;
  bool sigma_descending() const;
  bool sign_rule_satisfied() const;
};

// Index of the entry of maximum absolute value, ties to the lowest index.
Eigen::Index max_abs_index(const Eigen::Ref<const Eigen::VectorXd>& v);

}  // namespace mcomp

#endif  // MCOMP_MODEL_HPP_
