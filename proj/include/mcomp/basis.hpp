// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MCOMP_BASIS_HPP_
#define MCOMP_BASIS_HPP_

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mcomp/geometry.hpp"

namespace mcomp {

// The basis vector beta(t) = (beta_1(t), ..., beta_q(t)) in which the mean
// log-intensity and the components are expanded.  Either clamped B-splines
// on an interval or renormalized Gaussian radial kernels on a planar domain.
// Both kinds form a partition of unity.
class BasisSystem {
 public:
  enum class Kind { BSpline, GaussianKernel };

  // Clamped B-splines with equally spaced interior knots.
  static BasisSystem bspline(const ObservationDomain& domain,
                             int num_interior_knots, int degree);
  // Clamped B-splines from an explicit full knot vector (degree + 1 copies
  // of each end point).
  static BasisSystem bspline_from_knots(const ObservationDomain& domain,
                                        int degree, std::vector<double> knots);
  // Renormalized kernels with the given centers and bandwidths.
  static BasisSystem gaussian_kernel(const ObservationDomain& domain,
                                     std::vector<Point> centers,
                                     std::vector<double> bandwidths);

  Kind kind() const { return kind_; }
  int size() const { return q_; }
  const ObservationDomain& domain() const { return domain_; }

  int degree() const { return degree_; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<Point>& centers() const { return centers_; }
  const std::vector<double>& bandwidths() const { return bandwidths_; }

  // Distinct interior knots; quadrature panels align with them.
  std::vector<double> breakpoints() const;

  // Row i is beta(points[i])^T.  Throws UsageError naming the first point
  // outside the attached domain.
  Eigen::MatrixXd eval(std::span<const Point> points) const;

  // Second derivatives of every basis function at every point.  One matrix
  // (#points x q) per independent Hessian entry: {d2/dt2} in 1D,
  // {d2/dx2, d2/dxdy, d2/dy2} in 2D.
  std::vector<Eigen::MatrixXd> second_derivatives(
      std::span<const Point> points) const;

  // Multiplicity of each entry of second_derivatives() in the Frobenius
  // norm of the Hessian.
  std::vector<double> hessian_entry_weights() const;

  // Whether the roughness penalty is defined (degree >= 2 for splines).
  bool twice_differentiable() const;

  friend bool operator==(const BasisSystem&, const BasisSystem&) = default;

 private:
  BasisSystem() = default;

  void check_points(std::span<const Point> points) const;
  // Values, first and second derivatives of the nonzero splines at t.
  int spline_span(double t) const;
  void spline_derivs(int span, double t, int nderiv,
                     Eigen::MatrixXd& ders) const;
  // Scaled kernel values at t (max entry 1); beta = g / g.sum().
  Eigen::VectorXd kernel_weights(const Point& t) const;

  Kind kind_ = Kind::BSpline;
  int q_ = 0;
  ObservationDomain domain_ = ObservationDomain::interval(0.0, 1.0);
  int degree_ = 0;
  std::vector<double> knots_;
  std::vector<Point> centers_;
  std::vector<double> bandwidths_;
};

BasisSystem make_bspline_basis(const ObservationDomain& domain,
                               int num_interior_knots, int degree);

// Centers start on a sqrt(grid_count) x sqrt(grid_count) lattice spanning the
// bounding rectangle (corners included).  Centers outside the domain are
// dropped, then each bandwidth is half the distance to the nearest surviving
// center.
BasisSystem make_kernel_basis(const ObservationDomain& domain, int grid_count);

// Quadrature on the basis domain, with 1D panels aligned to knot spans.
QuadratureRule make_quadrature(const BasisSystem& basis, int resolution);

// Default resolution: five nodes per knot span in 1D, 128 x 128 cells in 2D.
int default_quadrature_resolution(const BasisSystem& basis);

// J = sum_nodes w beta beta^T.
Eigen::MatrixXd gram_matrix(const BasisSystem& basis,
                            const QuadratureRule& quad);

// Omega with c^T Omega c = integral of the squared Frobenius norm of the
// Hessian of c^T beta.  Throws UsageError for splines of degree < 2.
Eigen::MatrixXd penalty_matrix(const BasisSystem& basis,
                               const QuadratureRule& quad);

}  // namespace mcomp

#endif  // MCOMP_BASIS_HPP_
