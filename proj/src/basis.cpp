// Apache License, Version 2.0, refer to LICENSE.txt

#include "mcomp/basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mcomp/errors.hpp"

namespace mcomp {

BasisSystem BasisSystem::bspline(const ObservationDomain& domain,
                                 int num_interior_knots, int degree) {
  if (domain.kind() != ObservationDomain::Kind::Interval) {
    throw UsageError("B-spline basis requires a 1D interval domain");
  }
  if (degree < 1) throw UsageError("B-spline degree must be >= 1");
  if (num_interior_knots < 0) {
    throw UsageError("number of interior knots must be >= 0");
  }
  const double a = domain.a();
  const double b = domain.b();
  std::vector<double> knots(degree + 1, a);
  for (int i = 1; i <= num_interior_knots; ++i) {
    knots.push_back(a + (b - a) * i / (num_interior_knots + 1));
  }
  knots.insert(knots.end(), degree + 1, b);
  return bspline_from_knots(domain, degree, std::move(knots));
}

BasisSystem BasisSystem::bspline_from_knots(const ObservationDomain& domain,
                                            int degree,
                                            std::vector<double> knots) {
  if (domain.kind() != ObservationDomain::Kind::Interval) {
    throw UsageError("B-spline basis requires a 1D interval domain");
  }
  if (degree < 1) throw UsageError("B-spline degree must be >= 1");
  const int nk = static_cast<int>(knots.size());
  if (nk < 2 * (degree + 1)) throw UsageError("knot vector too short");
  if (!std::is_sorted(knots.begin(), knots.end())) {
    throw UsageError("knot vector must be nondecreasing");
  }
  for (int i = 0; i <= degree; ++i) {
    if (knots[i] != domain.a() || knots[nk - 1 - i] != domain.b()) {
      throw UsageError("knot vector must be clamped to the domain end points");
    }
  }
  for (int i = degree + 1; i < nk - degree - 1; ++i) {
    if (!(knots[i] > domain.a() && knots[i] < domain.b())) {
      throw UsageError("interior knots must lie strictly inside the domain");
    }
  }
  BasisSystem basis;
  basis.kind_ = Kind::BSpline;
  basis.domain_ = domain;
  basis.degree_ = degree;
  basis.q_ = nk - degree - 1;
  basis.knots_ = std::move(knots);
  return basis;
}

BasisSystem BasisSystem::gaussian_kernel(const ObservationDomain& domain,
                                         std::vector<Point> centers,
                                         std::vector<double> bandwidths) {
  if (domain.kind() != ObservationDomain::Kind::Planar) {
    throw UsageError("kernel basis requires a planar domain");
  }
  if (centers.empty()) throw DomainError("kernel basis has no centers");
  if (centers.size() != bandwidths.size()) {
    throw UsageError("kernel centers and bandwidths differ in length");
  }
  for (std::size_t k = 0; k < centers.size(); ++k) {
    if (!domain.contains(centers[k])) {
      throw UsageError("kernel center " + to_string(centers[k]) +
                       " lies outside the domain");
    }
    if (!(bandwidths[k] > 0.0) || !std::isfinite(bandwidths[k])) {
      throw UsageError("kernel bandwidths must be positive and finite");
    }
  }
  BasisSystem basis;
  basis.kind_ = Kind::GaussianKernel;
  basis.domain_ = domain;
  basis.q_ = static_cast<int>(centers.size());
  basis.centers_ = std::move(centers);
  basis.bandwidths_ = std::move(bandwidths);
  return basis;
}

std::vector<double> BasisSystem::breakpoints() const {
  std::vector<double> out;
  if (kind_ != Kind::BSpline) return out;
  for (std::size_t i = degree_ + 1; i + degree_ + 1 < knots_.size(); ++i) {
    if (out.empty() || knots_[i] > out.back()) out.push_back(knots_[i]);
  }
  return out;
}

bool BasisSystem::twice_differentiable() const {
  return kind_ == Kind::GaussianKernel || degree_ >= 2;
}

std::vector<double> BasisSystem::hessian_entry_weights() const {
  if (domain_.dim() == 1) return {1.0};
  return {1.0, 2.0, 1.0};
}

void BasisSystem::check_points(std::span<const Point> points) const {
  for (const Point& p : points) {
    if (!domain_.contains(p)) {
      throw UsageError("point " + to_string(p) +
                       " lies outside the basis domain");
    }
  }
}

// Index of the knot span [knots[s], knots[s+1]) containing t, with t = b
// assigned to the last nonempty span.
int BasisSystem::spline_span(double t) const {
  const int n = q_ - 1;
  if (t >= knots_[n + 1]) return n;
  auto it = std::upper_bound(knots_.begin() + degree_, knots_.begin() + n + 1, t);
  return static_cast<int>(it - knots_.begin()) - 1;
}

// Values and derivatives up to order nderiv of the degree+1 splines that are
// nonzero on the span; ders(k, j) is the k-th derivative of spline
// span - degree + j.
void BasisSystem::spline_derivs(int span, double t, int nderiv,
                                Eigen::MatrixXd& ders) const {
  const int p = degree_;
  const auto& U = knots_;
  Eigen::MatrixXd ndu(p + 1, p + 1);
  Eigen::VectorXd left(p + 1), right(p + 1);
  ndu(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left(j) = t - U[span + 1 - j];
    right(j) = U[span + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu(j, r) = right(r + 1) + left(j - r);
      const double temp = ndu(r, j - 1) / ndu(j, r);
      ndu(r, j) = saved + right(r + 1) * temp;
      saved = left(j - r) * temp;
    }
    ndu(j, j) = saved;
  }

  ders.setZero(nderiv + 1, p + 1);
  for (int j = 0; j <= p; ++j) ders(0, j) = ndu(j, p);

  Eigen::MatrixXd a(2, p + 1);
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a(0, 0) = 1.0;
    for (int k = 1; k <= nderiv; ++k) {
      double d = 0.0;
      const int rk = r - k;
      const int pk = p - k;
      if (r >= k) {
        a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
        d = a(s2, 0) * ndu(rk, pk);
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
        d += a(s2, j) * ndu(rk + j, pk);
      }
      if (r <= pk) {
        a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
        d += a(s2, k) * ndu(r, pk);
      }
      ders(k, r) = d;
      std::swap(s1, s2);
    }
  }
  int factor = p;
  for (int k = 1; k <= nderiv; ++k) {
    for (int j = 0; j <= p; ++j) ders(k, j) *= factor;
    factor *= (p - k);
  }
}

Eigen::VectorXd BasisSystem::kernel_weights(const Point& t) const {
  Eigen::VectorXd e(q_);
  for (int k = 0; k < q_; ++k) {
    const double dx = t[0] - centers_[k][0];
    const double dy = t[1] - centers_[k][1];
    const double h = bandwidths_[k];
    e(k) = -(dx * dx + dy * dy) / (2.0 * h * h);
  }
  // The renormalized kernels are invariant to a common scale factor.
  return (e.array() - e.maxCoeff()).exp();
}

Eigen::MatrixXd BasisSystem::eval(std::span<const Point> points) const {
  check_points(points);
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, q_);
  if (kind_ == Kind::BSpline) {
    Eigen::MatrixXd ders;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = points[i][0];
      const int span = spline_span(t);
      spline_derivs(span, t, 0, ders);
      for (int j = 0; j <= degree_; ++j) out(i, span - degree_ + j) = ders(0, j);
    }
    return out;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd g = kernel_weights(points[i]);
    out.row(i) = (g / g.sum()).transpose();
  }
  return out;
}

std::vector<Eigen::MatrixXd> BasisSystem::second_derivatives(
    std::span<const Point> points) const {
  if (!twice_differentiable()) {
    throw UsageError("second derivatives need a spline of degree >= 2");
  }
  check_points(points);
  const auto n = static_cast<Eigen::Index>(points.size());
  if (kind_ == Kind::BSpline) {
    Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(n, q_);
    Eigen::MatrixXd ders;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = points[i][0];
      const int span = spline_span(t);
      spline_derivs(span, t, 2, ders);
      for (int j = 0; j <= degree_; ++j) d2(i, span - degree_ + j) = ders(2, j);
    }
    return {d2};
  }

  // With a_k = -(t - tau_k) / delta_k^2, abar = sum_k beta_k a_k and
  // Hbar = sum_k beta_k (a_k a_k^T - I / delta_k^2), the quotient rule gives
  // H beta_k = beta_k [a_k a_k^T - I/delta_k^2 - a_k abar^T - abar a_k^T
  //                    - Hbar + 2 abar abar^T].
  Eigen::MatrixXd hxx(n, q_), hxy(n, q_), hyy(n, q_);
  Eigen::MatrixXd a(q_, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Point& t = points[i];
    const Eigen::VectorXd g = kernel_weights(t);
    const Eigen::VectorXd beta = g / g.sum();
    Eigen::Vector2d abar = Eigen::Vector2d::Zero();
    Eigen::Matrix2d hbar = Eigen::Matrix2d::Zero();
    for (int k = 0; k < q_; ++k) {
      const double inv = 1.0 / (bandwidths_[k] * bandwidths_[k]);
      a(k, 0) = -(t[0] - centers_[k][0]) * inv;
      a(k, 1) = -(t[1] - centers_[k][1]) * inv;
      const Eigen::Vector2d ak = a.row(k).transpose();
      abar += beta(k) * ak;
      hbar += beta(k) * (ak * ak.transpose() -
                         inv * Eigen::Matrix2d::Identity());
    }
    const Eigen::Matrix2d common = 2.0 * abar * abar.transpose() - hbar;
    for (int k = 0; k < q_; ++k) {
      const double inv = 1.0 / (bandwidths_[k] * bandwidths_[k]);
      const Eigen::Vector2d ak = a.row(k).transpose();
      const Eigen::Matrix2d h =
          beta(k) * (ak * ak.transpose() - inv * Eigen::Matrix2d::Identity() -
                     ak * abar.transpose() - abar * ak.transpose() + common);
      hxx(i, k) = h(0, 0);
      hxy(i, k) = h(0, 1);
      hyy(i, k) = h(1, 1);
    }
  }
  return {hxx, hxy, hyy};
}

BasisSystem make_bspline_basis(const ObservationDomain& domain,
                               int num_interior_knots, int degree) {
  return BasisSystem::bspline(domain, num_interior_knots, degree);
}

BasisSystem make_kernel_basis(const ObservationDomain& domain, int grid_count) {
  if (domain.kind() != ObservationDomain::Kind::Planar) {
    throw UsageError("kernel basis requires a planar domain");
  }
  const int side = static_cast<int>(std::lround(std::sqrt(grid_count)));
  if (grid_count < 4 || side * side != grid_count) {
    throw UsageError("kernel grid_count must be a perfect square >= 4");
  }
  const Rect& r = domain.rect();
  std::vector<Point> centers;
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) {
      Point c(r.xmin + (r.xmax - r.xmin) * i / (side - 1),
              r.ymin + (r.ymax - r.ymin) * j / (side - 1));
      if (domain.contains(c)) centers.push_back(c);
    }
  }
  if (centers.empty()) {
    throw DomainError("every kernel center fell outside the domain");
  }
  if (centers.size() == 1) {
    throw DomainError("only one kernel center inside the domain; bandwidth "
                      "is undefined");
  }
  std::vector<double> bandwidths(centers.size());
  for (std::size_t k = 0; k < centers.size(); ++k) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < centers.size(); ++j) {
      if (j == k) continue;
      nearest = std::min(nearest, std::hypot(centers[k][0] - centers[j][0],
                                             centers[k][1] - centers[j][1]));
    }
    bandwidths[k] = 0.5 * nearest;
  }
  return BasisSystem::gaussian_kernel(domain, std::move(centers),
                                      std::move(bandwidths));
}

int default_quadrature_resolution(const BasisSystem& basis) {
  return basis.kind() == BasisSystem::Kind::BSpline ? 5 : 128;
}

QuadratureRule make_quadrature(const BasisSystem& basis, int resolution) {
  return build_quadrature(basis.domain(), resolution, basis.breakpoints());
}

Eigen::MatrixXd gram_matrix(const BasisSystem& basis,
                            const QuadratureRule& quad) {
  const Eigen::MatrixXd B = basis.eval(quad.nodes);
  const Eigen::Map<const Eigen::VectorXd> w(quad.weights.data(),
                                            static_cast<Eigen::Index>(quad.size()));
  Eigen::MatrixXd J = B.transpose() * w.asDiagonal() * B;
  return 0.5 * (J + J.transpose());
}

Eigen::MatrixXd penalty_matrix(const BasisSystem& basis,
                               const QuadratureRule& quad) {
  if (!basis.twice_differentiable()) {
    throw UsageError("roughness penalty needs a spline of degree >= 2");
  }
  const auto hess = basis.second_derivatives(quad.nodes);
  const auto mult = basis.hessian_entry_weights();
  const Eigen::Map<const Eigen::VectorXd> w(quad.weights.data(),
                                            static_cast<Eigen::Index>(quad.size()));
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  for (std::size_t e = 0; e < hess.size(); ++e) {
    omega += mult[e] * hess[e].transpose() * w.asDiagonal() * hess[e];
  }
  return 0.5 * (omega + omega.transpose());
}

}  // namespace mcomp
