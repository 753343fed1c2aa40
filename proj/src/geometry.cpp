// Apache License, Version 2.0, refer to LICENSE.txt

#include "mcomp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "mcomp/errors.hpp"

namespace mcomp {

std::string to_string(const Point& p) {
  std::ostringstream os;
  os.precision(17);
  if (p.dim == 1) {
    os << "(" << p[0] << ")";
  } else {
    os << "(" << p[0] << ", " << p[1] << ")";
  }
  return os.str();
}

double shoelace_area(const std::vector<Point>& polygon) {
  double twice = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = polygon[i];
    const Point& q = polygon[(i + 1) % n];
    twice += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * std::abs(twice);
}

namespace {

double cross(const Point& o, const Point& a, const Point& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

bool on_segment(const Point& p, const Point& a, const Point& b, double tol) {
  const double dx = b[0] - a[0];
  const double dy = b[1] - a[1];
  const double len2 = dx * dx + dy * dy;
  double s = 0.0;
  if (len2 > 0.0) {
    s = std::clamp(((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2, 0.0, 1.0);
  }
  const double ex = a[0] + s * dx - p[0];
  const double ey = a[1] + s * dy - p[1];
  return std::hypot(ex, ey) <= tol;
}

int orientation(const Point& a, const Point& b, const Point& c) {
  const double v = cross(a, b, c);
  return (v > 0) - (v < 0);
}

bool segments_intersect(const Point& p1, const Point& p2, const Point& q1,
                        const Point& q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(q1, p1, p2, 0.0)) return true;
  if (o2 == 0 && on_segment(q2, p1, p2, 0.0)) return true;
  if (o3 == 0 && on_segment(p1, q1, q2, 0.0)) return true;
  if (o4 == 0 && on_segment(p2, q1, q2, 0.0)) return true;
  return false;
}

bool is_simple(const std::vector<Point>& poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // adjacent edges share a vertex
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j],
                             poly[(j + 1) % n])) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

ObservationDomain ObservationDomain::interval(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
    throw DomainError("interval domain requires finite a < b");
  }
  ObservationDomain d;
  d.kind_ = Kind::Interval;
  d.a_ = a;
  d.b_ = b;
  d.measure_ = b - a;
  return d;
}

ObservationDomain ObservationDomain::planar(
    const Rect& rect, std::optional<std::vector<Point>> polygon) {
  if (!(rect.xmin < rect.xmax) || !(rect.ymin < rect.ymax) ||
      !std::isfinite(rect.area())) {
    throw DomainError("planar domain requires a non-degenerate rectangle");
  }
  ObservationDomain d;
  d.kind_ = Kind::Planar;
  d.rect_ = rect;
  d.measure_ = rect.area();
  if (polygon) {
    auto& poly = *polygon;
    if (poly.size() > 1 && poly.front() == poly.back()) poly.pop_back();
    if (poly.size() < 3) {
      throw DomainError("polygon mask needs at least 3 distinct vertices");
    }
    for (const Point& v : poly) {
      if (v.dim != 2) throw DomainError("polygon vertices must be 2D");
      if (v[0] < rect.xmin || v[0] > rect.xmax || v[1] < rect.ymin ||
          v[1] > rect.ymax) {
        throw DomainError("polygon vertex " + to_string(v) +
                          " lies outside the bounding rectangle");
      }
    }
    if (!is_simple(poly)) throw DomainError("polygon mask is not simple");
    d.measure_ = shoelace_area(poly);
    if (!(d.measure_ > 0.0)) throw DomainError("polygon mask has zero area");
    d.polygon_ = std::move(poly);
  }
  return d;
}

bool ObservationDomain::contains(const Point& p) const {
  if (p.dim != dim()) {
    throw UsageError("point " + to_string(p) + " has dimension " +
                     std::to_string(p.dim) + ", domain has dimension " +
                     std::to_string(dim()));
  }
  if (kind_ == Kind::Interval) return a_ <= p[0] && p[0] <= b_;

  if (p[0] < rect_.xmin || p[0] > rect_.xmax || p[1] < rect_.ymin ||
      p[1] > rect_.ymax) {
    return false;
  }
  if (!polygon_) return true;

  const auto& poly = *polygon_;
  const double tol =
      1e-12 * std::hypot(rect_.xmax - rect_.xmin, rect_.ymax - rect_.ymin);
  const std::size_t n = poly.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = poly[i];
    const Point& b = poly[j];
    if (on_segment(p, a, b, tol)) return true;
    if ((a[1] > p[1]) != (b[1] > p[1])) {
      const double x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
      if (p[0] < x) inside = !inside;
    }
  }
  return inside;
}

double QuadratureRule::total_weight() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  if (n < 1) throw UsageError("Gauss-Legendre rule needs n >= 1");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  if (n == 1) {
    weights[0] = 2.0;
    return;
  }
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess, refined by Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

QuadratureRule build_quadrature(const ObservationDomain& domain, int resolution,
                                const std::vector<double>& breakpoints) {
  if (resolution < 1) throw UsageError("quadrature resolution must be >= 1");
  if (!(domain.measure() > 0.0)) throw DomainError("domain has zero measure");

  QuadratureRule rule;
  if (domain.kind() == ObservationDomain::Kind::Interval) {
    std::vector<double> cuts{domain.a()};
    for (double t : breakpoints) {
      if (t > cuts.back() && t < domain.b()) cuts.push_back(t);
    }
    cuts.push_back(domain.b());

    std::vector<double> gx, gw;
    gauss_legendre(resolution, gx, gw);
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
      const double half = 0.5 * (cuts[s + 1] - cuts[s]);
      const double mid = 0.5 * (cuts[s + 1] + cuts[s]);
      for (int i = 0; i < resolution; ++i) {
        rule.nodes.emplace_back(mid + half * gx[i]);
        rule.weights.push_back(half * gw[i]);
      }
    }
    rule.descriptor = "gauss-legendre " + std::to_string(resolution) +
                      " nodes x " + std::to_string(cuts.size() - 1) + " panels";
    return rule;
  }

  const Rect& r = domain.rect();
  const double hx = (r.xmax - r.xmin) / resolution;
  const double hy = (r.ymax - r.ymin) / resolution;
  const double cell = hx * hy;
  for (int j = 0; j < resolution; ++j) {
    for (int i = 0; i < resolution; ++i) {
      Point c(r.xmin + (i + 0.5) * hx, r.ymin + (j + 0.5) * hy);
      if (domain.contains(c)) {
        rule.nodes.push_back(c);
        rule.weights.push_back(cell);
      }
    }
  }
  if (rule.nodes.empty()) {
    throw DomainError("no quadrature cell center falls inside the domain");
  }
  rule.descriptor = "masked grid " + std::to_string(resolution) + "x" +
                    std::to_string(resolution);
  return rule;
}

}  // namespace mcomp
