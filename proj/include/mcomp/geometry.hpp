// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MCOMP_GEOMETRY_HPP_
#define MCOMP_GEOMETRY_HPP_

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace mcomp {

// A location in a temporal (dim 1) or planar (dim 2) domain.
struct Point {
  std::array<double, 2> coord{0.0, 0.0};
  int dim = 1;

  Point() = default;
  Point(double t) : coord{t, 0.0}, dim(1) {}  // NOLINT: implicit for 1D use
  Point(double x, double y) : coord{x, y}, dim(2) {}

  double operator[](int i) const { return coord[i]; }
  friend bool operator==(const Point&, const Point&) = default;
};

std::string to_string(const Point& p);

struct Rect {
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  double area() const { return (xmax - xmin) * (ymax - ymin); }
  friend bool operator==(const Rect&, const Rect&) = default;
};

// The common observation region B: a closed interval, or a rectangle with an
// optional simple polygon mask (no holes).  Immutable after construction.
class ObservationDomain {
 public:
  enum class Kind { Interval, Planar };

  static ObservationDomain interval(double a, double b);
  static ObservationDomain planar(const Rect& rect,
                                  std::optional<std::vector<Point>> polygon = {});

  Kind kind() const { return kind_; }
  int dim() const { return kind_ == Kind::Interval ? 1 : 2; }
  double a() const { return a_; }
  double b() const { return b_; }
  const Rect& rect() const { return rect_; }
  const std::optional<std::vector<Point>>& polygon() const { return polygon_; }

  // Length of the interval, or polygon area (rectangle area when unmasked).
  double measure() const { return measure_; }

  // Boundary points count as inside.  Throws UsageError on dimension
  // mismatch.
  bool contains(const Point& p) const;

  friend bool operator==(const ObservationDomain&,
                         const ObservationDomain&) = default;

 private:
  ObservationDomain() = default;

  Kind kind_ = Kind::Interval;
  double a_ = 0, b_ = 0;
  Rect rect_;
  std::optional<std::vector<Point>> polygon_;
  double measure_ = 0;
};

// Nodes and positive weights realizing integrals over B.
struct QuadratureRule {
  std::vector<Point> nodes;
  std::vector<double> weights;
  std::string descriptor;

  std::size_t size() const { return nodes.size(); }
  double total_weight() const;
};

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights);

// 1D: `resolution` Gauss-Legendre nodes on each panel, where panels are the
// spans between consecutive distinct `breakpoints` (the whole interval when
// empty).  2D: a resolution x resolution grid over the bounding rectangle,
// keeping the centers of cells that pass the mask test, each weighted by the
// cell area.
QuadratureRule build_quadrature(const ObservationDomain& domain, int resolution,
                                const std::vector<double>& breakpoints = {});

double shoelace_area(const std::vector<Point>& polygon);

}  // namespace mcomp

#endif  // MCOMP_GEOMETRY_HPP_
