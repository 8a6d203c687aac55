#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "folia/errors.hpp"

namespace folia {

/// A point of C^n stored as 2n reals: coordinate 2l-2 is Re z_l and 2l-1 is
/// Im z_l (l is 1-based).
class Point {
 public:
  Point() = default;
  explicit Point(std::vector<double> coords);
  Point(std::initializer_list<double> coords);

  static Point zero(int n);

  int complex_dim() const { return static_cast<int>(coords_.size() / 2); }
  std::size_t size() const { return coords_.size(); }
  bool empty() const { return coords_.empty(); }

  double operator[](std::size_t i) const { return coords_[i]; }
  double& operator[](std::size_t i) { return coords_[i]; }

  std::span<const double> coords() const { return coords_; }
  const std::vector<double>& vec() const { return coords_; }

  Point& operator+=(const Point& o);
  Point& operator-=(const Point& o);
  Point& operator*=(double s);

  bool operator==(const Point&) const = default;

 private:
  std::vector<double> coords_;
};

Point operator+(Point a, const Point& b);
Point operator-(Point a, const Point& b);
Point operator*(double s, Point a);

double dot(const Point& a, const Point& b);
double norm(const Point& a);
double distance(const Point& a, const Point& b);

/// Unit vector along real coordinate `index` in R^{2n}.
Point axis(int n, std::size_t index);

/// Real index of Re z_l / Im z_l.
inline std::size_t re_index(int l) { return static_cast<std::size_t>(2 * l - 2); }
inline std::size_t im_index(int l) { return static_cast<std::size_t>(2 * l - 1); }

std::complex<double> complex_coord(const Point& p, int l);
void set_complex_coord(Point& p, int l, std::complex<double> z);

enum class DomainKind { Box, Polydisc, Ball };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& s);

/// Bounded convex domain in C^n.
///
/// `radii` holds 2n half-extents for a box, n radii for a polydisc and a
/// single radius for a ball.
class Domain {
 public:
  Domain(DomainKind kind, int n, Point center, std::vector<double> radii);

  static Domain unit_polydisc(int n);
  static Domain unit_ball(int n);
  static Domain cube(int n, double half_extent);

  DomainKind kind() const { return kind_; }
  int n() const { return n_; }
  int real_dim() const { return 2 * n_; }
  const Point& center() const { return center_; }
  const std::vector<double>& radii() const { return radii_; }

  bool contains(const Point& p) const;  // closed domain
  bool contains_interior(const Point& p) const;

  /// Euclidean distance from an interior point to the boundary; negative
  /// outside.
  double boundary_distance(const Point& p) const;

  /// Axis-aligned bounding box as (lo, hi) corner points.
  std::pair<Point, Point> bounding_box() const;

  bool operator==(const Domain&) const = default;

 private:
  void check_point(const Point& p) const;

  DomainKind kind_;
  int n_;
  Point center_;
  std::vector<double> radii_;
};

/// A segment of the base foliation: anchor + t e_{Re z1}, t in [t_min, t_max],
/// clipped to the closed domain.
struct BaseLeaf {
  Point anchor;
  double t_min = 0.0;
  double t_max = 0.0;

  Point at(double t) const;
  /// True when `p` differs from the anchor only in the Re z1 coordinate.
  bool same_leaf(const Point& p) const;
};

BaseLeaf base_leaf_through(const Domain& d, const Point& p);

/// Distance from `p` to the closed segment `leaf`.
double distance_to_leaf(const BaseLeaf& leaf, const Point& p);

/// Orthonormal pair spanning the z_l coordinate plane.
struct PlaneFrame {
  int l = 1;
  Point v;  // Re z_l
  Point u;  // Im z_l
};

PlaneFrame plane_frame(int l, int n);

}  // namespace folia
