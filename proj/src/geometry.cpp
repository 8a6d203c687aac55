#include "folia/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace folia {

Point::Point(std::vector<double> coords) : coords_(std::move(coords)) {
  if (coords_.empty() || coords_.size() % 2 != 0) {
    throw DomainError("point must have an even, nonzero number of real coordinates");
  }
  for (double c : coords_) {
    if (!std::isfinite(c)) throw DomainError("point coordinates must be finite");
  }
}

Point::Point(std::initializer_list<double> coords) : Point(std::vector<double>(coords)) {}

Point Point::zero(int n) {
  if (n < 1) throw DomainError("complex dimension must be >= 1");
  return Point(std::vector<double>(static_cast<std::size_t>(2 * n), 0.0));
}

Point& Point::operator+=(const Point& o) {
  for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] += o.coords_[i];
  return *this;
}

Point& Point::operator-=(const Point& o) {
  for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] -= o.coords_[i];
  return *this;
}

Point& Point::operator*=(double s) {
  for (double& c : coords_) c *= s;
  return *this;
}

Point operator+(Point a, const Point& b) { return a += b; }
Point operator-(Point a, const Point& b) { return a -= b; }
Point operator*(double s, Point a) { return a *= s; }

double dot(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Point& a) {
  double s = 0.0;
  for (double c : a.coords()) s += c * c;
  return std::sqrt(s);
}

double distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

Point axis(int n, std::size_t index) {
  Point e = Point::zero(n);
  if (index >= e.size()) throw DomainError("axis index out of range");
  e[index] = 1.0;
  return e;
}

static void check_index(const Point& p, int l) {
  if (l < 1 || l > p.complex_dim()) {
    throw DomainError("complex coordinate index " + std::to_string(l) + " out of range 1.." +
                      std::to_string(p.complex_dim()));
  }
}

std::complex<double> complex_coord(const Point& p, int l) {
  check_index(p, l);
  return {p[re_index(l)], p[im_index(l)]};
}

void set_complex_coord(Point& p, int l, std::complex<double> z) {
  check_index(p, l);
  p[re_index(l)] = z.real();
  p[im_index(l)] = z.imag();
}

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::Box:
      return "box";
    case DomainKind::Polydisc:
      return "polydisc";
    case DomainKind::Ball:
      return "ball";
  }
  return "?";
}

DomainKind domain_kind_from_string(const std::string& s) {
  if (s == "box") return DomainKind::Box;
  if (s == "polydisc") return DomainKind::Polydisc;
  if (s == "ball") return DomainKind::Ball;
  throw DomainError("unknown domain kind '" + s + "'");
}

Domain::Domain(DomainKind kind, int n, Point center, std::vector<double> radii)
    : kind_(kind), n_(n), center_(std::move(center)), radii_(std::move(radii)) {
  if (n_ < 1) throw DomainError("complex dimension must be >= 1");
  if (center_.size() != static_cast<std::size_t>(2 * n_)) {
    throw DomainError("domain center must have 2n coordinates");
  }
  std::size_t expected = 0;
  switch (kind_) {
    case DomainKind::Box:
      expected = static_cast<std::size_t>(2 * n_);
      break;
    case DomainKind::Polydisc:
      expected = static_cast<std::size_t>(n_);
      break;
    case DomainKind::Ball:
      expected = 1;
      break;
  }
  if (radii_.size() != expected) {
    throw DomainError(to_string(kind_) + " needs " + std::to_string(expected) + " radii, got " +
                      std::to_string(radii_.size()));
  }
  for (double r : radii_) {
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("domain radii must be positive");
  }
}

Domain Domain::unit_polydisc(int n) { return Domain(DomainKind::Polydisc, n, Point::zero(n), std::vector<double>(n, 1.0)); }

Domain Domain::unit_ball(int n) { return Domain(DomainKind::Ball, n, Point::zero(n), {1.0}); }

Domain Domain::cube(int n, double half_extent) {
  return Domain(DomainKind::Box, n, Point::zero(n), std::vector<double>(2 * n, half_extent));
}

void Domain::check_point(const Point& p) const {
  if (p.size() != static_cast<std::size_t>(2 * n_)) {
    throw DomainError("point dimension " + std::to_string(p.size()) + " does not match domain (" +
                      std::to_string(2 * n_) + ")");
  }
}

double Domain::boundary_distance(const Point& p) const {
  check_point(p);
  double best = std::numeric_limits<double>::infinity();
  switch (kind_) {
    case DomainKind::Box:
      for (std::size_t i = 0; i < p.size(); ++i) {
        best = std::min(best, radii_[i] - std::abs(p[i] - center_[i]));
      }
      break;
    case DomainKind::Polydisc:
      for (int l = 1; l <= n_; ++l) {
        const double r = std::hypot(p[re_index(l)] - center_[re_index(l)],
                                    p[im_index(l)] - center_[im_index(l)]);
        best = std::min(best, radii_[static_cast<std::size_t>(l - 1)] - r);
      }
      break;
    case DomainKind::Ball:
      best = radii_[0] - distance(p, center_);
      break;
  }
  return best;
}

bool Domain::contains(const Point& p) const { return boundary_distance(p) >= 0.0; }

bool Domain::contains_interior(const Point& p) const { return boundary_distance(p) > 0.0; }

std::pair<Point, Point> Domain::bounding_box() const {
  Point lo = center_;
  Point hi = center_;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    double r = 0.0;
    switch (kind_) {
      case DomainKind::Box:
        r = radii_[i];
        break;
      case DomainKind::Polydisc:
        r = radii_[i / 2];
        break;
      case DomainKind::Ball:
        r = radii_[0];
        break;
    }
    lo[i] -= r;
    hi[i] += r;
  }
  return {lo, hi};
}

Point BaseLeaf::at(double t) const {
  Point p = anchor;
  p[0] += t;
  return p;
}

bool BaseLeaf::same_leaf(const Point& p) const {
  if (p.size() != anchor.size()) return false;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] != anchor[i]) return false;
  }
  return true;
}

BaseLeaf base_leaf_through(const Domain& d, const Point& p) {
  if (!d.contains(p)) throw DomainError("point lies outside the domain");
  const Point& c = d.center();
  double half = 0.0;
  switch (d.kind()) {
    case DomainKind::Box:
      half = d.radii()[0];
      break;
    case DomainKind::Polydisc: {
      const double r = d.radii()[0];
      const double y = p[1] - c[1];
      half = std::sqrt(std::max(0.0, r * r - y * y));
      break;
    }
    case DomainKind::Ball: {
      double rest = 0.0;
      for (std::size_t i = 1; i < p.size(); ++i) rest += (p[i] - c[i]) * (p[i] - c[i]);
      const double r = d.radii()[0];
      half = std::sqrt(std::max(0.0, r * r - rest));
      break;
    }
  }
  const double offset = p[0] - c[0];
  BaseLeaf leaf{p, -half - offset, half - offset};
  if (!(leaf.t_min < leaf.t_max)) throw DomainError("point lies on the boundary; leaf is degenerate");
  return leaf;
}

double distance_to_leaf(const BaseLeaf& leaf, const Point& p) {
  double s = 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    const double d = p[i] - leaf.anchor[i];
    s += d * d;
  }
  const double t = p[0] - leaf.anchor[0];
  const double along = t < leaf.t_min ? leaf.t_min - t : (t > leaf.t_max ? t - leaf.t_max : 0.0);
  return std::sqrt(s + along * along);
}

PlaneFrame plane_frame(int l, int n) {
  if (n < 1 || l < 1 || l > n) {
    throw DomainError("plane index " + std::to_string(l) + " out of range 1.." + std::to_string(n));
  }
  return PlaneFrame{l, axis(n, re_index(l)), axis(n, im_index(l))};
}

}  // namespace folia
