#include <cmath>

#include "doctest.h"

#include "folia/errors.hpp"
#include "folia/geometry.hpp"

using namespace folia;

TEST_SUITE("geometry") {
  TEST_CASE("complex coordinates") {
    CHECK(complex_coord(Point::zero(2), 1) == std::complex<double>(0.0, 0.0));
    CHECK(complex_coord(Point({1, 2, 3, 4}), 2) == std::complex<double>(3.0, 4.0));
    Point p = Point::zero(2);
    set_complex_coord(p, 2, {3.0, 4.0});
    CHECK(complex_coord(p, 2) == std::complex<double>(3.0, 4.0));
    CHECK_THROWS_AS(complex_coord(p, 3), DomainError);
  }

  TEST_CASE("points reject malformed coordinates") {
    CHECK_THROWS(Point({1.0, 2.0, 3.0}));
    CHECK_THROWS(Point(std::vector<double>{}));
    CHECK_THROWS(Point({1.0, NAN}));
  }

  TEST_CASE("base leaf through the centre of the unit disc") {
    const BaseLeaf leaf = base_leaf_through(Domain::unit_polydisc(1), Point::zero(1));
    CHECK(leaf.at(leaf.t_min)[0] == doctest::Approx(-1.0));
    CHECK(leaf.at(leaf.t_max)[0] == doctest::Approx(1.0));
    CHECK(leaf.anchor[1] == 0.0);
  }

  TEST_CASE("base leaf in a box") {
    const Domain box = Domain::cube(2, 1.0);
    const BaseLeaf leaf = base_leaf_through(box, Point({0.5, 0, 0, 0}));
    CHECK(leaf.at(leaf.t_min)[0] == doctest::Approx(-1.0));
    CHECK(leaf.at(leaf.t_max)[0] == doctest::Approx(1.0));
    CHECK(box.contains(leaf.at(0.5 * (leaf.t_min + leaf.t_max))));
  }

  TEST_CASE("base leaf chord in the unit ball") {
    const BaseLeaf leaf = base_leaf_through(Domain::unit_ball(1), Point({0.0, 0.6}));
    const double half = std::sqrt(1.0 - 0.6 * 0.6);
    CHECK(leaf.at(leaf.t_max)[0] == doctest::Approx(half).epsilon(1e-14));
    CHECK(leaf.at(leaf.t_min)[0] == doctest::Approx(-half).epsilon(1e-14));
    CHECK_THROWS_AS(base_leaf_through(Domain::unit_ball(1), Point({0.0, 1.5})), DomainError);
  }

  TEST_CASE("every point lies on its base leaf; leaves partition") {
    const Domain d = Domain::unit_polydisc(2);
    const Point p({0.1, -0.2, 0.3, 0.4});
    const BaseLeaf a = base_leaf_through(d, p);
    CHECK(distance_to_leaf(a, p) == doctest::Approx(0.0));
    Point q = p;
    q[0] = -0.5;
    CHECK(a.same_leaf(q));
    q[1] += 1e-3;
    CHECK_FALSE(a.same_leaf(q));
  }

  TEST_CASE("plane frames are orthonormal coordinate axes") {
    const PlaneFrame f11 = plane_frame(1, 1);
    CHECK(f11.v == Point({1, 0}));
    CHECK(f11.u == Point({0, 1}));
    const PlaneFrame f22 = plane_frame(2, 2);
    CHECK(f22.v == Point({0, 0, 1, 0}));
    CHECK(f22.u == Point({0, 0, 0, 1}));
    for (int n = 1; n <= 8; ++n) {
      for (int l = 1; l <= n; ++l) {
        const PlaneFrame f = plane_frame(l, n);
        CHECK(dot(f.u, f.v) == 0.0);
        CHECK(norm(f.u) == 1.0);
        CHECK(norm(f.v) == 1.0);
      }
    }
    CHECK_THROWS(plane_frame(3, 2));
  }

  TEST_CASE("boundary distance by domain shape") {
    const Point p({0.3, 0.4});
    CHECK(Domain::unit_ball(1).boundary_distance(p) == doctest::Approx(0.5));
    CHECK(Domain::unit_polydisc(1).boundary_distance(p) == doctest::Approx(0.5));
    CHECK(Domain::cube(1, 1.0).boundary_distance(p) == doctest::Approx(0.6));
  }
}
