#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

#include "folia/builder.hpp"
#include "folia/errors.hpp"
#include "folia/kernel.hpp"

using namespace folia;

namespace {

// Full-dimensional RK4 on X(y) = w(|y|/delta)(y1 + y2)(e2 - e1), independent
// of the reduced integrator in the library.
Point reference_flow(Point y, double delta, int steps) {
  auto field = [delta](const Point& x) {
    Point v = Point::zero(static_cast<int>(x.size() / 2));
    const double g = bump_omega(norm(x) / delta) * (x[0] + x[1]);
    v[0] = -g;
    v[1] = g;
    return v;
  };
  const double dt = 1.0 / steps;
  for (int i = 0; i < steps; ++i) {
    const Point k1 = field(y);
    const Point k2 = field(y + (0.5 * dt) * k1);
    const Point k3 = field(y + (0.5 * dt) * k2);
    const Point k4 = field(y + dt * k3);
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

Stage sample_stage(int n, int l, double eps) {
  Point c = Point::zero(n);
  c[0] = 0.1;
  c[1] = -0.05;
  return Stage::standard(c, eps, l, select_K());
}

}  // namespace

TEST_SUITE("kernel") {
  TEST_CASE("bump plateau and support") {
    CHECK(bump_omega(0.5) == 1.0);
    CHECK(bump_omega(-1.0) == 1.0);
    CHECK(bump_omega(3.0) == 0.0);
    CHECK(bump_omega(-2.0) == 0.0);
    CHECK(bump_omega(1.5) == doctest::Approx(0.5).epsilon(1e-15));
    for (double t = -2.5; t <= 2.5; t += 0.01) {
      CHECK(bump_omega(t) >= 0.0);
      CHECK(bump_omega(t) <= 1.0);
      const double h = 1e-6;
      const double fd = (bump_omega(t + h) - bump_omega(t - h)) / (2 * h);
      CHECK(bump_omega_derivative(t) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
  }

  TEST_CASE("psi values at 0, eta/2, eta") {
    const double k = 0.2;
    const double eta = 0.01;
    CHECK(psi_eta(0.0, eta, k) == doctest::Approx(k * eta));
    CHECK(psi_eta(eta, eta, k) == 0.0);
    CHECK(psi_eta(eta / 2, eta, k) == doctest::Approx(k * eta / 2));
  }

  TEST_CASE("select_K makes psi 0.45-Lipschitz") {
    const double k = select_K();
    CHECK(k * psi_shape_lipschitz() == doctest::Approx(kPsiLipschitzTarget).epsilon(1e-9));
    // Independent slope scan on a different grid.
    double lip = 0.0;
    const int m = 400000;
    for (int i = 0; i < m; ++i) {
      const double a = 1.3 * i / m;
      const double b = 1.3 * (i + 1) / m;
      lip = std::max(lip, std::abs(psi_profile(b, k) - psi_profile(a, k)) / (b - a));
    }
    CHECK(lip <= kPsiLipschitzTarget + 1e-5);
    CHECK(lip >= kPsiLipschitzTarget - 1e-3);
  }

  TEST_CASE("flow straightens the first axis onto the second") {
    const double delta = 0.5;
    for (int i = 0; i < 101; ++i) {
      const double s = delta * (2.0 * (i + 1) / 102.0 - 1.0);
      const Point y = flow_time1(s * axis(1, 0), delta, FlowDirection::Forward);
      CHECK(distance(y, s * axis(1, 1)) <= 1e-12);
    }
  }

  TEST_CASE("flow is the identity outside 2 delta") {
    const Point y({0.7, -0.9, 0.3, 0.1});
    CHECK(flow_time1(y, 0.5, FlowDirection::Forward) == y);
    CHECK(flow_time1(y, 0.5, FlowDirection::Backward) == y);
  }

  TEST_CASE("flow matches a full-dimensional reference integrator") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
      const Point y = (1.9 * unit_uniform(rng)) * random_direction(2, rng);
      const Point a = flow_time1(y, 1.0, FlowDirection::Forward, 256);
      const Point b = reference_flow(y, 1.0, 4096);
      CHECK(distance(a, b) <= 1e-8);
    }
  }

  TEST_CASE("backward flow inverts forward flow") {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 200; ++i) {
      const Point y = (0.2 * unit_uniform(rng)) * random_direction(3, rng);
      const Point there = flow_time1(y, 0.1, FlowDirection::Forward);
      CHECK(distance(flow_time1(there, 0.1, FlowDirection::Backward), y) <= 1e-14);
    }
  }

  TEST_CASE("sampled log-norm of DX stays above -kFlowLogNormBound") {
    std::mt19937_64 rng(7);
    const double h = 1e-6;
    double worst = 0.0;
    for (int i = 0; i < 20000; ++i) {
      const Point y = (2.0 * unit_uniform(rng)) * random_direction(2, rng);
      const Point e = random_direction(2, rng);
      auto x = [](const Point& p) {
        const double g = bump_omega(norm(p)) * (p[0] + p[1]);
        return Point({-g, g, 0.0, 0.0});
      };
      const Point dxe = (1.0 / (2 * h)) * (x(y + h * e) - x(y - h * e));
      worst = std::min(worst, dot(e, dxe));
    }
    CHECK(worst >= -kFlowLogNormBound);
    CHECK(worst <= -1.0);
  }

  TEST_CASE("stage moves its centre to the angular point and back") {
    for (int l : {1, 2}) {
      const Stage s = sample_stage(2, l, 0.03);
      const Point q = s.center() + (s.k_bend() * s.eta()) * s.bend_dir();
      CHECK(distance(stage_forward(s, s.center()), q) <= 1e-15);
      CHECK(distance(stage_inverse(s, q), s.center()) <= 1e-15);
    }
  }

  TEST_CASE("stage is exactly the identity outside its ball") {
    const Stage s = sample_stage(2, 2, 0.03);
    std::mt19937_64 rng(8);
    for (int i = 0; i < 1000; ++i) {
      const Point x = s.center() + (0.03 * (1.0 + unit_uniform(rng))) * random_direction(2, rng);
      CHECK(stage_forward(s, x) == x);
      CHECK(stage_inverse(s, x) == x);
    }
  }

  TEST_CASE("stage lower Lipschitz bound holds on sampled pairs") {
    const Stage s = sample_stage(2, 2, 0.03);
    std::mt19937_64 rng(9);
    for (int i = 0; i < 5000; ++i) {
      const Point a = s.center() + (0.03 * unit_uniform(rng)) * random_direction(2, rng);
      const Point b = a + (0.01 * unit_uniform(rng)) * random_direction(2, rng);
      CHECK(distance(stage_forward(s, a), stage_forward(s, b)) >= s.lower_lipschitz() * distance(a, b));
    }
  }

  TEST_CASE("corner angle") {
    CHECK(corner_angle(1.0) == doctest::Approx(std::numbers::pi / 2));
    CHECK(corner_angle(select_K()) == doctest::Approx(2.0 * std::atan(1.0 / select_K())));
    CHECK_THROWS(corner_angle(0.0));
  }

  TEST_CASE("arm tangents are one-sided derivatives of the bent segment") {
    for (int l : {1, 2}) {
      const Stage s = sample_stage(2, l, 0.03);
      const AngularPoint ap = angular_data(s);
      const double k = s.k_bend();
      const double eta = s.eta();
      auto curve = [&](double t) { return (k * (eta - std::abs(t))) * s.bend_dir() + t * s.straight_dir(); };
      const double h = 1e-3 * eta;
      const Point left = (1.0 / h) * (curve(0.0) - curve(-h));
      const Point right = (1.0 / h) * (curve(h) - curve(0.0));
      CHECK(std::abs(plane_component((1.0 / norm(left)) * left, l) - ap.t1) <= 1e-12);
      CHECK(std::abs(plane_component((1.0 / norm(right)) * right, l) - ap.t2) <= 1e-12);
      CHECK(std::abs(ap.t1 - ap.t2) > 0.1);
      CHECK(std::abs(ap.t1 + ap.t2) > 0.1);
      if (l == 2) CHECK(std::abs(ap.t2 - std::conj(ap.t1)) <= 1e-15);
    }
  }

  TEST_CASE("stage rejects inconsistent radii and slopes") {
    StageParams p = sample_stage(1, 1, 0.03).params();
    p.delta = 0.02;
    CHECK_THROWS_AS(Stage{p}, InvariantViolation);
    p = sample_stage(1, 1, 0.03).params();
    p.k_bend = 0.6;
    CHECK_THROWS_AS(Stage{p}, InvariantViolation);
    p = sample_stage(1, 1, 0.03).params();
    p.l = 2;
    CHECK_THROWS_AS(Stage{p}, InvariantViolation);
  }
}
