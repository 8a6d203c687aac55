#include <cmath>
#include <random>

#include "doctest.h"

#include "folia/builder.hpp"
#include "folia/errors.hpp"
#include "folia/manifest_io.hpp"

using namespace folia;

namespace {

const FoliationManifest& disc_build() {
  static const FoliationManifest m = [] {
    BuildParams p;
    p.stages = 10;
    p.seed = 7;
    return build_foliation(Domain::unit_polydisc(1), p);
  }();
  return m;
}

const FoliationManifest& bidisc_build() {
  static const FoliationManifest m = [] {
    BuildParams p;
    p.stages = 20;
    p.seed = 3;
    return build_foliation(Domain::unit_polydisc(2), p);
  }();
  return m;
}

// Manifest with one hand-placed stage and a chosen separation bound, for
// exercising choose_epsilon rules in isolation.
FoliationManifest one_stage(const Domain& d, const Point& c, double eps, double ell) {
  BuildParams params;
  params.resolution = 1.0;
  FoliationManifest m = empty_manifest(d, params);
  m.stages.push_back(Stage::standard(c, eps, 1, m.k_bend));
  m.centers.push_back(c);
  m.separation_bounds.push_back(ell);
  m.separation_bounds_alt.push_back(ell);
  m.lipschitz_floor.push_back(m.stages.back().lower_lipschitz());
  return m;
}

double covering_radius(const std::vector<Point>& centers, const Domain& d, int grid) {
  double worst = 0.0;
  for (int i = 0; i <= grid; ++i) {
    for (int j = 0; j <= grid; ++j) {
      const Point x({-1.0 + 2.0 * i / grid, -1.0 + 2.0 * j / grid});
      if (!d.contains(x)) continue;
      double best = INFINITY;
      for (const Point& c : centers) best = std::min(best, distance(x, c));
      worst = std::max(worst, best);
    }
  }
  return worst;
}

}  // namespace

TEST_SUITE("builder") {
  TEST_CASE("residue classes") {
    CHECK(residue_class(1, 2) == 1);
    CHECK(residue_class(2, 2) == 2);
    CHECK(residue_class(3, 2) == 1);
    CHECK(residue_class(7, 3) == 1);
    const FoliationManifest& m = bidisc_build();
    for (std::size_t k = 0; k < m.size(); ++k) CHECK(m.stages[k].l() == static_cast<int>(k % 2) + 1);
  }

  TEST_CASE("first centre is interior; later centres avoid closed supports") {
    const Domain d = Domain::unit_polydisc(1);
    FoliationManifest m = empty_manifest(d, {});
    CenterSampler sampler(d, 1);
    const Point w = dense_sequence_next(m, sampler, 1);
    CHECK(d.contains_interior(w));
    push_stage(m, w, 0.02);
    for (int i = 0; i < 50; ++i) CHECK(distance(dense_sequence_next(m, sampler, 1), w) > 0.02);
  }

  TEST_CASE("class-1 centres cover the unit disc after 200 stages") {
    BuildParams p;
    p.stages = 200;
    p.seed = 11;
    const FoliationManifest m = build_foliation(Domain::unit_polydisc(1), p);
    REQUIRE(m.size() == 200);
    CHECK(covering_radius(m.centers, m.domain, 200) <= 0.25);
  }

  TEST_CASE("choose_epsilon takes 0.9 of the tightest rule") {
    const Domain box = Domain::cube(1, 1.0);
    const FoliationManifest m = one_stage(box, Point({-0.5, -0.5}), 0.1, 0.4);
    const EpsilonChoice c = choose_epsilon(m, Point({0.3, 0.4}));
    REQUIRE(c.ok);
    CHECK(c.bound_a == doctest::Approx(0.05));
    CHECK(c.bound_c == doctest::Approx(0.025));
    CHECK(c.epsilon == doctest::Approx(0.9 * std::min(0.05, 0.025)));
    CHECK(c.epsilon == doctest::Approx(0.0225));
    CHECK(c.binding == "(c)");
  }

  TEST_CASE("choose_epsilon respects a nearby marked leaf") {
    const Domain box = Domain::cube(1, 1.0);
    const FoliationManifest m = one_stage(box, Point({-0.5, 0.0}), 0.005, 0.4);
    const EpsilonChoice c = choose_epsilon(m, Point({0.3, 0.01}));
    REQUIRE(c.ok);
    CHECK(c.bound_b_leaves == doctest::Approx(0.01));
    CHECK(c.epsilon < 0.01);
    CHECK(c.epsilon == doctest::Approx(0.9 * 0.0025));
  }

  TEST_CASE("halving gives a geometric tail") {
    const FoliationManifest& m = bidisc_build();
    for (std::size_t s = 0; s + 1 < m.size(); ++s) {
      double tail = 0.0;
      for (std::size_t j = s + 1; j < m.size(); ++j) tail += m.stages[j].epsilon();
      CHECK(m.stages[s + 1].epsilon() < m.stages[s].epsilon() / 2);
      CHECK(tail < 2.0 * m.stages[s + 1].epsilon());
    }
  }

  TEST_CASE("push_stage rejects radii that break the conditions") {
    FoliationManifest m = empty_manifest(Domain::unit_polydisc(1), {});
    push_stage(m, Point({0.2, 0.1}), 0.02);
    CHECK_THROWS_AS(push_stage(m, Point({-0.5, -0.5}), 0.015), InvariantViolation);  // (a)
    CHECK_THROWS_AS(push_stage(m, Point({0.5, 0.1}), 1e-4), InvariantViolation);     // (b), on L_1
    CHECK_THROWS_AS(push_stage(m, Point({0.2, 0.115}), 1e-4), InvariantViolation);    // (b), in B_1
    CHECK_THROWS_AS(push_stage(m, Point({0.99995, 0.0}), 1e-4), InvariantViolation); // (d)
    CHECK(m.size() == 1);
  }

  TEST_CASE("new stages leave earlier supports and marked leaves untouched") {
    const FoliationManifest& m = bidisc_build();
    std::mt19937_64 rng(21);
    for (std::size_t k = 1; k < m.size(); ++k) {
      for (std::size_t j = 0; j < k; ++j) {
        const Stage& early = m.stages[j];
        const Point x = early.center() + (early.epsilon() * unit_uniform(rng)) * random_direction(2, rng);
        CHECK(stage_forward(m.stages[k], x) == x);
      }
    }
    LeafOptions opts;
    opts.uniform_samples = 65;
    for (std::size_t j = 0; j < m.size(); ++j) {
      opts.stage_count = j + 1;
      const LeafCurve early = marked_leaf_curve(m, j, opts);
      opts.stage_count = m.size();
      const LeafCurve late = marked_leaf_curve(m, j, opts);
      REQUIRE(early.samples.size() == late.samples.size());
      for (std::size_t i = 0; i < early.samples.size(); ++i) CHECK(early.samples[i] == late.samples[i]);
    }
  }

  TEST_CASE("forward and inverse through the first centre") {
    const FoliationManifest& m = disc_build();
    const AngularPoint ap = angular_data(m.stages[0]);
    CHECK(distance(forward(m, m.centers[0]), ap.q) <= 1e-15);
    CHECK(distance(inverse(m, ap.q), m.centers[0]) <= 1e-15);
    const Point far({-0.99, 0.0});
    CHECK(forward(m, far) == far);
    CHECK(inverse(m, far) == far);
  }

  TEST_CASE("round trip on random interior points") {
    const FoliationManifest& m = bidisc_build();
    std::mt19937_64 rng(22);
    for (int i = 0; i < 2000; ++i) {
      const Stage& s = m.stages[rng() % m.size()];
      const Point y = i % 2 ? random_point_in(m.domain, rng)
                            : s.center() + (s.epsilon() * unit_uniform(rng)) * random_direction(2, rng);
      CHECK(distance(forward(m, inverse(m, y)), y) <= 1e-9 * m.size());
    }
  }

  TEST_CASE("successive composites differ by at most 2 eps") {
    const FoliationManifest& m = bidisc_build();
    std::mt19937_64 rng(23);
    const Stage& last = m.stages.back();
    for (int i = 0; i < 2000; ++i) {
      const Point x = last.center() + (last.epsilon() * unit_uniform(rng)) * random_direction(2, rng);
      CHECK(distance(forward(m, x), forward(m, x, m.size() - 1)) <= 2.0 * last.epsilon());
    }
  }

  TEST_CASE("leaves: straight when untouched, cornered through q_1, disjoint") {
    const FoliationManifest& m = disc_build();
    const LeafCurve flat = leaf_of_base(m, Point({0.0, -0.95}));
    CHECK_FALSE(flat.marked_stage.has_value());
    for (const Point& p : flat.samples) CHECK(p[1] == -0.95);

    const AngularPoint ap = angular_data(m.stages[0]);
    const LeafCurve bent = leaf_through(m, ap.q);
    REQUIRE(bent.marked_stage.has_value());
    CHECK(*bent.marked_stage == 0);
    bool hits_corner = false;
    for (const Point& p : bent.samples) hits_corner = hits_corner || distance(p, ap.q) <= 1e-15;
    CHECK(hits_corner);

    const LeafCurve other = leaf_of_base(m, m.centers[0] + 1e-3 * axis(1, 1));
    double gap = INFINITY;
    for (const Point& a : bent.samples) {
      for (const Point& b : other.samples) gap = std::min(gap, distance(a, b));
    }
    CHECK(gap > 0.0);
  }

  TEST_CASE("convergence bound") {
    const Domain d = Domain::cube(1, 1.0);
    CHECK(convergence_bound(one_stage(d, Point({0.0, 0.0}), 0.1, 0.5)) == doctest::Approx(0.2));
    CHECK(convergence_bound(one_stage(d, Point({0.0, 0.0}), 0.01, 0.5)) == doctest::Approx(0.02));
    CHECK_THROWS_AS(convergence_bound(empty_manifest(d, {})), DomainError);
    const FoliationManifest& m = bidisc_build();
    CHECK(convergence_report(m).consistent);
    FoliationManifest prefix = empty_manifest(m.domain, m.params);
    double previous = INFINITY;
    for (std::size_t k = 0; k < m.size(); ++k) {
      prefix.stages.push_back(m.stages[k]);
      const double b = convergence_bound(prefix);
      CHECK(b < previous);
      previous = b;
    }
  }

  TEST_CASE("separation lower bounds hold on sampled pairs") {
    CHECK(separation_check(empty_manifest(Domain::unit_polydisc(1), {}), 500).min_ratio >= 1.0);
    CHECK(separation_check(disc_build(), 5000).min_ratio >= 1.0);
    CHECK(separation_check(bidisc_build(), 5000).min_ratio >= 1.0);
  }

  TEST_CASE("builds are deterministic and round-trip through JSON") {
    BuildParams p;
    p.stages = 10;
    p.seed = 7;
    const std::string a = manifest_text(build_foliation(Domain::unit_polydisc(1), p));
    const std::string b = manifest_text(build_foliation(Domain::unit_polydisc(1), p));
    CHECK(a == b);
    CHECK(manifest_text(manifest_from_json(nlohmann::json::parse(a))) == a);
    p.seed = 8;
    CHECK(manifest_text(build_foliation(Domain::unit_polydisc(1), p)) != a);
  }

  TEST_CASE("manifest loader rejects structural damage") {
    nlohmann::json j = manifest_to_json(disc_build());
    nlohmann::json bad = j;
    bad["version"] = "folia-manifest/0";
    CHECK_THROWS(manifest_from_json(bad));
    bad = j;
    bad["centers"].erase(0);
    CHECK_THROWS(manifest_from_json(bad));
    bad = j;
    bad["stages"][0]["delta"] = 1.0;
    CHECK_THROWS_AS(manifest_from_json(bad), InvariantViolation);
  }

  TEST_CASE("leaf CSV layout") {
    const LeafCurve leaf = leaf_of_base(disc_build(), Point({0.0, -0.95}));
    const std::string csv = leaf_csv(leaf);
    CHECK(csv.rfind("t,x_1,x_2\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(leaf.samples.size() + 1));
  }
}
