#include <cmath>
#include <random>

#include "doctest.h"

#include "folia/errors.hpp"
#include "folia/tester.hpp"

using namespace folia;

namespace {

const FoliationManifest& bidisc() {
  static const FoliationManifest m = [] {
    BuildParams p;
    p.stages = 8;
    p.seed = 5;
    return build_foliation(Domain::unit_polydisc(2), p);
  }();
  return m;
}

Point complex_dir(int n, int l, cplx t) {
  Point d = Point::zero(n);
  set_complex_coord(d, l, t);
  return d;
}

}  // namespace

TEST_SUITE("tester") {
  TEST_CASE("one-sided derivatives") {
    const Point q({0.2, 0.1});
    const ArmDerivative d = one_sided_derivative(Expr::parse("z1"), q, axis(1, 0), 1e-3);
    CHECK(std::abs(d.value - 1.0) <= 1e-8);
    CHECK(d.fd_error_est >= 0.0);

    const cplx t = std::polar(1.0, 0.7);
    const ArmDerivative c = one_sided_derivative(Expr::parse("conj(z1)"), q, complex_dir(1, 1, t), 1e-3);
    CHECK(std::abs(c.value - std::conj(t)) <= 1e-6);

    const Point one({1.0, 0.0});
    const ArmDerivative s = one_sided_derivative(Expr::parse("z1^2"), one, complex_dir(1, 1, t), 1e-3);
    CHECK(std::abs(s.value - 2.0 * t) <= 1e-6);
    CHECK(s.fd_error_est >= std::abs(s.value - 2.0 * t) / 10.0);

    const Domain disc = Domain::unit_polydisc(1);
    CHECK_THROWS_AS(one_sided_derivative(Expr::parse("z1"), Point({0.99, 0.0}), axis(1, 0), 0.01, &disc),
                    DomainError);
    CHECK_THROWS_AS(one_sided_derivative(Expr::parse("1/(z1 - 0.5)"), Point({0.4, 0.0}), axis(1, 0), 0.05),
                    EvalError);
  }

  TEST_CASE("Wirtinger pair from two arms") {
    const cplx t1 = std::polar(1.0, 0.4);
    const cplx t2 = std::polar(1.0, 2.1);
    const WirtingerPair zbar = wirtinger_from_arms(t1, t2, std::conj(t1), std::conj(t2));
    CHECK(std::abs(zbar.a) <= 1e-15);
    CHECK(std::abs(zbar.b - 1.0) <= 1e-15);
    const cplx c(0.3, -2.0);
    const WirtingerPair hol = wirtinger_from_arms(t1, t2, c * t1, c * t2);
    CHECK(std::abs(hol.a - c) <= 1e-14);
    CHECK(std::abs(hol.b) <= 1e-14);
    CHECK_THROWS_WITH_AS(wirtinger_from_arms(t1, -t1, 1.0, 1.0), doctest::Contains("degenerate arms"), DomainError);
    CHECK_THROWS_AS(wirtinger_from_arms(t1, t1, 1.0, 1.0), DomainError);

    // Closed form for conjugate arms: b = (D2 t - D1 conj t) / (t^2 - conj(t)^2).
    const cplx d1(0.7, 0.2);
    const cplx d2(-1.1, 0.4);
    const WirtingerPair w = wirtinger_from_arms(t1, std::conj(t1), d1, d2);
    const cplx b = (d2 * t1 - d1 * std::conj(t1)) / (t1 * t1 - std::conj(t1) * std::conj(t1));
    CHECK(std::abs(w.b - b) <= 1e-14);
  }

  TEST_CASE("point tests against the AD oracle") {
    const FoliationManifest& m = bidisc();
    TestOptions opts;
    opts.oracle = true;
    for (std::size_t k = 0; k < m.size(); ++k) {
      const PointRecord hol = test_at_point(Expr::parse("z1^2 + exp(z2)"), m, k, opts);
      CHECK(hol.residual <= 1e-6);
      const PointRecord cj = test_at_point(Expr::parse("conj(z1)"), m, k, opts);
      if (m.stages[k].l() == 1) {
        CHECK(std::abs(cj.residual - 1.0) <= 1e-4);
        CHECK(cj.violates);
      } else {
        CHECK(cj.residual <= 1e-6);
      }
      CHECK(cj.oracle_agrees);
    }
  }

  TEST_CASE("verdicts") {
    const FoliationManifest& m = bidisc();
    CHECK(test_function(Expr::parse("z1*z2"), m).verdict == Verdict::Consistent);
    const HolomorphyReport re = test_function(Expr::parse("re(z1)"), m);
    CHECK(re.verdict == Verdict::Violated);
    CHECK(std::abs(re.per_coordinate_max[0] - 0.5) <= 1e-4);
    CHECK_THROWS_WITH_AS(test_function(Expr::parse("z1"), empty_manifest(m.domain, {})),
                         doctest::Contains("no angular points"), DomainError);
    FoliationManifest one = m;
    one.stages.erase(one.stages.begin() + 1, one.stages.end());
    CHECK_THROWS_AS(test_function(Expr::parse("z1"), one), DomainError);
  }

  TEST_CASE("inconclusive when the difference error dominates") {
    TestOptions opts;
    opts.h_floor = 0.2;
    const HolomorphyReport r = test_function(Expr::parse("exp(5*z1)"), bidisc(), opts);
    CHECK(r.verdict == Verdict::Inconclusive);
  }

  TEST_CASE("residuals scale with the function") {
    const FoliationManifest& m = bidisc();
    const HolomorphyReport base = test_function(Expr::parse("abs2(z1) + conj(z2)"), m);
    const HolomorphyReport scaled = test_function(Expr::parse("(3 - 4i)*(abs2(z1) + conj(z2))"), m);
    for (std::size_t k = 0; k < m.size(); ++k) {
      const double tol = 10.0 * (base.points[k].fd_error_est * 5.0 + scaled.points[k].fd_error_est) + 1e-12;
      CHECK(std::abs(scaled.points[k].residual - 5.0 * base.points[k].residual) <= tol);
    }
  }

  TEST_CASE("random holomorphic expressions are never flagged") {
    std::mt19937_64 rng(41);
    const char* atoms[] = {"z1", "z2", "(1+2i)", "exp(z1)", "sin(z2)", "cos(z1)", "z1^3", "z2^-1"};
    const char* ops[] = {" + ", " - ", "*"};
    for (int i = 0; i < 30; ++i) {
      std::string src = atoms[rng() % 8];
      for (int j = 0; j < 3; ++j) src += std::string(ops[rng() % 3]) + atoms[rng() % 8];
      INFO(src);
      const Expr f = Expr::parse(src);
      REQUIRE(f.holomorphic_syntax());
      CHECK(test_function(f, bidisc()).verdict != Verdict::Violated);
    }
  }

  TEST_CASE("report JSON") {
    const HolomorphyReport r = test_function(Expr::parse("conj(z2)"), bidisc(), {.oracle = true});
    const nlohmann::json j = report_to_json(r, "m.json");
    CHECK(j.at("verdict") == "violated");
    CHECK(j.at("points").size() == bidisc().size());
    CHECK(j.at("per_coordinate_max").size() == 2);
    CHECK(j.at("oracle_agreement") == true);
    CHECK(j.contains("disclaimer"));
    CHECK(j.at("thresholds").at("tau_detect") == 1e-2);
  }
}
