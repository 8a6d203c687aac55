#include "folia/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "folia/errors.hpp"

namespace folia {

namespace {

constexpr double kPlaneTolerance = 1e-8;
constexpr double kAngleTolerance = 1e-6;

CheckResult guarded(const std::string& name, const std::function<CheckResult()>& body) {
  try {
    CheckResult r = body();
    r.name = name;
    return r;
  } catch (const std::exception& e) {
    return {name, false, std::numeric_limits<double>::quiet_NaN(), 0.0, std::string("exception: ") + e.what()};
  }
}

std::string describe(const std::string& what, std::size_t stage) {
  std::ostringstream os;
  os << what << " at stage " << stage + 1;
  return os.str();
}

// Half the samples are seeded inside support balls so that small stages are
// actually exercised.
Point sample_point(const FoliationManifest& m, std::mt19937_64& rng, std::size_t i) {
  const std::size_t k = m.stages.size();
  if (k == 0 || i % 2 == 0) return random_point_in(m.domain, rng);
  const Stage& s = m.stages[rng() % k];
  const double r = s.epsilon() * unit_uniform(rng);
  return s.center() + r * random_direction(static_cast<int>(s.center().size()), rng);
}

double angle_between(const Point& a, const Point& b) {
  const double c = dot(a, b);
  const double cross2 = std::max(0.0, dot(a, a) * dot(b, b) - c * c);
  return std::atan2(std::sqrt(cross2), c);
}

}  // namespace

VerifyLevel verify_level_from_string(const std::string& s) {
  if (s == "quick") return VerifyLevel::Quick;
  if (s == "full") return VerifyLevel::Full;
  throw DomainError("unknown verify level '" + s + "' (expected quick or full)");
}

SampleBudget budget_for(VerifyLevel level) {
  if (level == VerifyLevel::Quick) return {2000, 1000, 2000, 65};
  return {10000, 10000, 10000, 257};
}

CheckResult check_epsilon_halving(const FoliationManifest& m) {
  return guarded("epsilon_halving", [&] {
    CheckResult r{"", true, 0.0, 0.5, "eps_{k+1} / eps_k < 1/2"};
    for (std::size_t k = 0; k + 1 < m.stages.size(); ++k) {
      const double ratio = m.stages[k + 1].epsilon() / m.stages[k].epsilon();
      r.value = std::max(r.value, ratio);
      if (!(ratio < 0.5) && r.passed) {
        r.passed = false;
        r.detail = describe("eps ratio " + std::to_string(ratio), k + 1);
      }
    }
    return r;
  });
}

CheckResult check_residue_classes(const FoliationManifest& m) {
  return guarded("residue_classes", [&] {
    CheckResult r{"", true, 0.0, 0.0, "stage k targets l = ((k-1) mod n) + 1"};
    for (std::size_t k = 0; k < m.stages.size(); ++k) {
      if (m.stages[k].l() != residue_class(k + 1, m.n())) {
        if (r.passed) r.detail = describe("wrong class", k);
        r.passed = false;
        r.value += 1.0;
      }
    }
    return r;
  });
}

CheckResult check_supports(const FoliationManifest& m) {
  return guarded("supports", [&] {
    CheckResult r{"", true, std::numeric_limits<double>::infinity(), 0.0,
                  "closed supports disjoint and inside the domain"};
    const std::size_t k = m.stages.size();
    if (m.centers.size() != k) return CheckResult{"", false, 0.0, 0.0, "centre list length differs"};
    for (std::size_t i = 0; i < k; ++i) {
      const Stage& s = m.stages[i];
      if (!(m.centers[i] == s.center())) {
        r.passed = false;
        r.detail = describe("recorded centre differs from stage centre", i);
      }
      const double clearance = m.domain.boundary_distance(s.center()) - s.epsilon();
      r.value = std::min(r.value, clearance);
      if (!(clearance > 0.0) && r.passed) {
        r.passed = false;
        r.detail = describe("support touches the boundary", i);
      }
      for (std::size_t j = 0; j < i; ++j) {
        const Stage& t = m.stages[j];
        const double gap = distance(s.center(), t.center()) - s.epsilon() - t.epsilon();
        r.value = std::min(r.value, gap);
        if (!(gap > 0.0) && r.passed) {
          r.passed = false;
          r.detail = describe("support overlaps stage " + std::to_string(j + 1), i);
        }
      }
    }
    return r;
  });
}

CheckResult check_marked_leaf_clearance(const FoliationManifest& m) {
  return guarded("marked_leaf_clearance", [&] {
    CheckResult r{"", true, std::numeric_limits<double>::infinity(), 0.0,
                  "support k misses marked leaves L_j, j < k"};
    for (std::size_t k = 0; k < m.stages.size(); ++k) {
      const Stage& s = m.stages[k];
      for (std::size_t j = 0; j < k; ++j) {
        const double gap = distance_to_leaf(marked_leaf(m, j), s.center()) - s.epsilon();
        r.value = std::min(r.value, gap / s.epsilon());
        if (!(gap > 0.0) && r.passed) {
          r.passed = false;
          r.detail = describe("support meets marked leaf " + std::to_string(j + 1), k);
        }
      }
    }
    return r;
  });
}

CheckResult check_marked_leaf_stability(const FoliationManifest& m, int samples) {
  return guarded("marked_leaf_stability", [&] {
    CheckResult r{"", true, 0.0, 0.0, "L_j after stage j equals L_j after stage K"};
    LeafOptions opts;
    opts.uniform_samples = samples;
    opts.refine_samples = std::max(9, samples / 2);
    for (std::size_t j = 0; j < m.stages.size(); ++j) {
      opts.stage_count = j + 1;
      const LeafCurve early = marked_leaf_curve(m, j, opts);
      opts.stage_count = m.stages.size();
      const LeafCurve late = marked_leaf_curve(m, j, opts);
      if (early.samples.size() != late.samples.size()) {
        r.passed = false;
        r.detail = describe("sample grids differ", j);
        continue;
      }
      for (std::size_t i = 0; i < early.samples.size(); ++i) {
        const double d = distance(early.samples[i], late.samples[i]);
        r.value = std::max(r.value, d);
        if (d != 0.0 && r.passed) {
          r.passed = false;
          r.detail = describe("leaf moved by a later stage", j);
        }
      }
    }
    return r;
  });
}

CheckResult check_flow_oracle(double delta, int samples, int n, int steps) {
  return guarded("flow_oracle", [&] {
    CheckResult r{"", true, 0.0, 1e-6, "lambda(s e1) = s e2 for |s| < delta"};
    const Point e1 = axis(n, 0);
    const Point e2 = axis(n, 1);
    for (int i = 0; i < samples; ++i) {
      // Open interval: s_i = delta (2 (i + 1) / (samples + 1) - 1).
      const double s = delta * (2.0 * (i + 1) / (samples + 1) - 1.0);
      const Point y = flow_time1(s * e1, delta, FlowDirection::Forward, steps);
      r.value = std::max(r.value, distance(y, s * e2));
    }
    r.passed = r.value <= r.tolerance;
    return r;
  });
}

CheckResult check_support_locality(const FoliationManifest& m, std::size_t points, std::uint64_t seed) {
  return guarded("support_locality", [&] {
    CheckResult r{"", true, 0.0, 1e-12, "forward is the identity outside all supports"};
    std::mt19937_64 rng(seed);
    std::size_t tested = 0;
    while (tested < points) {
      const Point x = random_point_in(m.domain, rng);
      const bool inside = std::any_of(m.stages.begin(), m.stages.end(),
                                      [&](const Stage& s) { return distance(x, s.center()) <= s.epsilon(); });
      if (inside) continue;
      ++tested;
      r.value = std::max(r.value, distance(forward(m, x), x));
    }
    r.passed = r.value <= r.tolerance;
    r.detail += " (" + std::to_string(tested) + " points)";
    return r;
  });
}

CheckResult check_round_trip(const FoliationManifest& m, std::size_t points, std::uint64_t seed) {
  return guarded("round_trip", [&] {
    const double k = static_cast<double>(std::max<std::size_t>(1, m.stages.size()));
    CheckResult r{"", true, 0.0, 1e-9 * k, "forward(inverse(y)) = y"};
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < points; ++i) {
      const Point y = sample_point(m, rng, i);
      r.value = std::max(r.value, distance(forward(m, inverse(m, y)), y));
    }
    r.passed = r.value <= r.tolerance;
    return r;
  });
}

CheckResult check_angular_geometry(const FoliationManifest& m) {
  return guarded("angular_geometry", [&] {
    CheckResult r{"", true, 0.0, kAngleTolerance,
                  "corner leaf in the z_l plane (rel. 1e-8), angle 2 atan(1/K) (1e-6)"};
    double worst_plane = 0.0;
    double worst_angle = 0.0;
    for (std::size_t k = 0; k < m.stages.size(); ++k) {
      const Stage& s = m.stages[k];
      const AngularPoint ap = angular_data(s);
      const double eta = s.eta();
      const std::size_t dim = s.center().size();
      const Point q_off = (s.k_bend() * eta) * s.bend_dir();
      const Point e1 = axis(static_cast<int>(dim / 2), 0);
      const std::size_t re = re_index(s.l());
      const std::size_t im = im_index(s.l());

      constexpr int kGrid = 400;
      for (int i = 0; i <= kGrid; ++i) {
        const double t = eta * (2.0 * i / kGrid - 1.0);
        const Point y = s.forward_offset(t * e1);
        const Point rel = y - q_off;
        if (norm(rel) > eta / 2.0) continue;
        for (std::size_t c = 0; c < dim; ++c) {
          if (c == re || c == im) continue;
          worst_plane = std::max(worst_plane, std::abs(rel[c]) / eta);
        }
      }
      const Point arm1 = s.forward_offset((-eta / 4.0) * e1) - q_off;
      const Point arm2 = s.forward_offset((eta / 4.0) * e1) - q_off;
      const double expected = 2.0 * std::atan(1.0 / s.k_bend());
      const double err = std::abs(angle_between(arm1, arm2) - expected);
      const double dir_err = std::max(distance((1.0 / norm(arm1)) * arm1, ap.arm_out1),
                                      distance((1.0 / norm(arm2)) * arm2, ap.arm_out2));
      worst_angle = std::max({worst_angle, err, dir_err});
      if ((worst_plane > kPlaneTolerance || worst_angle > kAngleTolerance) && r.passed) {
        r.passed = false;
        r.detail = describe("corner geometry off", k);
      }
    }
    r.value = worst_angle;
    r.detail += " plane=" + std::to_string(worst_plane);
    return r;
  });
}

CheckResult check_separation(const FoliationManifest& m, std::size_t pairs, std::uint64_t seed) {
  return guarded("separation", [&] {
    const SeparationResult s = separation_check(m, pairs, seed);
    CheckResult r{"", s.min_ratio >= 1.0, s.min_ratio, 1.0, "min |Phi z - Phi w| / predicted bound >= 1"};
    r.detail += " (" + std::to_string(s.pairs) + " pairs)";
    return r;
  });
}

CheckResult check_convergence(const FoliationManifest& m) {
  return guarded("convergence", [&] {
    if (m.stages.empty()) return CheckResult{"", true, 0.0, 0.0, "no stages"};
    const ConvergenceReport c = convergence_report(m);
    CheckResult r{"", c.consistent, c.bound, m.separation_bounds.back() / 4.0, "4 eps_{s+1} < l_s / 4 for all s"};
    r.detail += c.tail_consistent ? "; tail bound below l_K / 4" : "; tail bound above l_K / 4 (informational)";
    return r;
  });
}

CheckResult check_successive_composites(const FoliationManifest& m, std::size_t points, std::uint64_t seed) {
  return guarded("successive_composites", [&] {
    if (m.stages.empty()) return CheckResult{"", true, 0.0, 0.0, "no stages"};
    const std::size_t k = m.stages.size();
    const Stage& last = m.stages.back();
    CheckResult r{"", true, 0.0, 2.0 * last.epsilon(), "|Phi_K x - Phi_{K-1} x| <= 2 eps_K"};
    std::mt19937_64 rng(seed);
    const int dim = static_cast<int>(last.center().size());
    for (std::size_t i = 0; i < points; ++i) {
      const Point x = (i % 2 == 0)
                          ? random_point_in(m.domain, rng)
                          : last.center() + (last.epsilon() * unit_uniform(rng)) * random_direction(dim, rng);
      const Point prev = forward(m, x, k - 1);
      r.value = std::max(r.value, distance(stage_forward(last, prev), prev));
    }
    r.passed = r.value <= r.tolerance;
    return r;
  });
}

std::vector<CheckResult> run_verify(const FoliationManifest& m, VerifyLevel level) {
  const SampleBudget b = budget_for(level);
  return {check_epsilon_halving(m),
          check_residue_classes(m),
          check_supports(m),
          check_marked_leaf_clearance(m),
          check_marked_leaf_stability(m, b.leaf_samples),
          check_flow_oracle(0.5, 101, m.n()),
          check_support_locality(m, b.locality_points, 11),
          check_round_trip(m, b.roundtrip_points, 12),
          check_angular_geometry(m),
          check_separation(m, b.separation_pairs, 13),
          check_convergence(m),
          check_successive_composites(m, b.roundtrip_points, 14)};
}

}  // namespace folia
