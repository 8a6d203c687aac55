#pragma once

// Inductive construction of the foliation map.
//
// Stage k (1-based) bends the base leaf through a centre w_k into the
// coordinate plane z_l, l = ((k-1) mod n) + 1. Centres are drawn outside all
// earlier support balls, so the current composite is the identity near w_k
// and the leaf there is a straight base segment. Radii obey
//   (a) eps_{s+1} < eps_s / 2,
//   (b) B(w, eps) avoids every earlier marked leaf and support ball,
//   (c) eps_{s+1} < l_s / 16, l_s a certified lower bound on the separation
//       d_s = min { |Phi_s z - Phi_s w| : |z - w| >= 1/(s+2) },
//   (d) the closed ball lies in the domain and carries a valid Stage.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "folia/geometry.hpp"
#include "folia/kernel.hpp"

namespace folia {

struct BuildParams {
  int stages = 10;
  std::uint64_t seed = 1;
  /// Upper bound on every support radius; in practice it caps eps_1.
  double resolution = 0.1;
  int flow_steps = kDefaultFlowSteps;
  std::optional<double> k_bend;
  /// Admissible candidates ranked per centre.
  int candidates = 16;
  /// Sequence draws allowed per centre before giving up.
  int max_draws = 20000;

  bool operator==(const BuildParams&) const = default;
};

struct FoliationManifest {
  Domain domain;
  BuildParams params;
  double k_bend = 0.0;
  std::vector<Stage> stages;
  /// The points w_k; equal to the stage centres.
  std::vector<Point> centers;
  /// l_0 .. l_K: lower bounds for d_s at pair scale 1/(s+2).
  std::vector<double> separation_bounds;
  /// Same bounds at pair scale 1/(s+1), kept for auditing.
  std::vector<double> separation_bounds_alt;
  /// Running minimum of per-stage lower Lipschitz constants, c_0 .. c_K.
  std::vector<double> lipschitz_floor;

  int n() const { return domain.n(); }
  std::size_t size() const { return stages.size(); }
};

std::vector<unsigned> first_primes(std::size_t count);
/// Van der Corput radical inverse of `index` in `base`, in [0, 1).
double radical_inverse(unsigned base, std::uint64_t index);

/// Coordinate class of the 1-based stage index k.
int residue_class(std::size_t k, int n);

/// Empty manifest (identity map) for a domain.
FoliationManifest empty_manifest(const Domain& domain, const BuildParams& params);

/// Scrambled Halton points in the domain's bounding box; deterministic in
/// the seed.
class CenterSampler {
 public:
  CenterSampler(const Domain& domain, std::uint64_t seed);
  Point next();

 private:
  Domain domain_;
  std::vector<double> shift_;
  std::uint64_t index_ = 0;
};

/// Next centre of class l: the admissible candidate (interior, outside all
/// closed support balls, off every marked leaf) farthest from existing
/// class-l centres. Throws InvariantViolation("exhausted") when no candidate
/// is found within params.max_draws draws.
Point dense_sequence_next(const FoliationManifest& m, CenterSampler& sampler, int l);

bool admissible_center(const FoliationManifest& m, const Point& w);

struct EpsilonChoice {
  double epsilon = 0.0;
  bool ok = false;
  std::string binding;
  double bound_a = 0.0;           // eps_s / 2
  double bound_b_leaves = 0.0;    // distance to marked leaves
  double bound_b_supports = 0.0;  // gap to earlier support balls
  double bound_c = 0.0;           // l_s / 16
  double bound_d = 0.0;           // distance to the boundary
  double bound_resolution = 0.0;
};

/// 0.9 times the tightest of the bounds above.
EpsilonChoice choose_epsilon(const FoliationManifest& m, const Point& w);

/// Appends the stage for centre w and radius eps after re-checking
/// (a)-(d); throws InvariantViolation naming the failed condition.
const Stage& push_stage(FoliationManifest& m, const Point& w, double eps);

/// Runs the whole induction.
FoliationManifest build_foliation(const Domain& domain, const BuildParams& params);

/// Composite of the first `count` stages (all by default).
Point forward(const FoliationManifest& m, const Point& x, std::optional<std::size_t> count = std::nullopt);
Point inverse(const FoliationManifest& m, const Point& y, std::optional<std::size_t> count = std::nullopt);

/// Base leaf L_k through the centre of stage k (0-based here).
BaseLeaf marked_leaf(const FoliationManifest& m, std::size_t stage_index);

struct LeafCurve {
  BaseLeaf base;
  std::vector<double> t;
  std::vector<Point> samples;
  std::optional<std::size_t> marked_stage;  // 0-based
};

struct LeafOptions {
  int uniform_samples = 257;
  int refine_samples = 129;
  std::optional<std::size_t> stage_count;
};

/// Image under the composite of the base leaf through inverse(x), sampled on
/// a uniform grid refined inside every support ball the leaf crosses.
LeafCurve leaf_through(const FoliationManifest& m, const Point& x, const LeafOptions& opts = {});

/// Image under the composite of the base leaf through `anchor`.
LeafCurve leaf_of_base(const FoliationManifest& m, const Point& anchor, const LeafOptions& opts = {});

/// Leaf L_k sampled under the first `count` stages.
LeafCurve marked_leaf_curve(const FoliationManifest& m, std::size_t stage_index, const LeafOptions& opts = {});

struct ConvergenceReport {
  double bound = 0.0;           // 2 eps_K
  bool consistent = false;      // 4 eps_{s+1} < l_s / 4 for s = 1..K-1
  bool tail_consistent = false; // 2 eps_K < l_K / 4
};

/// Sup distance between the K-stage truncation and any continuation obeying
/// the halving rule. Throws DomainError on an empty manifest.
double convergence_bound(const FoliationManifest& m);
ConvergenceReport convergence_report(const FoliationManifest& m);

struct SeparationResult {
  double min_ratio = 0.0;
  std::size_t pairs = 0;
  Point worst_z;
  Point worst_w;
};

/// Samples pairs across the scale buckets 1/(s+2) (half of them seeded near
/// stage centres) and returns the smallest |Phi z - Phi w| / l_s, where s is
/// the smallest bucket with |z - w| >= 1/(s+2). Must be >= 1.
SeparationResult separation_check(const FoliationManifest& m, std::size_t pairs, std::uint64_t seed = 99);

/// Uniform point in the domain (rejection from the bounding box).
template <class Rng>
Point random_point_in(const Domain& d, Rng& rng);

/// Uniform double in [0, 1) from 53 random bits.
template <class Rng>
double unit_uniform(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1p-53;
}

template <class Rng>
Point random_point_in(const Domain& d, Rng& rng) {
  const auto [lo, hi] = d.bounding_box();
  for (;;) {
    Point p = lo;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = lo[i] + (hi[i] - lo[i]) * unit_uniform(rng);
    if (d.contains_interior(p)) return p;
  }
}

/// Uniform unit vector in R^m.
template <class Rng>
Point random_direction(int n, Rng& rng) {
  for (;;) {
    Point v = Point::zero(n);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 2.0 * unit_uniform(rng) - 1.0;
    const double r = norm(v);
    if (r > 1e-3 && r <= 1.0) return (1.0 / r) * v;
  }
}

}  // namespace folia
