#pragma once

// Invariant suites run by `folia verify` and by the acceptance binary.
// Every check returns a record instead of throwing; an exception inside a
// check is reported as a failure of that check.

#include <cstdint>
#include <string>
#include <vector>

#include "folia/builder.hpp"

namespace folia {

struct CheckResult {
  std::string name;
  bool passed = false;
  /// Worst observed quantity and the bound it is compared with.
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

enum class VerifyLevel { Quick, Full };

VerifyLevel verify_level_from_string(const std::string& s);

struct SampleBudget {
  std::size_t locality_points;
  std::size_t roundtrip_points;
  std::size_t separation_pairs;
  int leaf_samples;
};

SampleBudget budget_for(VerifyLevel level);

CheckResult check_epsilon_halving(const FoliationManifest& m);
CheckResult check_residue_classes(const FoliationManifest& m);
/// Support closures pairwise disjoint, inside the domain, centres recorded.
CheckResult check_supports(const FoliationManifest& m);
/// Each support ball misses every earlier marked base leaf.
CheckResult check_marked_leaf_clearance(const FoliationManifest& m);
/// L_j sampled after stage j equals L_j sampled after the last stage.
CheckResult check_marked_leaf_stability(const FoliationManifest& m, int samples);
/// max |lambda(s e1) - s e2| over `samples` values of s in (-delta, delta).
CheckResult check_flow_oracle(double delta, int samples, int n, int steps = kDefaultFlowSteps);
/// forward(x) == x bit-for-bit at points outside every support ball.
CheckResult check_support_locality(const FoliationManifest& m, std::size_t points, std::uint64_t seed);
/// |forward(inverse(y)) - y| <= 1e-9 K.
CheckResult check_round_trip(const FoliationManifest& m, std::size_t points, std::uint64_t seed);
/// Near each corner the bent leaf lies in the z_l plane (1e-8) and its arms
/// meet at 2 atan(1/K) (1e-6). Measured on the local offset form.
CheckResult check_angular_geometry(const FoliationManifest& m);
CheckResult check_separation(const FoliationManifest& m, std::size_t pairs, std::uint64_t seed);
/// 4 eps_{s+1} < l_s / 4 for every recorded s.
CheckResult check_convergence(const FoliationManifest& m);
/// sup |Phi_{K} x - Phi_{K-1} x| <= 2 eps_K over sampled x.
CheckResult check_successive_composites(const FoliationManifest& m, std::size_t points, std::uint64_t seed);

std::vector<CheckResult> run_verify(const FoliationManifest& m, VerifyLevel level);

}  // namespace folia
