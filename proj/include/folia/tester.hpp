#pragma once

// Holomorphy test at the angular points of a built foliation.
//
// At a corner with arm tangents t1, t2 (t1 != +-t2) the one-sided derivatives
// of a C^1 function along the arms are D_k = a t_k + b conj(t_k), with
// a = df/dz_l and b = df/dconj(z_l). Two independent directions determine
// (a, b); a function holomorphic near the leaf has b = 0 there.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "folia/builder.hpp"
#include "folia/cfun.hpp"

namespace folia {

struct ArmDerivative {
  cplx value;
  double h_used = 0.0;
  double fd_error_est = 0.0;
};

/// Second-order one-sided difference (2f(q+h) - f(q+2h)/2 - 3f(q)/2)/h at
/// h = h0, with an error estimate from the h vs h/2 discrepancy plus
/// rounding. Throws DomainError if q + s dir leaves `domain` for s <= 2 h0,
/// EvalError on a non-finite value.
ArmDerivative one_sided_derivative(const Expr& f, const Point& q, const Point& dir, double h0,
                                   const Domain* domain = nullptr);

/// Solves D_k = a t_k + b conj(t_k), k = 1, 2. Throws DomainError
/// ("degenerate arms") when |Im(conj(t1) t2)| < 1e-6.
WirtingerPair wirtinger_from_arms(cplx t1, cplx t2, cplx d1, cplx d2);

struct TestOptions {
  /// Step is max(eta/64, h_floor), capped by the boundary clearance.
  double h_floor = 1e-4;
  double tau_detect = 1e-2;
  /// Floor of the per-point pass threshold max(tau_pass, 10 fd_error_est).
  double tau_pass = 1e-6;
  bool oracle = false;
};

struct PointRecord {
  std::size_t stage = 0;  // 0-based
  Point q;
  int l = 1;
  cplx t1;
  cplx t2;
  WirtingerPair fd;
  double residual = 0.0;
  double fd_error_est = 0.0;
  double h = 0.0;
  bool passes = false;
  bool violates = false;
  std::optional<WirtingerPair> oracle;
  double oracle_residual = 0.0;
  bool oracle_agrees = true;
};

enum class Verdict { Consistent, Violated, Inconclusive };

std::string to_string(Verdict v);

struct HolomorphyReport {
  std::string function;
  std::vector<PointRecord> points;
  std::vector<double> per_coordinate_max;
  Verdict verdict = Verdict::Inconclusive;
  TestOptions thresholds;
  bool oracle_agreement = true;
};

PointRecord test_at_point(const Expr& f, const FoliationManifest& m, std::size_t stage_index,
                          const TestOptions& opts = {});

/// Tests every angular point. Throws DomainError("no angular points") for an
/// empty manifest and when some coordinate class has no stage.
HolomorphyReport test_function(const Expr& f, const FoliationManifest& m, const TestOptions& opts = {});

nlohmann::json report_to_json(const HolomorphyReport& r, const std::string& manifest_label);

inline constexpr const char* kReportDisclaimer =
    "A violated verdict certifies a nonzero d/dconj(z_l) at an angular point. A consistent verdict only "
    "means d/dconj(z_l) vanished, within tolerance, at the finitely many angular points tested.";

}  // namespace folia
