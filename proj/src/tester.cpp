#include "folia/tester.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>

#include "folia/parallel.hpp"

namespace folia {

namespace {

cplx checked_eval(const Expr& f, const Point& x) {
  const cplx v = eval(f, x);
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
    throw EvalError("non-finite value of " + f.to_string());
  }
  return v;
}

nlohmann::json cplx_json(cplx c) { return nlohmann::json::array({c.real(), c.imag()}); }

}  // namespace

ArmDerivative one_sided_derivative(const Expr& f, const Point& q, const Point& dir, double h0, const Domain* domain) {
  if (!(h0 > 0.0)) throw DomainError("step must be positive");
  const Point far = q + (2.0 * h0) * dir;
  // Domains are convex, so checking both ends covers the ray.
  if (domain && !(domain->contains_interior(q) && domain->contains_interior(far))) {
    throw DomainError("difference ray leaves the domain");
  }
  const cplx f0 = checked_eval(f, q);
  const cplx fh2 = checked_eval(f, q + (0.5 * h0) * dir);
  const cplx fh = checked_eval(f, q + h0 * dir);
  const cplx f2h = checked_eval(f, far);
  const cplx d_h = (2.0 * fh - 0.5 * f2h - 1.5 * f0) / h0;
  const cplx d_half = (2.0 * fh2 - 0.5 * fh - 1.5 * f0) / (0.5 * h0);
  // Truncation error is O(h^2): D(h) - D = 4E, D(h/2) - D = E.
  const double truncation = 4.0 / 3.0 * std::abs(d_h - d_half);
  const double scale = 2.0 * std::abs(fh) + 0.5 * std::abs(f2h) + 1.5 * std::abs(f0);
  const double rounding = 4.0 * DBL_EPSILON * (scale + norm(q) * std::abs(d_h)) / (0.5 * h0);
  return {d_h, h0, truncation + rounding};
}

WirtingerPair wirtinger_from_arms(cplx t1, cplx t2, cplx d1, cplx d2) {
  if (std::abs((std::conj(t1) * t2).imag()) < 1e-6) throw DomainError("degenerate arms: t1 is parallel to t2");
  const cplx det = t1 * std::conj(t2) - std::conj(t1) * t2;
  return {(d1 * std::conj(t2) - d2 * std::conj(t1)) / det, (t1 * d2 - t2 * d1) / det};
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Consistent:
      return "consistent";
    case Verdict::Violated:
      return "violated";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

PointRecord test_at_point(const Expr& f, const FoliationManifest& m, std::size_t stage_index, const TestOptions& opts) {
  const Stage& s = m.stages.at(stage_index);
  const AngularPoint ap = angular_data(s);
  const double clearance = m.domain.boundary_distance(ap.q);
  const double h = std::min(std::max(s.eta() / 64.0, opts.h_floor), clearance / 2.5);

  PointRecord r;
  r.stage = stage_index;
  r.q = ap.q;
  r.l = ap.l;
  r.t1 = ap.t1;
  r.t2 = ap.t2;
  r.h = h;
  // arm_out1 points along -t1, so its derivative is -D(t1).
  const ArmDerivative out1 = one_sided_derivative(f, ap.q, ap.arm_out1, h, &m.domain);
  const ArmDerivative out2 = one_sided_derivative(f, ap.q, ap.arm_out2, h, &m.domain);
  r.fd = wirtinger_from_arms(ap.t1, ap.t2, -out1.value, out2.value);
  const double det = std::abs(ap.t1 * std::conj(ap.t2) - std::conj(ap.t1) * ap.t2);
  r.residual = std::abs(r.fd.b);
  r.fd_error_est = (out1.fd_error_est + out2.fd_error_est) / det;
  r.passes = r.residual < std::max(opts.tau_pass, 10.0 * r.fd_error_est) && r.fd_error_est <= opts.tau_detect / 10.0;
  r.violates = r.residual > opts.tau_detect && r.residual > 10.0 * r.fd_error_est;
  if (opts.oracle) {
    r.oracle = wirtinger_ad(f, ap.q, ap.l);
    r.oracle_residual = std::abs(r.oracle->b);
    r.oracle_agrees = std::abs(r.residual - r.oracle_residual) <= std::max(1e-5, 10.0 * r.fd_error_est);
  }
  return r;
}

HolomorphyReport test_function(const Expr& f, const FoliationManifest& m, const TestOptions& opts) {
  if (m.stages.empty()) throw DomainError("no angular points: the manifest has no stages");
  if (m.stages.size() < static_cast<std::size_t>(m.n())) {
    throw DomainError("no angular points for some coordinate class: need at least n stages");
  }
  HolomorphyReport report;
  report.function = f.to_string();
  report.thresholds = opts;
  report.points.resize(m.stages.size());
  parallel_for(m.stages.size(), [&](std::size_t k) { report.points[k] = test_at_point(f, m, k, opts); });

  report.per_coordinate_max.assign(static_cast<std::size_t>(m.n()), 0.0);
  bool any_violation = false;
  bool all_pass = true;
  for (const PointRecord& r : report.points) {
    double& mx = report.per_coordinate_max[static_cast<std::size_t>(r.l - 1)];
    mx = std::max(mx, r.residual);
    any_violation = any_violation || r.violates;
    all_pass = all_pass && r.passes;
    report.oracle_agreement = report.oracle_agreement && r.oracle_agrees;
  }
  report.verdict = any_violation ? Verdict::Violated : (all_pass ? Verdict::Consistent : Verdict::Inconclusive);
  return report;
}

nlohmann::json report_to_json(const HolomorphyReport& r, const std::string& manifest_label) {
  using nlohmann::json;
  json points = json::array();
  for (const PointRecord& p : r.points) {
    json jp{{"stage", p.stage + 1},
            {"q", p.q.vec()},
            {"l", p.l},
            {"t1", cplx_json(p.t1)},
            {"t2", cplx_json(p.t2)},
            {"a", cplx_json(p.fd.a)},
            {"b", cplx_json(p.fd.b)},
            {"residual", p.residual},
            {"fd_error_est", p.fd_error_est},
            {"h", p.h},
            {"passes", p.passes},
            {"violates", p.violates}};
    if (p.oracle) {
      jp["oracle_b"] = cplx_json(p.oracle->b);
      jp["oracle_residual"] = p.oracle_residual;
      jp["oracle_agrees"] = p.oracle_agrees;
    }
    points.push_back(std::move(jp));
  }
  json out{{"function", r.function},
           {"manifest", manifest_label},
           {"points", std::move(points)},
           {"per_coordinate_max", r.per_coordinate_max},
           {"verdict", to_string(r.verdict)},
           {"thresholds",
            {{"tau_detect", r.thresholds.tau_detect},
             {"tau_pass", r.thresholds.tau_pass},
             {"h_floor", r.thresholds.h_floor},
             {"h_rule", "max(eta/64, h_floor), capped at clearance/2.5"}}},
           {"disclaimer", kReportDisclaimer}};
  if (r.thresholds.oracle) out["oracle_agreement"] = r.oracle_agreement;
  return out;
}

}  // namespace folia
