#include "folia/kernel.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <string>

namespace folia {

namespace {

double smooth_q(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

double smooth_q_derivative(double x) { return x > 0.0 ? std::exp(-1.0 / x) / (x * x) : 0.0; }

// Shape of psi without K: w(2t)(1 - |t|).
double psi_shape(double t) { return bump_omega(2.0 * t) * (1.0 - std::abs(t)); }

// Reduced state of the flow. X only moves points along e2 - e1, so the
// coordinate sum sigma = y1 + y2 and every other coordinate are invariant;
// tau = (y2 - y1)/2 obeys tau' = sigma w(|y|/delta) with
// |y|^2 = sigma^2/2 + 2 tau^2 + rest2.
struct FlowLine {
  double sigma;
  double rest2;
  double delta;

  double field(double tau) const {
    const double r = std::sqrt(0.5 * sigma * sigma + 2.0 * tau * tau + rest2);
    return sigma * bump_omega(r / delta);
  }

  double rk4(double tau, double dt, int steps) const {
    for (int i = 0; i < steps; ++i) {
      const double k1 = field(tau);
      const double k2 = field(tau + 0.5 * dt * k1);
      const double k3 = field(tau + 0.5 * dt * k2);
      const double k4 = field(tau + dt * k3);
      tau += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return tau;
  }
};

void check_flow_args(const Point& y, double delta, int steps) {
  if (y.size() < 2) throw DomainError("flow needs at least two coordinates");
  if (!(delta > 0.0)) throw DomainError("flow radius delta must be positive");
  if (steps < 1) throw DomainError("flow step count must be >= 1");
}

double rest_squared(const Point& y) {
  double s = 0.0;
  for (std::size_t i = 2; i < y.size(); ++i) s += y[i] * y[i];
  return s;
}

Point rebuild(const Point& y, double sigma, double tau) {
  Point out = y;
  out[0] = 0.5 * sigma - tau;
  out[1] = 0.5 * sigma + tau;
  return out;
}

}  // namespace

double bump_omega(double t) {
  const double a = std::abs(t);
  if (a <= 1.0) return 1.0;
  if (a >= 2.0) return 0.0;
  const double up = smooth_q(2.0 - a);
  const double down = smooth_q(a - 1.0);
  return up / (up + down);
}

double bump_omega_derivative(double t) {
  const double a = std::abs(t);
  if (a <= 1.0 || a >= 2.0) return 0.0;
  const double up = smooth_q(2.0 - a);
  const double down = smooth_q(a - 1.0);
  const double denom = (up + down) * (up + down);
  const double d = (-smooth_q_derivative(2.0 - a) * down - up * smooth_q_derivative(a - 1.0)) / denom;
  return t < 0.0 ? -d : d;
}

double psi_profile(double t, double k_bend) { return k_bend * psi_shape(t); }

double psi_eta(double t, double eta, double k_bend) { return eta * psi_profile(t / eta, k_bend); }

double psi_shape_lipschitz() {
  static const double lip = [] {
    // The shape is even, so [0, 1.25] covers its support.
    constexpr int kSamples = 250000;
    constexpr double kHi = 1.25;
    const double h = kHi / kSamples;
    double best = 0.0;
    double prev = psi_shape(0.0);
    for (int i = 1; i <= kSamples; ++i) {
      const double cur = psi_shape(i * h);
      best = std::max(best, std::abs(cur - prev) / h);
      prev = cur;
    }
    return best;
  }();
  return lip;
}

double select_K() { return kPsiLipschitzTarget / psi_shape_lipschitz(); }

Point flow_time1(const Point& y, double delta, FlowDirection direction, int steps) {
  check_flow_args(y, delta, steps);
  if (norm(y) >= 2.0 * delta) return y;
  const FlowLine line{y[0] + y[1], rest_squared(y), delta};
  const double tau = 0.5 * (y[1] - y[0]);
  const double dt = 1.0 / steps;
  if (direction == FlowDirection::Forward) return rebuild(y, line.sigma, line.rk4(tau, dt, steps));

  // Reverse integration, then secant iterations on the forward map so the
  // pair is consistent to rounding.
  const double tol = 1e-12 * delta;
  const double floor = 4.0 * DBL_EPSILON * std::max(delta, std::abs(tau));
  double x0 = line.rk4(tau, -dt, steps);
  double f0 = line.rk4(x0, dt, steps) - tau;
  if (std::abs(f0) > floor) {
    double x1 = x0 - f0;
    double f1 = line.rk4(x1, dt, steps) - tau;
    for (int it = 0; it < 30 && std::abs(f1) > floor && f1 != f0; ++it) {
      const double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
      x0 = x1;
      f0 = f1;
      x1 = x2;
      f1 = line.rk4(x1, dt, steps) - tau;
    }
    if (std::abs(f1) < std::abs(f0)) {
      x0 = x1;
      f0 = f1;
    }
  }
  if (!(std::abs(f0) <= tol)) {
    throw ConvergenceError("backward flow did not match the forward map (residual " +
                           std::to_string(std::abs(f0)) + ", delta " + std::to_string(delta) + ")");
  }
  return rebuild(y, line.sigma, x0);
}

Point flow_time1_unpolished_backward(const Point& y, double delta, int steps) {
  check_flow_args(y, delta, steps);
  if (norm(y) >= 2.0 * delta) return y;
  const FlowLine line{y[0] + y[1], rest_squared(y), delta};
  return rebuild(y, line.sigma, line.rk4(0.5 * (y[1] - y[0]), -1.0 / steps, steps));
}

Point Frame::apply(const Point& x) const {
  Point y = x;
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += matrix[static_cast<std::size_t>(i * m + j)] * x[static_cast<std::size_t>(j)];
    y[static_cast<std::size_t>(i)] = s;
  }
  return y;
}

Point Frame::apply_inverse(const Point& y) const {
  Point x = y;
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += inverse[static_cast<std::size_t>(i * m + j)] * y[static_cast<std::size_t>(j)];
    x[static_cast<std::size_t>(i)] = s;
  }
  return x;
}

double Frame::orthogonality_defect() const {
  double worst = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (int k = 0; k < m; ++k) s += matrix[static_cast<std::size_t>(k * m + i)] * matrix[static_cast<std::size_t>(k * m + j)];
      worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

double Frame::inverse_defect() const {
  double worst = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (int k = 0; k < m; ++k) s += matrix[static_cast<std::size_t>(i * m + k)] * inverse[static_cast<std::size_t>(k * m + j)];
      worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

Frame permutation_frame(int n, std::size_t straight_index) {
  const int m = 2 * n;
  if (straight_index == 0 || straight_index >= static_cast<std::size_t>(m)) {
    throw DomainError("straight direction must be a coordinate axis other than Re z1");
  }
  std::vector<double> a(static_cast<std::size_t>(m * m), 0.0);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * static_cast<std::size_t>(m) + j]; };
  for (std::size_t i = 0; i < static_cast<std::size_t>(m); ++i) at(i, i) = 1.0;
  if (straight_index != 1) {
    at(1, 1) = 0.0;
    at(straight_index, straight_index) = 0.0;
    at(1, straight_index) = 1.0;
    at(straight_index, 1) = 1.0;
  }
  return Frame{m, a, a};
}

std::size_t straight_axis(int l) { return l == 1 ? im_index(1) : re_index(l); }

std::size_t bend_axis(int l) { return l == 1 ? re_index(1) : im_index(l); }

Stage::Stage(StageParams params) : p_(std::move(params)) {
  const int n = p_.center.complex_dim();
  if (n < 1) throw InvariantViolation("stage", "stage center is empty");
  if (p_.l < 1 || p_.l > n) {
    throw InvariantViolation("stage", "target plane index " + std::to_string(p_.l) + " out of range");
  }
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!positive(p_.epsilon) || !positive(p_.delta) || !positive(p_.eta) || !positive(p_.k_bend)) {
    throw InvariantViolation("stage", "radii and bend constant must be positive and finite");
  }
  if (p_.flow_steps < 1) throw InvariantViolation("stage", "flow step count must be >= 1");
  const std::size_t m = p_.center.size();
  if (p_.frame.m != static_cast<int>(m) || p_.frame.matrix.size() != m * m || p_.frame.inverse.size() != m * m) {
    throw InvariantViolation("stage", "frame has the wrong shape");
  }
  if (p_.frame.orthogonality_defect() > 1e-12 || p_.frame.inverse_defect() > 1e-12) {
    throw InvariantViolation("stage", "frame must be orthogonal with a matching inverse");
  }
  v_ = axis(n, straight_axis(p_.l));
  u_ = axis(n, bend_axis(p_.l));
  const Point e1 = p_.frame.apply(axis(n, 0));
  const Point e2 = p_.frame.apply(v_);
  if (distance(e1, axis(n, 0)) > 1e-12 || distance(e2, axis(n, 1)) > 1e-12) {
    throw InvariantViolation("stage", "frame must send Re z1 to e1 and the straight direction to e2");
  }
  if (3.0 * p_.delta > p_.epsilon * (1.0 + 1e-12)) {
    throw InvariantViolation("stage", "flow ball B(3 delta) must fit in the support ball");
  }
  if (!(p_.eta * std::sqrt(2.0) < p_.delta)) {
    throw InvariantViolation("stage", "bend radius eta must be below delta/sqrt(2)");
  }
  if (p_.k_bend > 0.5 || p_.k_bend * psi_shape_lipschitz() > 0.5) {
    throw InvariantViolation("stage", "bend constant violates the Lipschitz bound 1/2");
  }
  if (p_.k_bend * p_.eta < 1e-290) {
    throw InvariantViolation("stage", "stage is too small to represent");
  }
}

Stage Stage::standard(Point center, double epsilon, int l, double k_bend, int flow_steps) {
  const int n = center.complex_dim();
  if (l < 1 || l > n) throw InvariantViolation("stage", "target plane index out of range");
  StageParams p;
  p.center = std::move(center);
  p.epsilon = epsilon;
  p.delta = epsilon / 3.0;
  p.eta = p.delta / 2.0;
  p.k_bend = k_bend;
  p.l = l;
  p.flow_steps = flow_steps;
  p.frame = permutation_frame(n, straight_axis(l));
  return Stage(std::move(p));
}

bool Stage::in_support(const Point& x) const { return distance(x, p_.center) < p_.epsilon; }

Point Stage::rotate_offset(const Point& dx) const {
  if (norm(dx) >= 2.0 * p_.delta) return dx;
  const Point y = flow_time1(p_.frame.apply(dx), p_.delta, FlowDirection::Forward, p_.flow_steps);
  return p_.frame.apply_inverse(y);
}

Point Stage::unrotate_offset(const Point& dy) const {
  if (norm(dy) >= 2.0 * p_.delta) return dy;
  const Point y = flow_time1(p_.frame.apply(dy), p_.delta, FlowDirection::Backward, p_.flow_steps);
  return p_.frame.apply_inverse(y);
}

Point Stage::bend_offset(const Point& dx) const {
  const double r = norm(dx);
  if (r >= p_.eta) return dx;
  return dx + psi_eta(r, p_.eta, p_.k_bend) * u_;
}

Point Stage::unbend_offset(const Point& dy) const {
  if (norm(dy) >= p_.eta) return dy;
  // x = dy - psi_eta(|x|) u contracts with factor Lip(psi) <= 1/2.
  const double tol = 8.0 * DBL_EPSILON * p_.eta;
  Point x = dy;
  for (int it = 0; it < 60; ++it) {
    Point next = dy - psi_eta(norm(x), p_.eta, p_.k_bend) * u_;
    const double change = distance(next, x);
    x = std::move(next);
    if (change <= tol) return x;
  }
  throw ConvergenceError("inverse bend did not converge in 60 iterations");
}

Point Stage::forward_offset(const Point& dx) const { return bend_offset(rotate_offset(dx)); }

Point Stage::inverse_offset(const Point& dy) const { return unrotate_offset(unbend_offset(dy)); }

double Stage::lower_lipschitz() const { return kBendLowerLipschitz * std::exp(-kFlowLogNormBound); }

Point stage_forward(const Stage& s, const Point& x) {
  Point dx = x - s.center();
  if (!(norm(dx) < s.epsilon())) return x;
  return s.center() + s.forward_offset(dx);
}

Point stage_inverse(const Stage& s, const Point& y) {
  Point dy = y - s.center();
  if (!(norm(dy) < s.epsilon())) return y;
  return s.center() + s.inverse_offset(dy);
}

std::complex<double> plane_component(const Point& vec, int l) {
  return {vec[re_index(l)], vec[im_index(l)]};
}

double corner_angle(double k_bend) {
  if (!(k_bend > 0.0)) throw DomainError("bend slope must be positive");
  return 2.0 * std::atan(1.0 / k_bend);
}

AngularPoint angular_data(const Stage& s) {
  const double k = s.k_bend();
  const double len = std::sqrt(1.0 + k * k);
  const Point before = s.straight_dir() + k * s.bend_dir();  // t -> 0-
  const Point after = s.straight_dir() - k * s.bend_dir();   // t -> 0+
  AngularPoint ap;
  ap.q = s.center() + (k * s.eta()) * s.bend_dir();
  ap.l = s.l();
  ap.t1 = plane_component(before, s.l()) / len;
  ap.t2 = plane_component(after, s.l()) / len;
  ap.angle = corner_angle(k);
  ap.arm_out1 = (-1.0 / len) * before;
  ap.arm_out2 = (1.0 / len) * after;
  ap.arm_length = 0.5 * s.eta() * len;
  return ap;
}

}  // namespace folia
