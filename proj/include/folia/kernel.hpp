#pragma once

// One compactly supported perturbation step.
//
// A stage is centred at a point p lying on a straight piece of a base leaf
// (direction Re z1). Inside B(p, eps) it
//   1. rotates the leaf segment onto the straight direction v of the target
//      plane with the time-1 flow of X(y) = w(|y|/delta)(y1+y2)(e2-e1) in
//      frame coordinates y = A(x - p), and
//   2. bends the result with h(x) = x + psi_eta(|x - p|) u, producing a
//      corner of opening 2 atan(1/K) at p + K eta u.
// Outside B(p, eps) the stage is the identity, exactly.

#include <complex>
#include <vector>

#include "folia/geometry.hpp"

namespace folia {

/// Smooth plateau function: 1 on [-1, 1], 0 outside (-2, 2), blended with
/// q(2-|t|) / (q(2-|t|) + q(|t|-1)), q(x) = exp(-1/x).
double bump_omega(double t);

/// d/dt of bump_omega.
double bump_omega_derivative(double t);

/// psi(t) = K w(2t)(1 - |t|).
double psi_profile(double t, double k_bend);

/// psi_eta(t) = eta psi(t / eta).
double psi_eta(double t, double eta, double k_bend);

/// Grid estimate of sup |d/dt [w(2t)(1-|t|)]|, so Lip(psi) = K times this.
double psi_shape_lipschitz();

/// Target Lipschitz constant of psi used by select_K (1/2 less 10%).
inline constexpr double kPsiLipschitzTarget = 0.45;

/// Default bend constant: the K for which psi has Lipschitz constant
/// kPsiLipschitzTarget. Computed once by grid search.
double select_K();

/// Upper bound on -min eig(sym DX) over the support of X, in units where
/// delta = 1 (the field is scale invariant). The flow's lower Lipschitz
/// constant is exp(-kFlowLogNormBound) by Gronwall.
inline constexpr double kFlowLogNormBound = 3.75;

/// Lower Lipschitz constant of h when Lip(psi) <= 1/2.
inline constexpr double kBendLowerLipschitz = 0.5;

inline constexpr int kDefaultFlowSteps = 64;

enum class FlowDirection { Forward, Backward };

/// Time-1 map of X (or its inverse) in frame coordinates. Backward runs the
/// integrator in reverse and then polishes against the forward map so that
/// forward(backward(y)) == y to rounding; throws ConvergenceError if the
/// polish cannot reach 1e-12 delta.
Point flow_time1(const Point& y, double delta, FlowDirection direction, int steps = kDefaultFlowSteps);

/// Plain reversed RK4, without the polish. Used for diagnostics.
Point flow_time1_unpolished_backward(const Point& y, double delta, int steps = kDefaultFlowSteps);

/// Invertible linear map on R^m stored row-major together with its inverse.
struct Frame {
  int m = 0;
  std::vector<double> matrix;
  std::vector<double> inverse;

  Point apply(const Point& x) const;
  Point apply_inverse(const Point& y) const;

  /// Max |A^T A - I| entry.
  double orthogonality_defect() const;
  /// Max |A A^{-1} - I| entry.
  double inverse_defect() const;

  bool operator==(const Frame&) const = default;
};

/// Frame sending Re z1 to e1 and `straight` (a coordinate axis) to e2; a
/// coordinate permutation.
Frame permutation_frame(int n, std::size_t straight_index);

/// In-plane straight direction v for target plane z_l: Re z_l, or Im z1 when
/// l = 1 (the leaf already runs along Re z1).
std::size_t straight_axis(int l);
/// Bend direction u: Im z_l, or Re z1 when l = 1.
std::size_t bend_axis(int l);

struct StageParams {
  Point center;
  double epsilon = 0.0;
  double delta = 0.0;
  double eta = 0.0;
  double k_bend = 0.0;
  int l = 1;
  int flow_steps = kDefaultFlowSteps;
  Frame frame;
};

/// Immutable perturbation stage. The constructor checks the geometric
/// invariants and throws InvariantViolation on failure.
class Stage {
 public:
  explicit Stage(StageParams params);

  /// delta = eps/3, eta = delta/2 and the permutation frame for plane l.
  static Stage standard(Point center, double epsilon, int l, double k_bend,
                        int flow_steps = kDefaultFlowSteps);

  const StageParams& params() const { return p_; }
  const Point& center() const { return p_.center; }
  double epsilon() const { return p_.epsilon; }
  double delta() const { return p_.delta; }
  double eta() const { return p_.eta; }
  double k_bend() const { return p_.k_bend; }
  int l() const { return p_.l; }
  int n() const { return p_.center.complex_dim(); }
  const Frame& frame() const { return p_.frame; }
  const Point& straight_dir() const { return v_; }
  const Point& bend_dir() const { return u_; }

  bool in_support(const Point& x) const;

  /// Local form: image offset of p + dx for |dx| < eps. Works at any scale,
  /// including stages smaller than the spacing of doubles near p.
  Point forward_offset(const Point& dx) const;
  Point inverse_offset(const Point& dy) const;

  /// The rotation part g and the bend part h, on offsets.
  Point rotate_offset(const Point& dx) const;
  Point unrotate_offset(const Point& dy) const;
  Point bend_offset(const Point& dx) const;
  Point unbend_offset(const Point& dy) const;

  /// Lower bound c with |F(x) - F(y)| >= c |x - y|.
  double lower_lipschitz() const;

 private:
  StageParams p_;
  Point v_;
  Point u_;
};

Point stage_forward(const Stage& s, const Point& x);
Point stage_inverse(const Stage& s, const Point& y);

/// Corner of the bent leaf.
struct AngularPoint {
  Point q;
  int l = 1;
  /// One-sided tangents of the image curve t -> t v + K(eta - |t|) u at the
  /// corner, t -> 0- and t -> 0+, as unit complex numbers in z_l.
  std::complex<double> t1;
  std::complex<double> t2;
  double angle = 0.0;
  /// Outward arm directions from q (ambient unit vectors): along -t1 for the
  /// t < 0 arm and along t2 for the t > 0 arm.
  Point arm_out1;
  Point arm_out2;
  /// Length of the exactly straight portion of each arm.
  double arm_length = 0.0;
};

/// Opening 2 atan(1/K) between the outward arms.
double corner_angle(double k_bend);

AngularPoint angular_data(const Stage& s);

/// Complex number in z_l represented by an ambient vector's z_l components.
std::complex<double> plane_component(const Point& vec, int l);

}  // namespace folia
