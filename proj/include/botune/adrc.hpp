#pragma once

// ADRC: extended-state Luenberger observer for (x1, x2, psi) with a triple
// pole, state feedback placing a double nominal pole, and a saturated control
// law that cancels the estimated total disturbance.

#include <Eigen/Core>

#include "botune/paramspace.hpp"

namespace botune {

// Observer and feedback gains by coefficient matching.
//
// Extended model: x1' = x2, x2' = a1 x1 + a2 x2 + psi + b u, psi' = 0, y = x1.
// det(sI - A_ext + L C) = s^3 + (l1 - a2) s^2 + (l2 - a1 - a2 l1) s + l3 is
// matched to (s - p_obs)^3; s^2 - (a2 + b k2) s - (a1 + b k1) to (s - p_ctr)^2;
// v = p_ctr^2 / b gives unit DC gain of the nominal loop.
template <typename Scalar>
struct PlacedGains {
  Scalar l1, l2, l3;
  Scalar k1, k2;
  Scalar v;
};

template <typename Scalar>
PlacedGains<Scalar> place_poles(const Scalar& a1, const Scalar& a2, const Scalar& b,
                                const Scalar& p_obs, const Scalar& p_ctr) {
  PlacedGains<Scalar> g;
  g.l1 = a2 - Scalar(3) * p_obs;
  g.l2 = Scalar(3) * p_obs * p_obs + a1 + a2 * g.l1;
  g.l3 = -p_obs * p_obs * p_obs;
  g.k1 = (-p_ctr * p_ctr - a1) / b;
  g.k2 = (Scalar(2) * p_ctr - a2) / b;
  g.v = p_ctr * p_ctr / b;
  return g;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> observer_error_matrix(const Scalar& a1, const Scalar& a2,
                                                  const PlacedGains<Scalar>& g) {
  Eigen::Matrix<Scalar, 3, 3> m;
  m << -g.l1, Scalar(1), Scalar(0),
       a1 - g.l2, a2, Scalar(1),
       -g.l3, Scalar(0), Scalar(0);
  return m;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> nominal_closed_loop(const Scalar& a1, const Scalar& a2, const Scalar& b,
                                                const PlacedGains<Scalar>& g) {
  Eigen::Matrix<Scalar, 2, 2> m;
  m << Scalar(0), Scalar(1),
       a1 + b * g.k1, a2 + b * g.k2;
  return m;
}

struct AdrcDesign {
  double a1 = 0.0, a2 = 0.0, b = 1.0;
  double p_obs = 0.0, p_ctr = 0.0;
  Eigen::Vector3d L = Eigen::Vector3d::Zero();
  Eigen::RowVector2d K = Eigen::RowVector2d::Zero();
  double v = 0.0;
  double dt = 1e-3;

  // Zero-order-hold discretization of the observer
  // z' = (A_ext - L C) z + B_ext u + L y over one sample.
  Eigen::Matrix3d obs_a = Eigen::Matrix3d::Identity();
  Eigen::Vector3d obs_bu = Eigen::Vector3d::Zero();
  Eigen::Vector3d obs_by = Eigen::Vector3d::Zero();

  Eigen::Matrix3d observer_matrix() const;     // A_ext - L C
  Eigen::Matrix2d closed_loop_matrix() const;  // A_nom + B_nom K
  double nominal_dc_gain() const;
};

// Throws DomainError when b == 0 or a requested pole is not strictly negative.
AdrcDesign synthesize(const PoleSpec& spec, double b, double dt = 1e-3);

struct AdrcState {
  double x1_hat = 0.0;   // [deg]
  double x2_hat = 0.0;   // [deg/s]
  double psi_hat = 0.0;  // [deg/s^2]
};

struct ControlStep {
  double u_raw = 0.0;
  double u = 0.0;  // clamped to [-1, 1]
  AdrcState next;
};

// u = sat(K x_hat + v r - psi_hat / b); the observer is then advanced one
// sample with the saturated input and the measurement.
ControlStep control_step(const AdrcDesign& d, const AdrcState& s, double y, double r);

// Stateful wrapper usable as a simulator control law.
class AdrcController {
 public:
  AdrcController(AdrcDesign design, AdrcState initial = {})
      : design_(std::move(design)), state_(initial) {}

  double operator()(double y, double r) {
    const auto step = control_step(design_, state_, y, r);
    state_ = step.next;
    return step.u;
  }
  const AdrcState& state() const { return state_; }
  const AdrcDesign& design() const { return design_; }

 private:
  AdrcDesign design_;
  AdrcState state_;
};

}  // namespace botune
