#pragma once

// Simulated throttle plate: second-order dynamics with a switching spring,
// viscous and smoothed Coulomb friction, hard stops and a saturated input,
// integrated with RK4 under a 1 kHz zero-order-hold controller.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace botune {

struct SpringParams {
  double k_lo = 1000.0;    // [1/s^2] stiffness below the switch angle
  double k_hi = 400.0;     // [1/s^2] stiffness at and above the switch angle
  double theta_lh = 8.0;   // [deg] limp-home (rest) angle
  double theta_sw = 12.0;  // [deg] switch angle
};

struct FrictionParams {
  double coulomb = 1000.0;  // [deg/s^2]
  double v_eps = 1.0;       // [deg/s] tanh smoothing velocity
};

struct PlantParams {
  double b = 5.0e4;  // [deg/s^2 per unit input]
  double c = -70.0;  // [1/s] viscous coefficient
  SpringParams spring;
  FrictionParams friction;
  double theta_min = 0.0;
  double theta_max = 90.0;

  void validate() const;
};

struct PlantState {
  double x1 = 0.0;  // [deg]
  double x2 = 0.0;  // [deg/s]
};

double spring_term(double x1, const PlantParams& p);
double friction_term(double x2, const PlantParams& p);
// u must already be saturated to [-1, 1].
PlantState dynamics(const PlantState& s, double u, double d, const PlantParams& p);

// Piecewise-constant disturbance: value of the latest step whose onset is at
// or before t, zero before the first onset.
struct Disturbance {
  struct Step {
    double onset = 0.0;  // [s]
    double value = 0.0;  // [deg/s^2]
  };
  std::vector<Step> steps;

  double at(double t) const;
  bool active() const;
};

inline constexpr double kSampleTime = 1e-3;

struct SimSpec {
  double dt = kSampleTime;  // fixed controller sample time
  int substeps = 5;         // RK4 steps per sample
  Disturbance disturbance;
  double noise_std = 0.05;  // [deg] sensor noise
  std::uint64_t seed = 0;
  PlantState initial{8.0, 0.0};

  void validate() const;
};

struct Trajectory {
  std::vector<double> t, r, y, u, d, x1;

  std::size_t size() const { return t.size(); }
  void reserve(std::size_t n);
  void validate() const;
};

// Receives the noisy measurement y and the reference r of the current sample
// and returns the actuator command (saturated by the simulator).
using ControlLaw = std::function<double(double y, double r)>;

// One sample per reference entry. Throws SimulationDiverged on a non-finite
// state.
Trajectory simulate(const PlantParams& p, const ControlLaw& ctrl, std::span<const double> reference,
                    const SimSpec& spec);

}  // namespace botune
