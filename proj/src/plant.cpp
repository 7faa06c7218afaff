#include "botune/plant.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "botune/error.hpp"

namespace botune {

void PlantParams::validate() const {
  if (!(spring.k_lo > 0.0) || !(spring.k_hi > 0.0))
    throw InvalidArgument("plant spring stiffnesses must be positive");
  if (!(theta_min < spring.theta_lh && spring.theta_lh < theta_max))
    throw InvalidArgument("plant limp-home angle must lie strictly between the hard stops");
  if (!(friction.v_eps > 0.0)) throw InvalidArgument("plant friction v_eps must be positive");
  if (!(friction.coulomb >= 0.0)) throw InvalidArgument("plant Coulomb friction must be nonnegative");
  if (!std::isfinite(b) || b == 0.0) throw InvalidArgument("plant input gain b must be nonzero");
}

double spring_term(double x1, const PlantParams& p) {
  const double k = x1 < p.spring.theta_sw ? p.spring.k_lo : p.spring.k_hi;
  return -k * (x1 - p.spring.theta_lh);
}

double friction_term(double x2, const PlantParams& p) {
  return -p.friction.coulomb * std::tanh(x2 / p.friction.v_eps);
}

PlantState dynamics(const PlantState& s, double u, double d, const PlantParams& p) {
  return {s.x2, spring_term(s.x1, p) + p.c * s.x2 + friction_term(s.x2, p) + p.b * u + d};
}

double Disturbance::at(double t) const {
  double v = 0.0;
  for (const auto& s : steps)
    if (t >= s.onset) v = s.value;
  return v;
}

bool Disturbance::active() const {
  return std::any_of(steps.begin(), steps.end(), [](const Step& s) { return s.value != 0.0; });
}

void SimSpec::validate() const {
  if (std::abs(dt - kSampleTime) > 1e-15) throw InvalidArgument("sample time is fixed at 1 ms");
  if (substeps < 1) throw InvalidArgument("substeps must be at least 1");
  if (!(noise_std >= 0.0)) throw InvalidArgument("sensor noise std must be nonnegative");
}

void Trajectory::reserve(std::size_t n) {
  for (auto* v : {&t, &r, &y, &u, &d, &x1}) v->reserve(n);
}

void Trajectory::validate() const {
  const auto n = t.size();
  for (const auto* v : {&r, &y, &u, &d, &x1})
    if (v->size() != n) throw InvalidArgument("trajectory columns differ in length");
  for (std::size_t k = 1; k < n; ++k)
    if (std::abs(t[k] - t[k - 1] - kSampleTime) > 1e-9)
      throw InvalidArgument("trajectory time is not uniformly sampled at 1 kHz");
}

namespace {

PlantState axpy(const PlantState& s, double h, const PlantState& k) {
  return {s.x1 + h * k.x1, s.x2 + h * k.x2};
}

void project_to_stops(PlantState& s, const PlantParams& p) {
  if (s.x1 <= p.theta_min) {
    s.x1 = p.theta_min;
    s.x2 = std::max(s.x2, 0.0);
  } else if (s.x1 >= p.theta_max) {
    s.x1 = p.theta_max;
    s.x2 = std::min(s.x2, 0.0);
  }
}

}  // namespace

Trajectory simulate(const PlantParams& p, const ControlLaw& ctrl, std::span<const double> reference,
                    const SimSpec& spec) {
  p.validate();
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Trajectory out;
  out.reserve(reference.size());
  PlantState x = spec.initial;
  project_to_stops(x, p);
  const double h = spec.dt / spec.substeps;

  for (std::size_t k = 0; k < reference.size(); ++k) {
    const double t = static_cast<double>(k) * spec.dt;
    const double noise = spec.noise_std > 0.0 ? spec.noise_std * gauss(rng) : 0.0;
    const double y = x.x1 + noise;
    const double r = reference[k];
    const double u = std::clamp(ctrl(y, r), -1.0, 1.0);
    const double d = spec.disturbance.at(t);
    if (!std::isfinite(u)) {
      std::ostringstream os;
      os << "controller produced a non-finite input at t = " << t << " s";
      throw SimulationDiverged(t, os.str());
    }

    out.t.push_back(t);
    out.r.push_back(r);
    out.y.push_back(y);
    out.u.push_back(u);
    out.d.push_back(d);
    out.x1.push_back(x.x1);

    for (int s = 0; s < spec.substeps; ++s) {
      const PlantState k1 = dynamics(x, u, d, p);
      const PlantState k2 = dynamics(axpy(x, 0.5 * h, k1), u, d, p);
      const PlantState k3 = dynamics(axpy(x, 0.5 * h, k2), u, d, p);
      const PlantState k4 = dynamics(axpy(x, h, k3), u, d, p);
      x.x1 += h / 6.0 * (k1.x1 + 2.0 * k2.x1 + 2.0 * k3.x1 + k4.x1);
      x.x2 += h / 6.0 * (k1.x2 + 2.0 * k2.x2 + 2.0 * k3.x2 + k4.x2);
      project_to_stops(x, p);
    }
    if (!std::isfinite(x.x1) || !std::isfinite(x.x2)) {
      std::ostringstream os;
      os << "plant state diverged at t = " << t + spec.dt << " s";
      throw SimulationDiverged(t + spec.dt, os.str());
    }
  }
  return out;
}

}  // namespace botune
