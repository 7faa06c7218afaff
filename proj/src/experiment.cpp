#include "botune/experiment.hpp"

#include <cmath>

#include "botune/error.hpp"

namespace botune {

std::string_view functional_name(Functional f) { return f == Functional::kHeur ? "heur" : "norm"; }

Functional parse_functional(std::string_view name) {
  if (name == "heur") return Functional::kHeur;
  if (name == "norm") return Functional::kNorm;
  throw ConfigError("functional must be 'heur' or 'norm', got '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  plant.validate();
  if (!std::isfinite(nominal_b)) throw ConfigError("experiment.nominal_b must be finite");
  if (!(noise_std >= 0.0)) throw ConfigError("experiment.noise_std must be nonnegative");
  if (substeps < 1) throw ConfigError("experiment.substeps must be at least 1");
  if (!(filter_cutoff > 0.0 && filter_cutoff < 500.0))
    throw ConfigError("experiment.filter_cutoff must lie in (0, 500) Hz");
  steps.validate();
  chirp.validate();
  if (chirp.center - chirp.amplitude < plant.theta_min || chirp.center + chirp.amplitude > plant.theta_max)
    throw ConfigError("experiment.chirp: excursion leaves the plant stops");
  if (hold_setpoints.empty()) throw ConfigError("experiment.hold_setpoints must not be empty");
  if (!(hold_duration > hold_settle) || hold_settle < 0.0)
    throw ConfigError("experiment.hold_duration must exceed hold_settle");
  if (!(disturbance_duration > disturbance_onset) || disturbance_onset < 0.0)
    throw ConfigError("experiment.disturbance_duration must exceed disturbance_onset");
}

AdrcDesign design_for(const ParamVector& theta, const ExperimentConfig& cfg, const Bounds& bounds) {
  return synthesize(to_pole_spec(theta, bounds), cfg.controller_b(), kSampleTime);
}

Trajectory run_closed_loop(const AdrcDesign& design, const ExperimentConfig& cfg,
                           std::span<const double> reference, std::uint64_t seed,
                           const Disturbance& disturbance) {
  if (reference.empty()) throw InvalidArgument("empty reference");
  SimSpec spec;
  spec.substeps = cfg.substeps;
  spec.noise_std = cfg.noise_std;
  spec.seed = seed;
  spec.disturbance = disturbance;
  spec.initial = {reference[0], 0.0};
  AdrcController ctrl(design, AdrcState{reference[0], 0.0, 0.0});
  return simulate(cfg.plant, std::ref(ctrl), reference, spec);
}

Evaluation evaluate(const ParamVector& theta, Functional f, const ExperimentConfig& cfg,
                    std::uint64_t seed, const Bounds& bounds) {
  bounds.check(theta);
  Evaluation ev;
  ev.functional = f;
  ev.design = design_for(theta, cfg, bounds);
  if (f == Functional::kHeur) {
    const auto r = generate_reference(cfg.steps);
    ev.trajectory = run_closed_loop(ev.design, cfg, r, seed);
    ev.filtered_y = zero_phase_filter(ev.trajectory.y, cfg.filter_cutoff);
    ev.heur = j_heur(ev.filtered_y, cfg.steps);
    ev.cost = ev.heur.j;
  } else {
    const auto r = generate_reference(cfg.chirp);
    ev.trajectory = run_closed_loop(ev.design, cfg, r, seed);
    ev.filtered_y = zero_phase_filter(ev.trajectory.y, cfg.filter_cutoff);
    // The reference goes through the same filter so the ratio is unbiased.
    const auto rf = zero_phase_filter(ev.trajectory.r, cfg.filter_cutoff);
    ev.response = estimate_st(rf, ev.filtered_y, cfg.chirp);
    ev.norm = j_norm(ev.response);
    ev.cost = ev.norm.j;
  }
  return ev;
}

SecondaryMetrics evaluate_secondary(const ParamVector& theta, const ExperimentConfig& cfg,
                                    std::uint64_t seed, const Bounds& bounds) {
  bounds.check(theta);
  const auto design = design_for(theta, cfg, bounds);

  const auto rc = generate_reference(cfg.chirp);
  const auto chirp = run_closed_loop(design, cfg, rc, seed);
  const auto fr = estimate_st(zero_phase_filter(chirp.r, cfg.filter_cutoff),
                              zero_phase_filter(chirp.y, cfg.filter_cutoff), cfg.chirp);

  SecondaryInputs in;
  in.chirp = &fr;
  const auto n_hold = static_cast<std::size_t>(std::llround(cfg.hold_duration / kSampleTime));
  std::uint64_t k = 1;
  for (double sp : cfg.hold_setpoints) {
    const std::vector<double> r(n_hold, sp);
    in.holds.push_back({sp, run_closed_loop(design, cfg, r, seed + k++), cfg.hold_settle});
  }

  DisturbanceRun dist;
  dist.setpoint = cfg.disturbance_setpoint;
  dist.onset = cfg.disturbance_onset;
  dist.magnitude = cfg.disturbance_magnitude;
  Disturbance d;
  if (cfg.disturbance_magnitude != 0.0)
    d.steps.push_back({cfg.disturbance_onset, cfg.disturbance_magnitude * cfg.plant.b});
  const auto n_dist = static_cast<std::size_t>(std::llround(cfg.disturbance_duration / kSampleTime));
  const std::vector<double> rd(n_dist, cfg.disturbance_setpoint);
  dist.traj = run_closed_loop(design, cfg, rd, seed + k, d);
  dist.traj.y = zero_phase_filter(dist.traj.y, cfg.filter_cutoff);
  in.disturbance = &dist;
  return secondary_metrics(in);
}

}  // namespace botune
