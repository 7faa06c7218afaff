#pragma once

// Closed-loop experiments on the simulated plant: one ADRC design per
// parameter vector, run against the configured references, scored by either
// cost functional.

#include <cstdint>
#include <string_view>
#include <vector>

#include "botune/adrc.hpp"
#include "botune/cost.hpp"
#include "botune/paramspace.hpp"
#include "botune/plant.hpp"

namespace botune {

enum class Functional { kHeur, kNorm };

std::string_view functional_name(Functional f);
Functional parse_functional(std::string_view name);  // "heur" | "norm"; throws ConfigError

struct ExperimentConfig {
  PlantParams plant;
  double nominal_b = 0.0;  // controller's b; 0 means the plant's b
  double noise_std = 0.05;  // [deg]
  int substeps = 5;
  double filter_cutoff = 50.0;  // [Hz]
  StepSeriesSpec steps;
  ChirpSpec chirp;

  // Set-point holds for the noise metric.
  std::vector<double> hold_setpoints{0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0};
  double hold_duration = 3.0;  // [s]
  double hold_settle = 1.0;    // [s]

  // Disturbance step for the rejection metrics, in actuator units: the
  // plant sees d = magnitude * b.
  double disturbance_setpoint = 30.0;
  double disturbance_onset = 1.0;
  double disturbance_magnitude = 0.7;
  double disturbance_duration = 3.0;

  void validate() const;
  double controller_b() const { return nominal_b != 0.0 ? nominal_b : plant.b; }
};

AdrcDesign design_for(const ParamVector& theta, const ExperimentConfig& cfg,
                      const Bounds& bounds = Bounds::safety());

// Runs the ADRC loop on `reference`. The plant starts at rest at r[0] and the
// observer at (r[0], 0, 0).
Trajectory run_closed_loop(const AdrcDesign& design, const ExperimentConfig& cfg,
                           std::span<const double> reference, std::uint64_t seed,
                           const Disturbance& disturbance = {});

struct Evaluation {
  Functional functional = Functional::kHeur;
  double cost = 0.0;
  AdrcDesign design;
  Trajectory trajectory;          // raw record of the scoring experiment
  std::vector<double> filtered_y;
  HeurResult heur;                // heur only
  NormResult norm;                // norm only
  FrequencyResponse response;     // norm only
};

// Refuses (DomainError) parameter vectors outside `bounds`.
Evaluation evaluate(const ParamVector& theta, Functional f, const ExperimentConfig& cfg,
                    std::uint64_t seed, const Bounds& bounds = Bounds::safety());

// Runs the chirp, set-point holds and disturbance step.
SecondaryMetrics evaluate_secondary(const ParamVector& theta, const ExperimentConfig& cfg,
                                    std::uint64_t seed, const Bounds& bounds = Bounds::safety());

}  // namespace botune
