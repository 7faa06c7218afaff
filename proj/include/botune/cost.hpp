#pragma once

// Reference signals, zero-phase filtering and the two cost functionals
// (step-response heuristic and frequency-domain system norms), plus the
// secondary metrics used for validation.

#include <span>
#include <string>
#include <vector>

#include "botune/plant.hpp"

namespace botune {

// Digital Butterworth low-pass in transfer-function form, b/a with a[0] = 1.
struct IirFilter {
  std::vector<double> b, a;
};
// Bilinear transform with prewarping; unit DC gain.
IirFilter butterworth_lowpass(int order, double cutoff_hz, double fs_hz);

// Samples of edge padding on each side and the minimum accepted signal
// length of zero_phase_filter.
inline constexpr std::size_t kFilterPadding = 12;
inline constexpr std::size_t kFilterMinLength = 6 * kFilterPadding + 1;

// Forward-backward application of a 3rd-order Butterworth (net 6th order,
// zero phase) with odd-reflection padding and steady-state initial
// conditions. Throws InvalidArgument on signals shorter than
// kFilterMinLength.
std::vector<double> zero_phase_filter(std::span<const double> x, double cutoff_hz,
                                      double fs_hz = 1000.0);

struct StepSeriesSpec {
  double initial_level = 20.0;  // held for one hold period before the first step
  std::vector<double> levels{25.0, 20.0, 25.0, 30.0, 35.0, 30.0, 25.0, 20.0, 70.0};
  double hold = 2.0;  // [s]

  void validate() const;
  std::size_t hold_samples() const;
  std::size_t total_samples() const;
  // Sample index at which step i (0-based) starts.
  std::size_t edge(std::size_t i) const;
};

enum class SweepLaw { kLogarithmic, kLinear };

struct ChirpSpec {
  double f_lo = 0.1;        // [Hz]
  double f_hi = 30.0;       // [Hz]
  double amplitude = 20.0;  // [deg]
  double center = 25.0;     // [deg]
  double duration = 60.0;   // [s] sweep length
  double preroll = 1.0;     // [s] constant hold at the center before the sweep
  SweepLaw law = SweepLaw::kLogarithmic;

  void validate() const;
  std::size_t preroll_samples() const;
  std::size_t total_samples() const;
  // Sweep phase [rad] and instantaneous frequency [Hz] at sweep time tau.
  double phase(double tau) const;
  double frequency(double tau) const;
  // Reference value at absolute time t (including the preroll).
  double value(double t) const;
};

std::vector<double> generate_reference(const StepSeriesSpec& spec);
std::vector<double> generate_reference(const ChirpSpec& spec);

struct StepMetrics {
  double t90 = 0.0;        // [s]
  double overshoot = 0.0;  // [deg]
  bool reached = true;     // false when 90% was never reached within the hold
};

struct HeurResult {
  double j = 0.0;
  double mean_t90 = 0.0;        // [s]
  double mean_overshoot = 0.0;  // [deg]
  std::vector<StepMetrics> steps;
};

// Mean over steps of (overshoot[deg] + T90[s]).
HeurResult combine_heur(std::vector<StepMetrics> steps);

// `y` must already be filtered. Step edges come from `spec`.
HeurResult j_heur(std::span<const double> y, const StepSeriesSpec& spec, double dt = kSampleTime);
HeurResult j_heur(const Trajectory& filtered, const StepSeriesSpec& spec);

struct FrequencyResponse {
  std::vector<double> freq;   // [Hz]
  std::vector<double> mag_s;  // |S|
  std::vector<double> mag_t;  // |T|
  std::vector<double> dropped;  // bins removed for lack of reference energy
  double band_lo = 0.5, band_hi = 28.0;

  void validate() const;
};

// |T| = |Y/R| and |S| = |(R - Y)/R| on FFT bins within [band_lo, band_hi],
// using the sweep part of the record with means removed.
FrequencyResponse estimate_st(std::span<const double> r, std::span<const double> y,
                              const ChirpSpec& spec, double band_lo = 0.5, double band_hi = 28.0);
FrequencyResponse estimate_st(const Trajectory& traj, const ChirpSpec& spec);

struct NormResult {
  double j = 0.0;
  double s_inf = 0.0;  // max |S| over the band
  double t_2 = 0.0;    // band RMS of |T|
  double f_s = 0.0;    // [Hz] first frequency where |S| reaches 1/2
};

// J = (||S||_inf + ||T||_2) / 2 + exp(-f_s / 2).
NormResult j_norm(const FrequencyResponse& fr);

struct SetpointHold {
  double setpoint = 0.0;
  Trajectory traj;   // raw measurement
  double settle = 1.0;  // [s] skipped before computing the spread
};

struct DisturbanceRun {
  double setpoint = 30.0;
  double onset = 1.0;     // [s]
  double magnitude = 0.0; // disturbance step height; 0 means no disturbance
  Trajectory traj;        // y already filtered
};

struct SecondaryInputs {
  const FrequencyResponse* chirp = nullptr;
  std::vector<SetpointHold> holds;
  const DisturbanceRun* disturbance = nullptr;
};

struct SecondaryMetrics {
  double robustness = 0.0;  // 1 / ||S||_inf
  double noise = 0.0;       // [deg] mean of per-hold output std
  double t_dist = 0.0;      // [s]
  double h_dist = 0.0;      // [deg]
};

SecondaryMetrics secondary_metrics(const SecondaryInputs& in);

}  // namespace botune
