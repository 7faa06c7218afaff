#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "botune/cost.hpp"
#include "botune/error.hpp"
#include "oracles.hpp"

using namespace botune;

namespace {

std::vector<double> sinusoid(double f, double amp, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = amp * std::sin(2.0 * M_PI * f * k * kSampleTime);
  return x;
}

double rms(std::span<const double> x, std::size_t from, std::size_t to) {
  double s = 0.0;
  for (std::size_t k = from; k < to; ++k) s += x[k] * x[k];
  return std::sqrt(s / static_cast<double>(to - from));
}

// Filtered-output stand-in: first-order approach to each new level.
std::vector<double> first_order_steps(const StepSeriesSpec& spec, double tau) {
  const auto r = generate_reference(spec);
  std::vector<double> y(r.size());
  double prev = spec.initial_level;
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (k < spec.edge(0)) {
      y[k] = r[k];
      continue;
    }
    const std::size_t i = k / spec.hold_samples() - 1;
    const std::size_t e = spec.edge(i);
    const double from = i == 0 ? spec.initial_level : spec.levels[i - 1];
    prev = spec.levels[i];
    y[k] = prev + (from - prev) * std::exp(-static_cast<double>(k - e) * kSampleTime / tau);
  }
  return y;
}

}  // namespace

TEST(Butterworth, MatchesScipyCoefficients) {
  // scipy.signal.butter(3, 50, fs=1000)
  const double b[] = {0.00289819463372143, 0.008694583901164291, 0.008694583901164291,
                      0.00289819463372143};
  const double a[] = {1.0, -2.374094743709352, 1.929355669091215, -0.5320753683120918};
  const auto f = butterworth_lowpass(3, 50.0, 1000.0);
  ASSERT_EQ(f.b.size(), 4u);
  ASSERT_EQ(f.a.size(), 4u);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(f.b[i], b[i], 1e-14);
    EXPECT_NEAR(f.a[i], a[i], 1e-13);
  }
}

TEST(ZeroPhase, MatchesScipyFiltfilt) {
  // scipy.signal.filtfilt(b, a, x, padlen=12) on the signal below
  std::vector<double> x(100);
  for (int k = 0; k < 100; ++k)
    x[k] = std::sin(2 * M_PI * 3 * k / 1000.0) + 0.3 * std::cos(2 * M_PI * 120 * k / 1000.0) + k * 0.01;
  const auto y = zero_phase_filter(x, 50.0);
  const std::pair<int, double> ref[] = {{0, 0.286391803131651},   {1, 0.25117437203199583},
                                        {13, 0.3501921815364729}, {50, 1.3103098565285876},
                                        {98, 2.1142356155142865}, {99, 2.1686877043727524}};
  for (auto [k, v] : ref) EXPECT_NEAR(y[k], v, 1e-12) << "k = " << k;
}

TEST(ZeroPhase, ConstantPassesThrough) {
  const std::vector<double> x(500, 12.5);
  for (double v : zero_phase_filter(x, 50.0)) EXPECT_NEAR(v, 12.5, 1e-9);
}

TEST(ZeroPhase, InBandSinusoidKeepsAmplitudeAndPhase) {
  const auto x = sinusoid(5.0, 1.0, 4000);
  const auto y = zero_phase_filter(x, 50.0);
  EXPECT_NEAR(rms(y, 500, 3500) / rms(x, 500, 3500), 1.0, 0.01);
  double best = -1e300;
  int arg = 99;
  for (int lag = -20; lag <= 20; ++lag) {
    double c = 0.0;
    for (int k = 500; k < 3500; ++k) c += x[k] * y[k + lag];
    if (c > best) best = c, arg = lag;
  }
  EXPECT_EQ(arg, 0);
}

TEST(ZeroPhase, StopBandRollOff) {
  for (double f : {200.0, 300.0}) {
    const auto x = sinusoid(f, 1.0, 4000);
    const auto y = zero_phase_filter(x, 50.0);
    // |H|^2 of an analog 3rd-order Butterworth, with prewarped frequencies
    const double ratio = std::tan(M_PI * f / 1000.0) / std::tan(M_PI * 50.0 / 1000.0);
    const double expected = 1.0 / (1.0 + std::pow(ratio, 6));
    const double got = rms(y, 500, 3500) / rms(x, 500, 3500);
    EXPECT_NEAR(20 * std::log10(got), 20 * std::log10(expected), 3.0) << f;
    EXPECT_LE(got, std::pow(50.0 / f, 6) * std::sqrt(2.0));
  }
}

TEST(ZeroPhase, RejectsShortSignals) {
  const std::vector<double> x(kFilterMinLength - 1, 0.0);
  EXPECT_THROW(zero_phase_filter(x, 50.0), InvalidArgument);
  const std::vector<double> ok(kFilterMinLength, 1.0);
  EXPECT_EQ(zero_phase_filter(ok, 50.0).size(), ok.size());
}

TEST(Reference, StepSeries) {
  StepSeriesSpec s;
  s.initial_level = 10.0;
  s.levels = {40.0};
  const auto r = generate_reference(s);
  ASSERT_EQ(r.size(), 4000u);
  EXPECT_EQ(r[0], 10.0);
  EXPECT_EQ(r[1999], 10.0);
  EXPECT_EQ(r[2000], 40.0);
  EXPECT_EQ(r[3999], 40.0);
}

TEST(Reference, StepSeriesValidation) {
  StepSeriesSpec s;
  s.hold = 1.0;
  EXPECT_THROW(s.validate(), Error);
  s = {};
  s.levels = {20.0};
  EXPECT_THROW(s.validate(), Error);
}

TEST(Reference, ChirpStartsAtCenterAndEndsAtTopFrequency) {
  ChirpSpec c;
  c.preroll = 0.0;
  const auto r = generate_reference(c);
  EXPECT_DOUBLE_EQ(r[0], c.center);
  const double h = 1e-4, tau = c.duration - h;
  const double f_num = (c.phase(tau + h / 2) - c.phase(tau - h / 2)) / h / (2.0 * M_PI);
  EXPECT_NEAR(f_num, c.f_hi, 0.01 * c.f_hi);
  EXPECT_NEAR(c.frequency(0.0), c.f_lo, 1e-12);
  c.law = SweepLaw::kLinear;
  EXPECT_NEAR((c.phase(tau + h / 2) - c.phase(tau - h / 2)) / h / (2.0 * M_PI), c.f_hi, 0.01 * c.f_hi);
  for (double v : generate_reference(c)) {
    EXPECT_LE(v, c.center + c.amplitude + 1e-12);
    EXPECT_GE(v, c.center - c.amplitude - 1e-12);
  }
}

TEST(Heur, PublishedRows) {
  const std::tuple<double, double, double> rows[] = {
      {0.053, 0.088, 0.141}, {0.067, 0.107, 0.174}, {0.056, 0.088, 0.144}};
  for (auto [t90, h, j] : rows) {
    const auto r = combine_heur({{t90, h, true}, {t90, h, true}});
    EXPECT_NEAR(r.j, j, 5e-4);
    EXPECT_DOUBLE_EQ(r.j, r.mean_t90 + r.mean_overshoot);
  }
}

TEST(Heur, PerfectTrackingIsOneSample) {
  StepSeriesSpec s;
  const auto r = generate_reference(s);
  const auto res = j_heur(r, s);
  EXPECT_NEAR(res.mean_t90, 1e-3, 1e-15);
  EXPECT_EQ(res.mean_overshoot, 0.0);
  EXPECT_NEAR(res.j, 0.001, 1e-15);
}

TEST(Heur, FirstOrderDecay) {
  StepSeriesSpec s;
  for (double tau : {0.020, 0.050, 0.100}) {
    const auto res = j_heur(first_order_steps(s, tau), s);
    for (const auto& m : res.steps) {
      EXPECT_TRUE(m.reached);
      EXPECT_NEAR(m.t90, tau * std::log(10.0), 1e-3);
      EXPECT_EQ(m.overshoot, 0.0);
    }
  }
}

TEST(Heur, OvershootAndUnreachedStep) {
  StepSeriesSpec s;
  s.initial_level = 20.0;
  s.levels = {30.0, 20.0};
  auto y = generate_reference(s);
  y[2500] = 30.4;  // overshoot above a rising step
  y[4500] = 19.0;  // overshoot below a falling step
  auto res = j_heur(y, s);
  EXPECT_NEAR(res.steps[0].overshoot, 0.4, 1e-12);
  EXPECT_NEAR(res.steps[1].overshoot, 1.0, 1e-12);
  std::fill(y.begin() + 2000, y.begin() + 4000, 20.0);
  res = j_heur(y, s);
  EXPECT_FALSE(res.steps[0].reached);
  EXPECT_DOUBLE_EQ(res.steps[0].t90, s.hold);
}

TEST(Heur, IdleTimeInvariance) {
  StepSeriesSpec s;
  const double a = j_heur(first_order_steps(s, 0.03), s).j;
  s.hold = 3.0;
  EXPECT_NEAR(j_heur(first_order_steps(s, 0.03), s).j, a, 1e-12);
}

TEST(Spectrum, IdentityAndOpenLoop) {
  ChirpSpec c;
  const auto r = generate_reference(c);
  auto fr = estimate_st(r, r, c);
  ASSERT_FALSE(fr.freq.empty());
  for (std::size_t k = 0; k < fr.freq.size(); ++k) {
    EXPECT_NEAR(fr.mag_t[k], 1.0, 1e-6);
    EXPECT_LE(fr.mag_s[k], 1e-6);
    EXPECT_GE(fr.freq[k], 0.5 - 1e-9);
    EXPECT_LE(fr.freq[k], 28.0 + 1e-9);
  }
  const std::vector<double> flat(r.size(), c.center);
  fr = estimate_st(r, flat, c);
  for (std::size_t k = 0; k < fr.freq.size(); ++k) {
    EXPECT_NEAR(fr.mag_t[k], 0.0, 1e-9);
    EXPECT_NEAR(fr.mag_s[k], 1.0, 1e-9);
  }
}

TEST(Spectrum, SecondOrderLoop) {
  ChirpSpec c;
  const auto r = generate_reference(c);
  const double w = 2.0 * M_PI * 10.0, zeta = 0.5;
  const auto y = oracle::second_order_response(r, w, zeta, kSampleTime);
  const auto fr = estimate_st(r, y, c);
  for (std::size_t k = 0; k < fr.freq.size(); ++k) {
    const double g = oracle::second_order_gain(fr.freq[k], w, zeta);
    EXPECT_NEAR(fr.mag_t[k] / g, 1.0, 0.05) << fr.freq[k];
  }
}

TEST(Norm, IdentityLoop) {
  FrequencyResponse fr;
  for (int k = 1; k <= 50; ++k) {
    fr.freq.push_back(0.5 + k * 0.5);
    fr.mag_s.push_back(0.0);
    fr.mag_t.push_back(1.0);
  }
  const auto n = j_norm(fr);
  EXPECT_EQ(n.s_inf, 0.0);
  EXPECT_DOUBLE_EQ(n.t_2, 1.0);
  EXPECT_EQ(n.f_s, 28.0);
  EXPECT_NEAR(n.j, 0.5 + std::exp(-14.0), 1e-12);
}

TEST(Norm, CrossingAtFirstBinAndInterpolation) {
  FrequencyResponse fr;
  fr.freq = {0.5, 1.0, 1.5};
  fr.mag_s = {1.0, 1.0, 1.0};
  fr.mag_t = {0.0, 0.0, 0.0};
  EXPECT_NEAR(j_norm(fr).j, 0.5 + std::exp(-0.25), 1e-12);
  EXPECT_NEAR(j_norm(fr).j, 1.27880, 1e-5);
  fr.mag_s = {0.2, 0.4, 0.8};
  EXPECT_NEAR(j_norm(fr).f_s, 1.0 + 0.25 * 0.5, 1e-12);
  fr.mag_s = {0.2, 0.3, 0.4};
  EXPECT_EQ(j_norm(fr).f_s, 28.0);
  fr.freq.clear();
  fr.mag_s.clear();
  fr.mag_t.clear();
  EXPECT_THROW(j_norm(fr), InvalidArgument);
}

TEST(Secondary, RobustnessNoiseAndNullDisturbance) {
  FrequencyResponse fr;
  fr.freq = {1.0, 2.0};
  fr.mag_s = {0.4, 1.2};
  fr.mag_t = {1.0, 1.0};
  SecondaryInputs in;
  in.chirp = &fr;
  for (double sp : {0.0, 10.0}) {
    SetpointHold h;
    h.setpoint = sp;
    h.traj.y.assign(3000, sp);
    h.traj.t.resize(3000);
    in.holds.push_back(h);
  }
  DisturbanceRun dr;
  dr.magnitude = 0.0;
  dr.traj.y.assign(3000, 30.0);
  dr.traj.t.resize(3000);
  in.disturbance = &dr;
  const auto m = secondary_metrics(in);
  EXPECT_NEAR(m.robustness, 1.0 / 1.2, 1e-12);
  EXPECT_NEAR(m.robustness, 0.83, 5e-3);
  EXPECT_EQ(m.noise, 0.0);
  EXPECT_EQ(m.t_dist, 0.0);
  EXPECT_EQ(m.h_dist, 0.0);
}

TEST(Secondary, DisturbanceTimes) {
  FrequencyResponse fr;
  fr.freq = {1.0};
  fr.mag_s = {1.0};
  fr.mag_t = {1.0};
  SetpointHold h;
  h.traj.y.assign(3000, 0.0);
  DisturbanceRun dr;
  dr.magnitude = 0.7;
  dr.onset = 1.0;
  dr.traj.y.assign(3000, 30.0);
  // 2 deg bump starting at the onset, back in the 2% band after 150 ms
  for (std::size_t k = 1000; k < 1150; ++k) dr.traj.y[k] = 32.0;
  SecondaryInputs in{&fr, {h}, &dr};
  const auto m = secondary_metrics(in);
  EXPECT_NEAR(m.h_dist, 2.0, 1e-12);
  EXPECT_NEAR(m.t_dist, 0.150, 1e-9);
}

TEST(Secondary, MissingRunsAreNamed) {
  SecondaryInputs in;
  try {
    secondary_metrics(in);
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("chirp"), std::string::npos);
  }
  FrequencyResponse fr;
  in.chirp = &fr;
  EXPECT_THROW(secondary_metrics(in), InvalidArgument);
}
