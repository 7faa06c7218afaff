#include "botune/cost.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "botune/error.hpp"

namespace botune {

namespace {

using cplx = std::complex<double>;

std::vector<cplx> expand_roots(const std::vector<cplx>& roots) {
  std::vector<cplx> poly{1.0};
  for (const auto& r : roots) {
    std::vector<cplx> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      next[i + 1] -= r * poly[i];
    }
    poly = std::move(next);
  }
  return poly;
}

std::vector<double> lfilter(const IirFilter& f, std::span<const double> x, std::vector<double> z) {
  const std::size_t m = f.a.size() - 1;
  std::vector<double> y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double out = f.b[0] * x[n] + z[0];
    for (std::size_t i = 0; i + 1 < m; ++i) z[i] = f.b[i + 1] * x[n] + z[i + 1] - f.a[i + 1] * out;
    z[m - 1] = f.b[m] * x[n] - f.a[m] * out;
    y[n] = out;
  }
  return y;
}

// Direct-form II transposed state for a unit-amplitude constant input.
std::vector<double> steady_state(const IirFilter& f) {
  const auto m = static_cast<Eigen::Index>(f.a.size() - 1);
  Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    sys(i, 0) += f.a[static_cast<std::size_t>(i + 1)];
    if (i + 1 < m) sys(i, i + 1) -= 1.0;
    rhs[i] = f.b[static_cast<std::size_t>(i + 1)] - f.a[static_cast<std::size_t>(i + 1)] * f.b[0];
  }
  const Eigen::VectorXd zi = sys.partialPivLu().solve(rhs);
  return {zi.data(), zi.data() + zi.size()};
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev_of(std::span<const double> v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

IirFilter butterworth_lowpass(int order, double cutoff_hz, double fs_hz) {
  if (order < 1) throw InvalidArgument("filter order must be at least 1");
  if (!(cutoff_hz > 0.0 && cutoff_hz < 0.5 * fs_hz))
    throw InvalidArgument("filter cutoff must lie strictly between 0 and Nyquist");
  const double fs2 = 2.0 * fs_hz;
  const double wc = fs2 * std::tan(std::numbers::pi * cutoff_hz / fs_hz);
  std::vector<cplx> poles, zeros;
  for (int k = 1; k <= order; ++k) {
    const double ang = std::numbers::pi * (2.0 * k + order - 1.0) / (2.0 * order);
    const cplx s = wc * std::polar(1.0, ang);
    poles.push_back((fs2 + s) / (fs2 - s));
    zeros.push_back(-1.0);
  }
  const auto a = expand_roots(poles);
  const auto b = expand_roots(zeros);
  IirFilter f;
  double sa = 0.0, sb = 0.0;
  for (const auto& c : a) {
    f.a.push_back(c.real());
    sa += c.real();
  }
  for (const auto& c : b) sb += c.real();
  for (const auto& c : b) f.b.push_back(c.real() * sa / sb);
  return f;
}

std::vector<double> zero_phase_filter(std::span<const double> x, double cutoff_hz, double fs_hz) {
  if (x.size() < kFilterMinLength)
    throw InvalidArgument("signal too short for zero-phase filtering");
  const IirFilter f = butterworth_lowpass(3, cutoff_hz, fs_hz);
  const std::size_t pad = kFilterPadding;
  const std::size_t n = x.size();

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  const auto zi = steady_state(f);
  auto scaled = [&](double v) {
    auto z = zi;
    for (auto& e : z) e *= v;
    return z;
  };
  auto fwd = lfilter(f, ext, scaled(ext.front()));
  std::reverse(fwd.begin(), fwd.end());
  auto bwd = lfilter(f, fwd, scaled(fwd.front()));
  std::reverse(bwd.begin(), bwd.end());
  return {bwd.begin() + static_cast<std::ptrdiff_t>(pad),
          bwd.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

void StepSeriesSpec::validate() const {
  if (levels.empty()) throw InvalidArgument("step series needs at least one step");
  if (!(hold >= 2.0 - 1e-12)) throw InvalidArgument("step hold time must be at least 2 s");
  double prev = initial_level;
  for (double l : levels) {
    if (l == prev) throw InvalidArgument("consecutive step levels must differ");
    prev = l;
  }
}

std::size_t StepSeriesSpec::hold_samples() const {
  return static_cast<std::size_t>(std::llround(hold / kSampleTime));
}

std::size_t StepSeriesSpec::total_samples() const { return (levels.size() + 1) * hold_samples(); }

std::size_t StepSeriesSpec::edge(std::size_t i) const { return (i + 1) * hold_samples(); }

void ChirpSpec::validate() const {
  if (!(f_lo > 0.0 && f_lo < f_hi)) throw InvalidArgument("chirp needs 0 < f_lo < f_hi");
  if (!(duration > 0.0)) throw InvalidArgument("chirp duration must be positive");
  if (!(amplitude > 0.0)) throw InvalidArgument("chirp amplitude must be positive");
  if (!(preroll >= 0.0)) throw InvalidArgument("chirp preroll must be nonnegative");
}

std::size_t ChirpSpec::preroll_samples() const {
  return static_cast<std::size_t>(std::llround(preroll / kSampleTime));
}

std::size_t ChirpSpec::total_samples() const {
  return preroll_samples() + static_cast<std::size_t>(std::llround(duration / kSampleTime));
}

double ChirpSpec::phase(double tau) const {
  if (law == SweepLaw::kLinear)
    return 2.0 * std::numbers::pi * (f_lo * tau + 0.5 * (f_hi - f_lo) * tau * tau / duration);
  const double k = f_hi / f_lo;
  return 2.0 * std::numbers::pi * f_lo * duration / std::log(k) * (std::pow(k, tau / duration) - 1.0);
}

double ChirpSpec::frequency(double tau) const {
  if (law == SweepLaw::kLinear) return f_lo + (f_hi - f_lo) * tau / duration;
  return f_lo * std::pow(f_hi / f_lo, tau / duration);
}

double ChirpSpec::value(double t) const {
  if (t < preroll) return center;
  return center + amplitude * std::sin(phase(t - preroll));
}

std::vector<double> generate_reference(const StepSeriesSpec& spec) {
  spec.validate();
  std::vector<double> r(spec.total_samples());
  const auto hs = spec.hold_samples();
  for (std::size_t k = 0; k < r.size(); ++k) {
    const std::size_t seg = k / hs;
    r[k] = seg == 0 ? spec.initial_level : spec.levels[seg - 1];
  }
  return r;
}

std::vector<double> generate_reference(const ChirpSpec& spec) {
  spec.validate();
  std::vector<double> r(spec.total_samples());
  const auto pre = spec.preroll_samples();
  for (std::size_t k = 0; k < r.size(); ++k) {
    r[k] = k < pre ? spec.center
                   : spec.center + spec.amplitude *
                                       std::sin(spec.phase(static_cast<double>(k - pre) * kSampleTime));
  }
  return r;
}

HeurResult combine_heur(std::vector<StepMetrics> steps) {
  if (steps.empty()) throw InvalidArgument("heuristic functional needs at least one step");
  HeurResult h;
  for (const auto& s : steps) {
    h.mean_t90 += s.t90;
    h.mean_overshoot += s.overshoot;
    h.j += s.overshoot + s.t90;
  }
  const double n = static_cast<double>(steps.size());
  h.mean_t90 /= n;
  h.mean_overshoot /= n;
  h.j /= n;
  h.steps = std::move(steps);
  return h;
}

HeurResult j_heur(std::span<const double> y, const StepSeriesSpec& spec, double dt) {
  spec.validate();
  if (y.size() < spec.total_samples())
    throw InvalidArgument("trajectory is shorter than the step series");
  const auto hs = spec.hold_samples();
  std::vector<StepMetrics> steps;
  double prev = spec.initial_level;
  for (std::size_t i = 0; i < spec.levels.size(); ++i) {
    const double target = spec.levels[i];
    const double delta = target - prev;
    const double dir = delta > 0.0 ? 1.0 : -1.0;
    const std::size_t e = spec.edge(i);
    const std::size_t end = std::min(e + hs, y.size());

    StepMetrics m;
    m.reached = false;
    m.t90 = static_cast<double>(hs) * dt;
    for (std::size_t k = e + 1; k < end; ++k) {
      if (std::abs(y[k] - target) <= 0.1 * std::abs(delta)) {
        m.t90 = static_cast<double>(k - e) * dt;
        m.reached = true;
        break;
      }
    }
    double peak = 0.0;
    for (std::size_t k = e; k < end; ++k) peak = std::max(peak, dir * (y[k] - target));
    m.overshoot = peak;
    steps.push_back(m);
    prev = target;
  }
  return combine_heur(std::move(steps));
}

HeurResult j_heur(const Trajectory& filtered, const StepSeriesSpec& spec) {
  return j_heur(filtered.y, spec, kSampleTime);
}

void FrequencyResponse::validate() const {
  if (freq.size() != mag_s.size() || freq.size() != mag_t.size())
    throw InvalidArgument("frequency response columns differ in length");
}

FrequencyResponse estimate_st(std::span<const double> r, std::span<const double> y,
                              const ChirpSpec& spec, double band_lo, double band_hi) {
  spec.validate();
  if (r.size() != y.size()) throw InvalidArgument("reference and output differ in length");
  const std::size_t start = std::min(spec.preroll_samples(), r.size());
  const std::size_t n = r.size() - start;
  if (n < 16) throw InvalidArgument("chirp record too short for spectral estimation");

  std::vector<double> rr(r.begin() + static_cast<std::ptrdiff_t>(start), r.end());
  std::vector<double> yy(y.begin() + static_cast<std::ptrdiff_t>(start), y.end());
  const double rm = mean_of(rr), ym = mean_of(yy);
  for (auto& v : rr) v -= rm;
  for (auto& v : yy) v -= ym;

  Eigen::FFT<double> fft;
  std::vector<cplx> rf, yf;
  fft.fwd(rf, rr);
  fft.fwd(yf, yy);

  const double fs = 1.0 / kSampleTime;
  std::vector<std::size_t> bins;
  double peak = 0.0;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(n);
    if (f < band_lo - 1e-9 || f > band_hi + 1e-9) continue;
    bins.push_back(k);
    peak = std::max(peak, std::abs(rf[k]));
  }

  FrequencyResponse fr;
  fr.band_lo = band_lo;
  fr.band_hi = band_hi;
  for (std::size_t k : bins) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(n);
    if (!(std::abs(rf[k]) > 1e-3 * peak)) {
      fr.dropped.push_back(f);
      continue;
    }
    fr.freq.push_back(f);
    fr.mag_t.push_back(std::abs(yf[k] / rf[k]));
    fr.mag_s.push_back(std::abs((rf[k] - yf[k]) / rf[k]));
  }
  return fr;
}

FrequencyResponse estimate_st(const Trajectory& traj, const ChirpSpec& spec) {
  return estimate_st(traj.r, traj.y, spec);
}

NormResult j_norm(const FrequencyResponse& fr) {
  fr.validate();
  if (fr.freq.empty()) throw InvalidArgument("frequency response band is empty");
  NormResult out;
  out.s_inf = *std::max_element(fr.mag_s.begin(), fr.mag_s.end());
  double sq = 0.0;
  for (double t : fr.mag_t) sq += t * t;
  out.t_2 = std::sqrt(sq / static_cast<double>(fr.mag_t.size()));
  out.f_s = fr.band_hi;
  for (std::size_t k = 0; k < fr.freq.size(); ++k) {
    if (fr.mag_s[k] >= 0.5) {
      if (k == 0) {
        out.f_s = fr.freq[0];
      } else {
        const double s0 = fr.mag_s[k - 1], s1 = fr.mag_s[k];
        out.f_s = fr.freq[k - 1] + (0.5 - s0) / (s1 - s0) * (fr.freq[k] - fr.freq[k - 1]);
      }
      break;
    }
  }
  out.j = 0.5 * (out.s_inf + out.t_2) + std::exp(-0.5 * out.f_s);
  return out;
}

SecondaryMetrics secondary_metrics(const SecondaryInputs& in) {
  if (in.chirp == nullptr) throw InvalidArgument("secondary metrics: missing chirp experiment");
  if (in.holds.empty()) throw InvalidArgument("secondary metrics: missing set-point hold experiments");
  if (in.disturbance == nullptr)
    throw InvalidArgument("secondary metrics: missing disturbance experiment");

  SecondaryMetrics m;
  const double s_inf = j_norm(*in.chirp).s_inf;
  m.robustness = s_inf > 0.0 ? 1.0 / s_inf : std::numeric_limits<double>::infinity();

  double noise = 0.0;
  for (const auto& h : in.holds) {
    const auto skip = std::min(h.traj.y.size(),
                               static_cast<std::size_t>(std::llround(h.settle / kSampleTime)));
    if (h.traj.y.size() - skip < 2)
      throw InvalidArgument("secondary metrics: set-point hold too short");
    noise += stddev_of(std::span(h.traj.y).subspan(skip));
  }
  m.noise = noise / static_cast<double>(in.holds.size());

  const auto& dist = *in.disturbance;
  if (dist.magnitude == 0.0) return m;
  const auto& y = dist.traj.y;
  const auto onset = static_cast<std::size_t>(std::llround(dist.onset / kSampleTime));
  if (onset >= y.size()) throw InvalidArgument("secondary metrics: disturbance onset after record end");
  const double band = 0.02 * std::abs(dist.setpoint);
  const auto dwell = static_cast<std::size_t>(std::llround(0.2 / kSampleTime));

  double peak = 0.0;
  for (std::size_t k = onset; k < y.size(); ++k) peak = std::max(peak, std::abs(y[k] - dist.setpoint));
  m.h_dist = peak;

  // Settled once the last excursion outside the band is followed by at least
  // the dwell time in band; otherwise the run never settled.
  std::size_t last_out = onset;
  bool left = false;
  for (std::size_t k = y.size(); k-- > onset;) {
    if (std::abs(y[k] - dist.setpoint) > band) {
      last_out = k;
      left = true;
      break;
    }
  }
  std::size_t settled = onset;
  if (left) settled = y.size() - (last_out + 1) >= dwell ? last_out + 1 : y.size();
  m.t_dist = static_cast<double>(settled - onset) * kSampleTime;
  return m;
}

}  // namespace botune
