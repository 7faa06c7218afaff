#include "botune/paramspace.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "botune/error.hpp"

namespace botune {

namespace {

constexpr std::array<std::string_view, kNumParams> kNames = {"t_set", "t_obs", "p1", "p2"};

double to_search(double x, Scale s) {
  return s == Scale::kLogMagnitude ? std::log(std::abs(x)) : x;
}

}  // namespace

std::string_view param_name(std::size_t dim) { return kNames.at(dim); }

Bounds Bounds::safety() {
  Bounds b;
  b.lower = {0.060, 0.010, -std::exp(2.0), -std::exp(5.0)};
  b.upper = {0.200, 0.040, -std::exp(-1.0), -std::exp(2.0)};
  b.scale = {Scale::kLinear, Scale::kLinear, Scale::kLogMagnitude, Scale::kLogMagnitude};
  return b;
}

void Bounds::validate() const {
  for (std::size_t i = 0; i < kNumParams; ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i])) {
      std::ostringstream os;
      os << "bounds." << kNames[i] << ": lower (" << lower[i] << ") must be below upper ("
         << upper[i] << ")";
      throw DomainError(os.str());
    }
    if (scale[i] == Scale::kLogMagnitude &&
        (lower[i] == 0.0 || upper[i] == 0.0 || std::signbit(lower[i]) != std::signbit(upper[i]))) {
      throw DomainError("bounds." + std::string(kNames[i]) +
                        ": log-scaled dimension must not contain zero");
    }
  }
}

bool Bounds::contains(const ParamVector& theta) const {
  const auto v = theta.as_array();
  for (std::size_t i = 0; i < kNumParams; ++i) {
    if (!(v[i] >= lower[i] && v[i] <= upper[i])) return false;
  }
  return true;
}

void Bounds::check(const ParamVector& theta) const {
  const auto v = theta.as_array();
  for (std::size_t i = 0; i < kNumParams; ++i) {
    if (!(v[i] >= lower[i] && v[i] <= upper[i])) {
      std::ostringstream os;
      os << kNames[i] << " = " << v[i] << " outside safety bounds [" << lower[i] << ", "
         << upper[i] << "]";
      throw DomainError(os.str());
    }
  }
}

double Bounds::span(std::size_t dim) const { return std::abs(upper.at(dim) - lower.at(dim)); }

PoleSpec to_pole_spec(const ParamVector& theta, const Bounds& bounds) {
  bounds.check(theta);
  if (!(theta.t_set > 0.0) || !(theta.t_obs > 0.0))
    throw DomainError("settling times must be positive");
  if (!(theta.p1 < 0.0) || !(theta.p2 < 0.0))
    throw DomainError("nominal poles must be strictly negative");
  PoleSpec s;
  s.p_ctr = pole_from_settling_time(theta.t_set);
  s.p_obs = pole_from_settling_time(theta.t_obs);
  s.a2 = theta.p1 + theta.p2;
  s.a1 = -theta.p1 * theta.p2;
  return s;
}

Point encode(const ParamVector& theta, const Bounds& bounds) {
  bounds.check(theta);
  const auto v = theta.as_array();
  Point u(kNumParams);
  for (std::size_t i = 0; i < kNumParams; ++i) {
    const double lo = to_search(bounds.lower[i], bounds.scale[i]);
    const double hi = to_search(bounds.upper[i], bounds.scale[i]);
    const double x = to_search(v[i], bounds.scale[i]);
    u[static_cast<Eigen::Index>(i)] = std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
  }
  return u;
}

ParamVector decode(const Point& u, const Bounds& bounds) {
  if (u.size() != static_cast<Eigen::Index>(kNumParams))
    throw InvalidArgument("decode: expected a 4-dimensional point");
  std::array<double, kNumParams> v{};
  for (std::size_t i = 0; i < kNumParams; ++i) {
    const double c = std::clamp(u[static_cast<Eigen::Index>(i)], 0.0, 1.0);
    const double lo = to_search(bounds.lower[i], bounds.scale[i]);
    const double hi = to_search(bounds.upper[i], bounds.scale[i]);
    const double x = lo + c * (hi - lo);
    if (bounds.scale[i] == Scale::kLogMagnitude) {
      v[i] = std::copysign(std::exp(x), bounds.lower[i]);
    } else {
      v[i] = x;
    }
    // exp/log round trip can leave the endpoints one ulp outside the box.
    const double a = std::min(bounds.lower[i], bounds.upper[i]);
    const double b = std::max(bounds.lower[i], bounds.upper[i]);
    v[i] = std::clamp(v[i], a, b);
  }
  return ParamVector::from_array(v);
}

std::vector<Point> sample_unit_cube(std::size_t dim, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("sample count must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Point> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Point p(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) p[static_cast<Eigen::Index>(i)] = unif(rng);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<ParamVector> sample_uniform(const Bounds& bounds, std::size_t n, std::uint64_t seed) {
  bounds.validate();
  std::vector<ParamVector> out;
  for (const auto& u : sample_unit_cube(kNumParams, n, seed)) out.push_back(decode(u, bounds));
  return out;
}

}  // namespace botune
