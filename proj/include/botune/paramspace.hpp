#pragma once

// Tuning domain: the four ADRC tuning parameters, their safety box, the
// mapping to pole locations and the unit-cube encoding used by the GP.

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace botune {

// Encoded point in the unit cube [0,1]^D.
using Point = Eigen::VectorXd;

inline constexpr std::size_t kNumParams = 4;

struct ParamVector {
  double t_set = 0.0;  // [s] settling time of the nominal closed loop
  double t_obs = 0.0;  // [s] settling time of the observer
  double p1 = 0.0;     // [1/s] slow nominal pole
  double p2 = 0.0;     // [1/s] fast nominal pole

  std::array<double, kNumParams> as_array() const { return {t_set, t_obs, p1, p2}; }
  static ParamVector from_array(const std::array<double, kNumParams>& a) {
    return {a[0], a[1], a[2], a[3]};
  }
  friend bool operator==(const ParamVector&, const ParamVector&) = default;
};

std::string_view param_name(std::size_t dim);

enum class Scale { kLinear, kLogMagnitude };

struct Bounds {
  std::array<double, kNumParams> lower{};
  std::array<double, kNumParams> upper{};
  std::array<Scale, kNumParams> scale{};

  // [60, 200] ms, [10, 40] ms, [-e^2, -e^-1], [-e^5, -e^2]; poles searched
  // in log magnitude.
  static Bounds safety();

  // Throws DomainError unless lower < upper everywhere and log-scaled
  // dimensions keep a single nonzero sign.
  void validate() const;
  bool contains(const ParamVector& theta) const;
  // Throws DomainError naming the first violated dimension.
  void check(const ParamVector& theta) const;
  // Span |upper - lower| in engineering units.
  double span(std::size_t dim) const;
};

// Pole configuration derived from a ParamVector.
struct PoleSpec {
  double p_ctr = 0.0;  // double controller pole
  double p_obs = 0.0;  // triple observer pole
  double a1 = 0.0;     // nominal dynamics: x2' = a1 x1 + a2 x2 + b u
  double a2 = 0.0;
};

// Pole whose mode exp(p t) has decayed to exp(-6) at time t.
inline double pole_from_settling_time(double t) { return -6.0 / t; }

PoleSpec to_pole_spec(const ParamVector& theta, const Bounds& bounds = Bounds::safety());

Point encode(const ParamVector& theta, const Bounds& bounds);
// Inverse of encode. Coordinates are clamped to [0,1] first.
ParamVector decode(const Point& u, const Bounds& bounds);

std::vector<ParamVector> sample_uniform(const Bounds& bounds, std::size_t n,
                                        std::uint64_t seed);
// Seeded uniform points in [0,1]^dim.
std::vector<Point> sample_unit_cube(std::size_t dim, std::size_t n, std::uint64_t seed);

}  // namespace botune
