#include "botune/adrc.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "botune/error.hpp"

namespace botune {

Eigen::Matrix3d AdrcDesign::observer_matrix() const {
  const PlacedGains<double> g{L[0], L[1], L[2], K[0], K[1], v};
  return observer_error_matrix(a1, a2, g);
}

Eigen::Matrix2d AdrcDesign::closed_loop_matrix() const {
  const PlacedGains<double> g{L[0], L[1], L[2], K[0], K[1], v};
  return nominal_closed_loop(a1, a2, b, g);
}

double AdrcDesign::nominal_dc_gain() const {
  const Eigen::Vector2d bv(0.0, b * v);
  const Eigen::Vector2d xss = -closed_loop_matrix().partialPivLu().solve(bv);
  return xss[0];
}

AdrcDesign synthesize(const PoleSpec& spec, double b, double dt) {
  if (b == 0.0 || !std::isfinite(b)) throw DomainError("ADRC synthesis needs a nonzero input gain b");
  if (!(spec.p_obs < 0.0) || !(spec.p_ctr < 0.0))
    throw DomainError("ADRC poles must be strictly negative");
  if (!(dt > 0.0)) throw DomainError("ADRC sample time must be positive");

  const auto g = place_poles(spec.a1, spec.a2, b, spec.p_obs, spec.p_ctr);
  AdrcDesign d;
  d.a1 = spec.a1;
  d.a2 = spec.a2;
  d.b = b;
  d.p_obs = spec.p_obs;
  d.p_ctr = spec.p_ctr;
  d.L = {g.l1, g.l2, g.l3};
  d.K = {g.k1, g.k2};
  d.v = g.v;
  d.dt = dt;

  // exp([[F, G], [0, 0]] dt) = [[Ad, int_0^dt e^{F s} ds G], [0, I]], taken
  // in the coordinates z = D w with D = diag(1, s, s^2) and s a power of two
  // near |p_obs|. The raw entries span ~|p_obs|^3 and cost about eight
  // digits in the exponential; the scaled ones are all O(|p_obs|).
  const double s = std::exp2(std::round(std::log2(std::abs(spec.p_obs))));
  const Eigen::Vector3d dg(1.0, s, s * s);
  Eigen::Matrix<double, 5, 5> aug = Eigen::Matrix<double, 5, 5>::Zero();
  aug.topLeftCorner<3, 3>() = dg.cwiseInverse().asDiagonal() * d.observer_matrix() * dg.asDiagonal();
  aug(1, 3) = b / s;
  aug.block<3, 1>(0, 4) = d.L.cwiseQuotient(dg);
  const Eigen::Matrix<double, 5, 5> e = (aug * dt).exp();
  d.obs_a = dg.asDiagonal() * e.topLeftCorner<3, 3>() * dg.cwiseInverse().asDiagonal();
  d.obs_bu = dg.cwiseProduct(e.block<3, 1>(0, 3));
  d.obs_by = dg.cwiseProduct(e.block<3, 1>(0, 4));
  return d;
}

ControlStep control_step(const AdrcDesign& d, const AdrcState& s, double y, double r) {
  ControlStep out;
  out.u_raw = d.K[0] * s.x1_hat + d.K[1] * s.x2_hat + d.v * r - s.psi_hat / d.b;
  out.u = std::clamp(out.u_raw, -1.0, 1.0);
  const Eigen::Vector3d z(s.x1_hat, s.x2_hat, s.psi_hat);
  const Eigen::Vector3d zn = d.obs_a * z + d.obs_bu * out.u + d.obs_by * y;
  out.next = {zn[0], zn[1], zn[2]};
  return out;
}

}  // namespace botune
