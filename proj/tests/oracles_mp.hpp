#pragma once
// Eigenvalues of the placed closed-loop matrices in 50-digit arithmetic.
// Triple and double poles are defective, so in double precision their
// eigenvalues are only resolvable to about eps^(1/n).
#include <algorithm>
#include <complex>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Eigenvalues>

#include "botune/adrc.hpp"
#include "botune/paramspace.hpp"

namespace oracle {

using Real = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<50>,
                                           boost::multiprecision::et_off>;

struct PoleErrors {
  double observer = 0.0;    // max |lambda - p_obs|
  double controller = 0.0;  // max |lambda - p_ctr|
};

template <int N>
double max_pole_error(const Eigen::Matrix<Real, N, N>& m, const Real& p) {
  Eigen::EigenSolver<Eigen::Matrix<Real, N, N>> es(m, false);
  double worst = 0.0;
  for (int i = 0; i < N; ++i) {
    const auto lam = es.eigenvalues()[i];
    const Real re = lam.real() - p, im = lam.imag();
    worst = std::max(worst, static_cast<double>(sqrt(re * re + im * im)));
  }
  return worst;
}

inline PoleErrors extended_pole_errors(const botune::PoleSpec& s, double b) {
  const Real a1 = s.a1, a2 = s.a2, bb = b, po = s.p_obs, pc = s.p_ctr;
  const auto g = botune::place_poles(a1, a2, bb, po, pc);
  return {max_pole_error<3>(botune::observer_error_matrix(a1, a2, g), po),
          max_pole_error<2>(botune::nominal_closed_loop(a1, a2, bb, g), pc)};
}

}  // namespace oracle
