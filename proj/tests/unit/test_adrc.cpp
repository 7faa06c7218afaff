#include <cmath>

#include <gtest/gtest.h>
#include <Eigen/Eigenvalues>

#include "botune/adrc.hpp"
#include "botune/error.hpp"
#include "oracles_mp.hpp"

using namespace botune;

TEST(Synthesize, ObserverGainForPureIntegratorChain) {
  const auto d = synthesize({-1.0, -2.0, 0.0, 0.0}, 1.0);
  EXPECT_DOUBLE_EQ(d.L[0], 6.0);
  EXPECT_DOUBLE_EQ(d.L[1], 12.0);
  EXPECT_DOUBLE_EQ(d.L[2], 8.0);
  const auto e = oracle::extended_pole_errors({-1.0, -2.0, 0.0, 0.0}, 1.0);
  EXPECT_LT(e.observer, 1e-8);
}

TEST(Synthesize, FeedbackForDoubleIntegrator) {
  const double p = 7.0;
  const auto d = synthesize({-p, -20.0, 0.0, 0.0}, 1.0);
  // s^2 - (a2 + b k2) s - (a1 + b k1) = s^2 + 2 p s + p^2
  EXPECT_DOUBLE_EQ(-d.K[1], 2.0 * p);
  EXPECT_DOUBLE_EQ(-d.K[0], p * p);
  EXPECT_DOUBLE_EQ(d.v, p * p);
  EXPECT_NEAR(d.nominal_dc_gain(), 1.0, 1e-12);
}

TEST(Synthesize, NominalPolesMinusOneMinusTen) {
  const PoleSpec s{-10.0, -150.0, -10.0, -11.0};
  const auto d = synthesize(s, 5e4);
  const auto e = oracle::extended_pole_errors(s, 5e4);
  EXPECT_LT(e.controller, 1e-8);
  EXPECT_LT(e.observer, 1e-8);
  EXPECT_NEAR(d.nominal_dc_gain(), 1.0, 1e-9);
}

TEST(Synthesize, RandomDesignsPlaceThePoles) {
  const auto b = Bounds::safety();
  for (const auto& th : sample_uniform(b, 20, 13)) {
    const auto s = to_pole_spec(th, b);
    const auto e = oracle::extended_pole_errors(s, 5e4);
    EXPECT_LT(e.observer, 1e-8);
    EXPECT_LT(e.controller, 1e-8);
    EXPECT_NEAR(synthesize(s, 5e4).nominal_dc_gain(), 1.0, 1e-9);
  }
}

TEST(Synthesize, RejectsBadInputs) {
  EXPECT_THROW(synthesize({-10.0, -100.0, 0.0, 0.0}, 0.0), DomainError);
  EXPECT_THROW(synthesize({-10.0, 5.0, 0.0, 0.0}, 1.0), DomainError);
}

TEST(Discretization, ObserverMatrixIsExponential) {
  const auto b = Bounds::safety();
  for (const auto& th : sample_uniform(b, 10, 2)) {
    const auto d = synthesize(to_pole_spec(th, b), 5e4);
    // Characteristic polynomial of obs_a against (z - rho)^3. Coefficients
    // are well conditioned where the defective eigenvalues are not.
    const double rho = std::exp(d.p_obs * d.dt);
    const Eigen::Matrix3d& m = d.obs_a;
    const double tr = m.trace();
    const double c2 = 0.5 * (tr * tr - (m * m).trace());
    const double det = m.determinant();
    EXPECT_NEAR(tr, 3.0 * rho, 1e-12);
    EXPECT_NEAR(c2, 3.0 * rho * rho, 1e-12);
    EXPECT_NEAR(det, rho * rho * rho, 1e-12);
    EXPECT_LT(rho, 1.0);
  }
}

TEST(ControlStep, OriginIsFixedPoint) {
  const auto d = synthesize({-50.0, -300.0, -10.0, -11.0}, 5e4);
  const auto s = control_step(d, {}, 0.0, 0.0);
  EXPECT_EQ(s.u, 0.0);
  EXPECT_EQ(s.next.x1_hat, 0.0);
  EXPECT_EQ(s.next.x2_hat, 0.0);
  EXPECT_EQ(s.next.psi_hat, 0.0);
}

TEST(ControlStep, Saturates) {
  const auto d = synthesize({-50.0, -300.0, -10.0, -11.0}, 5e4);
  const auto s = control_step(d, {}, 0.0, 100.0);
  EXPECT_GT(s.u_raw, 1.0);
  EXPECT_EQ(s.u, 1.0);
  const auto n = control_step(d, {}, 0.0, -100.0);
  EXPECT_EQ(n.u, -1.0);
}

TEST(ControlStep, MemorylessWithZeroState) {
  const auto d = synthesize({-50.0, -300.0, -10.0, -11.0}, 5e4);
  const auto a = control_step(d, {}, 3.0, 4.0);
  AdrcController c(d);
  c(10.0, 20.0);
  const auto b = control_step(d, {}, 3.0, 4.0);
  EXPECT_EQ(a.u, b.u);
  EXPECT_DOUBLE_EQ(a.u_raw, d.v * 4.0);
}

TEST(ControlStep, ObserverTracksConstantDisturbance) {
  // Nominal linear plant, constant disturbance, exact ZOH plant update.
  const PoleSpec s{-60.0, -300.0, -10.0, -11.0};
  const double b = 5e4, dist = 50.0, r = 20.0;
  const auto d = synthesize(s, b);
  AdrcController c(d, {r, 0.0, 0.0});
  double x1 = r, x2 = 0.0;
  for (int k = 0; k < 3000; ++k) {
    const double u = c(x1, r);
    for (int i = 0; i < 20; ++i) {
      const double h = d.dt / 20;
      const double a = x2, v = s.a1 * x1 + s.a2 * x2 + b * u + dist;
      x1 += h * a;
      x2 += h * v;
    }
  }
  EXPECT_NEAR(c.state().psi_hat, dist, 0.05);
  EXPECT_NEAR(x1, r, 1e-3);
}
