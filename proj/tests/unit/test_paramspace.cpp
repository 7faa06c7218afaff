#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "botune/error.hpp"
#include "botune/paramspace.hpp"

using namespace botune;

namespace {

ParamVector lower_corner(const Bounds& b) { return ParamVector::from_array(b.lower); }
ParamVector upper_corner(const Bounds& b) { return ParamVector::from_array(b.upper); }

}  // namespace

TEST(PoleSpec, SettlingTimesMapToPoles) {
  const auto b = Bounds::safety();
  ParamVector th{0.060, 0.040, -1.0, -10.0};
  const auto ps = to_pole_spec(th, b);
  EXPECT_DOUBLE_EQ(ps.p_ctr, -100.0);
  EXPECT_DOUBLE_EQ(ps.p_obs, -150.0);
  EXPECT_DOUBLE_EQ(ps.a2, -11.0);
  EXPECT_DOUBLE_EQ(ps.a1, -10.0);
}

TEST(PoleSpec, NominalPolynomialHasRequestedRoots) {
  const auto b = Bounds::safety();
  for (const auto& th : sample_uniform(b, 50, 3)) {
    const auto ps = to_pole_spec(th, b);
    // s^2 - a2 s - a1 evaluated at p1 and p2
    for (double p : {th.p1, th.p2}) EXPECT_NEAR(p * p - ps.a2 * p - ps.a1, 0.0, 1e-9 * p * p);
    EXPECT_LT(ps.p_ctr, 0.0);
    EXPECT_LT(ps.p_obs, 0.0);
  }
}

TEST(PoleSpec, OutOfBoundsNamesDimension) {
  ParamVector th{0.1, 0.005, -1.0, -10.0};
  try {
    to_pole_spec(th);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("t_obs"), std::string::npos);
  }
}

TEST(Encode, CornersAndLogMidpoint) {
  const auto b = Bounds::safety();
  EXPECT_TRUE(encode(lower_corner(b), b).isApprox(Point::Zero(4)));
  EXPECT_TRUE(encode(upper_corner(b), b).isApprox(Point::Ones(4)));
  ParamVector th{0.1, 0.02, -std::exp(0.5), -20.0};
  EXPECT_NEAR(encode(th, b)[2], 0.5, 1e-15);
}

TEST(Encode, RoundTrip) {
  const auto b = Bounds::safety();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    std::array<double, kNumParams> v{};
    for (std::size_t i = 0; i < kNumParams; ++i) v[i] = b.lower[i] + u(rng) * (b.upper[i] - b.lower[i]);
    const auto th = ParamVector::from_array(v);
    const auto back = decode(encode(th, b), b).as_array();
    for (std::size_t i = 0; i < kNumParams; ++i)
      EXPECT_LE(std::abs(back[i] - v[i]), 1e-12 * std::abs(v[i]));
  }
}

TEST(Encode, RefusesOutOfBounds) {
  const auto b = Bounds::safety();
  ParamVector th{0.3, 0.02, -1.0, -10.0};
  EXPECT_THROW(encode(th, b), DomainError);
}

TEST(SampleUniform, DeterministicAndInBounds) {
  const auto b = Bounds::safety();
  const auto a = sample_uniform(b, 10, 7);
  const auto c = sample_uniform(b, 10, 7);
  ASSERT_EQ(a.size(), 10u);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k], c[k]);
    EXPECT_TRUE(b.contains(a[k]));
    EXPECT_NO_THROW(to_pole_spec(a[k], b));
  }
}

TEST(SampleUniform, EncodedMeanIsCentral) {
  const auto b = Bounds::safety();
  Point mean = Point::Zero(4);
  const auto pts = sample_uniform(b, 1000, 5);
  for (const auto& th : pts) mean += encode(th, b);
  mean /= static_cast<double>(pts.size());
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(mean[i], 0.5, 0.05);
}

TEST(SampleUniform, ZeroCountIsAnError) {
  EXPECT_THROW(sample_uniform(Bounds::safety(), 0, 1), InvalidArgument);
}

TEST(Bounds, Validate) {
  auto b = Bounds::safety();
  EXPECT_NO_THROW(b.validate());
  b.lower[0] = b.upper[0];
  EXPECT_THROW(b.validate(), DomainError);
  b = Bounds::safety();
  b.upper[2] = 1.0;
  EXPECT_THROW(b.validate(), DomainError);
}
