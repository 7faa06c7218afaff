#pragma once
// Independent reference implementations shared by the unit and acceptance
// tests. They deliberately avoid the library's own linear algebra.
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "botune/gp.hpp"

namespace oracle {

using Mat = std::vector<std::vector<long double>>;

inline long double kernel(const botune::KernelSpec& k, const botune::Point& x,
                          const botune::Point& y) {
  long double r2 = 0.0L;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const long double d = (static_cast<long double>(x[i]) - y[i]) / k.lengthscales[i];
    r2 += d * d;
  }
  const long double s2 = static_cast<long double>(k.signal_std) * k.signal_std;
  switch (k.family) {
    case botune::KernelFamily::kSquaredExponential:
      return s2 * std::exp(-r2 / 2.0L);
    case botune::KernelFamily::kRationalQuadratic:
      return s2 * std::pow(1.0L + r2 / (2.0L * k.alpha), -static_cast<long double>(k.alpha));
    case botune::KernelFamily::kMatern52: {
      const long double r = std::sqrt(5.0L * r2);
      return s2 * (1.0L + r + r * r / 3.0L) * std::exp(-r);
    }
    case botune::KernelFamily::kGammaExponential:
      return s2 * std::exp(-std::pow(std::sqrt(r2), static_cast<long double>(k.gamma)));
  }
  return 0.0L;
}

// Solves A X = B by Gauss-Jordan elimination with partial pivoting; also
// returns log|det A|.
inline std::pair<Mat, long double> solve(Mat a, Mat b) {
  const std::size_t n = a.size();
  const std::size_t m = b.empty() ? 0 : b[0].size();
  long double logdet = 0.0L;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    const long double p = a[c][c];
    logdet += std::log(std::abs(p));
    for (std::size_t j = 0; j < n; ++j) a[c][j] /= p;
    for (std::size_t j = 0; j < m; ++j) b[c][j] /= p;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0.0L) continue;
      const long double f = a[r][c];
      for (std::size_t j = 0; j < n; ++j) a[r][j] -= f * a[c][j];
      for (std::size_t j = 0; j < m; ++j) b[r][j] -= f * b[c][j];
    }
  }
  return {b, logdet};
}

struct DenseGp {
  std::vector<long double> mean, var;
  long double log_evidence = 0.0L;
};

inline DenseGp dense_gp(const botune::Dataset& d, const botune::GpHyper& h,
                        const std::vector<botune::Point>& queries) {
  const std::size_t n = d.size(), q = queries.size();
  const long double sn2 = static_cast<long double>(h.noise_std) * h.noise_std;
  Mat k(n, std::vector<long double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      k[i][j] = kernel(h.kernel, d.inputs[i], d.inputs[j]) + (i == j ? sn2 : 0.0L);
  // right-hand sides: z and k(X, x_q) for every query
  Mat rhs(n, std::vector<long double>(q + 1));
  for (std::size_t i = 0; i < n; ++i) {
    rhs[i][0] = d.targets[i] - h.prior_mean;
    for (std::size_t j = 0; j < q; ++j) rhs[i][j + 1] = kernel(h.kernel, d.inputs[i], queries[j]);
  }
  const auto [sol, logdet] = solve(k, rhs);
  DenseGp out;
  long double quad = 0.0L;
  for (std::size_t i = 0; i < n; ++i) quad += rhs[i][0] * sol[i][0];
  out.log_evidence = -0.5L * quad - 0.5L * logdet - 0.5L * n * std::log(2.0L * M_PIl);
  for (std::size_t j = 0; j < q; ++j) {
    long double mu = h.prior_mean, v = kernel(h.kernel, queries[j], queries[j]);
    for (std::size_t i = 0; i < n; ++i) {
      mu += rhs[i][j + 1] * sol[i][0];
      v -= rhs[i][j + 1] * sol[i][j + 1];
    }
    out.mean.push_back(mu);
    out.var.push_back(v);
  }
  return out;
}

// Monte-Carlo estimate of E[max(0, eta - J)], J ~ N(mu, sigma^2).
inline double mc_ei(double mu, double sigma, double eta, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  long double acc = 0.0L;
  for (std::size_t i = 0; i < n; ++i) acc += std::max(0.0, eta - (mu + sigma * z(rng)));
  return static_cast<double>(acc / n);
}

// Output of the continuous loop T(s) = w^2 / (s^2 + 2 zeta w s + w^2) driven
// by a zero-order-held reference sampled at dt, started at rest at r[0].
inline std::vector<double> second_order_response(const std::vector<double>& r, double w,
                                                 double zeta, double dt) {
  std::vector<double> y(r.size());
  double x = r.empty() ? 0.0 : r[0], v = 0.0;
  const int sub = 20;
  const double h = dt / sub;
  for (std::size_t k = 0; k < r.size(); ++k) {
    y[k] = x;
    const auto f = [&](double a, double b) {
      return std::pair<double, double>{b, w * w * (r[k] - a) - 2.0 * zeta * w * b};
    };
    for (int i = 0; i < sub; ++i) {
      const auto [k1x, k1v] = f(x, v);
      const auto [k2x, k2v] = f(x + 0.5 * h * k1x, v + 0.5 * h * k1v);
      const auto [k3x, k3v] = f(x + 0.5 * h * k2x, v + 0.5 * h * k2v);
      const auto [k4x, k4v] = f(x + h * k3x, v + h * k3v);
      x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
      v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
  }
  return y;
}

inline double second_order_gain(double f_hz, double w, double zeta) {
  const double s = 2.0 * M_PI * f_hz;
  const double re = w * w - s * s, im = 2.0 * zeta * w * s;
  return w * w / std::sqrt(re * re + im * im);
}

}  // namespace oracle
