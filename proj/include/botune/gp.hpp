#pragma once

// Gaussian-process regression over encoded (unit-cube) inputs: ARD kernels,
// exact posterior, log evidence and maximum-likelihood hyperparameters.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "botune/paramspace.hpp"

namespace botune {

enum class KernelFamily {
  kSquaredExponential,
  kRationalQuadratic,
  kMatern52,
  kGammaExponential,
};

std::string_view kernel_family_name(KernelFamily f);
// Accepts "se", "rq", "matern52", "gammaexp" (and the long "ardSE"/"ardRQ"
// style names). Throws ConfigError.
KernelFamily parse_kernel_family(std::string_view name);

struct KernelSpec {
  KernelFamily family = KernelFamily::kSquaredExponential;
  Eigen::VectorXd lengthscales;  // encoded units, one per dimension
  double signal_std = 1.0;
  double alpha = 1.0;  // rational quadratic only
  double gamma = 1.0;  // gamma exponential only, in (0, 2]

  void validate() const;
};

double kernel_eval(const KernelSpec& k, const Point& x, const Point& xp);
Eigen::MatrixXd kernel_matrix(const KernelSpec& k, const std::vector<Point>& a,
                              const std::vector<Point>& b);

struct GpHyper {
  KernelSpec kernel;
  double noise_std = 1e-3;
  double prior_mean = 0.0;
};

struct Dataset {
  std::vector<Point> inputs;
  std::vector<double> targets;

  std::size_t size() const { return targets.size(); }
  bool empty() const { return targets.empty(); }
  void add(Point x, double y);
  void validate() const;
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

// Cholesky factor of a symmetric positive-definite matrix. The first attempt
// uses the matrix as is; on failure a diagonal jitter of 1e-10 * scale is
// added and raised by 100x per retry up to 1e-4 * scale.
struct JitteredCholesky {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
};
JitteredCholesky factorize_spd(const Eigen::MatrixXd& m, double scale, std::string_view what);

class GpPosterior {
 public:
  GpPosterior(Dataset data, GpHyper hyper);

  Prediction predict(const Point& x) const;
  double mean(const Point& x) const;

  // Posterior mean and covariance of the latent function at `pts`.
  void joint(const std::vector<Point>& pts, Eigen::VectorXd& mean, Eigen::MatrixXd& cov) const;
  // Posterior covariance between f(pts[i]) and f(x).
  Eigen::VectorXd cross_covariance(const std::vector<Point>& pts, const Point& x) const;

  // L^-1 k(X, .) with L the Gram factor; zero rows when there is no data.
  Eigen::VectorXd whitened_covariance(const Point& x) const;
  Eigen::MatrixXd whitened_covariance(const std::vector<Point>& pts) const;

  GpPosterior condition_on(const Point& x, double y) const;

  const Dataset& data() const { return data_; }
  const GpHyper& hyper() const { return hyper_; }
  double noise_variance() const { return hyper_.noise_std * hyper_.noise_std; }
  double prior_variance() const { return hyper_.kernel.signal_std * hyper_.kernel.signal_std; }
  std::size_t dim() const { return dim_; }

 private:
  Eigen::VectorXd kvec(const Point& x) const;

  Dataset data_;
  GpHyper hyper_;
  std::size_t dim_ = 0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd weights_;  // K^-1 z
};

double log_marginal_likelihood(const Dataset& data, const GpHyper& hyper);

// Search box for maximum-likelihood fitting. All parameters are searched in
// log space except gamma.
struct HyperBox {
  double lengthscale_lo = 0.02, lengthscale_hi = 5.0;
  double signal_std_lo = 1e-3, signal_std_hi = 10.0;
  double noise_std_lo = 1e-6, noise_std_hi = 1.0;
  double alpha_lo = 0.05, alpha_hi = 100.0;
  double gamma_lo = 0.2, gamma_hi = 2.0;

  // Box whose amplitude ranges scale with the spread of `targets`.
  static HyperBox for_targets(const std::vector<double>& targets);
};

struct FitResult {
  GpHyper hyper;
  double log_likelihood = 0.0;
  bool warning = false;  // no start produced a finite likelihood
};

FitResult fit_hyperparameters(const Dataset& data, KernelFamily family, const HyperBox& box,
                              int restarts, std::uint64_t seed, double prior_mean = 0.0);

// Fixed hyperparameter profiles. "heur-ardSE" and "norm-ardRQ" carry
// lengthscales given in engineering units (seconds, 1/s); they are divided
// by the per-dimension span of `bounds` to obtain encoded lengthscales.
std::vector<std::string> profile_names();
GpHyper hyper_profile(std::string_view name, const Bounds& bounds);

}  // namespace botune
