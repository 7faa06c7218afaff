#include "botune/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "botune/error.hpp"
#include "botune/local_search.hpp"

namespace botune {

std::string_view kernel_family_name(KernelFamily f) {
  switch (f) {
    case KernelFamily::kSquaredExponential: return "se";
    case KernelFamily::kRationalQuadratic: return "rq";
    case KernelFamily::kMatern52: return "matern52";
    case KernelFamily::kGammaExponential: return "gammaexp";
  }
  return "?";
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "se" || name == "ardSE") return KernelFamily::kSquaredExponential;
  if (name == "rq" || name == "ardRQ") return KernelFamily::kRationalQuadratic;
  if (name == "matern52" || name == "ardmatern52") return KernelFamily::kMatern52;
  if (name == "gammaexp" || name == "ardGammaExp") return KernelFamily::kGammaExponential;
  throw ConfigError("unknown kernel family '" + std::string(name) + "'");
}

void KernelSpec::validate() const {
  if (lengthscales.size() == 0) throw InvalidArgument("kernel needs at least one lengthscale");
  for (Eigen::Index i = 0; i < lengthscales.size(); ++i) {
    if (!(lengthscales[i] > 0.0) || !std::isfinite(lengthscales[i]))
      throw InvalidArgument("kernel lengthscales must be positive");
  }
  if (!(signal_std > 0.0)) throw InvalidArgument("kernel signal_std must be positive");
  if (family == KernelFamily::kRationalQuadratic && !(alpha > 0.0))
    throw InvalidArgument("rational quadratic alpha must be positive");
  if (family == KernelFamily::kGammaExponential && !(gamma > 0.0 && gamma <= 2.0))
    throw InvalidArgument("gamma exponential gamma must lie in (0, 2]");
}

double kernel_eval(const KernelSpec& k, const Point& x, const Point& xp) {
  const auto d = k.lengthscales.size();
  if (x.size() != d || xp.size() != d)
    throw InvalidArgument("kernel_eval: point dimension does not match lengthscales");
  const double r2 = ((x - xp).array() / k.lengthscales.array()).square().sum();
  const double s2 = k.signal_std * k.signal_std;
  switch (k.family) {
    case KernelFamily::kSquaredExponential:
      return s2 * std::exp(-0.5 * r2);
    case KernelFamily::kRationalQuadratic:
      return s2 * std::pow(1.0 + r2 / (2.0 * k.alpha), -k.alpha);
    case KernelFamily::kMatern52: {
      const double r = std::sqrt(5.0 * r2);
      return s2 * (1.0 + r + r * r / 3.0) * std::exp(-r);
    }
    case KernelFamily::kGammaExponential:
      return s2 * std::exp(-std::pow(std::sqrt(r2), k.gamma));
  }
  return 0.0;
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& k, const std::vector<Point>& a,
                              const std::vector<Point>& b) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kernel_eval(k, a[i], b[j]);
  return m;
}

void Dataset::add(Point x, double y) {
  inputs.push_back(std::move(x));
  targets.push_back(y);
}

void Dataset::validate() const {
  if (inputs.size() != targets.size())
    throw InvalidArgument("dataset inputs and targets differ in length");
  for (double t : targets)
    if (!std::isfinite(t)) throw InvalidArgument("dataset contains a non-finite target");
  for (const auto& x : inputs) {
    if (x.size() != inputs.front().size())
      throw InvalidArgument("dataset inputs have inconsistent dimension");
    if (!x.allFinite()) throw InvalidArgument("dataset contains a non-finite input");
  }
}

JitteredCholesky factorize_spd(const Eigen::MatrixXd& m, double scale, std::string_view what) {
  JitteredCholesky out;
  out.llt.compute(m);
  if (out.llt.info() == Eigen::Success) return out;
  const auto n = m.rows();
  for (double rel = 1e-10; rel <= 1e-4 * 1.0000001; rel *= 100.0) {
    out.jitter = rel * scale;
    out.llt.compute(m + out.jitter * Eigen::MatrixXd::Identity(n, n));
    if (out.llt.info() == Eigen::Success) return out;
  }
  throw IllConditionedError(std::string(what) + " is not positive definite");
}

namespace {

GpHyper with_noise_floor(GpHyper h) {
  h.noise_std = std::max(h.noise_std, 1e-6 * h.kernel.signal_std);
  return h;
}

}  // namespace

GpPosterior::GpPosterior(Dataset data, GpHyper hyper)
    : data_(std::move(data)), hyper_(with_noise_floor(std::move(hyper))) {
  data_.validate();
  hyper_.kernel.validate();
  dim_ = static_cast<std::size_t>(hyper_.kernel.lengthscales.size());
  if (!data_.empty() && data_.inputs.front().size() != static_cast<Eigen::Index>(dim_))
    throw InvalidArgument("dataset dimension does not match kernel lengthscales");
  if (data_.empty()) return;

  const auto n = static_cast<Eigen::Index>(data_.size());
  Eigen::MatrixXd gram = kernel_matrix(hyper_.kernel, data_.inputs, data_.inputs);
  gram.diagonal().array() += noise_variance();
  llt_ = factorize_spd(gram, prior_variance(), "GP Gram matrix").llt;
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = data_.targets[static_cast<std::size_t>(i)] - hyper_.prior_mean;
  weights_ = llt_.solve(z);
}

Eigen::VectorXd GpPosterior::kvec(const Point& x) const {
  Eigen::VectorXd k(static_cast<Eigen::Index>(data_.size()));
  for (std::size_t i = 0; i < data_.size(); ++i)
    k[static_cast<Eigen::Index>(i)] = kernel_eval(hyper_.kernel, data_.inputs[i], x);
  return k;
}

double GpPosterior::mean(const Point& x) const {
  if (data_.empty()) {
    if (x.size() != static_cast<Eigen::Index>(dim_))
      throw InvalidArgument("query dimension does not match kernel");
    return hyper_.prior_mean;
  }
  return hyper_.prior_mean + kvec(x).dot(weights_);
}

Prediction GpPosterior::predict(const Point& x) const {
  const double prior = kernel_eval(hyper_.kernel, x, x);
  if (data_.empty()) return {hyper_.prior_mean, prior};
  const Eigen::VectorXd k = kvec(x);
  const Eigen::VectorXd v = llt_.matrixL().solve(k);
  return {hyper_.prior_mean + k.dot(weights_), std::max(0.0, prior - v.squaredNorm())};
}

void GpPosterior::joint(const std::vector<Point>& pts, Eigen::VectorXd& mean,
                        Eigen::MatrixXd& cov) const {
  cov = kernel_matrix(hyper_.kernel, pts, pts);
  mean = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(pts.size()), hyper_.prior_mean);
  if (data_.empty()) return;
  const Eigen::MatrixXd kxr = kernel_matrix(hyper_.kernel, data_.inputs, pts);
  mean.noalias() += kxr.transpose() * weights_;
  const Eigen::MatrixXd v = llt_.matrixL().solve(kxr);
  cov.noalias() -= v.transpose() * v;
}

Eigen::VectorXd GpPosterior::cross_covariance(const std::vector<Point>& pts, const Point& x) const {
  Eigen::VectorXd c(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i)
    c[static_cast<Eigen::Index>(i)] = kernel_eval(hyper_.kernel, pts[i], x);
  if (data_.empty()) return c;
  const Eigen::MatrixXd kxr = kernel_matrix(hyper_.kernel, data_.inputs, pts);
  const Eigen::VectorXd vx = llt_.matrixL().solve(kvec(x));
  const Eigen::MatrixXd vr = llt_.matrixL().solve(kxr);
  c.noalias() -= vr.transpose() * vx;
  return c;
}

Eigen::VectorXd GpPosterior::whitened_covariance(const Point& x) const {
  if (data_.empty()) return {};
  return llt_.matrixL().solve(kvec(x));
}

Eigen::MatrixXd GpPosterior::whitened_covariance(const std::vector<Point>& pts) const {
  if (data_.empty()) return Eigen::MatrixXd(0, static_cast<Eigen::Index>(pts.size()));
  return llt_.matrixL().solve(kernel_matrix(hyper_.kernel, data_.inputs, pts));
}

GpPosterior GpPosterior::condition_on(const Point& x, double y) const {
  Dataset d = data_;
  d.add(x, y);
  return GpPosterior(std::move(d), hyper_);
}

double log_marginal_likelihood(const Dataset& data, const GpHyper& hyper_in) {
  if (data.empty()) throw InvalidArgument("log marginal likelihood needs at least one point");
  data.validate();
  const GpHyper hyper = with_noise_floor(hyper_in);
  hyper.kernel.validate();
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd gram = kernel_matrix(hyper.kernel, data.inputs, data.inputs);
  gram.diagonal().array() += hyper.noise_std * hyper.noise_std;
  const auto chol = factorize_spd(gram, hyper.kernel.signal_std * hyper.kernel.signal_std,
                                  "GP Gram matrix");
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = data.targets[static_cast<std::size_t>(i)] - hyper.prior_mean;
  const Eigen::VectorXd w = chol.llt.matrixL().solve(z);
  const double half_logdet = chol.llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * w.squaredNorm() - half_logdet -
         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

HyperBox HyperBox::for_targets(const std::vector<double>& targets) {
  HyperBox box;
  if (targets.empty()) return box;
  const auto [lo, hi] = std::minmax_element(targets.begin(), targets.end());
  double mean = 0.0;
  for (double t : targets) mean += t;
  mean /= static_cast<double>(targets.size());
  double var = 0.0;
  for (double t : targets) var += (t - mean) * (t - mean);
  const double sd = std::sqrt(var / static_cast<double>(targets.size()));
  const double scale = std::max({sd, *hi - *lo, 1e-6 * std::max(1.0, std::abs(mean))});
  box.signal_std_lo = 1e-2 * scale;
  box.signal_std_hi = 10.0 * scale;
  box.noise_std_lo = 1e-6 * scale;
  box.noise_std_hi = scale;
  return box;
}

namespace {

struct HyperLayout {
  KernelFamily family;
  Eigen::Index dim;
  Eigen::Index size() const {
    Eigen::Index n = dim + 2;
    if (family == KernelFamily::kRationalQuadratic || family == KernelFamily::kGammaExponential)
      ++n;
    return n;
  }

  void box(const HyperBox& b, Eigen::VectorXd& lo, Eigen::VectorXd& hi) const {
    lo.resize(size());
    hi.resize(size());
    lo.head(dim).setConstant(std::log(b.lengthscale_lo));
    hi.head(dim).setConstant(std::log(b.lengthscale_hi));
    lo[dim] = std::log(b.signal_std_lo);
    hi[dim] = std::log(b.signal_std_hi);
    lo[dim + 1] = std::log(b.noise_std_lo);
    hi[dim + 1] = std::log(b.noise_std_hi);
    if (family == KernelFamily::kRationalQuadratic) {
      lo[dim + 2] = std::log(b.alpha_lo);
      hi[dim + 2] = std::log(b.alpha_hi);
    } else if (family == KernelFamily::kGammaExponential) {
      lo[dim + 2] = b.gamma_lo;
      hi[dim + 2] = b.gamma_hi;
    }
  }

  GpHyper unpack(const Eigen::VectorXd& v, double prior_mean) const {
    GpHyper h;
    h.kernel.family = family;
    h.kernel.lengthscales = v.head(dim).array().exp();
    h.kernel.signal_std = std::exp(v[dim]);
    h.noise_std = std::exp(v[dim + 1]);
    if (family == KernelFamily::kRationalQuadratic) h.kernel.alpha = std::exp(v[dim + 2]);
    if (family == KernelFamily::kGammaExponential) h.kernel.gamma = v[dim + 2];
    h.prior_mean = prior_mean;
    return h;
  }
};

}  // namespace

FitResult fit_hyperparameters(const Dataset& data, KernelFamily family, const HyperBox& box,
                              int restarts, std::uint64_t seed, double prior_mean) {
  if (data.size() < 2) throw InvalidArgument("hyperparameter fitting needs at least two points");
  data.validate();
  const HyperLayout layout{family, data.inputs.front().size()};
  Eigen::VectorXd lo, hi;
  layout.box(box, lo, hi);

  auto neg_lml = [&](const Eigen::VectorXd& v) {
    try {
      const double l = log_marginal_likelihood(data, layout.unpack(v, prior_mean));
      return std::isfinite(l) ? -l : std::numeric_limits<double>::infinity();
    } catch (const IllConditionedError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  const Eigen::VectorXd center = 0.5 * (lo + hi);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  FitResult best{layout.unpack(center, prior_mean), -std::numeric_limits<double>::infinity(), true};
  LocalSearchOptions opts;
  opts.initial_step = 0.15;
  opts.size_tol = 1e-4;
  opts.max_evals = 600;
  const int starts = std::max(1, restarts);
  for (int s = 0; s < starts; ++s) {
    Eigen::VectorXd x0 = center;
    if (s > 0)
      for (Eigen::Index i = 0; i < x0.size(); ++i) x0[i] = lo[i] + unif(rng) * (hi[i] - lo[i]);
    const auto r = minimize_in_box(neg_lml, x0, lo, hi, opts);
    if (std::isfinite(r.value) && -r.value > best.log_likelihood) {
      best.hyper = layout.unpack(r.x, prior_mean);
      best.log_likelihood = -r.value;
      best.warning = false;
    }
  }
  return best;
}

std::vector<std::string> profile_names() { return {"heur-ardSE", "norm-ardRQ"}; }

GpHyper hyper_profile(std::string_view name, const Bounds& bounds) {
  std::array<double, kNumParams> eng{};
  GpHyper h;
  if (name == "heur-ardSE") {
    eng = {0.077, 0.013, 12.3, 56.7};
    h.kernel.family = KernelFamily::kSquaredExponential;
    h.noise_std = 1.00e-3;
    h.kernel.signal_std = 0.084;
  } else if (name == "norm-ardRQ") {
    eng = {0.173, 0.051, 1.07e5, 134.0};
    h.kernel.family = KernelFamily::kRationalQuadratic;
    h.noise_std = 3.94e-3;
    h.kernel.signal_std = 0.244;
    h.kernel.alpha = 0.315;
  } else {
    throw ConfigError("unknown hyperparameter profile '" + std::string(name) + "'");
  }
  h.kernel.lengthscales.resize(kNumParams);
  for (std::size_t i = 0; i < kNumParams; ++i)
    h.kernel.lengthscales[static_cast<Eigen::Index>(i)] = eng[i] / bounds.span(i);
  return h;
}

}  // namespace botune
