#include "botune/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "botune/error.hpp"

namespace botune {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double ei(double mu, double sigma, double eta) {
  if (!(sigma > 0.0)) return std::max(0.0, eta - mu);
  const double z = (eta - mu) / sigma;
  return std::max(0.0, (eta - mu) * normal_cdf(z) + sigma * normal_pdf(z));
}

double ei(const GpPosterior& post, const Point& x, double eta) {
  const auto p = post.predict(x);
  return ei(p.mean, std::sqrt(p.variance), eta);
}

void PminGrid::validate() const {
  if (points.empty()) throw InvalidArgument("representer grid is empty");
  if (mass.size() != static_cast<Eigen::Index>(points.size()))
    throw InvalidArgument("representer grid mass has the wrong length");
  if ((mass.array() < 0.0).any()) throw InvalidArgument("representer mass must be nonnegative");
  if (std::abs(mass.sum() - 1.0) > 1e-9) throw InvalidArgument("representer mass must sum to 1");
}

std::string_view acquisition_kind_name(AcquisitionKind k) {
  return k == AcquisitionKind::kEI ? "EI" : "ES";
}

AcquisitionKind parse_acquisition_kind(std::string_view name) {
  if (name == "EI" || name == "ei") return AcquisitionKind::kEI;
  if (name == "ES" || name == "es") return AcquisitionKind::kES;
  throw ConfigError("unknown acquisition '" + std::string(name) + "' (expected EI or ES)");
}

void AcquisitionConfig::validate() const {
  if (n_representers < 2) throw ConfigError("acquisition.n_representers must be at least 2");
  if (n_function_samples < 1) throw ConfigError("acquisition.n_function_samples must be at least 1");
  if (n_starts < 1) throw ConfigError("acquisition.n_starts must be at least 1");
  if (n_fantasies < 1) throw ConfigError("acquisition.n_fantasies must be at least 1");
  if (local_max_evals < 1) throw ConfigError("acquisition.local_max_evals must be at least 1");
}

namespace {

Eigen::MatrixXd standard_normals(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = gauss(rng);
  return m;
}

Eigen::Index column_argmin(const Eigen::MatrixXd& m, Eigen::Index col) {
  Eigen::Index best = 0;
  double v = m(0, col);
  for (Eigen::Index r = 1; r < m.rows(); ++r) {
    if (m(r, col) < v) {
      v = m(r, col);
      best = r;
    }
  }
  return best;
}

// Probabilists' Gauss-Hermite rule via the Golub-Welsch eigenproblem.
void gauss_hermite(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights) {
  const auto m = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index k = 1; k < m; ++k) {
    jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
    jacobi(k - 1, k) = jacobi(k, k - 1);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  nodes.resize(n);
  weights.resize(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    nodes[static_cast<std::size_t>(i)] = es.eigenvalues()[i];
    weights[static_cast<std::size_t>(i)] = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
  }
}

}  // namespace

double relative_entropy(const Eigen::VectorXd& mass) {
  const double n = static_cast<double>(mass.size());
  double h = 0.0;
  for (Eigen::Index i = 0; i < mass.size(); ++i)
    if (mass[i] > 0.0) h += mass[i] * std::log(mass[i] * n);
  return std::max(0.0, h);
}

PminGrid es_pmin(const GpPosterior& post, const PminGrid& grid, std::size_t n_samples,
                 std::uint64_t seed) {
  if (grid.points.empty()) throw InvalidArgument("representer grid is empty");
  if (n_samples < 1) throw InvalidArgument("es_pmin needs at least one sample");
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  post.joint(grid.points, mean, cov);
  const auto chol = factorize_spd(cov, post.prior_variance(), "joint representer covariance");
  std::mt19937_64 rng(seed);
  const auto r = static_cast<Eigen::Index>(grid.size());
  const auto s = static_cast<Eigen::Index>(n_samples);
  Eigen::MatrixXd draws = chol.llt.matrixL() * standard_normals(r, s, rng);
  draws.colwise() += mean;

  PminGrid out{grid.points, Eigen::VectorXd::Zero(r)};
  for (Eigen::Index j = 0; j < s; ++j) out.mass[column_argmin(draws, j)] += 1.0;
  out.mass /= static_cast<double>(s);
  return out;
}

EntropySearch::EntropySearch(const GpPosterior& post, const PminGrid& grid,
                             const AcquisitionConfig& cfg)
    : post_(post), cfg_(cfg) {
  if (grid.points.empty()) throw InvalidArgument("representer grid is empty");
  cfg_.validate();
  const auto r = static_cast<Eigen::Index>(grid.size());
  const auto s = static_cast<Eigen::Index>(cfg_.n_function_samples);

  Eigen::MatrixXd cov;
  post_.joint(grid.points, grid_mean_, cov);
  grid_chol_ = factorize_spd(cov, post_.prior_variance(), "joint representer covariance").llt;

  std::mt19937_64 rng(cfg_.seed);
  normals_ = standard_normals(r, s, rng);
  xi_f_ = standard_normals(s, 1, rng);
  xi_y_ = standard_normals(s, 1, rng);
  draws_ = grid_chol_.matrixL() * normals_;
  draws_.colwise() += grid_mean_;

  draws_t_ = draws_.transpose();
  n_batches_ = std::min<std::size_t>(8, cfg_.n_function_samples);

  belief_.points = grid.points;
  belief_.mass = Eigen::VectorXd::Zero(r);
  base_argmin_.resize(static_cast<std::size_t>(s));
  for (Eigen::Index j = 0; j < s; ++j) {
    base_argmin_[static_cast<std::size_t>(j)] = column_argmin(draws_, j);
    belief_.mass[base_argmin_[static_cast<std::size_t>(j)]] += 1.0;
  }
  belief_.mass /= static_cast<double>(s);
  entropy_ = relative_entropy(belief_.mass);

  grid_data_whitened_ = post_.whitened_covariance(grid.points);

  if (cfg_.fantasy_mode == FantasyMode::kGaussHermite) {
    gauss_hermite(cfg_.n_fantasies, nodes_, weights_);
  } else {
    const Eigen::MatrixXd z = standard_normals(static_cast<Eigen::Index>(cfg_.n_fantasies), 1, rng);
    nodes_.assign(z.data(), z.data() + z.size());
    weights_.assign(cfg_.n_fantasies, 1.0 / static_cast<double>(cfg_.n_fantasies));
  }
}

EsValue EntropySearch::expected_change(const Point& x) const {
  const auto r = static_cast<Eigen::Index>(belief_.size());
  const auto s = static_cast<Eigen::Index>(cfg_.n_function_samples);

  // Posterior covariance between the grid and the candidate.
  Eigen::VectorXd c(r);
  for (Eigen::Index i = 0; i < r; ++i)
    c[i] = kernel_eval(post_.hyper().kernel, belief_.points[static_cast<std::size_t>(i)], x);
  if (!post_.data().empty()) c.noalias() -= grid_data_whitened_.transpose() * post_.whitened_covariance(x);

  const auto pred = post_.predict(x);
  const double noise_var = post_.noise_variance();
  const double pred_var = pred.variance + noise_var;
  if (!(pred_var > 0.0) || c.cwiseAbs().maxCoeff() <= 1e-14 * post_.prior_variance()) return {};

  // Candidate value jointly with the existing draws: its conditional mean
  // given the grid draws plus independent residual and observation noise.
  const Eigen::VectorXd w = grid_chol_.matrixL().solve(c);
  const double resid_var = std::max(0.0, pred.variance - w.squaredNorm());
  Eigen::VectorXd y_draw = normals_.transpose() * w;
  y_draw.array() += pred.mean;
  y_draw += std::sqrt(resid_var) * xi_f_ + std::sqrt(noise_var) * xi_y_;

  const std::size_t nb = n_batches_;
  const Eigen::Index batch_len = s / static_cast<Eigen::Index>(nb);
  const std::size_t k = nodes_.size();
  // counts(node * nb + batch, representer)
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k * nb), r);
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), r);

  // Argmin over representers for all draws at once; columns of draws_t_
  // are contiguous over draws.
  const double sd = std::sqrt(pred_var);
  Eigen::ArrayXd shift(s), best_val(s), best_idx(s);
  for (std::size_t node = 0; node < k; ++node) {
    const double y = pred.mean + sd * nodes_[node];
    shift = (y - y_draw.array()) / pred_var;
    best_val = draws_t_.col(0).array() + c[0] * shift;
    best_idx.setZero();
    double* bv = best_val.data();
    double* bi = best_idx.data();
    const double* sh = shift.data();
    for (Eigen::Index i = 1; i < r; ++i) {
      const double* d = draws_t_.col(i).data();
      const double ci = c[i];
      const double fi = static_cast<double>(i);
      for (Eigen::Index j = 0; j < s; ++j) {
        const double v = d[j] + ci * sh[j];
        const bool lt = v < bv[j];
        bi[j] = lt ? fi : bi[j];
        bv[j] = lt ? v : bv[j];
      }
    }
    for (Eigen::Index j = 0; j < s; ++j) {
      const auto best = static_cast<Eigen::Index>(best_idx[j]);
      full(static_cast<Eigen::Index>(node), best) += 1.0;
      const auto b = std::min<Eigen::Index>(j / std::max<Eigen::Index>(batch_len, 1),
                                            static_cast<Eigen::Index>(nb) - 1);
      counts(static_cast<Eigen::Index>(node * nb) + b, best) += 1.0;
    }
  }

  double expected = 0.0;
  for (std::size_t node = 0; node < k; ++node) {
    const Eigen::VectorXd m = full.row(static_cast<Eigen::Index>(node)).transpose() / static_cast<double>(s);
    expected += weights_[node] * relative_entropy(m);
  }
  EsValue out;
  out.value = expected - entropy_;

  // Batch spread of the same estimator plus the plug-in entropy bias bound.
  if (nb > 1) {
    std::vector<double> per_batch(nb, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
      Eigen::VectorXd base = Eigen::VectorXd::Zero(r);
      const Eigen::Index lo = static_cast<Eigen::Index>(b) * batch_len;
      const Eigen::Index hi = b + 1 == nb ? s : lo + batch_len;
      for (Eigen::Index j = lo; j < hi; ++j) base[base_argmin_[static_cast<std::size_t>(j)]] += 1.0;
      const double len = static_cast<double>(hi - lo);
      double e = 0.0;
      for (std::size_t node = 0; node < k; ++node) {
        const Eigen::VectorXd m =
            counts.row(static_cast<Eigen::Index>(node * nb + b)).transpose() / len;
        e += weights_[node] * relative_entropy(m);
      }
      per_batch[b] = e - relative_entropy(base / len);
    }
    const double mean_b = std::accumulate(per_batch.begin(), per_batch.end(), 0.0) / static_cast<double>(nb);
    double var_b = 0.0;
    for (double v : per_batch) var_b += (v - mean_b) * (v - mean_b);
    var_b /= static_cast<double>(nb - 1);
    out.mc_error = 3.0 * std::sqrt(var_b / static_cast<double>(nb));
  }
  const double occupied = static_cast<double>((belief_.mass.array() > 0.0).count());
  out.mc_error += (occupied - 1.0) / (2.0 * static_cast<double>(s));
  return out;
}

EsValue es_expected_dH(const GpPosterior& post, const Point& x, const PminGrid& grid,
                       const AcquisitionConfig& cfg) {
  return EntropySearch(post, grid, cfg).expected_change(x);
}

PminGrid build_representer_grid(const GpPosterior& post, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("representer grid needs at least two points");
  const std::size_t m = std::max<std::size_t>(2000, 50 * n);
  auto proposal = sample_unit_cube(post.dim(), m, seed);

  std::vector<double> weight(m, 0.0);
  bool flat = post.data().empty();
  if (!flat) {
    const double eta = *std::min_element(post.data().targets.begin(), post.data().targets.end());
    for (std::size_t i = 0; i < m; ++i) weight[i] = ei(post, proposal[i], eta);
    const auto [lo, hi] = std::minmax_element(weight.begin(), weight.end());
    flat = !(*hi > 0.0) || (*hi - *lo) <= 1e-12 * *hi;
  }

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  if (!flat) {
    // Weighted sampling without replacement: keep the n largest log(u)/w.
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> key(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double u = unif(rng);
      key[i] = weight[i] > 0.0 ? std::log(std::max(u, 1e-300)) / weight[i]
                               : -std::numeric_limits<double>::infinity();
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });
  }
  PminGrid g;
  for (std::size_t i = 0; i < n; ++i) g.points.push_back(std::move(proposal[order[i]]));
  g.mass = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
  return g;
}

namespace {

struct Candidate {
  Point x;
  double value;
};

bool lex_less(const Point& a, const Point& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

// Index of the best candidate: highest value, then lowest tie-break, then
// lexicographically smallest point.
std::size_t select_best(const std::vector<Candidate>& cands, const ScalarField& tie_break) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : cands) best = std::max(best, c.value);
  const double tol = 1e-12 * std::max(1.0, std::abs(best));
  std::vector<std::size_t> ties;
  for (std::size_t i = 0; i < cands.size(); ++i)
    if (cands[i].value >= best - tol) ties.push_back(i);
  if (tie_break && ties.size() > 1) {
    std::vector<double> tb(ties.size());
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ties.size(); ++i) {
      tb[i] = tie_break(cands[ties[i]].x);
      lowest = std::min(lowest, tb[i]);
    }
    const double tb_tol = 1e-12 * std::max(1.0, std::abs(lowest));
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < ties.size(); ++i)
      if (tb[i] <= lowest + tb_tol) kept.push_back(ties[i]);
    ties = std::move(kept);
  }
  std::size_t pick = ties.front();
  for (std::size_t i : ties)
    if (lex_less(cands[i].x, cands[pick].x)) pick = i;
  return pick;
}

}  // namespace

MaximizeResult maximize_acquisition(const ScalarField& acq, std::size_t dim,
                                    const MaximizeOptions& opts) {
  const Eigen::VectorXd lo = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  const Eigen::VectorXd hi = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(dim));
  auto clamp01 = [&](const Point& p) { return Point(p.cwiseMax(lo).cwiseMin(hi)); };
  auto neg = [&](const Eigen::VectorXd& x) { return -acq(x); };

  std::vector<Candidate> cands;
  for (const auto& e : opts.extra_candidates) {
    const Point p = clamp01(e);
    cands.push_back({p, acq(p)});
  }
  std::size_t best_extra = 0;
  for (std::size_t i = 1; i < cands.size(); ++i)
    if (cands[i].value > cands[best_extra].value) best_extra = i;

  std::vector<Point> starts = sample_unit_cube(dim, std::max<std::size_t>(1, opts.n_starts), opts.seed);
  if (!cands.empty()) starts.push_back(cands[best_extra].x);
  for (const auto& s : starts) {
    const auto r = minimize_in_box(neg, s, lo, hi, opts.local);
    cands.push_back({clamp01(r.x), -r.value});
  }
  const auto& best = cands[select_best(cands, opts.tie_break)];
  return {best.x, best.value};
}

ParamVector maximize_acquisition(const ScalarField& acq, const Bounds& bounds,
                                 const MaximizeOptions& opts) {
  bounds.validate();
  return decode(maximize_acquisition(acq, kNumParams, opts).x, bounds);
}

Point estimate_incumbent(const GpPosterior& post, std::size_t n_starts, std::uint64_t seed,
                         const LocalSearchOptions& local) {
  const auto dim = static_cast<Eigen::Index>(post.dim());
  const Eigen::VectorXd lo = Eigen::VectorXd::Zero(dim);
  const Eigen::VectorXd hi = Eigen::VectorXd::Ones(dim);
  auto mean = [&](const Eigen::VectorXd& x) { return post.mean(x); };

  std::vector<Point> starts = sample_unit_cube(post.dim(), std::max<std::size_t>(1, n_starts), seed);
  for (const auto& x : post.data().inputs) starts.push_back(x);
  std::vector<Candidate> cands;
  for (const auto& s : starts) {
    const auto r = minimize_in_box(mean, s, lo, hi, local);
    cands.push_back({Point(r.x.cwiseMax(lo).cwiseMin(hi)), -r.value});
  }
  return cands[select_best(cands, {})].x;
}

ParamVector estimate_incumbent(const GpPosterior& post, const Bounds& bounds,
                               std::size_t n_starts, std::uint64_t seed) {
  bounds.validate();
  return decode(estimate_incumbent(post, n_starts, seed), bounds);
}

}  // namespace botune
