#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "botune/gp.hpp"
#include "botune/local_search.hpp"
#include "botune/paramspace.hpp"

namespace botune {

double normal_pdf(double z);
double normal_cdf(double z);

// Expected improvement E[max(0, eta - J)] for J ~ N(mu, sigma^2). Returns
// max(0, eta - mu) at sigma = 0.
double ei(double mu, double sigma, double eta);
double ei(const GpPosterior& post, const Point& x, double eta);

// Discrete belief over the location of the minimum.
struct PminGrid {
  std::vector<Point> points;
  Eigen::VectorXd mass;

  std::size_t size() const { return points.size(); }
  void validate() const;
};

enum class AcquisitionKind { kEI, kES };
enum class FantasyMode { kGaussHermite, kMonteCarlo };

std::string_view acquisition_kind_name(AcquisitionKind k);
AcquisitionKind parse_acquisition_kind(std::string_view name);

struct AcquisitionConfig {
  AcquisitionKind kind = AcquisitionKind::kES;
  std::size_t n_representers = 200;
  std::size_t n_function_samples = 400;
  std::size_t n_starts = 20;
  std::size_t n_fantasies = 9;  // Gauss-Hermite nodes or Monte-Carlo draws
  FantasyMode fantasy_mode = FantasyMode::kGaussHermite;
  int local_max_evals = 100;  // per local search when maximizing ES
  std::uint64_t seed = 0;

  void validate() const;
};

// Fraction of joint posterior draws over `grid.points` whose argmin is each
// point.
PminGrid es_pmin(const GpPosterior& post, const PminGrid& grid, std::size_t n_samples,
                 std::uint64_t seed);

// KL divergence of the belief from the uniform distribution on its points.
double relative_entropy(const Eigen::VectorXd& mass);
inline double relative_entropy(const PminGrid& g) { return relative_entropy(g.mass); }

struct EsValue {
  double value = 0.0;     // E[H(q_min)] - H(p_min)
  double mc_error = 0.0;  // error bound on `value` from the finite draw count
};

// Precomputed state for evaluating the expected change in relative entropy
// at many candidates against one frozen posterior.
//
// The same standard-normal draws are reused for the current belief and every
// fantasized belief. Fantasized posterior draws are produced by pathwise
// conditioning of the current draws on a jointly sampled observation at the
// candidate, so no refactorization happens per candidate.
class EntropySearch {
 public:
  EntropySearch(const GpPosterior& post, const PminGrid& grid, const AcquisitionConfig& cfg);

  EsValue expected_change(const Point& x) const;

  const PminGrid& belief() const { return belief_; }
  double entropy() const { return entropy_; }

 private:
  const GpPosterior& post_;
  AcquisitionConfig cfg_;
  PminGrid belief_;
  double entropy_ = 0.0;
  Eigen::VectorXd grid_mean_;
  Eigen::LLT<Eigen::MatrixXd> grid_chol_;
  Eigen::MatrixXd draws_;     // R x S posterior draws at the grid points
  Eigen::MatrixXd draws_t_;   // S x R
  Eigen::MatrixXd normals_;   // R x S standard normals behind draws_
  std::vector<Eigen::Index> base_argmin_;  // argmin of each draw under the current posterior
  Eigen::VectorXd xi_f_, xi_y_;  // per-draw normals for the candidate value and noise
  Eigen::MatrixXd grid_data_whitened_;  // L_X^-1 K(X, grid)
  std::vector<double> nodes_, weights_;  // standardized fantasy locations and weights
  std::size_t n_batches_ = 8;
};

EsValue es_expected_dH(const GpPosterior& post, const Point& x, const PminGrid& grid,
                       const AcquisitionConfig& cfg);

// Representer points drawn without replacement from a dense uniform proposal
// with probability proportional to EI. Falls back to the uniform proposal
// when EI is flat.
PminGrid build_representer_grid(const GpPosterior& post, std::size_t n, std::uint64_t seed);

using ScalarField = std::function<double(const Point&)>;

struct MaximizeOptions {
  std::size_t n_starts = 20;
  std::uint64_t seed = 0;
  std::vector<Point> extra_candidates;  // evaluated and used as local-search starts
  ScalarField tie_break;                // lower wins among equal acquisition values
  LocalSearchOptions local;
};

struct MaximizeResult {
  Point x;
  double value = 0.0;
};

// Multistart local maximization of `acq` over [0,1]^dim. Ties are broken by
// the lowest `tie_break` value, then lexicographically on the coordinates.
MaximizeResult maximize_acquisition(const ScalarField& acq, std::size_t dim,
                                    const MaximizeOptions& opts);
ParamVector maximize_acquisition(const ScalarField& acq, const Bounds& bounds,
                                 const MaximizeOptions& opts);

// Minimizer of the posterior mean from multistart local descents seeded with
// uniform points and the data inputs.
Point estimate_incumbent(const GpPosterior& post, std::size_t n_starts, std::uint64_t seed,
                         const LocalSearchOptions& local = {});
ParamVector estimate_incumbent(const GpPosterior& post, const Bounds& bounds,
                               std::size_t n_starts, std::uint64_t seed);

}  // namespace botune
