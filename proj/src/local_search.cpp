#include "botune/local_search.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

namespace botune {

namespace {

struct Problem {
  const std::function<double(const Eigen::VectorXd&)>* f;
  Eigen::VectorXd lo, hi;
  Eigen::VectorXd best_x;
  double best = std::numeric_limits<double>::infinity();
  int evals = 0;
};

double trampoline(const gsl_vector* v, void* params) {
  auto* p = static_cast<Problem*>(params);
  const auto n = p->lo.size();
  Eigen::VectorXd x(n);
  double excursion = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double raw = gsl_vector_get(v, static_cast<std::size_t>(i));
    const double c = std::fmin(std::fmax(raw, p->lo[i]), p->hi[i]);
    const double width = p->hi[i] - p->lo[i];
    excursion += ((raw - c) / width) * ((raw - c) / width);
    x[i] = c;
  }
  double y = (*p->f)(x);
  ++p->evals;
  if (!std::isfinite(y)) return std::numeric_limits<double>::max();
  if (y < p->best) {
    p->best = y;
    p->best_x = x;
  }
  return y + 1e2 * (1.0 + std::abs(y)) * excursion;
}

struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

}  // namespace

LocalSearchResult minimize_in_box(const std::function<double(const Eigen::VectorXd&)>& f,
                                  const Eigen::VectorXd& start, const Eigen::VectorXd& lo,
                                  const Eigen::VectorXd& hi, const LocalSearchOptions& opts) {
  const auto n = static_cast<std::size_t>(start.size());
  Problem prob{&f, lo, hi, start.cwiseMax(lo).cwiseMin(hi)};

  static const bool handler_off = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)handler_off;

  std::unique_ptr<gsl_vector, VectorDeleter> x0(gsl_vector_alloc(n));
  std::unique_ptr<gsl_vector, VectorDeleter> step(gsl_vector_alloc(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    gsl_vector_set(x0.get(), i, prob.best_x[ii]);
    gsl_vector_set(step.get(), i, opts.initial_step * (hi[ii] - lo[ii]));
  }

  gsl_multimin_function fn{&trampoline, n, &prob};
  std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> m(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
  gsl_multimin_fminimizer_set(m.get(), &fn, x0.get(), step.get());

  while (prob.evals < opts.max_evals) {
    if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
    const double size = gsl_multimin_fminimizer_size(m.get());
    if (gsl_multimin_test_size(size, opts.size_tol) == GSL_SUCCESS) break;
  }

  if (prob.evals == 0 || !std::isfinite(prob.best)) {
    prob.best_x = start.cwiseMax(lo).cwiseMin(hi);
    prob.best = f(prob.best_x);
    ++prob.evals;
  }
  return {prob.best_x, prob.best, prob.evals};
}

}  // namespace botune
