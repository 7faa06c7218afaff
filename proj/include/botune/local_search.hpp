#pragma once

#include <functional>

#include <Eigen/Core>

namespace botune {

struct LocalSearchOptions {
  double initial_step = 0.1;
  double size_tol = 1e-8;  // simplex characteristic size at convergence
  int max_evals = 400;
};

struct LocalSearchResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evals = 0;
};

// Derivative-free local minimization of `f` over the box [lo, hi]. `f` is
// only ever evaluated at points inside the box; the simplex may step outside,
// in which case the clamped point is evaluated and a quadratic penalty on the
// excursion is added. The returned point lies in the box.
LocalSearchResult minimize_in_box(const std::function<double(const Eigen::VectorXd&)>& f,
                                  const Eigen::VectorXd& start, const Eigen::VectorXd& lo,
                                  const Eigen::VectorXd& hi, const LocalSearchOptions& opts = {});

}  // namespace botune
