#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "posekit/objectives.hpp"

namespace posekit {

struct DescentOptions {
  int max_iters = 200;
  /// Initial trial step; adapted by the line search across iterations.
  double step_size = 1.0;
  /// Stop once the gradient norm falls to this value.
  double tolerance = 1e-10;
};

struct DescentResult {
  Eigen::VectorXd x;
  double value = 0.0;
  /// Objective at the start point and after every accepted step; non-increasing.
  std::vector<double> history;
  int iterations = 0;
  bool converged = false;
};

using GradientFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using AcceptCallback = std::function<void(int iteration, const Eigen::VectorXd& x, double value)>;

/// Steepest descent with Armijo backtracking. A step is only accepted when it
/// lowers the objective, so the history never increases. Trial steps that
/// evaluate to a non-finite value are backtracked like any other rejection.
///
/// Throws DivergenceError if the objective at `start` or the gradient at an
/// accepted point is non-finite. `on_accept` (optional) sees the start point
/// as iteration 0 and every accepted iterate after it.
[[nodiscard]] DescentResult gradient_descent(const ScalarObjective& objective,
                                             const GradientFunction& gradient,
                                             Eigen::VectorXd start, const DescentOptions& options,
                                             const AcceptCallback& on_accept = {});

}  // namespace posekit
