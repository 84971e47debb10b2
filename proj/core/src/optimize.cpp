#include "posekit/optimize.hpp"

#include <cmath>

#include "posekit/error.hpp"

namespace posekit {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kShrink = 0.5;
constexpr double kGrow = 2.0;
constexpr int kMaxBacktracks = 60;

}  // namespace

DescentResult gradient_descent(const ScalarObjective& objective, const GradientFunction& gradient,
                               Eigen::VectorXd start, const DescentOptions& options,
                               const AcceptCallback& on_accept) {
  if (options.max_iters < 0) throw ValidationError("gradient_descent: max_iters must be >= 0");
  if (!(options.step_size > 0.0)) throw ValidationError("gradient_descent: step_size must be > 0");
  if (!(options.tolerance >= 0.0)) throw ValidationError("gradient_descent: tolerance must be >= 0");

  DescentResult result;
  result.x = std::move(start);
  result.value = objective(result.x);
  if (!std::isfinite(result.value)) {
    throw DivergenceError("gradient_descent: non-finite objective at the start point");
  }
  result.history.push_back(result.value);
  if (on_accept) on_accept(0, result.x, result.value);

  double step = options.step_size;
  for (int iter = 1; iter <= options.max_iters; ++iter) {
    const Eigen::VectorXd g = gradient(result.x);
    if (!g.allFinite()) throw DivergenceError("gradient_descent: non-finite gradient");
    const double g_norm2 = g.squaredNorm();
    if (std::sqrt(g_norm2) <= options.tolerance) {
      result.converged = true;
      break;
    }

    bool accepted = false;
    Eigen::VectorXd trial;
    double trial_value = 0.0;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      trial = result.x - step * g;
      trial_value = objective(trial);
      if (std::isfinite(trial_value) && trial_value <= result.value - kArmijo * step * g_norm2 &&
          trial_value < result.value) {
        accepted = true;
        break;
      }
      step *= kShrink;
    }
    if (!accepted) {
      // No representable descent step left along -g: stationary to working precision.
      result.converged = true;
      break;
    }

    result.x = std::move(trial);
    result.value = trial_value;
    result.history.push_back(trial_value);
    result.iterations = iter;
    if (on_accept) on_accept(iter, result.x, result.value);
    step *= kGrow;
  }
  return result;
}

}  // namespace posekit
