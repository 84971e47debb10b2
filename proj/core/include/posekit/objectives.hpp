#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "posekit/mesh.hpp"
#include "posekit/metrics.hpp"

namespace posekit {

/// Weights of the five loss terms.
struct LossWeights {
  double keypoint = 2.0;
  double skin = 0.4;
  double cycle = 1.0;
  double self = 1.0;
  double edge = 0.0005;

  /// Defaults used for template-based human and animal data (skin = 0.4).
  static LossWeights template_meshes() { return {}; }
  /// Variant for scanned and stylized characters (skin = 0.1).
  static LossWeights scanned_meshes() {
    LossWeights w;
    w.skin = 0.1;
    return w;
  }

  /// Throws ValidationError if any weight is negative or non-finite.
  void validate() const;
};

/// Individual loss terms plus their weighted total.
struct LossBreakdown {
  double keypoint = 0.0;
  double skin = 0.0;
  double cycle = 0.0;
  double self = 0.0;
  double edge = 0.0;
  double total = 0.0;
};

/// Fills `total` = keypoint*w.keypoint + skin*w.skin + cycle*w.cycle + self*w.self + edge*w.edge.
/// The incoming `total` is ignored. Throws ValidationError on a non-finite component.
[[nodiscard]] LossBreakdown total_loss(LossBreakdown parts, const LossWeights& weights);

/// Mean over `edges` of (|e_rest| - |e_deformed|)^2; 0 for an empty edge list.
[[nodiscard]] double edge_length_loss(std::span<const Edge> edges, std::span<const Vec3> rest,
                                      std::span<const Vec3> deformed);

/// Gradient of edge_length_loss with respect to each deformed vertex.
[[nodiscard]] std::vector<Vec3> edge_length_loss_gradient(std::span<const Edge> edges,
                                                          std::span<const Vec3> rest,
                                                          std::span<const Vec3> deformed);

/// Mean over undirected edges of (|e_source| - |e_deformed|)^2.
/// Zero for any rigid motion of the source. Throws ValidationError unless
/// both meshes share connectivity.
[[nodiscard]] double edge_loss(const Mesh& source, const Mesh& deformed);

/// edge_loss with the deformed positions given as a raw array (same connectivity as `source`).
[[nodiscard]] double edge_loss(const Mesh& source, std::span<const Vec3> deformed);

/// Gradient of edge_loss(source, deformed) with respect to each deformed vertex.
[[nodiscard]] std::vector<Vec3> edge_loss_gradient(const Mesh& source,
                                                   std::span<const Vec3> deformed);

/// pmd (when vertex counts match), chamfer, and edge_loss (when connectivity matches).
[[nodiscard]] MetricReport evaluate(const Mesh& a, const Mesh& b);

using ScalarObjective = std::function<double(const Eigen::VectorXd&)>;

/// Central differences with a fixed step:
///   g_j = (f(x + h e_j) - f(x - h e_j)) / (2h).
/// Throws ValidationError if step <= 0, DivergenceError if any probe is non-finite.
[[nodiscard]] Eigen::VectorXd numerical_gradient(const ScalarObjective& objective,
                                                 const Eigen::VectorXd& point, double step);

/// Central differences with the relative step h_j = 1e-5 * (1 + |x_j|).
[[nodiscard]] Eigen::VectorXd numerical_gradient(const ScalarObjective& objective,
                                                 const Eigen::VectorXd& point);

}  // namespace posekit
