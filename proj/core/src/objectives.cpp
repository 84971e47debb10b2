#include "posekit/objectives.hpp"

#include <cmath>
#include <string>

#include "posekit/error.hpp"

namespace posekit {

void LossWeights::validate() const {
  for (double w : {keypoint, skin, cycle, self, edge}) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ValidationError("loss weights must be finite and non-negative");
    }
  }
}

LossBreakdown total_loss(LossBreakdown parts, const LossWeights& weights) {
  for (double c : {parts.keypoint, parts.skin, parts.cycle, parts.self, parts.edge}) {
    if (!std::isfinite(c)) throw ValidationError("total_loss: non-finite loss component");
  }
  parts.total = weights.keypoint * parts.keypoint + weights.skin * parts.skin +
                weights.cycle * parts.cycle + weights.self * parts.self +
                weights.edge * parts.edge;
  return parts;
}

namespace {

void require_connectivity(const Mesh& source, std::size_t deformed_count) {
  if (source.vertex_count() != deformed_count) {
    throw ValidationError("edge_loss: connectivity mismatch (" +
                          std::to_string(source.vertex_count()) + " vs " +
                          std::to_string(deformed_count) + " vertices)");
  }
}

}  // namespace

double edge_length_loss(std::span<const Edge> edges, std::span<const Vec3> rest,
                        std::span<const Vec3> deformed) {
  if (edges.empty()) return 0.0;
  double sum = 0.0;
  for (const Edge& e : edges) {
    const double d = (rest[e.a] - rest[e.b]).norm() - (deformed[e.a] - deformed[e.b]).norm();
    sum += d * d;
  }
  return sum / static_cast<double>(edges.size());
}

std::vector<Vec3> edge_length_loss_gradient(std::span<const Edge> edges, std::span<const Vec3> rest,
                                            std::span<const Vec3> deformed) {
  std::vector<Vec3> grad(deformed.size(), Vec3::Zero());
  if (edges.empty()) return grad;
  const double scale = 2.0 / static_cast<double>(edges.size());
  for (const Edge& e : edges) {
    const Vec3 diff = deformed[e.a] - deformed[e.b];
    const double len = diff.norm();
    if (len == 0.0) continue;  // subgradient 0 at a collapsed edge
    const double rest_len = (rest[e.a] - rest[e.b]).norm();
    const Vec3 g = scale * (len - rest_len) / len * diff;
    grad[e.a] += g;
    grad[e.b] -= g;
  }
  return grad;
}

double edge_loss(const Mesh& source, std::span<const Vec3> deformed) {
  require_connectivity(source, deformed.size());
  return edge_length_loss(source.edges(), source.vertices(), deformed);
}

double edge_loss(const Mesh& source, const Mesh& deformed) {
  if (!source.same_connectivity(deformed)) {
    throw ValidationError("edge_loss: connectivity mismatch");
  }
  return edge_loss(source, deformed.vertices());
}

std::vector<Vec3> edge_loss_gradient(const Mesh& source, std::span<const Vec3> deformed) {
  require_connectivity(source, deformed.size());
  return edge_length_loss_gradient(source.edges(), source.vertices(), deformed);
}

MetricReport evaluate(const Mesh& a, const Mesh& b) {
  MetricReport report;
  report.chamfer = chamfer(a, b);
  if (a.vertex_count() == b.vertex_count()) report.pmd = pmd(a, b);
  if (a.same_connectivity(b)) report.edge_loss = edge_loss(a, b);
  return report;
}

namespace {

Eigen::VectorXd central_differences(const ScalarObjective& objective, const Eigen::VectorXd& point,
                                    const std::function<double(double)>& step_for) {
  Eigen::VectorXd grad(point.size());
  Eigen::VectorXd probe = point;
  for (Eigen::Index j = 0; j < point.size(); ++j) {
    const double h = step_for(point[j]);
    probe[j] = point[j] + h;
    const double forward = objective(probe);
    probe[j] = point[j] - h;
    const double backward = objective(probe);
    probe[j] = point[j];
    if (!std::isfinite(forward) || !std::isfinite(backward)) {
      throw DivergenceError("numerical_gradient: non-finite objective at probe " + std::to_string(j));
    }
    grad[j] = (forward - backward) / (2.0 * h);
  }
  return grad;
}

}  // namespace

Eigen::VectorXd numerical_gradient(const ScalarObjective& objective, const Eigen::VectorXd& point,
                                   double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw ValidationError("numerical_gradient: step must be positive");
  return central_differences(objective, point, [step](double) { return step; });
}

Eigen::VectorXd numerical_gradient(const ScalarObjective& objective, const Eigen::VectorXd& point) {
  return central_differences(objective, point,
                             [](double x) { return 1e-5 * (1.0 + std::abs(x)); });
}

}  // namespace posekit
