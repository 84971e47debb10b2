#pragma once

#include <optional>
#include <span>
#include <string>

#include "posekit/mesh.hpp"

namespace posekit {

/// Point-wise mesh distance: mean squared distance between corresponding
/// vertices, (1/N) * sum_v |a_v - b_v|^2. Throws ValidationError when the
/// vertex counts differ.
[[nodiscard]] double pmd(std::span<const Vec3> a, std::span<const Vec3> b);
[[nodiscard]] double pmd(const Mesh& a, const Mesh& b);

/// Symmetric chamfer distance over squared nearest-neighbour distances:
///   0.5 * mean_{p in a} min_{q in b} |p - q|^2 + 0.5 * mean_{q in b} min_{p in a} |p - q|^2
/// Correspondence-free. Throws ValidationError if either set is empty.
[[nodiscard]] double chamfer(std::span<const Vec3> a, std::span<const Vec3> b);
[[nodiscard]] double chamfer(const Mesh& a, const Mesh& b);

/// Raw (unscaled) metric values. pmd and edge_loss are absent when the
/// meshes lack vertex correspondence or shared connectivity.
struct MetricReport {
  std::optional<double> pmd;
  double chamfer = 0.0;
  std::optional<double> edge_loss;
};

/// Flat JSON object {"pmd", "chamfer", "edge_loss"}; absent values are null.
/// With `presentation_scale`, "pmd_1e4" and "chamfer_1e4" fields (value * 1e4)
/// are appended.
[[nodiscard]] std::string to_json(const MetricReport& report, bool presentation_scale = false);

}  // namespace posekit
