#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "posekit/geometry.hpp"

namespace posekit {

using VertexIndex = std::uint32_t;
using Face = std::array<VertexIndex, 3>;

/// Undirected edge, stored with a < b.
struct Edge {
  VertexIndex a = 0;
  VertexIndex b = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Triangle mesh with a derived, deduplicated undirected edge set.
///
/// Every constructed Mesh satisfies:
///   - all coordinates finite,
///   - every face index in [0, N) and no face repeats a vertex,
///   - no edge has zero length.
/// Connectivity (faces + edges) is immutable and shared between meshes
/// derived through with_vertices(), so deformed copies are cheap and
/// same_connectivity() is O(1) in the common case.
class Mesh {
 public:
  /// Empty mesh (no vertices, no faces).
  Mesh();

  /// Throws ValidationError if any invariant above is violated.
  Mesh(std::vector<Vec3> vertices, std::vector<Face> faces);

  [[nodiscard]] const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
  [[nodiscard]] std::span<const Face> faces() const noexcept;
  /// Sorted lexicographically by (a, b).
  [[nodiscard]] std::span<const Edge> edges() const noexcept;

  [[nodiscard]] std::size_t vertex_count() const noexcept { return vertices_.size(); }
  [[nodiscard]] std::size_t face_count() const noexcept { return faces().size(); }
  [[nodiscard]] std::size_t edge_count() const noexcept { return edges().size(); }

  /// Copy of this mesh with new vertex positions and identical connectivity.
  [[nodiscard]] Mesh with_vertices(std::vector<Vec3> vertices) const;

  /// True when both meshes have the same vertex count and identical faces.
  [[nodiscard]] bool same_connectivity(const Mesh& other) const noexcept;

 private:
  struct Topology {
    std::vector<Face> faces;
    std::vector<Edge> edges;
  };

  Mesh(std::vector<Vec3> vertices, std::shared_ptr<const Topology> topology);

  static std::shared_ptr<const Topology> build_topology(std::size_t vertex_count,
                                                        std::vector<Face> faces);
  void validate_geometry() const;

  std::vector<Vec3> vertices_;
  std::shared_ptr<const Topology> topology_;
};

/// One length per edge, in mesh.edges() order.
[[nodiscard]] std::vector<double> edge_lengths(const Mesh& mesh);

}  // namespace posekit
