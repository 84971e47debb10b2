#include "posekit/mesh.hpp"

#include <algorithm>
#include <string>

#include "posekit/error.hpp"

namespace posekit {

Mesh::Mesh() : Mesh(std::vector<Vec3>{}, std::vector<Face>{}) {}

Mesh::Mesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)),
      topology_(build_topology(vertices_.size(), std::move(faces))) {
  validate_geometry();
}

Mesh::Mesh(std::vector<Vec3> vertices, std::shared_ptr<const Topology> topology)
    : vertices_(std::move(vertices)), topology_(std::move(topology)) {
  validate_geometry();
}

std::span<const Face> Mesh::faces() const noexcept { return topology_->faces; }

std::span<const Edge> Mesh::edges() const noexcept { return topology_->edges; }

std::shared_ptr<const Mesh::Topology> Mesh::build_topology(std::size_t vertex_count,
                                                           std::vector<Face> faces) {
  auto topology = std::make_shared<Topology>();
  topology->edges.reserve(faces.size() * 3);
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& face = faces[f];
    for (VertexIndex idx : face) {
      if (idx >= vertex_count) {
        throw ValidationError("face " + std::to_string(f) + ": out-of-range index " +
                              std::to_string(idx) + " (vertex count " +
                              std::to_string(vertex_count) + ")");
      }
    }
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
      throw ValidationError("face " + std::to_string(f) + ": repeated vertex index");
    }
    for (int c = 0; c < 3; ++c) {
      VertexIndex a = face[c];
      VertexIndex b = face[(c + 1) % 3];
      if (a > b) std::swap(a, b);
      topology->edges.push_back({a, b});
    }
  }
  std::sort(topology->edges.begin(), topology->edges.end());
  topology->edges.erase(std::unique(topology->edges.begin(), topology->edges.end()),
                        topology->edges.end());
  topology->faces = std::move(faces);
  return topology;
}

void Mesh::validate_geometry() const {
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (!vertices_[i].allFinite()) {
      throw ValidationError("vertex " + std::to_string(i) + " has a non-finite coordinate");
    }
  }
  for (const Edge& e : topology_->edges) {
    if (vertices_[e.a] == vertices_[e.b]) {
      throw ValidationError("zero-length edge between vertices " + std::to_string(e.a) +
                            " and " + std::to_string(e.b));
    }
  }
}

Mesh Mesh::with_vertices(std::vector<Vec3> vertices) const {
  if (vertices.size() != vertices_.size()) {
    throw ValidationError("with_vertices: expected " + std::to_string(vertices_.size()) +
                          " vertices, got " + std::to_string(vertices.size()));
  }
  return Mesh(std::move(vertices), topology_);
}

bool Mesh::same_connectivity(const Mesh& other) const noexcept {
  if (vertices_.size() != other.vertices_.size()) return false;
  if (topology_ == other.topology_) return true;
  return topology_->faces == other.topology_->faces;
}

std::vector<double> edge_lengths(const Mesh& mesh) {
  const auto& v = mesh.vertices();
  std::vector<double> lengths;
  lengths.reserve(mesh.edge_count());
  for (const Edge& e : mesh.edges()) lengths.push_back((v[e.a] - v[e.b]).norm());
  return lengths;
}

}  // namespace posekit
