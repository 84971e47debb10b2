#include "posekit/metrics.hpp"

#include <limits>

#include <nlohmann/json.hpp>

#include "posekit/error.hpp"

namespace posekit {

namespace {

// Mean over `from` of the squared distance to the nearest point in `to`.
// Brute force: exact, deterministic, and fast enough for template-sized meshes.
double mean_nearest_squared(std::span<const Vec3> from, std::span<const Vec3> to) {
  double sum = 0.0;
  for (const Vec3& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& q : to) {
      const double d = (p - q).squaredNorm();
      if (d < best) best = d;
    }
    sum += best;
  }
  return sum / static_cast<double>(from.size());
}

}  // namespace

double pmd(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.size() != b.size()) {
    throw ValidationError("pmd: vertex-count mismatch (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  }
  if (a.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]).squaredNorm();
  return sum / static_cast<double>(a.size());
}

double pmd(const Mesh& a, const Mesh& b) { return pmd(a.vertices(), b.vertices()); }

double chamfer(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.empty() || b.empty()) throw ValidationError("chamfer: empty vertex set");
  return 0.5 * mean_nearest_squared(a, b) + 0.5 * mean_nearest_squared(b, a);
}

double chamfer(const Mesh& a, const Mesh& b) { return chamfer(a.vertices(), b.vertices()); }

std::string to_json(const MetricReport& report, bool presentation_scale) {
  nlohmann::ordered_json j;
  j["pmd"] = report.pmd ? nlohmann::ordered_json(*report.pmd) : nlohmann::ordered_json(nullptr);
  j["chamfer"] = report.chamfer;
  j["edge_loss"] =
      report.edge_loss ? nlohmann::ordered_json(*report.edge_loss) : nlohmann::ordered_json(nullptr);
  if (presentation_scale) {
    j["pmd_1e4"] =
        report.pmd ? nlohmann::ordered_json(*report.pmd * 1e4) : nlohmann::ordered_json(nullptr);
    j["chamfer_1e4"] = report.chamfer * 1e4;
  }
  return j.dump();
}

}  // namespace posekit
