#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>

#include "posekit/mesh.hpp"

namespace posekit {

// Wavefront OBJ, triangles only. "v" and "f" records are read; every other
// record is ignored. Face indices are 1-based; "f 1/2/3 ..." style tokens
// use the position index only.

/// Throws ValidationError on malformed input; `source_name` prefixes messages.
[[nodiscard]] Mesh read_obj(std::istream& in, std::string_view source_name = "<stream>");

/// Vertices are written in shortest round-trip form, so reading them back is exact.
void write_obj(const Mesh& mesh, std::ostream& out);

/// Throws IoError if the file is missing, ValidationError if its contents are bad.
[[nodiscard]] Mesh load_mesh(const std::filesystem::path& path);

/// Throws IoError if the path cannot be written.
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);

}  // namespace posekit
