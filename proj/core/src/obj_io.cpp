#include "posekit/obj_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "posekit/error.hpp"
#include "posekit/format.hpp"

namespace posekit {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) tokens.push_back(s.substr(i, j - i));
    i = j;
  }
  return tokens;
}

class LineError {
 public:
  LineError(std::string_view source, std::size_t line) : source_(source), line_(line) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError(std::string(source_) + ":" + std::to_string(line_) + ": " + what);
  }

 private:
  std::string_view source_;
  std::size_t line_;
};

double parse_coordinate(std::string_view token, const LineError& err) {
  double value = 0.0;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc{} || ptr != end) err.fail("malformed line: bad number '" + std::string(token) + "'");
  return value;
}

VertexIndex parse_face_index(std::string_view token, std::size_t vertex_count,
                             const LineError& err) {
  const auto slash = token.find('/');
  const std::string_view position = token.substr(0, slash);
  long long value = 0;
  const char* end = position.data() + position.size();
  auto [ptr, ec] = std::from_chars(position.data(), end, value);
  if (ec != std::errc{} || ptr != end || position.empty()) {
    err.fail("malformed line: bad face index '" + std::string(token) + "'");
  }
  if (value < 1 || static_cast<unsigned long long>(value) > vertex_count) {
    err.fail("out-of-range index " + std::to_string(value) + " (1-based, " +
             std::to_string(vertex_count) + " vertices declared so far)");
  }
  return static_cast<VertexIndex>(value - 1);
}

}  // namespace

Mesh read_obj(std::istream& in, std::string_view source_name) {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = trim(line.substr(0, hash));
    }
    if (line.empty()) continue;
    const auto tokens = split_ws(line);
    const LineError err(source_name, line_no);
    if (tokens[0] == "v") {
      // "v x y z [w]"; the optional w (or trailing colour) is ignored.
      if (tokens.size() < 4) err.fail("malformed line: vertex needs 3 coordinates");
      vertices.emplace_back(parse_coordinate(tokens[1], err), parse_coordinate(tokens[2], err),
                            parse_coordinate(tokens[3], err));
      if (!vertices.back().allFinite()) err.fail("non-finite vertex coordinate");
    } else if (tokens[0] == "f") {
      if (tokens.size() != 4) {
        err.fail("non-triangular face with " + std::to_string(tokens.size() - 1) + " vertices");
      }
      faces.push_back({parse_face_index(tokens[1], vertices.size(), err),
                       parse_face_index(tokens[2], vertices.size(), err),
                       parse_face_index(tokens[3], vertices.size(), err)});
    }
  }
  try {
    return Mesh(std::move(vertices), std::move(faces));
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(source_name) + ": " + e.what());
  }
}

void write_obj(const Mesh& mesh, std::ostream& out) {
  std::string line;
  for (const Vec3& v : mesh.vertices()) {
    line = "v ";
    line += format_double(v.x());
    line += ' ';
    line += format_double(v.y());
    line += ' ';
    line += format_double(v.z());
    line += '\n';
    out << line;
  }
  for (const Face& f : mesh.faces()) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file: " + path.string());
  return read_obj(in, path.string());
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write mesh file: " + path.string());
  write_obj(mesh, out);
  out.flush();
  if (!out) throw IoError("error while writing mesh file: " + path.string());
}

}  // namespace posekit
