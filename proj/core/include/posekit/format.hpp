#pragma once

#include <charconv>
#include <string>

namespace posekit {

/// Shortest decimal representation that parses back to exactly `value`.
inline std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

}  // namespace posekit
