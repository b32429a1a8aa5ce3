#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace dab {

// Shortest decimal form that round-trips to the same double. Used for
// every textual artifact (CSV, reports) so encodings are stable bytes.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) return "nan";
  return std::string(buf, res.ptr);
}

}  // namespace dab
