#pragma once

#include <stdexcept>
#include <string>

namespace fas {

/// Failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
  config,     // bad flags, bad config file, invalid preconditions on user input
  io,         // file open/read/write failures, bad magic, truncated files
  dimension,  // tensor shape mismatch
  geometry,   // invalid port grid
  metric,     // NMSE with zero reference energy
  numeric,    // non-finite values, singular systems, failed checks
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::geometry: return "geometry";
    case ErrorKind::metric: return "metric";
    case ErrorKind::numeric: return "numeric";
  }
  return "unknown";
}

}  // namespace fas
