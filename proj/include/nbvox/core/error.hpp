#pragma once

// Error hierarchy shared by the whole library. Every failure mode callers are
// expected to branch on gets its own type; the category string is stable and
// is what the CLI maps to exit codes.

#include <stdexcept>
#include <string>

namespace nbvox {

class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& message)
      : std::runtime_error(message), category_(std::move(category)) {}

  const std::string& category() const { return category_; }

 private:
  std::string category_;
};

/// Malformed file content (mesh formats, grids, configs). Messages carry the
/// offending line or key where one exists.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message) : Error("parse", message) {}
};

/// Filesystem-level failure: missing file, unwritable path, short read.
class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

/// A value or combination of values outside the documented domain
/// (bad resolution, inverted ranges, mismatched grid specs, ...).
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error("validation", message) {}
};

/// Input is well-formed but carries no usable signal: empty cloud where one
/// is required, rank-deficient uncertain set, zero-area mesh.
class DegenerateInputError : public Error {
 public:
  explicit DegenerateInputError(const std::string& message)
      : Error("degenerate", message) {}
};

/// Plane search exhausted its iteration budget without an acceptable model.
class NoPlaneError : public Error {
 public:
  explicit NoPlaneError(const std::string& message)
      : Error("no_plane", message) {}
};

}  // namespace nbvox
