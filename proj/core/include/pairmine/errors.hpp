#pragma once

#include <stdexcept>
#include <string>

namespace pairmine {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Unreadable or unsupported image file.
class DecodeError : public Error {
 public:
  using Error::Error;
};

/// Image or grid dimensions violate a precondition.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameter value (sigma <= 0, band lo >= hi, ...).
class ParamError : public Error {
 public:
  using Error::Error;
};

/// A descriptor set required to be non-empty was empty.
class EmptyInput : public Error {
 public:
  using Error::Error;
};

/// Point configuration cannot determine a homography (collinear points,
/// rank-deficient design matrix, singular matrix).
class DegenerateConfiguration : public Error {
 public:
  using Error::Error;
};

/// A point maps to infinity under a projective transform.
class ProjectiveDegenerate : public Error {
 public:
  using Error::Error;
};

/// Fewer than the minimal sample size of matches.
class InsufficientMatches : public Error {
 public:
  using Error::Error;
};

/// RANSAC found no model with enough inliers.
class NoModelFound : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure while reading or writing.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed manifest or spec content. Carries a 1-based line number when
/// the source is line-oriented (0 = not applicable).
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line = 0)
      : Error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

/// Manifest format_version not supported by this build.
class VersionError : public Error {
 public:
  using Error::Error;
};

/// Data violates an invariant it was required to satisfy before writing.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace pairmine
