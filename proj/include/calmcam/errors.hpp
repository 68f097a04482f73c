#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace calmcam {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TooFewPoints : public Error {
 public:
  explicit TooFewPoints(std::size_t n)
      : Error("homography needs at least 4 correspondences, got " + std::to_string(n)), count(n) {}
  std::size_t count;
};

/// The DLT system is rank deficient. `offending` lists correspondence indices
/// that are duplicated or collinear, when they can be pinned down.
class DegenerateConfiguration : public Error {
 public:
  DegenerateConfiguration(const std::string& what, std::vector<std::size_t> offending_points = {})
      : Error(what), offending(std::move(offending_points)) {}
  std::vector<std::size_t> offending;
};

/// The projective denominator vanished for the requested point.
class AtInfinity : public Error {
 public:
  using Error::Error;
};

class MalformedRow : public Error {
 public:
  MalformedRow(std::size_t line_no, const std::string& reason)
      : Error("line " + std::to_string(line_no) + ": " + reason), line(line_no) {}
  std::size_t line;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class NonPositiveBaseline : public Error {
 public:
  using Error::Error;
};

class LocationMismatch : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value. `path` is a JSON-pointer-like field path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field_path, const std::string& reason)
      : Error(field_path + ": " + reason), path(std::move(field_path)) {}
  std::string path;
};

}  // namespace calmcam
