#pragma once

#include <stdexcept>
#include <string>

namespace hypsft {

// Every failure carries the module ("stage") that raised it so the CLI can
// report staged errors.
class Error : public std::runtime_error {
 public:
  Error(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ResourceError : public Error {
 public:
  ResourceError(std::string stage, const std::string& what, int partial_radius)
      : Error(std::move(stage), what), partial_radius_(partial_radius) {}
  int partial_radius() const noexcept { return partial_radius_; }

 private:
  int partial_radius_;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class PrecisionError : public Error {
 public:
  PrecisionError(std::string stage, const std::string& what, long index = -1)
      : Error(std::move(stage), what), index_(index) {}
  long index() const noexcept { return index_; }

 private:
  long index_;
};

class DegenerateGrowth : public Error {
 public:
  using Error::Error;
};

}  // namespace hypsft
