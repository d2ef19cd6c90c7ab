#pragma once

#include <stdexcept>
#include <string>

namespace pnormal {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numeric parameter is outside its admissible range (g = 0, scale <= 0, ...).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (non-finite points, duplicate samples,
/// a point set that is not a subgroup, a bad tau file).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// The requested theta accuracy is below what double precision can deliver.
class PrecisionUnachievable : public Error {
 public:
  using Error::Error;
};

/// Input on which no verdict can be formed at all, e.g. every point in the base locus.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// A numeric rank whose margin is too thin or which moved under re-sampling.
class Inconclusive : public Error {
 public:
  Inconclusive(std::string component, const std::string& what)
      : Error(component + ": " + what), component_(std::move(component)) {}

  const std::string& component() const noexcept { return component_; }

 private:
  std::string component_;
};

/// Stable verdicts that contradict each other or a proven implication.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace pnormal
