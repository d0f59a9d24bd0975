#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tdlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDomain : public Error {
 public:
  using Error::Error;
};

/// Two or more boundary faces attain the distance minimum within tolerance.
class AmbiguousProjection : public Error {
 public:
  AmbiguousProjection(std::size_t first, std::size_t second)
      : Error("ambiguous boundary projection between faces " + std::to_string(first) + " and " +
              std::to_string(second)),
        first_face(first),
        second_face(second) {}
  std::size_t first_face;
  std::size_t second_face;
};

class InvalidSpacing : public Error {
 public:
  using Error::Error;
};

class SingularJacobian : public Error {
 public:
  using Error::Error;
};

class DegenerateCenter : public Error {
 public:
  using Error::Error;
};

class OutOfGrid : public Error {
 public:
  explicit OutOfGrid(std::size_t index, const std::string& what = "segment")
      : Error(what + " " + std::to_string(index) + " leaves the grid"), index(index) {}
  std::size_t index;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class NotLip1 : public Error {
 public:
  using Error::Error;
};

class Infeasible : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, double last) : Error(what), last_iterate(last) {}
  double last_iterate;
};

class ApexDegenerate : public Error {
 public:
  using Error::Error;
};

/// A map failed at a specific quadrature point.
class MapError : public Error {
 public:
  MapError(std::size_t index, const std::string& cause)
      : Error("map failed at quadrature point " + std::to_string(index) + ": " + cause),
        index(index) {}
  std::size_t index;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace tdlab
