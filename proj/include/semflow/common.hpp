#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace semflow {

using Point = Eigen::Vector2d;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input files, configs or arguments.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Invalid mesh topology or geometry.
class MeshError : public Error {
 public:
  using Error::Error;
};

/// Non-positive Jacobian determinant on one or more elements.
class InvertedElementError : public MeshError {
 public:
  InvertedElementError(std::string what, std::vector<int> elements)
      : MeshError(std::move(what)), elements_(std::move(elements)) {}
  const std::vector<int>& elements() const { return elements_; }

 private:
  std::vector<int> elements_;
};

/// Linear or nonlinear solver failure.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace semflow
