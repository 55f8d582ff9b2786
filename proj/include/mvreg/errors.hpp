#pragma once

#include <stdexcept>
#include <string>

namespace mvreg {

// Geometrically degenerate input (rank-deficient proxy, collinear point set, ...).
class DegenerateInputError : public std::runtime_error {
 public:
  explicit DegenerateInputError(const std::string& what) : std::runtime_error(what) {}
};

// Scene generation could not satisfy its constraints within the retry budget.
class GenerationError : public std::runtime_error {
 public:
  explicit GenerationError(const std::string& what) : std::runtime_error(what) {}
};

// Pose graph is unusable (disconnected, empty, ...).
class GraphError : public std::runtime_error {
 public:
  explicit GraphError(const std::string& what) : std::runtime_error(what) {}
};

// Iterative numerical procedure failed to converge.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mvreg
