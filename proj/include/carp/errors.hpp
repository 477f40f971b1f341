#pragma once

#include <stdexcept>
#include <string>

namespace carp {

// Contract violations on inputs (bad dimensions, empty clouds, absent ids).
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// Normal estimation failed (too few or degenerate neighbors).
class EstimationError : public std::runtime_error {
 public:
  explicit EstimationError(const std::string& what) : std::runtime_error(what) {}
};

// Scene or dataset generation could not satisfy its constraints.
class GenerationError : public std::runtime_error {
 public:
  explicit GenerationError(const std::string& what) : std::runtime_error(what) {}
};

class RecognitionError : public std::runtime_error {
 public:
  explicit RecognitionError(const std::string& what) : std::runtime_error(what) {}
};

class TrainingError : public std::runtime_error {
 public:
  explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

class PlanningError : public std::runtime_error {
 public:
  explicit PlanningError(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace carp
