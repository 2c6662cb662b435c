#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cavoid {

// Precondition violated on a numeric argument (eccentricity out of range,
// empty interval, action index out of range, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Shapes or option combinations that cannot work together.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class OrbitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Position and velocity (nearly) collinear: no orbital plane.
class DegenerateOrbitError : public OrbitError {
 public:
  using OrbitError::OrbitError;
};

// Computed eccentricity >= 1.
class HyperbolicOrbitError : public OrbitError {
 public:
  using OrbitError::OrbitError;
};

class ScenarioGenerationError : public std::runtime_error {
 public:
  ScenarioGenerationError(const std::string& what, std::size_t index)
      : std::runtime_error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

// step() after the episode finished, or before reset().
class LifecycleError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class TrainingDivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Replay buffer cannot serve a sample yet.
class BufferNotReadyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed persisted file. `line` is 1-based for text formats; `offset` is
// a byte offset for binary formats. Unknown positions are 0.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, const std::string& message, std::size_t line,
             std::size_t offset)
      : std::runtime_error(format(source, message, line, offset)),
        line_(line),
        offset_(offset) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  static std::string format(const std::string& source, const std::string& message,
                            std::size_t line, std::size_t offset) {
    std::string out = source;
    if (line > 0) out += ":" + std::to_string(line);
    if (offset > 0 || line == 0) out += " (offset " + std::to_string(offset) + ")";
    return out + ": " + message;
  }

  std::size_t line_;
  std::size_t offset_;
};

}  // namespace cavoid
