#pragma once

#include <stdexcept>
#include <string>

namespace botune {

enum class ErrorCode {
  kDomain = 1,
  kIllConditioned,
  kDiverged,
  kConfig,
  kState,
  kIo,
  kInvalidArgument,
};

// Base for every error raised by the library. The C API maps `code()` onto
// bt_status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCode::kDomain, what) {}
};

// Gram or joint covariance matrix could not be factorized even after jitter
// escalation. Usually a symptom of bad hyperparameters.
class IllConditionedError : public Error {
 public:
  explicit IllConditionedError(const std::string& what)
      : Error(ErrorCode::kIllConditioned, what) {}
};

class SimulationDiverged : public Error {
 public:
  SimulationDiverged(double time, const std::string& what)
      : Error(ErrorCode::kDiverged, what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCode::kConfig, what) {}
};

class StateError : public Error {
 public:
  explicit StateError(const std::string& what) : Error(ErrorCode::kState, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorCode::kInvalidArgument, what) {}
};

}  // namespace botune
