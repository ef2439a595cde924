#pragma once

#include <stdexcept>
#include <string>

namespace tokengan {

// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kIo = 3,
  kNumeric = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

// Incompatible tensor shapes or inconsistent factorizations.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what)
      : Error(ExitCode::kUsage, "dimension error: " + what) {}
};

// Violated precondition (index out of range, non-scalar loss, ...).
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what)
      : Error(ExitCode::kUsage, "contract error: " + what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ExitCode::kUsage, "config error: " + what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what)
      : Error(ExitCode::kIo, "io error: " + what) {}
};

// A loss or gradient became NaN/Inf.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ExitCode::kNumeric, "numeric error: " + what) {}
};

}  // namespace tokengan
