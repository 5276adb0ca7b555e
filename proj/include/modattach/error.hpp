#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace modattach {

enum class ErrorCode {
  MalformedRecord,
  UnknownDependency,
  CircularDependency,
  DuplicateModule,
  MalformedInventory,
  UnknownSelection,
  DepthOverflow,
  VersionMismatch,
  PositionMismatch,
  ValueOutOfRange,
  IndexMismatch,
  MalformedTrace,
  TraceViolation,
  ConfigError,
  IoError,
  UsageError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the engine. `code()` is stable and machine-readable;
/// `what()` carries the human detail (module name, line number, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by catalog parsing when the dependency graph is not a DAG.
class CycleError : public Error {
 public:
  explicit CycleError(std::vector<std::string> cycle);

  /// Module names along the cycle, first name not repeated at the end.
  const std::vector<std::string>& cycle() const noexcept { return cycle_; }

 private:
  std::vector<std::string> cycle_;
};

}  // namespace modattach
