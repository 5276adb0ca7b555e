#include "modattach/error.hpp"

namespace modattach {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::UnknownDependency: return "UnknownDependency";
    case ErrorCode::CircularDependency: return "CircularDependency";
    case ErrorCode::DuplicateModule: return "DuplicateModule";
    case ErrorCode::MalformedInventory: return "MalformedInventory";
    case ErrorCode::UnknownSelection: return "UnknownSelection";
    case ErrorCode::DepthOverflow: return "DepthOverflow";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::PositionMismatch: return "PositionMismatch";
    case ErrorCode::ValueOutOfRange: return "ValueOutOfRange";
    case ErrorCode::IndexMismatch: return "IndexMismatch";
    case ErrorCode::MalformedTrace: return "MalformedTrace";
    case ErrorCode::TraceViolation: return "TraceViolation";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UsageError: return "UsageError";
  }
  return "Unknown";
}

namespace {

std::string describe_cycle(const std::vector<std::string>& cycle) {
  std::string out;
  for (const auto& name : cycle) {
    out += name;
    out += " -> ";
  }
  if (!cycle.empty()) out += cycle.front();
  return out;
}

}  // namespace

CycleError::CycleError(std::vector<std::string> cycle)
    : Error(ErrorCode::CircularDependency, describe_cycle(cycle)),
      cycle_(std::move(cycle)) {}

}  // namespace modattach
