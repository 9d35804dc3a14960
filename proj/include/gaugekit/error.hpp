#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gaugekit {

enum class ErrorCode {
  InvalidGrid,
  GridMismatch,
  NonTransverseInput,
  PoincareZeroModePresent,
  NonNeutralSource,
  UnstableTimestep,
  WrapAroundWindowExceeded,
  KernelRegistration,
  InvalidArgument,
  Config,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NonTransverseInput: return "NonTransverseInput";
    case ErrorCode::PoincareZeroModePresent: return "PoincareZeroModePresent";
    case ErrorCode::NonNeutralSource: return "NonNeutralSource";
    case ErrorCode::UnstableTimestep: return "UnstableTimestep";
    case ErrorCode::WrapAroundWindowExceeded: return "WrapAroundWindowExceeded";
    case ErrorCode::KernelRegistration: return "KernelRegistration";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Single exception type for the toolkit; the code names the violated contract.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gaugekit
