#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace surelet {

/// Error families. Each maps to a distinct process exit code in the CLI.
enum class ErrorCode {
  InvalidArgument,
  ShapeMismatch,
  LengthMismatch,
  ImaginaryResidueTooLarge,
  KernelLargerThanGrid,
  ZeroBlurredSignal,
  EmptyObservableSet,
  UnsupportedDepth,
  UnknownFilter,
  WeightsUnset,
  NotOrthonormalFlavor,
  NoAdmissibleChi,
  SingularSystem,
  InvalidCovariance,
  IdenticalFields,
  Io,
  Config,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exit code used by the command-line tool for an error family (never 0).
int exit_code(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace surelet
