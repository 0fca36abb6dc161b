#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mwh {

enum class ErrorCode {
  NotExpansive,
  NotInteger,
  InvalidDigits,
  IndexOutOfRange,
  DimensionMismatch,
  SupportNotClosed,
  DefectivePeripheral,
  BudgetExceeded,
  NotInvertible,
  FitResidualTooLarge,
  NonIntegralBlock,
  PreconditionFailed,
  TolNotReached,
  TailBoundNotMet,
  SingularAtPoint,
  ParseError,
  UnknownBuiltin,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a code and the module that
/// raised it, so the analysis pipeline can turn it into a structured finding.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }
  /// The message without the code and module prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string module_;
  std::string message_;
};

}  // namespace mwh
