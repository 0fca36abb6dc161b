#include "mwh/error.hpp"

#include "mwh/types.hpp"

namespace mwh {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotExpansive: return "NotExpansive";
    case ErrorCode::NotInteger: return "NotInteger";
    case ErrorCode::InvalidDigits: return "InvalidDigits";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SupportNotClosed: return "SupportNotClosed";
    case ErrorCode::DefectivePeripheral: return "DefectivePeripheral";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::NotInvertible: return "NotInvertible";
    case ErrorCode::FitResidualTooLarge: return "FitResidualTooLarge";
    case ErrorCode::NonIntegralBlock: return "NonIntegralBlock";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::TolNotReached: return "TolNotReached";
    case ErrorCode::TailBoundNotMet: return "TailBoundNotMet";
    case ErrorCode::SingularAtPoint: return "SingularAtPoint";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownBuiltin: return "UnknownBuiltin";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string module, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + " [" + module + "]: " + message),
      code_(code),
      module_(std::move(module)),
      message_(message) {}

std::vector<RVec> unit_grid(int n, int per_dim) {
  std::size_t total = 1;
  for (int c = 0; c < n; ++c) total *= static_cast<std::size_t>(per_dim);
  std::vector<RVec> pts;
  pts.reserve(total);
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  for (std::size_t t = 0; t < total; ++t) {
    RVec x(n);
    for (int c = 0; c < n; ++c) x[c] = static_cast<double>(idx[static_cast<std::size_t>(c)]) / per_dim;
    pts.push_back(std::move(x));
    for (int c = 0; c < n; ++c) {
      if (++idx[static_cast<std::size_t>(c)] < per_dim) break;
      idx[static_cast<std::size_t>(c)] = 0;
    }
  }
  return pts;
}

}  // namespace mwh
