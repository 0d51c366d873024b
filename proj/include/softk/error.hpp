#pragma once

#include <stdexcept>
#include <string>

namespace softk {

enum class ErrorCode {
  Syntax,
  NameClash,
  Arity,
  UnknownFunction,
  UnknownName,
  FunvarMismatch,
  MissingInstance,
  Malformed,
  Invariant,
  NonExecutable,
  GuardViolation,
  DepthExceeded,
  BudgetExceeded,
  UnboundVariable,
  ObligationFailed,
  ChainShape,
  BoundedCheckFailed,
  Usage,
  Io,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::Syntax: return "SyntaxError";
    case ErrorCode::NameClash: return "NameClash";
    case ErrorCode::Arity: return "ArityError";
    case ErrorCode::UnknownFunction: return "UnknownFunction";
    case ErrorCode::UnknownName: return "UnknownName";
    case ErrorCode::FunvarMismatch: return "FunvarMismatch";
    case ErrorCode::MissingInstance: return "MissingInstance";
    case ErrorCode::Malformed: return "MalformedEvent";
    case ErrorCode::Invariant: return "InvariantViolation";
    case ErrorCode::NonExecutable: return "NonExecutable";
    case ErrorCode::GuardViolation: return "GuardViolation";
    case ErrorCode::DepthExceeded: return "DepthExceeded";
    case ErrorCode::BudgetExceeded: return "EnumBudgetExceeded";
    case ErrorCode::UnboundVariable: return "UnboundVariable";
    case ErrorCode::ObligationFailed: return "ObligationFailed";
    case ErrorCode::ChainShape: return "ChainShapeError";
    case ErrorCode::BoundedCheckFailed: return "BoundedCheckFailed";
    case ErrorCode::Usage: return "UsageError";
    case ErrorCode::Io: return "IOError";
  }
  return "Error";
}

// All kernel, event, and evaluator failures are reported through this one
// exception; `code` is what tests and callers dispatch on.
struct Error : std::runtime_error {
  ErrorCode code;
  int line = 0;
  int col = 0;

  Error(ErrorCode c, const std::string& msg, int ln = 0, int co = 0)
      : std::runtime_error(std::string(error_code_name(c)) + ": " + msg),
        code(c), line(ln), col(co) {}
};

[[noreturn]] inline void fail(ErrorCode c, const std::string& msg, int line = 0, int col = 0) {
  throw Error(c, msg, line, col);
}

}  // namespace softk
