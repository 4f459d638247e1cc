#pragma once

#include <stdexcept>
#include <string>

namespace hyperflow {

enum class Errc {
  NegativeWeight,
  WeightOverflow,
  ZeroWeight,
  ZeroCondition,
  SyntaxError,
  UndeclaredVariable,
  TypeMismatch,
  UnknownAgent,
  DistNotOneSumming,
  ValueOutOfDomain,
  UnsupportedConstruct,
  UnresolvedVisibility,
  DomainMismatch,
  NotRefinementMatrix,
  Infeasible,
  Unbounded,
  NotSeparable,
  VertexBudgetExceeded,
  PreconditionViolated,
  InvalidArgument,
  Internal,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::NegativeWeight: return "NegativeWeight";
    case Errc::WeightOverflow: return "WeightOverflow";
    case Errc::ZeroWeight: return "ZeroWeight";
    case Errc::ZeroCondition: return "ZeroCondition";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::UndeclaredVariable: return "UndeclaredVariable";
    case Errc::TypeMismatch: return "TypeMismatch";
    case Errc::UnknownAgent: return "UnknownAgent";
    case Errc::DistNotOneSumming: return "DistNotOneSumming";
    case Errc::ValueOutOfDomain: return "ValueOutOfDomain";
    case Errc::UnsupportedConstruct: return "UnsupportedConstruct";
    case Errc::UnresolvedVisibility: return "UnresolvedVisibility";
    case Errc::DomainMismatch: return "DomainMismatch";
    case Errc::NotRefinementMatrix: return "NotRefinementMatrix";
    case Errc::Infeasible: return "Infeasible";
    case Errc::Unbounded: return "Unbounded";
    case Errc::NotSeparable: return "NotSeparable";
    case Errc::VertexBudgetExceeded: return "VertexBudgetExceeded";
    case Errc::PreconditionViolated: return "PreconditionViolated";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Internal: return "Internal";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace hyperflow
