#pragma once

#include <stdexcept>
#include <string>

namespace rblab {

/// Failure categories. The CLI maps these onto process exit codes:
/// config errors -> 3, invariant/assumption failures -> 2, everything else -> 1.
enum class ErrorKind {
  Overflow,             // non-finite value produced by a solver
  Accuracy,             // defect above tolerance after the allowed refinement
  Divergence,           // iteration failed to contract
  Regime,               // problem outside the regime a method supports
  InvalidProblem,       // ill-posed inputs (barrier above terminal, bad grid, ...)
  BoxTooSmall,          // convolution scan attained its minimum on the box edge
  InvalidDistribution,  // sample weights not a probability distribution
  EnvelopeBlowup,       // growth envelope exploded before reaching t = 0
  AssumptionViolation,  // spot-check of a stated assumption failed
  InvariantFailure,     // a solution-level invariant did not hold
  CertificateFailure,   // an inequality certificate was violated
  Basis,                // regression design matrix unusable
  Mode,                 // driver-mode iteration failed to settle
  Config,               // unparseable or inconsistent configuration
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, std::string module, std::string op, const std::string& detail)
      : std::runtime_error(module + "." + op + ": " + detail),
        kind_(kind), module_(std::move(module)), op_(std::move(op)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& module_name() const { return module_; }
  const std::string& op_name() const { return op_; }

private:
  ErrorKind kind_;
  std::string module_;
  std::string op_;
};

[[noreturn]] inline void raise(ErrorKind kind, const char* module, const char* op,
                               const std::string& detail) {
  throw Error(kind, module, op, detail);
}

}  // namespace rblab
