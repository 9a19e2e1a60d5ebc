#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace odecalc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input text (expressions, problem files, assembly).
struct SyntaxError : Error {
  std::string message;  // without the location suffix
  int line;
  int column;
  SyntaxError(const std::string& msg, int line_, int column_)
      : Error(msg + " (line " + std::to_string(line_) + ", column " +
              std::to_string(column_) + ")"),
        message(msg),
        line(line_),
        column(column_) {}
};

// A term was looked up in a valuation that does not bind it.
struct UnboundTermError : Error {
  std::string term;
  explicit UnboundTermError(const std::string& term_)
      : Error("unbound term '" + term_ + "'"), term(term_) {}
};

// Precondition violations: negative falling-power order, division by
// zero, arity mismatches, out-of-range exponents.
struct DomainError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

// Rejection verdict of the linearity analysis.
struct NotEssentiallyLinearError : Error {
  std::size_t component;
  std::string term;
  std::string witness;  // rendered offending subexpression
  NotEssentiallyLinearError(std::size_t component_, const std::string& term_,
                            const std::string& witness_)
      : Error("component " + std::to_string(component_) +
              " is not essentially linear in '" + term_ + "': " + witness_),
        component(component_),
        term(term_),
        witness(witness_) {}
};

// The guarded evaluator saw a step grow more than a linear right-hand
// side permits; the system is nonlinear or was mis-analyzed.
struct GrowthBoundViolatedError : Error {
  std::uint64_t step;
  GrowthBoundViolatedError(std::uint64_t step_, const std::string& detail)
      : Error("growth bound violated at step " + std::to_string(step_) + ": " +
              detail),
        step(step_) {}
};

// Cumulative bit length exceeded the evaluation budget.
struct BudgetExceededError : Error {
  std::uint64_t step;
  BudgetExceededError(std::uint64_t step_, const std::string& detail)
      : Error("budget exceeded at step " + std::to_string(step_) + ": " +
              detail),
        step(step_) {}
};

// Hard cap on the number of steps of any evaluation.
struct StepLimitError : Error {
  using Error::Error;
};

}  // namespace odecalc
