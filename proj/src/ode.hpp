#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "expr.hpp"
#include "value.hpp"

namespace odecalc {

// Hard cap on the number of steps of any single evaluation, so misuse
// terminates instead of looping.
struct EvalLimits {
  std::uint64_t max_steps = std::uint64_t(1) << 22;
};

// Term-name conventions shared by the engine, the file format and the
// register-machine compiler: solution components are "f.<i>",
// parameters "y.<k>", the running index "x", and auxiliary slots carry
// the names they were declared with (conventionally "h.<name>").
std::string f_term(std::size_t i);
std::string y_term(std::size_t k);
inline constexpr const char* kXTerm = "x";

using InitFn = std::function<ValueVector(const Valuation& y)>;
using RhsFn = std::function<ValueVector(const ValueVector& f, const Value& x,
                                        const Valuation& y)>;
using AuxFn = std::function<Value(const Value& x, const Valuation& y)>;

struct NamedAux {
  std::string term;  // name used in expressions, e.g. "h.p"
  AuxFn fn;          // evaluated lazily, at jump points only
};

// Initial value problem f(0,y) = init(y), f(x+1,y) = f(x,y) + rhs(f,x,y).
struct Ivp {
  std::size_t dim;
  InitFn init;
  RhsFn rhs;
};

// Forward iteration; the unique solution at x.
ValueVector iterate_ivp(const Ivp& p, const Value& x, const Valuation& y,
                        const EvalLimits& limits = {});

// f'(x,y) = A(f,h,x,y) * f(x,y) + B(f,h,x,y) with f(0,y) = init(y).
// A and B are expression matrices over f-components, aux slots, x and
// parameters.
struct LinearOdeSystem {
  std::size_t dim;
  InitFn init;
  ExprMatrix a;  // dim x dim
  ExprVector b;  // dim
  std::vector<NamedAux> aux;
};

// Evaluates the explicit solution
//   f(x,y) = sum over u in [-1, x) of (prod over t in (u, x) of (1 + A(t)))
//            * B(u), with B(-1,y) = init(y)
// where "1 + A" is identity-plus-matrix and the empty product is the
// identity. Coefficients may read earlier solution values, which are
// obtained by unrolling the same formula bottom-up.
ValueVector solve_linear_closed(const LinearOdeSystem& s, const Value& x,
                                const Valuation& y, const EvalLimits& limits = {});

// Derivation driver L(x,y). The binary-length driver has a closed-form
// jump enumeration; any other driver is scanned, which costs time
// linear in x.
class Driver {
 public:
  enum class Kind { Length, Custom };

  static Driver length() { return Driver(Kind::Length, nullptr); }
  static Driver custom(AuxFn fn) { return Driver(Kind::Custom, std::move(fn)); }

  Kind kind() const { return kind_; }
  Value operator()(const Value& x, const Valuation& y) const;

 private:
  Driver(Kind kind, AuxFn fn) : kind_(kind), fn_(std::move(fn)) {}
  Kind kind_;
  AuxFn fn_;
};

// f(x+1,y) = f(x,y) + (L(x+1,y) - L(x,y)) * u(f(x,y), h(x,y), x, y)
// with f(0,y) = init(y). u is a vector of sg-polynomial expressions
// over f.i, aux slots, x and parameters.
struct LOdeProblem {
  std::size_t dim;
  Driver driver = Driver::length();
  InitFn init;
  ExprVector rhs;  // u
  std::vector<NamedAux> aux;
};

// Indices i < x after which the driver value changes, in increasing
// order; alpha(t) = jumps[t]. deltas[t] caches L(jumps[t]+1) - L(jumps[t]).
struct JumpData {
  std::vector<Value> jumps;
  std::vector<Value> deltas;
  std::size_t count() const { return jumps.size(); }
};

JumpData jump_set(const Driver& driver, const Value& x, const Valuation& y,
                  const EvalLimits& limits = {});

// One record per compressed step; bit lengths and values are those of
// the state after the step.
struct TraceStep {
  std::uint64_t t;
  Value alpha;
  Value delta_l;
  std::vector<std::size_t> bits;
  ValueVector value;
};

struct EvalTrace {
  std::vector<TraceStep> steps;
};

std::string trace_to_json(const EvalTrace& trace);

// Jump-compressed evaluation: exactly one right-hand-side evaluation
// per jump of the driver.
ValueVector eval_lode_compressed(const LOdeProblem& p, const Value& x,
                                 const Valuation& y, EvalTrace* trace = nullptr,
                                 const EvalLimits& limits = {});

// Length-driver evaluation in the rescaled time variable:
// F(1,y) = init(y), F(t+1,y) = F(t,y) + u(F(t,y), h(2^t - 1, y), 2^t - 1, y),
// result F(length(x), y). x = 0 is answered by the initial condition.
ValueVector eval_length_ode(const LOdeProblem& p, const Value& x,
                            const Valuation& y, EvalTrace* trace = nullptr,
                            const EvalLimits& limits = {});

// Linearity analysis of the right-hand side in the solution components.
// On success yields the equivalent A * f + B form.
LinearDecomposition check_linear(const LOdeProblem& p);

// check_linear with the verdict spelled out: the per-component degree
// table in every solution component, and either the decomposition or
// the rejection witness.
struct LinearityReport {
  bool accepted = false;
  std::vector<std::vector<Value>> degrees;  // [component][pivot]
  std::vector<std::string> pivots;
  // accepted:
  std::vector<std::string> a_entries;  // rendered row-major dim x dim
  std::vector<std::string> b_entries;
  // rejected:
  std::size_t bad_component = 0;
  std::string bad_term;
  std::string witness;
};

LinearityReport analyze_linearity(const LOdeProblem& p);

// Bit-budget for guarded evaluation. When no per-step coefficient bound
// is pinned, it is estimated as 4x the largest coefficient length
// observed so far.
struct GrowthBudget {
  std::optional<std::uint64_t> pinned_coeff_bits;
};

struct GuardedResult {
  ValueVector value;
  EvalTrace trace;  // empty unless record_trace
  std::uint64_t steps = 0;
};

// Compressed evaluation that additionally asserts, at every step, that
// the state's bit length grows by at most (max bit length among the
// evaluated A/B entries) + ceil(log2(dim + 1)), and that the cumulative
// length stays within init-length + (steps + 1) * budget. The
// decomposition defaults to check_linear(p); passing one explicitly
// skips the analysis.
GuardedResult guarded_eval(const LOdeProblem& p, const Value& x, const Valuation& y,
                           const GrowthBudget& budget = {},
                           const LinearDecomposition* claimed = nullptr,
                           const EvalLimits& limits = {}, bool record_trace = true);

}  // namespace odecalc
