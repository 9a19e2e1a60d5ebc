#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ode.hpp"

namespace odecalc::stdprog {

using ScalarFn = std::function<Value(const Value&)>;
using ParamFn = std::function<Value(const Value&, const Valuation&)>;

// min of f over [0, x], by the running-minimum IVP (one step per
// point; linear in x, not in length(x)).
Value prefix_min(const ScalarFn& f, const Value& x, const EvalLimits& limits = {});

// Dichotomic search driven by the binary length; the walk starts at x,
// halves the stride each step and lands within one of the answer,
// fixed by a final comparison.
Value floor_sqrt(const Value& x, EvalTrace* trace = nullptr);
Value int_div(const Value& x, const Value& y, EvalTrace* trace = nullptr);

// x mod 2^length(y), stripping one leading bit position per step.
Value suffix(const Value& x, const Value& y, EvalTrace* trace = nullptr);

// 2^length(x) and 2^(length(x) * length(y)), as linear length-ODEs.
Value pow2_length(const Value& x, EvalTrace* trace = nullptr);
Value pow2_lenprod(const Value& x, const Value& y, EvalTrace* trace = nullptr);

// Sum and product of g over [0, x), via the closed-form linear solver.
Value bsum(const ParamFn& g, const Value& x, const Valuation& y = {},
           const EvalLimits& limits = {});
Value bprod(const ParamFn& g, const Value& x, const Valuation& y = {},
            const EvalLimits& limits = {});

// Problem builders, for analysis and cross-checking. Parameter slots:
// sqrt/pow2_lenprod take y.0; div and suffix take y.0 (the argument)
// and y.1.
const LOdeProblem& pow2_length_problem();
const LOdeProblem& pow2_lenprod_problem();
const LOdeProblem& floor_sqrt_problem();
const LOdeProblem& int_div_problem();
const LOdeProblem& suffix_problem();

// f' = -f + 1, f(0) = 0; its solution over N is the sign function.
Ivp sign_ivp();

Ivp prefix_min_ivp(ScalarFn f);
LinearOdeSystem bsum_system(ParamFn g);
LinearOdeSystem bprod_system(ParamFn g);

// Reference implementations the programs are checked against.
Value oracle_floor_sqrt(const Value& x);
Value oracle_int_div(const Value& x, const Value& y);
Value oracle_suffix(const Value& x, const Value& y);
Value oracle_pow2_length(const Value& x);
Value oracle_pow2_lenprod(const Value& x, const Value& y);
Value oracle_prefix_min(const ScalarFn& f, const Value& x);
Value oracle_bsum(const ParamFn& g, const Value& x, const Valuation& y = {});
Value oracle_bprod(const ParamFn& g, const Value& x, const Valuation& y = {});

// CLI-facing registry: arguments arrive as text (integers, or an
// expression for the function-valued parameters), and each program
// carries its reference oracle.
struct StdlibResult {
  Value value;
  EvalTrace trace;
};

struct NamedProgram {
  std::string name;
  std::string usage;
  std::string recipe;
  std::size_t arg_count;
  std::function<StdlibResult(const std::vector<std::string>& args)> run;
  std::function<Value(const std::vector<std::string>& args)> oracle;
};

const std::vector<NamedProgram>& registry();
const NamedProgram* find_program(std::string_view name);

}  // namespace odecalc::stdprog
