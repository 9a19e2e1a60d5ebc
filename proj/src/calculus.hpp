#pragma once

#include <functional>

#include "value.hpp"

namespace odecalc {

// An evaluable sequence: index and named parameters to a value tuple.
// Must be total on N x valid valuations and deterministic; the engine
// may re-evaluate or cache points freely.
using SequenceFn = std::function<ValueVector(const Value& x, const Valuation& env)>;

// A two-index sequence f(x, t).
using TwoIndexFn =
    std::function<ValueVector(const Value& x, const Value& t, const Valuation& env)>;

// Wraps a scalar function as a 1-component SequenceFn.
SequenceFn scalar_seq(std::function<Value(const Value&)> f);

// f(x+1) - f(x), componentwise.
ValueVector derivative(const SequenceFn& f, const Value& x, const Valuation& env);

// Sum of f over [a, b): 0 when a = b, negated when a > b.
ValueVector integral(const SequenceFn& f, const Value& a, const Value& b,
                     const Valuation& env);

// Descending product x * (x-1) * ... * (x-m+1); 1 when m = 0. m >= 0.
Value falling_power(const Value& x, const Value& m);

// Product of (1 + u'(t)) for t in [0, x); 1 when x = 0. Defined for
// x >= 0 only; u must be scalar.
Value falling_exponential(const SequenceFn& u, const Value& x, const Valuation& env);

// Derivative of x -> integral of f(x, .) over [a(x), b(x)), evaluated
// as the three-term sum: the partial-derivative integral plus the two
// boundary-shift integrals.
ValueVector integral_param_derivative(const TwoIndexFn& f, const SequenceFn& a,
                                      const SequenceFn& b, const Value& x,
                                      const Valuation& env);

}  // namespace odecalc
