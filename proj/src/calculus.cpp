#include "calculus.hpp"

namespace odecalc {

SequenceFn scalar_seq(std::function<Value(const Value&)> f) {
  return [f = std::move(f)](const Value& x, const Valuation&) {
    return ValueVector{f(x)};
  };
}

ValueVector derivative(const SequenceFn& f, const Value& x, const Valuation& env) {
  return f(x + Value(1), env) - f(x, env);
}

ValueVector integral(const SequenceFn& f, const Value& a, const Value& b,
                     const Valuation& env) {
  if (a > b) {
    ValueVector flipped = integral(f, b, a, env);
    ValueVector out(flipped.arity());
    out -= flipped;
    return out;
  }
  if (a == b) {
    // Arity comes from a probe evaluation; the sum itself is empty.
    return ValueVector(f(a, env).arity());
  }
  ValueVector acc = f(a, env);
  for (Value t = a + Value(1); t < b; ++t) acc += f(t, env);
  return acc;
}

Value falling_power(const Value& x, const Value& m) {
  if (m.is_negative()) throw DomainError("falling power of negative order " + m.str());
  Value acc(1);
  Value factor = x;
  for (Value i(0); i < m; ++i, --factor) {
    if (factor.is_zero()) return Value(0);
    acc *= factor;
  }
  return acc;
}

namespace {

Value scalar_at(const SequenceFn& f, const Value& x, const Valuation& env) {
  ValueVector v = f(x, env);
  if (v.arity() != 1)
    throw DomainError("expected a scalar sequence, got arity " +
                      std::to_string(v.arity()));
  return v[0];
}

}  // namespace

Value falling_exponential(const SequenceFn& u, const Value& x, const Valuation& env) {
  if (x.is_negative())
    throw DomainError("falling exponential undefined for negative bound " + x.str());
  Value acc(1);
  Value prev = scalar_at(u, Value(0), env);
  for (Value t(0); t < x; ++t) {
    Value next = scalar_at(u, t + Value(1), env);
    acc *= Value(1) + (next - prev);
    prev = std::move(next);
  }
  return acc;
}

ValueVector integral_param_derivative(const TwoIndexFn& f, const SequenceFn& a,
                                      const SequenceFn& b, const Value& x,
                                      const Valuation& env) {
  const Value x1 = x + Value(1);
  const Value ax = scalar_at(a, x, env);
  const Value ax1 = scalar_at(a, x1, env);
  const Value bx = scalar_at(b, x, env);
  const Value bx1 = scalar_at(b, x1, env);

  SequenceFn partial = [&](const Value& t, const Valuation& e) {
    return f(x1, t, e) - f(x, t, e);
  };
  ValueVector acc = integral(partial, ax, bx, env);

  // Lower-bound shift: integral of f(x+1, a(x+1)+t) for t in [0, -a'(x)).
  SequenceFn low = [&](const Value& t, const Valuation& e) { return f(x1, ax1 + t, e); };
  acc += integral(low, Value(0), ax - ax1, env);

  // Upper-bound shift: integral of f(x+1, b(x)+t) for t in [0, b'(x)).
  SequenceFn high = [&](const Value& t, const Valuation& e) { return f(x1, bx + t, e); };
  acc += integral(high, Value(0), bx1 - bx, env);

  return acc;
}

}  // namespace odecalc
