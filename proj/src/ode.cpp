#include "ode.hpp"

#include <json.hpp>

namespace odecalc {

std::string f_term(std::size_t i) { return "f." + std::to_string(i); }
std::string y_term(std::size_t k) { return "y." + std::to_string(k); }

namespace {

std::uint64_t checked_steps(const Value& x, const EvalLimits& limits,
                            const char* what) {
  if (x.is_negative()) throw DomainError(std::string(what) + ": negative index " + x.str());
  if (!x.fits_u64() || x.to_u64() > limits.max_steps)
    throw StepLimitError(std::string(what) + ": " + x.str() +
                         " steps exceed the cap of " + std::to_string(limits.max_steps));
  return x.to_u64();
}

ValueVector checked_init(const InitFn& init, std::size_t dim, const Valuation& y) {
  ValueVector f = init(y);
  if (f.arity() != dim)
    throw DomainError("initial condition has arity " + std::to_string(f.arity()) +
                      ", expected " + std::to_string(dim));
  return f;
}

}  // namespace

ValueVector iterate_ivp(const Ivp& p, const Value& x, const Valuation& y,
                        const EvalLimits& limits) {
  const std::uint64_t steps = checked_steps(x, limits, "iterate_ivp");
  ValueVector f = checked_init(p.init, p.dim, y);
  Value t(0);
  for (std::uint64_t i = 0; i < steps; ++i, ++t) f += p.rhs(f, t, y);
  return f;
}

// ---------------------------------------------------------------------------
// Closed-form linear solving

namespace {

struct Mat {
  std::size_t n = 0;
  std::vector<Value> c;  // row-major

  static Mat identity(std::size_t n) {
    Mat m{n, std::vector<Value>(n * n, Value(0))};
    for (std::size_t i = 0; i < n; ++i) m.c[i * n + i] = Value(1);
    return m;
  }

  const Value& at(std::size_t r, std::size_t k) const { return c[r * n + k]; }
  Value& at(std::size_t r, std::size_t k) { return c[r * n + k]; }
};

Mat mat_mul(const Mat& a, const Mat& b) {
  Mat out{a.n, std::vector<Value>(a.n * a.n, Value(0))};
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t k = 0; k < a.n; ++k) {
      const Value& aik = a.at(i, k);
      if (aik.is_zero()) continue;
      for (std::size_t j = 0; j < a.n; ++j) out.at(i, j) += aik * b.at(k, j);
    }
  return out;
}

ValueVector mat_apply(const Mat& a, const ValueVector& v) {
  ValueVector out(a.n);
  for (std::size_t i = 0; i < a.n; ++i) {
    Value acc(0);
    for (std::size_t j = 0; j < a.n; ++j) acc += a.at(i, j) * v[j];
    out[i] = std::move(acc);
  }
  return out;
}

// Evaluation environment shared by the linear solver and the
// length-ODE evaluators: parameters plus x, f.i and aux slots.
class StepEnv {
 public:
  StepEnv(std::size_t dim, const std::vector<NamedAux>& aux, const Valuation& y)
      : y_(y), aux_(aux), env_(y) {
    for (std::size_t i = 0; i < dim; ++i) f_names_.push_back(f_term(i));
    env_.set(kXTerm, Value(0));
    for (const std::string& n : f_names_) env_.set(n, Value(0));
  }

  // Binds x, the aux slots at x, and the current state.
  void bind(const Value& x, const ValueVector& f) {
    env_.set(kXTerm, x);
    for (const NamedAux& a : aux_) env_.set(a.term, a.fn(x, y_));
    for (std::size_t i = 0; i < f_names_.size(); ++i) env_.set(f_names_[i], f[i]);
  }

  const Valuation& env() const { return env_; }

 private:
  const Valuation& y_;
  const std::vector<NamedAux>& aux_;
  Valuation env_;
  std::vector<std::string> f_names_;
};

}  // namespace

ValueVector solve_linear_closed(const LinearOdeSystem& s, const Value& x,
                                const Valuation& y, const EvalLimits& limits) {
  if (s.a.rows() != s.dim || s.a.cols() != s.dim || s.b.size() != s.dim)
    throw DomainError("linear system shape does not match its dimension");
  const std::uint64_t target = checked_steps(x, limits, "solve_linear_closed");

  const ValueVector g = checked_init(s.init, s.dim, y);
  std::vector<ValueVector> f_vals{g};
  std::vector<Mat> a_vals;    // I + A(t), evaluated once f(t) is known
  std::vector<ValueVector> b_vals;
  StepEnv env(s.dim, s.aux, y);

  for (std::uint64_t v = 1; v <= target; ++v) {
    // Coefficients at time v-1 become available.
    env.bind(Value(static_cast<unsigned long>(v - 1)), f_vals[v - 1]);
    Mat m = Mat::identity(s.dim);
    for (std::size_t r = 0; r < s.dim; ++r)
      for (std::size_t k = 0; k < s.dim; ++k) m.at(r, k) += s.a.at(r, k).eval(env.env());
    a_vals.push_back(std::move(m));
    ValueVector bv(s.dim);
    for (std::size_t r = 0; r < s.dim; ++r) bv[r] = s.b[r].eval(env.env());
    b_vals.push_back(std::move(bv));

    // Descending accumulation of sum over u of prod over t in (u, v).
    Mat prod = Mat::identity(s.dim);
    ValueVector acc(s.dim);
    for (std::uint64_t u = v; u-- > 0;) {
      acc += mat_apply(prod, b_vals[u]);
      prod = mat_mul(prod, a_vals[u]);
    }
    acc += mat_apply(prod, g);
    f_vals.push_back(std::move(acc));
  }
  return f_vals[target];
}

// ---------------------------------------------------------------------------
// Drivers and jumps

Value Driver::operator()(const Value& x, const Valuation& y) const {
  if (kind_ == Kind::Length) return odecalc::length(x);
  return fn_(x, y);
}

JumpData jump_set(const Driver& driver, const Value& x, const Valuation& y,
                  const EvalLimits& limits) {
  if (x.is_negative()) throw DomainError("jump_set: negative bound " + x.str());
  JumpData out;
  if (driver.kind() == Driver::Kind::Length) {
    // length changes exactly after i = 2^t - 1, each time by one bit.
    for (Value j(1); j < x; j = (j + Value(1)) * Value(2) - Value(1)) {
      out.jumps.push_back(j);
      out.deltas.push_back(Value(1));
    }
    return out;
  }
  const std::uint64_t bound = checked_steps(x, limits, "jump_set scan");
  Value i(0);
  Value prev = driver(i, y);
  for (std::uint64_t k = 0; k < bound; ++k, ++i) {
    Value cur = driver(i + Value(1), y);
    if (cur != prev) {
      out.jumps.push_back(i);
      out.deltas.push_back(cur - prev);
    }
    prev = std::move(cur);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Compressed evaluation

namespace {

void record_step(EvalTrace* trace, std::uint64_t t, const Value& alpha,
                 const Value& delta, const ValueVector& f) {
  if (!trace) return;
  TraceStep step{t, alpha, delta, {}, f};
  step.bits.reserve(f.arity());
  for (const Value& v : f) step.bits.push_back(v.bit_length());
  trace->steps.push_back(std::move(step));
}

void apply_rhs(const LOdeProblem& p, StepEnv& env, const Value& alpha,
               const Value& delta, ValueVector& f) {
  env.bind(alpha, f);
  ValueVector u(p.dim);
  for (std::size_t i = 0; i < p.dim; ++i) u[i] = p.rhs[i].eval(env.env());
  if (delta == Value(1))
    f += u;
  else
    f += delta * u;
}

void check_shape(const LOdeProblem& p) {
  if (p.rhs.size() != p.dim)
    throw DomainError("right-hand side has " + std::to_string(p.rhs.size()) +
                      " components, expected " + std::to_string(p.dim));
}

}  // namespace

ValueVector eval_lode_compressed(const LOdeProblem& p, const Value& x,
                                 const Valuation& y, EvalTrace* trace,
                                 const EvalLimits& limits) {
  check_shape(p);
  JumpData jumps = jump_set(p.driver, x, y, limits);
  if (jumps.count() > limits.max_steps)
    throw StepLimitError("compressed evaluation needs " + std::to_string(jumps.count()) +
                         " steps, above the cap of " + std::to_string(limits.max_steps));
  ValueVector f = checked_init(p.init, p.dim, y);
  StepEnv env(p.dim, p.aux, y);
  for (std::size_t t = 0; t < jumps.count(); ++t) {
    apply_rhs(p, env, jumps.jumps[t], jumps.deltas[t], f);
    record_step(trace, t, jumps.jumps[t], jumps.deltas[t], f);
  }
  return f;
}

ValueVector eval_length_ode(const LOdeProblem& p, const Value& x,
                            const Valuation& y, EvalTrace* trace,
                            const EvalLimits& limits) {
  check_shape(p);
  if (p.driver.kind() != Driver::Kind::Length)
    throw DomainError("eval_length_ode requires the length driver");
  if (x.is_negative()) throw DomainError("eval_length_ode: negative argument " + x.str());
  ValueVector f = checked_init(p.init, p.dim, y);
  if (x.is_zero()) return f;  // F starts at 1; x = 0 is the initial condition
  const std::uint64_t steps = length(x).to_u64() - 1;
  if (steps > limits.max_steps)
    throw StepLimitError("length-ODE evaluation exceeds the step cap");
  StepEnv env(p.dim, p.aux, y);
  for (std::uint64_t t = 1; t <= steps; ++t) {
    Value arg = pow2(Value(static_cast<unsigned long>(t))) - Value(1);
    apply_rhs(p, env, arg, Value(1), f);
    record_step(trace, t - 1, arg, Value(1), f);
  }
  return f;
}

LinearDecomposition check_linear(const LOdeProblem& p) {
  check_shape(p);
  std::vector<std::string> pivots;
  pivots.reserve(p.dim);
  for (std::size_t i = 0; i < p.dim; ++i) pivots.push_back(f_term(i));
  return linear_decompose(p.rhs, pivots);
}

LinearityReport analyze_linearity(const LOdeProblem& p) {
  check_shape(p);
  LinearityReport report;
  for (std::size_t i = 0; i < p.dim; ++i) report.pivots.push_back(f_term(i));
  for (std::size_t i = 0; i < p.dim; ++i) {
    std::vector<Value> row;
    for (const std::string& pivot : report.pivots) row.push_back(p.rhs[i].degree(pivot));
    report.degrees.push_back(std::move(row));
  }
  try {
    LinearDecomposition d = check_linear(p);
    report.accepted = true;
    for (std::size_t r = 0; r < p.dim; ++r)
      for (std::size_t k = 0; k < p.dim; ++k)
        report.a_entries.push_back(d.q1.at(r, k).render());
    for (const Expr& e : d.q2) report.b_entries.push_back(e.render());
  } catch (const NotEssentiallyLinearError& e) {
    report.accepted = false;
    report.bad_component = e.component;
    report.bad_term = e.term;
    report.witness = e.witness;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Guarded evaluation

namespace {

std::uint64_t ceil_log2(std::uint64_t n) {
  std::uint64_t s = 0;
  while ((std::uint64_t(1) << s) < n) ++s;
  return s;
}

}  // namespace

GuardedResult guarded_eval(const LOdeProblem& p, const Value& x, const Valuation& y,
                           const GrowthBudget& budget,
                           const LinearDecomposition* claimed,
                           const EvalLimits& limits, bool record_trace) {
  check_shape(p);
  LinearDecomposition local;
  if (!claimed) {
    local = check_linear(p);
    claimed = &local;
  }

  JumpData jumps = jump_set(p.driver, x, y, limits);
  if (jumps.count() > limits.max_steps)
    throw StepLimitError("guarded evaluation exceeds the step cap");

  GuardedResult out;
  out.value = checked_init(p.init, p.dim, y);
  StepEnv env(p.dim, p.aux, y);

  std::size_t init_bits = 1, prev_bits = 1;
  for (const Value& v : out.value) prev_bits = std::max(prev_bits, v.bit_length());
  init_bits = prev_bits;

  // A fully constant row decomposes as B identical to the right-hand
  // side itself; one evaluation then serves as both the coefficient
  // probe and the update.
  std::vector<bool> b_is_rhs(p.dim);
  for (std::size_t i = 0; i < p.dim; ++i) b_is_rhs[i] = claimed->q2[i].same_node(p.rhs[i]);

  // A linear step multiplies by coefficients and sums dim + 1 terms, so
  // the state may gain at most coeff_bits + ceil(log2(dim + 1)) bits.
  const std::uint64_t slack = std::max<std::uint64_t>(1, ceil_log2(p.dim + 1));
  std::uint64_t observed_coeff = 1;

  for (std::size_t t = 0; t < jumps.count(); ++t) {
    const Value& alpha = jumps.jumps[t];
    env.bind(alpha, out.value);

    std::size_t coeff_bits = 1;
    ValueVector u(p.dim);
    for (std::size_t r = 0; r < p.dim; ++r) {
      if (b_is_rhs[r]) {
        u[r] = claimed->q2[r].eval(env.env());
        coeff_bits = std::max(coeff_bits, u[r].bit_length());
        continue;
      }
      for (std::size_t c = 0; c < p.dim; ++c)
        coeff_bits = std::max(coeff_bits, claimed->q1.at(r, c).eval(env.env()).bit_length());
      coeff_bits = std::max(coeff_bits, claimed->q2[r].eval(env.env()).bit_length());
      u[r] = p.rhs[r].eval(env.env());
    }
    if (jumps.deltas[t] == Value(1))
      out.value += u;
    else
      out.value += jumps.deltas[t] * u;

    std::size_t new_bits = 1;
    for (const Value& v : out.value) new_bits = std::max(new_bits, v.bit_length());

    if (new_bits > prev_bits + coeff_bits + slack)
      throw GrowthBoundViolatedError(
          t, "state grew from " + std::to_string(prev_bits) + " to " +
                 std::to_string(new_bits) + " bits against coefficient bound " +
                 std::to_string(coeff_bits));

    observed_coeff = std::max<std::uint64_t>(observed_coeff, coeff_bits);
    const std::uint64_t per_step =
        budget.pinned_coeff_bits ? *budget.pinned_coeff_bits : 4 * observed_coeff;
    if (new_bits > init_bits + (t + 2) * per_step)
      throw BudgetExceededError(
          t, "state length " + std::to_string(new_bits) + " bits exceeds budget " +
                 std::to_string(init_bits + (t + 2) * per_step));

    prev_bits = new_bits;
    ++out.steps;
    if (record_trace) record_step(&out.trace, t, alpha, jumps.deltas[t], out.value);
  }
  return out;
}

std::string trace_to_json(const EvalTrace& trace) {
  nlohmann::json arr = nlohmann::json::array();
  for (const TraceStep& s : trace.steps) {
    nlohmann::json values = nlohmann::json::array();
    for (const Value& v : s.value) values.push_back(v.str());
    arr.push_back({{"t", s.t},
                   {"alpha", s.alpha.str()},
                   {"deltaL", s.delta_l.str()},
                   {"bits", s.bits},
                   {"value", values}});
  }
  return arr.dump();
}

}  // namespace odecalc
