#include "stdlib_programs.hpp"

namespace odecalc::stdprog {

namespace {

Expr c(long v) { return Expr::constant(Value(v)); }
Expr f0() { return Expr::term(f_term(0)); }
Expr y0() { return Expr::term(y_term(0)); }
Expr y1() { return Expr::term(y_term(1)); }
Expr neg(Expr e) { return Expr::sub(c(0), std::move(e)); }

struct Cached {
  LOdeProblem problem;
  LinearDecomposition decomp;
};

Cached make_cached(LOdeProblem p) {
  LinearDecomposition d = check_linear(p);
  return Cached{std::move(p), std::move(d)};
}

// Stride 2^(length(x) - t - 1) at the t-th driver step (the evaluation
// point v = 2^t - 1 has length t). The first stride, 2^(length(x) - 1),
// is folded into the initial condition, so the walk finishes in
// length(x) - 1 driver steps.
AuxFn dicho_stride() {
  return [](const Value& v, const Valuation& y) {
    return pow2(length(y.get(y_term(0))) - length(v) - Value(1));
  };
}

// Walk update for a probe expression h(f.0): step up by h.step when the
// probe undershoots the target, down when it overshoots, with both
// moves gated to keep the walk inside [0, y.0]. The probe is monotone
// there, which is what makes the dichotomy converge.
Expr dicho_rhs(const Expr& probe) {
  Expr step = Expr::term("h.step");
  Expr up = Expr::mul(
      Expr::mul(Expr::sg(Expr::sub(y0(), probe)),
                Expr::sg(Expr::add(Expr::sub(Expr::sub(y0(), f0()), step), c(1)))),
      step);
  Expr down = Expr::mul(
      Expr::mul(Expr::sg(Expr::sub(probe, y0())),
                Expr::sg(Expr::add(Expr::sub(f0(), step), c(1)))),
      step);
  return Expr::sub(std::move(up), std::move(down));
}

const Cached& sqrt_cached() {
  static const Cached cached = [] {
    LOdeProblem p;
    p.dim = 1;
    p.driver = Driver::length();
    p.init = [](const Valuation& y) {
      const Value& x = y.get(y_term(0));
      return ValueVector{x - sg(x * x - x) * pow2(length(x) - Value(1))};
    };
    p.rhs = {dicho_rhs(Expr::mul(f0(), f0()))};
    p.aux = {NamedAux{"h.step", dicho_stride()}};
    return make_cached(std::move(p));
  }();
  return cached;
}

const Cached& div_cached() {
  static const Cached cached = [] {
    LOdeProblem p;
    p.dim = 1;
    p.driver = Driver::length();
    p.init = [](const Valuation& y) {
      const Value& x = y.get(y_term(0));
      const Value& d = y.get(y_term(1));
      return ValueVector{x - sg(x * d - x) * pow2(length(x) - Value(1))};
    };
    p.rhs = {dicho_rhs(Expr::mul(f0(), y1()))};
    p.aux = {NamedAux{"h.step", dicho_stride()}};
    return make_cached(std::move(p));
  }();
  return cached;
}

const Cached& suffix_cached() {
  static const Cached cached = [] {
    LOdeProblem p;
    p.dim = 1;
    p.driver = Driver::length();
    p.init = [](const Valuation& y) { return ValueVector{y.get(y_term(0))}; };
    // subtract the bit at the cut position whenever it is set
    p.rhs = {neg(Expr::mul(
        Expr::sg(Expr::add(Expr::sub(f0(), Expr::term("h.cut")), c(1))),
        Expr::term("h.cut")))};
    p.aux = {NamedAux{"h.cut", [](const Value& v, const Valuation& y) {
               Value pos = length(y.get(y_term(0))) - length(v);
               Value keep = length(y.get(y_term(1)));
               return pow2(pos >= keep ? pos : keep);
             }}};
    return make_cached(std::move(p));
  }();
  return cached;
}

const Cached& pow2_length_cached() {
  static const Cached cached = [] {
    LOdeProblem p;
    p.dim = 1;
    p.driver = Driver::length();
    p.init = [](const Valuation&) { return ValueVector{Value(2)}; };
    p.rhs = {f0()};
    return make_cached(std::move(p));
  }();
  return cached;
}

const Cached& pow2_lenprod_cached() {
  static const Cached cached = [] {
    LOdeProblem p;
    p.dim = 1;
    p.driver = Driver::length();
    p.init = [](const Valuation& y) {
      return ValueVector{pow2(length(y.get(y_term(0))))};
    };
    p.rhs = {Expr::mul(f0(), Expr::sub(Expr::term("h.p"), c(1)))};
    p.aux = {NamedAux{"h.p", [](const Value&, const Valuation& y) {
               return pow2(length(y.get(y_term(0))));
             }}};
    return make_cached(std::move(p));
  }();
  return cached;
}

Value run_guarded(const Cached& cached, const Value& at, Valuation y, EvalTrace* trace) {
  GuardedResult r = guarded_eval(cached.problem, at, y, {}, &cached.decomp, {},
                                 trace != nullptr);
  if (trace) *trace = std::move(r.trace);
  return r.value[0];
}

void require_nonneg(const Value& v, const char* what) {
  if (v.is_negative()) throw DomainError(std::string(what) + " must be non-negative, got " + v.str());
}

}  // namespace

const LOdeProblem& pow2_length_problem() { return pow2_length_cached().problem; }
const LOdeProblem& pow2_lenprod_problem() { return pow2_lenprod_cached().problem; }
const LOdeProblem& floor_sqrt_problem() { return sqrt_cached().problem; }
const LOdeProblem& int_div_problem() { return div_cached().problem; }
const LOdeProblem& suffix_problem() { return suffix_cached().problem; }

Ivp sign_ivp() {
  Ivp p;
  p.dim = 1;
  p.init = [](const Valuation&) { return ValueVector{Value(0)}; };
  p.rhs = [](const ValueVector& f, const Value&, const Valuation&) {
    return ValueVector{Value(1) - f[0]};
  };
  return p;
}

Ivp prefix_min_ivp(ScalarFn f) {
  Ivp p;
  p.dim = 1;
  p.init = [f](const Valuation&) { return ValueVector{f(Value(0))}; };
  // compare the running minimum against the next point
  p.rhs = [f](const ValueVector& state, const Value& t, const Valuation&) {
    Value next = f(t + Value(1));
    if (state[0] < next) return ValueVector{Value(0)};
    return ValueVector{next - state[0]};
  };
  return p;
}

Value prefix_min(const ScalarFn& f, const Value& x, const EvalLimits& limits) {
  require_nonneg(x, "prefix_min bound");
  return iterate_ivp(prefix_min_ivp(f), x, {}, limits)[0];
}

Value floor_sqrt(const Value& x, EvalTrace* trace) {
  require_nonneg(x, "floor_sqrt argument");
  Valuation y;
  y.set(y_term(0), x);
  Value walk = run_guarded(sqrt_cached(), x, std::move(y), trace);
  return walk * walk <= x ? walk : walk - Value(1);
}

Value int_div(const Value& x, const Value& y, EvalTrace* trace) {
  require_nonneg(x, "int_div dividend");
  if (y.is_zero()) throw DomainError("division by zero");
  if (y.is_negative()) throw DomainError("int_div divisor must be positive, got " + y.str());
  Valuation env;
  env.set(y_term(0), x);
  env.set(y_term(1), y);
  Value walk = run_guarded(div_cached(), x, std::move(env), trace);
  return walk * y <= x ? walk : walk - Value(1);
}

Value suffix(const Value& x, const Value& y, EvalTrace* trace) {
  require_nonneg(x, "suffix argument");
  require_nonneg(y, "suffix length witness");
  Valuation env;
  env.set(y_term(0), x);
  env.set(y_term(1), y);
  return run_guarded(suffix_cached(), x, std::move(env), trace);
}

Value pow2_length(const Value& x, EvalTrace* trace) {
  require_nonneg(x, "pow2_length argument");
  return run_guarded(pow2_length_cached(), x, {}, trace);
}

Value pow2_lenprod(const Value& x, const Value& y, EvalTrace* trace) {
  require_nonneg(x, "pow2_lenprod argument");
  require_nonneg(y, "pow2_lenprod argument");
  Valuation env;
  env.set(y_term(0), y);
  return run_guarded(pow2_lenprod_cached(), x, std::move(env), trace);
}

LinearOdeSystem bsum_system(ParamFn g) {
  LinearOdeSystem s;
  s.dim = 1;
  s.init = [](const Valuation&) { return ValueVector{Value(0)}; };
  s.a = ExprMatrix(1, 1);
  s.a.at(0, 0) = c(0);
  s.b = {Expr::term("h.g")};
  s.aux = {NamedAux{"h.g", [g = std::move(g)](const Value& x, const Valuation& y) {
             return g(x, y);
           }}};
  return s;
}

LinearOdeSystem bprod_system(ParamFn g) {
  LinearOdeSystem s;
  s.dim = 1;
  s.init = [](const Valuation&) { return ValueVector{Value(1)}; };
  s.a = ExprMatrix(1, 1);
  s.a.at(0, 0) = Expr::sub(Expr::term("h.g"), c(1));
  s.b = {c(0)};
  s.aux = {NamedAux{"h.g", [g = std::move(g)](const Value& x, const Valuation& y) {
             return g(x, y);
           }}};
  return s;
}

Value bsum(const ParamFn& g, const Value& x, const Valuation& y, const EvalLimits& limits) {
  require_nonneg(x, "bsum bound");
  return solve_linear_closed(bsum_system(g), x, y, limits)[0];
}

Value bprod(const ParamFn& g, const Value& x, const Valuation& y, const EvalLimits& limits) {
  require_nonneg(x, "bprod bound");
  return solve_linear_closed(bprod_system(g), x, y, limits)[0];
}

// ---------------------------------------------------------------------------
// Oracles

Value oracle_floor_sqrt(const Value& x) {
  require_nonneg(x, "floor_sqrt argument");
  if (x.bit_length() <= 20) {
    Value r(0);
    while ((r + Value(1)) * (r + Value(1)) <= x) ++r;
    return r;
  }
  mpz_class out;
  mpz_sqrt(out.get_mpz_t(), x.raw().get_mpz_t());
  return Value(std::move(out));
}

Value oracle_int_div(const Value& x, const Value& y) {
  require_nonneg(x, "int_div dividend");
  if (y <= Value(0)) throw DomainError("int_div divisor must be positive");
  mpz_class out;
  mpz_fdiv_q(out.get_mpz_t(), x.raw().get_mpz_t(), y.raw().get_mpz_t());
  return Value(std::move(out));
}

Value oracle_suffix(const Value& x, const Value& y) {
  mpz_class out;
  mpz_fdiv_r_2exp(out.get_mpz_t(), x.raw().get_mpz_t(),
                  static_cast<mp_bitcnt_t>(y.bit_length()));
  return Value(std::move(out));
}

Value oracle_pow2_length(const Value& x) { return pow2(length(x)); }

Value oracle_pow2_lenprod(const Value& x, const Value& y) {
  return pow2(length(x) * length(y));
}

Value oracle_prefix_min(const ScalarFn& f, const Value& x) {
  Value best = f(Value(0));
  for (Value t(1); t <= x; ++t) {
    Value v = f(t);
    if (v < best) best = v;
  }
  return best;
}

Value oracle_bsum(const ParamFn& g, const Value& x, const Valuation& y) {
  Value acc(0);
  for (Value t(0); t < x; ++t) acc += g(t, y);
  return acc;
}

Value oracle_bprod(const ParamFn& g, const Value& x, const Valuation& y) {
  Value acc(1);
  for (Value t(0); t < x; ++t) acc *= g(t, y);
  return acc;
}

// ---------------------------------------------------------------------------
// Registry

namespace {

Value arg_value(const std::vector<std::string>& args, std::size_t i) {
  return Value::parse(args.at(i));
}

// A one-variable function given as expression text.
ScalarFn arg_fn(const std::vector<std::string>& args, std::size_t i, const char* var) {
  Expr e = parse_expr(args.at(i));
  validate_terms(e, {std::string(var)});
  return [e, var = std::string(var)](const Value& v) {
    Valuation env;
    env.set(var, v);
    return e.eval(env);
  };
}

ParamFn arg_param_fn(const std::vector<std::string>& args, std::size_t i, const char* var) {
  ScalarFn f = arg_fn(args, i, var);
  return [f](const Value& v, const Valuation&) { return f(v); };
}

const std::vector<NamedProgram>& build_registry() {
  static const std::vector<NamedProgram> programs = {
      {"prefix_min", "prefix_min <f(y)> <x>",
       "iterate the running-minimum recurrence for x steps",
       2,
       [](const std::vector<std::string>& a) {
         return StdlibResult{prefix_min(arg_fn(a, 0, "y"), arg_value(a, 1)), {}};
       },
       [](const std::vector<std::string>& a) {
         return oracle_prefix_min(arg_fn(a, 0, "y"), arg_value(a, 1));
       }},
      {"floor_sqrt", "floor_sqrt <x>",
       "length-driven dichotomy, then a one-off correction",
       1,
       [](const std::vector<std::string>& a) {
         StdlibResult r;
         r.value = floor_sqrt(arg_value(a, 0), &r.trace);
         return r;
       },
       [](const std::vector<std::string>& a) { return oracle_floor_sqrt(arg_value(a, 0)); }},
      {"int_div", "int_div <x> <y>",
       "length-driven dichotomy, then a one-off correction",
       2,
       [](const std::vector<std::string>& a) {
         StdlibResult r;
         r.value = int_div(arg_value(a, 0), arg_value(a, 1), &r.trace);
         return r;
       },
       [](const std::vector<std::string>& a) {
         return oracle_int_div(arg_value(a, 0), arg_value(a, 1));
       }},
      {"suffix", "suffix <x> <y>",
       "length-ODE stripping one leading bit position per step",
       2,
       [](const std::vector<std::string>& a) {
         StdlibResult r;
         r.value = suffix(arg_value(a, 0), arg_value(a, 1), &r.trace);
         return r;
       },
       [](const std::vector<std::string>& a) {
         return oracle_suffix(arg_value(a, 0), arg_value(a, 1));
       }},
      {"pow2_length", "pow2_length <x>",
       "doubling length-ODE, one step per bit of x",
       1,
       [](const std::vector<std::string>& a) {
         StdlibResult r;
         r.value = pow2_length(arg_value(a, 0), &r.trace);
         return r;
       },
       [](const std::vector<std::string>& a) { return oracle_pow2_length(arg_value(a, 0)); }},
      {"pow2_lenprod", "pow2_lenprod <x> <y>",
       "length-ODE scaling by 2^length(y) - 1 each step",
       2,
       [](const std::vector<std::string>& a) {
         StdlibResult r;
         r.value = pow2_lenprod(arg_value(a, 0), arg_value(a, 1), &r.trace);
         return r;
       },
       [](const std::vector<std::string>& a) {
         return oracle_pow2_lenprod(arg_value(a, 0), arg_value(a, 1));
       }},
      {"bsum", "bsum <g(z)> <x>",
       "closed-form solution of the accumulating linear system",
       2,
       [](const std::vector<std::string>& a) {
         return StdlibResult{bsum(arg_param_fn(a, 0, "z"), arg_value(a, 1)), {}};
       },
       [](const std::vector<std::string>& a) {
         return oracle_bsum(arg_param_fn(a, 0, "z"), arg_value(a, 1));
       }},
      {"bprod", "bprod <g(z)> <x>",
       "closed-form solution of the multiplying linear system",
       2,
       [](const std::vector<std::string>& a) {
         return StdlibResult{bprod(arg_param_fn(a, 0, "z"), arg_value(a, 1)), {}};
       },
       [](const std::vector<std::string>& a) {
         return oracle_bprod(arg_param_fn(a, 0, "z"), arg_value(a, 1));
       }},
  };
  return programs;
}

}  // namespace

const std::vector<NamedProgram>& registry() { return build_registry(); }

const NamedProgram* find_program(std::string_view name) {
  for (const NamedProgram& p : registry())
    if (p.name == name) return &p;
  return nullptr;
}

}  // namespace odecalc::stdprog
