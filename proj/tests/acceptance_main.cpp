// Acceptance suite: one line per criterion, exit status 0 only if all
// pass. Each criterion states its tolerance inline (all checks are
// exact equalities; the only tolerances are step counts and wall-clock
// budgets).
#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "calculus.hpp"
#include "oracles.hpp"
#include "problem_file.hpp"
#include "rm.hpp"
#include "stdlib_programs.hpp"

using namespace odecalc;
namespace ot = odecalc::testing;

namespace {

int g_failures = 0;

struct Criterion {
  const char* name;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;

  explicit Criterion(const char* name_) : name(name_) {}

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }

  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  void finish(double budget_seconds = 0) {
    double elapsed = seconds();
    if (budget_seconds > 0 && elapsed >= budget_seconds)
      require(false, "runtime " + std::to_string(elapsed) + "s over budget");
    if (ok) {
      std::printf("PASS %s (%.2fs)\n", name, elapsed);
    } else {
      std::printf("FAIL %s: %s (%.2fs)\n", name, detail.c_str(), elapsed);
      ++g_failures;
    }
    std::fflush(stdout);
  }
};

SequenceFn random_poly(std::mt19937_64& rng, int degree) {
  std::vector<long> coeffs;
  for (int i = 0; i <= degree; ++i) coeffs.push_back(ot::random_value(rng, -5, 5).to_long());
  return scalar_seq([coeffs](const Value& x) {
    Value acc(0), p(1);
    for (long c : coeffs) {
      acc += Value(c) * p;
      p *= x;
    }
    return acc;
  });
}

// Criterion 1: the calculus identities hold exactly on >= 1000
// randomized cases each, within 5 seconds.
void criterion_calculus() {
  Criterion crit("criterion-1 calculus identities");
  std::mt19937_64 rng(101);
  Valuation env;

  for (int i = 0; i < 1000; ++i) {
    SequenceFn f = random_poly(rng, 3);
    long a = ot::random_value(rng, 0, 64).to_long();
    long b = ot::random_value(rng, 0, 64).to_long();
    if (a > b) std::swap(a, b);
    SequenceFn df = [&f](const Value& x, const Valuation& e) { return derivative(f, x, e); };
    crit.require(integral(df, Value(a), Value(b), env)[0] ==
                     f(Value(b), env)[0] - f(Value(a), env)[0],
                 "fundamental theorem failed");
    if (!crit.ok) break;
  }

  for (int i = 0; i < 1000 && crit.ok; ++i) {
    SequenceFn f = random_poly(rng, 2), g = random_poly(rng, 2);
    Value x = ot::random_value(rng, 0, 64);
    SequenceFn prod = [&](const Value& v, const Valuation& e) {
      return ValueVector{f(v, e)[0] * g(v, e)[0]};
    };
    Value lhs = derivative(prod, x, env)[0];
    Value form1 =
        derivative(f, x, env)[0] * g(x + Value(1), env)[0] + f(x, env)[0] * derivative(g, x, env)[0];
    Value form2 =
        f(x + Value(1), env)[0] * derivative(g, x, env)[0] + derivative(f, x, env)[0] * g(x, env)[0];
    crit.require(lhs == form1 && lhs == form2, "product rule failed");
  }

  for (int i = 0; i < 1000 && crit.ok; ++i) {
    long m = 1 + static_cast<long>(rng() % 8);
    long x = static_cast<long>(rng() % 65);
    SequenceFn fp = scalar_seq([m](const Value& v) { return falling_power(v, Value(m)); });
    crit.require(derivative(fp, Value(x), env)[0] ==
                     Value(m) * falling_power(Value(x), Value(m - 1)),
                 "falling power rule failed at m=" + std::to_string(m) +
                     " x=" + std::to_string(x));
  }

  for (int i = 0; i < 1000 && crit.ok; ++i) {
    SequenceFn u = random_poly(rng, 2);
    long x = static_cast<long>(rng() % 33);
    SequenceFn fe = [&u](const Value& v, const Valuation& e) {
      return ValueVector{falling_exponential(u, v, e)};
    };
    crit.require(derivative(fe, Value(x), env)[0] ==
                     derivative(u, Value(x), env)[0] * falling_exponential(u, Value(x), env),
                 "falling exponential rule failed at x=" + std::to_string(x));
  }

  crit.finish(5.0);
}

// Criterion 2: the closed-form solution equals forward iteration,
// exactly, on 200 randomized systems of dimension <= 3 up to x <= 30,
// including state-dependent coefficients, within 10 seconds.
void criterion_linear_solver() {
  Criterion crit("criterion-2 linear solver vs iteration");
  std::mt19937_64 rng(102);

  for (int trial = 0; trial < 200 && crit.ok; ++trial) {
    std::size_t dim = 1 + rng() % 3;
    std::vector<std::string> base_terms{"x", "y.0"};
    std::vector<std::string> f_terms;
    for (std::size_t i = 0; i < dim; ++i) f_terms.push_back(f_term(i));

    auto coeff = [&](bool allow_bare_state) {
      Expr e = ot::random_expr(rng, base_terms, 2);
      if (rng() % 2) {
        Expr gated = Expr::sg(Expr::sub(Expr::term(f_terms[rng() % dim]),
                                        Expr::constant(ot::random_value(rng, -3, 3))));
        e = rng() % 2 ? Expr::add(std::move(e), gated) : Expr::mul(std::move(e), gated);
      }
      if (allow_bare_state && rng() % 3 == 0)
        e = Expr::add(std::move(e), Expr::term(f_terms[rng() % dim]));
      return e;
    };

    LinearOdeSystem sys;
    sys.dim = dim;
    std::vector<Value> g0;
    for (std::size_t i = 0; i < dim; ++i) g0.push_back(ot::random_value(rng, -5, 5));
    sys.init = [g0](const Valuation&) { return ValueVector(g0); };
    sys.a = ExprMatrix(dim, dim);
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c) sys.a.at(r, c) = coeff(false);
    for (std::size_t r = 0; r < dim; ++r) sys.b.push_back(coeff(true));

    Valuation y;
    y.set("y.0", ot::random_value(rng, -5, 5));

    Ivp direct{dim, sys.init,
               [&sys](const ValueVector& f, const Value& x, const Valuation& e) {
                 Valuation full = e;
                 full.set(kXTerm, x);
                 for (std::size_t i = 0; i < sys.dim; ++i) full.set(f_term(i), f[i]);
                 ValueVector out(sys.dim);
                 for (std::size_t r = 0; r < sys.dim; ++r) {
                   Value acc = sys.b[r].eval(full);
                   for (std::size_t c = 0; c < sys.dim; ++c)
                     acc += sys.a.at(r, c).eval(full) * f[c];
                   out[r] = std::move(acc);
                 }
                 return out;
               }};

    long x = static_cast<long>(rng() % 31);
    crit.require(solve_linear_closed(sys, Value(x), y) == iterate_ivp(direct, Value(x), y),
                 "closed form diverged from iteration at trial " + std::to_string(trial));
  }
  crit.finish(10.0);
}

// Criterion 3: jump-compressed evaluation equals the naive recurrence
// (sampled up to 2^16, step-count law exact everywhere up to 2^20), and
// 2^length(x) at x = 2^20 takes at most 21 right-hand-side evaluations.
void criterion_jump_compression() {
  Criterion crit("criterion-3 jump compression");
  const LOdeProblem& pow2p = stdprog::pow2_length_problem();
  const LOdeProblem& sufp = stdprog::suffix_problem();
  Valuation no_params;

  for (std::uint64_t x : {0ull, 1ull, 2ull, 3ull, 100ull, 4095ull, 4096ull, 40000ull, 65535ull, 65536ull}) {
    crit.require(eval_lode_compressed(pow2p, Value(static_cast<unsigned long>(x)), no_params) ==
                     ot::iterate_lode_naive(pow2p, x, no_params),
                 "compressed != naive for the doubling system at x=" + std::to_string(x));
    Valuation ys;
    ys.set("y.0", Value(static_cast<unsigned long>(x)));
    ys.set("y.1", Value(5));
    crit.require(eval_lode_compressed(sufp, Value(static_cast<unsigned long>(x)), ys) ==
                     ot::iterate_lode_naive(sufp, x, ys),
                 "compressed != naive for the suffix system at x=" + std::to_string(x));
  }

  std::mt19937_64 rng(103);
  for (int i = 0; i < 40 && crit.ok; ++i) {
    Value x = ot::random_bits(rng, 1 + rng() % 21);  // up to 2^20
    EvalTrace trace;
    eval_lode_compressed(pow2p, x, no_params, &trace);
    crit.require(Value(static_cast<unsigned long>(trace.steps.size())) == length(x) - Value(1),
                 "step count differs from length(x) - 1 at x=" + x.str());
  }

  EvalTrace trace;
  ValueVector v = eval_lode_compressed(pow2p, pow2(Value(20)), no_params, &trace);
  crit.require(v[0] == pow2(Value(21)), "2^length(2^20) is not 2^21");
  crit.require(trace.steps.size() <= 21, "more than 21 steps at x = 2^20");
  crit.finish();
}

// Criterion 4: the one-line sign system reproduces sg on [0, 1000].
void criterion_sign_ivp() {
  Criterion crit("criterion-4 sign function system");
  Ivp s = stdprog::sign_ivp();
  for (long x = 0; x <= 1000 && crit.ok; ++x)
    crit.require(iterate_ivp(s, Value(x), {})[0] == sg(Value(x)),
                 "sign mismatch at x=" + std::to_string(x));
  crit.finish();
}

// Criterion 5: the degree analyzer reproduces the reference verdicts
// and rejects the quadratic right-hand side.
void criterion_degree_analyzer() {
  Criterion crit("criterion-5 degree analyzer verdicts");

  Expr e1 = parse_expr("x * sg((x * x - z) * y) + y * y * y");
  crit.require(e1.degree("x") == Value(1), "not linear in x");
  crit.require(e1.degree("z") == Value(0), "not constant in z");
  crit.require(e1.degree("y") == Value(3), "unexpectedly linear in y");

  Expr e2 = parse_expr("z + (1 - sg(x)) * (1 - sg(-x)) * (y - z)");
  crit.require(e2.degree("x") == Value(0) && e2.degree("y") == Value(1) &&
                   e2.degree("z") == Value(1),
               "selector expression verdicts wrong");

  ExprMatrix m(2, 2);
  m.at(0, 0) = parse_expr("sg(x - y)");
  m.at(0, 1) = parse_expr("sg(x) * y");
  m.at(1, 0) = parse_expr("sg(z * z * z * z * z - x * x * x)");
  m.at(1, 1) = parse_expr("z");
  bool linear_y = true, linear_z = true;
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c) {
      linear_y = linear_y && m.at(r, c).degree("y") <= Value(1);
      linear_z = linear_z && m.at(r, c).degree("z") <= Value(1);
    }
  crit.require(is_essentially_constant(m, "x") && linear_y && linear_z,
               "matrix verdicts wrong");

  bool rejected = false;
  try {
    linear_decompose({parse_expr("f * f - f")}, {"f"});
  } catch (const NotEssentiallyLinearError&) {
    rejected = true;
  }
  crit.require(rejected, "quadratic right-hand side was not rejected");
  crit.finish();
}

// Criterion 6: compiled systems bisimulate the machine exactly for 100
// random inputs per program and every t <= 200, and always pass the
// linearity analysis.
void criterion_bisimulation() {
  Criterion crit("criterion-6 register machine bisimulation");
  std::mt19937_64 rng(106);
  const std::string base = ODECALC_SHARE_DIR "/rm/";
  const std::vector<std::string> programs = {"add.rm", "max.rm", "trunc_sub.rm",
                                             "copy.rm", "busy.rm"};
  for (const std::string& name : programs) {
    rm::RegisterProgram prog = rm::load_program(base + name);
    rm::CompiledSystem c = rm::compile(prog);
    try {
      check_linear(c.problem);
    } catch (const NotEssentiallyLinearError&) {
      crit.require(false, name + " failed the linearity analysis");
    }
    for (int trial = 0; trial < 100 && crit.ok; ++trial) {
      std::vector<Value> inputs;
      for (int i = 0; i + 1 < prog.register_count; ++i)
        inputs.push_back(ot::random_bits(rng, 1 + rng() % 32));
      rm::MachineState ms = rm::initial_state(prog, inputs);
      ValueVector os = rm::compiled_initial(c, inputs);
      for (int t = 0; t <= 200; ++t) {
        bool same = os[0] == ms.inst;
        for (int j = 0; same && j < prog.register_count; ++j)
          same = os[j + 1] == ms.registers[j];
        if (!same) {
          crit.require(false, name + " diverged at t=" + std::to_string(t));
          break;
        }
        ms = rm::step(prog, ms);
        os = rm::compiled_step(c, os);
      }
    }
    if (!crit.ok) break;
  }
  crit.finish();
}

// Criterion 7: the packaged programs agree exactly with their oracles
// on dense small sweeps and 100 random 60-bit inputs, taking at most
// length(x) + 2 steps each, within 60 seconds.
void criterion_stdlib_sweep() {
  Criterion crit("criterion-7 stdlib oracle sweep");
  std::mt19937_64 rng(107);

  for (long x = 0; x <= 10000 && crit.ok; ++x) {
    Value vx(x);
    if (stdprog::floor_sqrt(vx) != stdprog::oracle_floor_sqrt(vx))
      crit.require(false, "floor_sqrt mismatch at x=" + std::to_string(x));
  }
  for (long x = 0; x <= 10000 && crit.ok; ++x) {
    Value vx(x);
    for (long d = 1; d <= 100; ++d) {
      Value vd(d);
      if (stdprog::int_div(vx, vd) != stdprog::oracle_int_div(vx, vd)) {
        crit.require(false, "int_div mismatch at " + std::to_string(x) + "/" +
                                std::to_string(d));
        break;
      }
    }
  }

  for (int i = 0; i < 100 && crit.ok; ++i) {
    Value x = ot::random_bits(rng, 60);
    crit.require(stdprog::floor_sqrt(x) == stdprog::oracle_floor_sqrt(x),
                 "floor_sqrt mismatch at random x=" + x.str());
    Value d = ot::random_bits(rng, 59) + Value(1);
    crit.require(stdprog::int_div(x, d) == stdprog::oracle_int_div(x, d),
                 "int_div mismatch at random input");
    Value y = ot::random_bits(rng, 1 + rng() % 60);
    crit.require(stdprog::suffix(x, y) == stdprog::oracle_suffix(x, y),
                 "suffix mismatch at random input");
  }
  for (long x = 0; x <= 500 && crit.ok; ++x)
    for (long y : {0L, 1L, 5L, 300L})
      crit.require(stdprog::suffix(Value(x), Value(y)) ==
                       stdprog::oracle_suffix(Value(x), Value(y)),
                   "suffix mismatch on the sweep");

  stdprog::ParamFn g1 = [](const Value& z, const Valuation&) { return z; };
  stdprog::ParamFn g2 = [](const Value& z, const Valuation&) { return z + Value(1); };
  stdprog::ParamFn g3 = [](const Value& z, const Valuation&) {
    return Value(2) * z - Value(5);
  };
  for (long x = 0; x <= 100 && crit.ok; ++x) {
    for (const auto& g : {g1, g2, g3}) {
      crit.require(stdprog::bsum(g, Value(x)) == stdprog::oracle_bsum(g, Value(x)),
                   "bsum mismatch at x=" + std::to_string(x));
      crit.require(stdprog::bprod(g, Value(x)) == stdprog::oracle_bprod(g, Value(x)),
                   "bprod mismatch at x=" + std::to_string(x));
    }
  }

  // step efficiency, read from traces on a sample
  for (long x : {1L, 2L, 10L, 9999L, 65536L, 1000000L}) {
    EvalTrace t1, t2, t3, t4;
    stdprog::floor_sqrt(Value(x), &t1);
    stdprog::int_div(Value(x), Value(7), &t2);
    stdprog::suffix(Value(x), Value(9), &t3);
    stdprog::pow2_length(Value(x), &t4);
    std::uint64_t budget = length(Value(x)).to_u64() + 2;
    crit.require(t1.steps.size() <= budget && t2.steps.size() <= budget &&
                     t3.steps.size() <= budget && t4.steps.size() <= budget,
                 "a stdlib run exceeded length(x) + 2 steps at x=" + std::to_string(x));
  }
  crit.finish(60.0);
}

// Criterion 8: the per-step growth bound holds along guarded runs of
// the criterion-3/-7 systems, checked independently from the recorded
// traces, and the planted quadratic system trips the guard within 6
// steps.
void criterion_growth_guard() {
  Criterion crit("criterion-8 growth guard");

  // Recompute the coefficient sizes from the trace and re-assert the
  // per-step inequality: bits(t+1) <= bits(t) + coeff_bits + 1.
  auto recheck = [&](const LOdeProblem& p, const Value& x, const Valuation& y) {
    LinearDecomposition d = check_linear(p);
    GuardedResult r = guarded_eval(p, x, y, {}, &d);
    ValueVector state = p.init(y);
    Valuation env = y;
    for (std::size_t i = 0; i < p.dim; ++i) env.set(f_term(i), state[i]);
    for (const TraceStep& s : r.trace.steps) {
      env.set(kXTerm, s.alpha);
      for (const NamedAux& a : p.aux) env.set(a.term, a.fn(s.alpha, y));
      for (std::size_t i = 0; i < p.dim; ++i) env.set(f_term(i), state[i]);
      std::size_t coeff_bits = 1, before = 1, after = 1;
      for (std::size_t rr = 0; rr < p.dim; ++rr) {
        for (std::size_t cc = 0; cc < p.dim; ++cc)
          coeff_bits = std::max(coeff_bits, d.q1.at(rr, cc).eval(env).bit_length());
        coeff_bits = std::max(coeff_bits, d.q2[rr].eval(env).bit_length());
        before = std::max(before, state[rr].bit_length());
        after = std::max(after, s.value[rr].bit_length());
      }
      if (after > before + coeff_bits + 1) return false;
      state = s.value;
    }
    return true;
  };

  Valuation no_params;
  crit.require(recheck(stdprog::pow2_length_problem(), pow2(Value(20)), no_params),
               "doubling system violates the per-step bound");
  {
    Valuation y;
    y.set("y.0", Value(999983));
    crit.require(recheck(stdprog::floor_sqrt_problem(), Value(999983), y),
                 "dichotomy violates the per-step bound");
  }
  {
    Valuation y;
    y.set("y.0", Value(987654321));
    y.set("y.1", Value(97));
    crit.require(recheck(stdprog::int_div_problem(), Value(987654321), y),
                 "division walk violates the per-step bound");
  }
  {
    Valuation y;
    y.set("y.0", Value(123456789));
    y.set("y.1", Value(100));
    crit.require(recheck(stdprog::suffix_problem(), Value(123456789), y),
                 "suffix system violates the per-step bound");
  }

  // Compiled machines under guard.
  {
    rm::CompiledSystem add =
        rm::compile(rm::load_program(std::string(ODECALC_SHARE_DIR "/rm/") + "add.rm"));
    Valuation y;
    y.set(y_term(0), Value(123456));
    y.set(y_term(1), Value(987654));
    bool ran = false;
    try {
      guarded_eval(add.problem, pow2(Value(16)), y);
      ran = true;
    } catch (const Error&) {
    }
    crit.require(ran, "guarded run of the compiled adder failed");
  }

  // The planted quadratic system must trip within 6 steps.
  LOdeProblem planted;
  planted.dim = 1;
  planted.driver = Driver::length();
  planted.init = [](const Valuation&) { return ValueVector{Value(2)}; };
  planted.rhs = {parse_expr("f.0 * f.0 - f.0")};
  planted.aux = {NamedAux{"h.c", [](const Value&, const Valuation&) { return Value(2); }}};
  LinearDecomposition claimed;
  claimed.pivots = {f_term(0)};
  claimed.q1 = ExprMatrix(1, 1);
  claimed.q1.at(0, 0) = parse_expr("h.c - 1");
  claimed.q2 = {Expr::constant(Value(0))};
  bool tripped = false;
  std::uint64_t at_step = 99;
  try {
    guarded_eval(planted, pow2(Value(20)), no_params, {}, &claimed);
  } catch (const GrowthBoundViolatedError& e) {
    tripped = true;
    at_step = e.step;
  }
  crit.require(tripped && at_step <= 6, "planted quadratic system not caught in 6 steps");

  crit.finish();
}

}  // namespace

int main() {
  criterion_calculus();
  criterion_linear_solver();
  criterion_jump_compression();
  criterion_sign_ivp();
  criterion_degree_analyzer();
  criterion_bisimulation();
  criterion_stdlib_sweep();
  criterion_growth_guard();
  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d criterion(s) failed\n", g_failures);
  return 1;
}
