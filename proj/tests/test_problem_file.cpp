#include <doctest.h>

#include <cmath>

#include "problem_file.hpp"

using namespace odecalc;

namespace {
const std::string kShare = ODECALC_SHARE_DIR "/problems/";
}

TEST_CASE("shipped files load and evaluate") {
  ProblemFile pow2len = load_problem_file(kShare + "pow2_length.ode");
  CHECK(pow2len.problem.dim == 1);
  CHECK(pow2len.arity == 0);
  CHECK(eval_lode_compressed(pow2len.problem, Value(5), {})[0] == Value(8));

  ProblemFile lenprod = load_problem_file(kShare + "pow2_lenprod.ode");
  CHECK(lenprod.arity == 1);
  Valuation y;
  y.set("y.0", Value(3));
  CHECK(eval_lode_compressed(lenprod.problem, Value(6), y)[0] == Value(64));

  ProblemFile sign = load_problem_file(kShare + "sign.ode");
  CHECK(sign.identity_driver);
  CHECK(eval_lode_compressed(sign.problem, Value(0), {})[0] == Value(0));
  CHECK(eval_lode_compressed(sign.problem, Value(17), {})[0] == Value(1));
}

TEST_CASE("nested problem references") {
  ProblemFile nested = load_problem_file(kShare + "pow2_lenprod_nested.ode");
  ProblemFile builtin = load_problem_file(kShare + "pow2_lenprod.ode");
  for (long x : {0L, 1L, 6L, 100L})
    for (long yv : {0L, 3L, 12L}) {
      Valuation y;
      y.set("y.0", Value(yv));
      CHECK(eval_lode_compressed(nested.problem, Value(x), y) ==
            eval_lode_compressed(builtin.problem, Value(x), y));
    }
}

TEST_CASE("dichotomy files answer directly") {
  ProblemFile sqrt_file = load_problem_file(kShare + "floor_sqrt.ode");
  for (long x : {0L, 1L, 2L, 10L, 15L, 16L, 99L, 1000000L}) {
    Valuation y;
    y.set("y.0", Value(x));
    long expected = static_cast<long>(std::sqrt(static_cast<double>(x)));
    while ((expected + 1) * (expected + 1) <= x) ++expected;
    while (expected * expected > x) --expected;
    CHECK(eval_lode_compressed(sqrt_file.problem, Value(x), y)[0] == Value(expected));
  }

  ProblemFile div_file = load_problem_file(kShare + "int_div.ode");
  for (long x : {0L, 10L, 99L, 4096L})
    for (long d : {1L, 3L, 7L}) {
      Valuation y;
      y.set("y.0", Value(x));
      y.set("y.1", Value(d));
      CHECK(eval_lode_compressed(div_file.problem, Value(x), y)[0] == Value(x / d));
    }

  ProblemFile suffix_file = load_problem_file(kShare + "suffix.ode");
  Valuation y;
  y.set("y.0", Value(53));
  y.set("y.1", Value(5));
  CHECK(eval_lode_compressed(suffix_file.problem, Value(53), y)[0] == Value(5));
}

TEST_CASE("format errors") {
  CHECK_THROWS_AS(parse_problem_text("driver length\ninit 1\nrhs f.0\n", "."), SyntaxError);
  CHECK_THROWS_AS(parse_problem_text("dim 1\ninit 1\nrhs f.0\n", "."), SyntaxError);
  CHECK_THROWS_AS(parse_problem_text("dim 1\ndriver length\ninit 1\n", "."), SyntaxError);
  CHECK_THROWS_AS(
      parse_problem_text("dim 2\ndriver length\ninit 1\nrhs f.0\nrhs f.1\n", "."),
      SyntaxError);
  CHECK_THROWS_AS(
      parse_problem_text("dim 1\ndriver length\ninit 1\nrhs f.0\nwhat 3\n", "."),
      SyntaxError);
  // unknown term in a right-hand side
  CHECK_THROWS_AS(parse_problem_text("dim 1\ndriver length\ninit 1\nrhs g.0\n", "."),
                  UnboundTermError);
  // f.1 out of range for dim 1
  CHECK_THROWS_AS(parse_problem_text("dim 1\ndriver length\ninit 1\nrhs f.1\n", "."),
                  UnboundTermError);
  // init may not read x
  CHECK_THROWS_AS(parse_problem_text("dim 1\ndriver length\ninit x\nrhs f.0\n", "."),
                  SyntaxError);
  // duplicate aux
  CHECK_THROWS_AS(parse_problem_text("dim 1\ndriver length\ninit 1\nrhs f.0\n"
                                     "aux p = 1\naux p = 2\n",
                                     "."),
                  SyntaxError);
  // missing file
  CHECK_THROWS_AS(load_problem_file(kShare + "does_not_exist.ode"), IoError);
}

TEST_CASE("arity is inferred from the highest parameter") {
  ProblemFile p = parse_problem_text(
      "dim 1\ndriver length\ninit y.2\nrhs f.0 + y.2 - y.2\n", ".");
  CHECK(p.arity == 3);
}

TEST_CASE("problem text renders as a loadable file") {
  ProblemText t;
  t.dim = 2;
  t.driver = "length";
  t.init = {"0", "y.0"};
  t.rhs = {"f.1", "f.0 + 1"};
  t.aux = {{"p", "pow2(length(y.0))"}};
  t.comments = {"demo"};
  std::string text = render_problem_text(t);
  ProblemFile back = parse_problem_text(text, ".");
  CHECK(back.problem.dim == 2);
  CHECK(back.arity == 1);
  CHECK(back.aux_names == std::vector<std::string>{"h.p"});
}
