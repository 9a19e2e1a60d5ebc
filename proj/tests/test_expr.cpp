#include <doctest.h>

#include <random>

#include "expr.hpp"
#include "oracles.hpp"

using namespace odecalc;
namespace ot = odecalc::testing;

namespace {

Valuation env3(long x, long y, long z) {
  Valuation env;
  env.set("x", Value(x));
  env.set("y", Value(y));
  env.set("z", Value(z));
  return env;
}

}  // namespace

TEST_CASE("parsing") {
  Expr e = parse_expr("sg(x) * y + 3");
  Expr expected = Expr::add(Expr::mul(Expr::sg(Expr::term("x")), Expr::term("y")),
                            Expr::constant(Value(3)));
  CHECK(e.structurally_equal(expected));

  Expr minus = parse_expr("x - -2");
  CHECK(minus.structurally_equal(Expr::sub(Expr::term("x"), Expr::constant(Value(-2)))));

  CHECK_THROWS_AS(parse_expr("sg x"), SyntaxError);
  CHECK_THROWS_AS(parse_expr("x +"), SyntaxError);
  CHECK_THROWS_AS(parse_expr("(x"), SyntaxError);
  CHECK_THROWS_AS(parse_expr("x ^ 2"), SyntaxError);
  CHECK_THROWS_AS(parse_expr("2 3"), SyntaxError);

  // location reporting
  try {
    parse_expr("x +\n* y");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& err) {
    CHECK(err.line == 2);
    CHECK(err.column == 1);
  }
}

TEST_CASE("evaluation") {
  Expr e = parse_expr("x * sg((x * x - z) * y) + y * y * y");
  CHECK(e.eval(env3(2, 1, 1)) == Value(3));

  Expr cond_e = parse_expr("z + (1 - sg(x)) * (1 - sg(-x)) * (y - z)");
  CHECK(cond_e.eval(env3(0, 4, 9)) == Value(4));
  CHECK(cond_e.eval(env3(1, 4, 9)) == Value(9));

  Valuation empty;
  CHECK(Expr::constant(Value(7)).eval(empty) == Value(7));
  CHECK_THROWS_AS(parse_expr("nope + 1").eval(empty), UnboundTermError);
}

TEST_CASE("degree rules") {
  Expr e = parse_expr("x * sg((x * x - z) * y) + y * y * y");
  CHECK(e.degree("x") == Value(1));
  CHECK(e.degree("z") == Value(0));
  CHECK(e.degree("y") == Value(3));

  Expr cond_e = parse_expr("z + (1 - sg(x)) * (1 - sg(-x)) * (y - z)");
  CHECK(cond_e.degree("x") == Value(0));
  CHECK(cond_e.degree("y") == Value(1));
  CHECK(cond_e.degree("z") == Value(1));

  // a compound slot name is a term like any other
  Expr slot = parse_expr("sg(x * x - z) * z * z + h.p");
  CHECK(slot.degree("h.p") == Value(1));
  CHECK(slot.degree("x") == Value(0));
  CHECK(is_essentially_constant(slot, "x"));
  CHECK(!is_essentially_constant(parse_expr("x + 1"), "x"));
}

TEST_CASE("matrix verdicts") {
  ExprMatrix m(2, 2);
  m.at(0, 0) = parse_expr("sg(x - y)");
  m.at(0, 1) = parse_expr("sg(x) * y");
  m.at(1, 0) = parse_expr("sg(z * z * z * z * z - x * x * x)");
  m.at(1, 1) = parse_expr("z");
  CHECK(is_essentially_constant(m, "x"));
  CHECK(!is_essentially_constant(m, "y"));
  CHECK(!is_essentially_constant(m, "z"));
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c) {
      CHECK(m.at(r, c).degree("y") <= Value(1));
      CHECK(m.at(r, c).degree("z") <= Value(1));
    }
}

TEST_CASE("linear decomposition") {
  // f * (g - 1) against pivot f
  LinearDecomposition d = linear_decompose({parse_expr("f * (g - 1)")}, {"f"});
  CHECK(d.q1.at(0, 0).render() == "g - 1");
  CHECK(d.q2[0].render() == "0");

  CHECK_THROWS_AS(linear_decompose({parse_expr("f * f - f")}, {"f"}),
                  NotEssentiallyLinearError);
  try {
    linear_decompose({parse_expr("f * f - f")}, {"f"});
  } catch (const NotEssentiallyLinearError& e) {
    CHECK(e.component == 0);
    CHECK(e.term == "f");
    CHECK(e.witness == "f * f");
  }

  LinearDecomposition blocked = linear_decompose({parse_expr("sg(f) * h + 3")}, {"f"});
  CHECK(blocked.q1.at(0, 0).render() == "0");
  CHECK(blocked.q2[0].render() == "sg(f) * h + 3");

  // products of two pivots are rejected even at individual degree 1
  CHECK_THROWS_AS(linear_decompose({parse_expr("f * g")}, {"f", "g"}),
                  NotEssentiallyLinearError);
}

TEST_CASE("decomposition reconstructs the input") {
  std::mt19937_64 rng(11);
  std::vector<std::string> terms{"f", "g", "u", "v"};
  std::vector<std::string> pivots{"f", "g"};
  int decomposed = 0;
  while (decomposed < 12) {
    Expr e = ot::random_expr(rng, terms, 4);
    LinearDecomposition d;
    try {
      d = linear_decompose({e}, pivots);
    } catch (const NotEssentiallyLinearError&) {
      continue;
    }
    ++decomposed;
    CHECK(d.q1.at(0, 0).degree("f") == Value(0));
    CHECK(d.q1.at(0, 0).degree("g") == Value(0));
    CHECK(d.q1.at(0, 1).degree("f") == Value(0));
    CHECK(d.q1.at(0, 1).degree("g") == Value(0));
    CHECK(d.q2[0].degree("f") == Value(0));
    CHECK(d.q2[0].degree("g") == Value(0));
    for (int trial = 0; trial < 1000; ++trial) {
      Valuation env;
      for (const std::string& t : terms) env.set(t, ot::random_value(rng, -50, 50));
      Value expected = e.eval(env);
      Value got = d.q1.at(0, 0).eval(env) * env.get("f") +
                  d.q1.at(0, 1).eval(env) * env.get("g") + d.q2[0].eval(env);
      CHECK(expected == got);
    }
  }
}

TEST_CASE("render round-trips") {
  std::mt19937_64 rng(12);
  std::vector<std::string> terms{"x", "y.0", "f.1", "h.p"};
  for (int trial = 0; trial < 300; ++trial) {
    Expr e = ot::random_expr(rng, terms, 5);
    Expr back = parse_expr(e.render());
    CHECK(back.structurally_equal(e));
  }
}

TEST_CASE("sign keeps evaluations polynomially bounded") {
  // replacing every sg node by the constant 1 bounds the magnitude
  std::mt19937_64 rng(13);
  std::vector<std::string> terms{"x", "y"};
  auto bound = [](const Expr& e, const Valuation& env) {
    auto rec = [](const Expr& node, const Valuation& en, auto&& self) -> Value {
      switch (node.kind()) {
        case ExprKind::Const:
          return node.value().is_negative() ? -node.value() : node.value();
        case ExprKind::Term: {
          Value v = en.get(node.name());
          return v.is_negative() ? -v : v;
        }
        case ExprKind::Add:
        case ExprKind::Sub:
          return self(node.lhs(), en, self) + self(node.rhs(), en, self);
        case ExprKind::Mul:
          return self(node.lhs(), en, self) * self(node.rhs(), en, self);
        case ExprKind::Sg:
          return Value(1);
      }
      return Value(0);
    };
    return rec(e, env, rec);
  };
  for (int trial = 0; trial < 200; ++trial) {
    Expr e = ot::random_expr(rng, terms, 5);
    Valuation env;
    env.set("x", ot::random_value(rng, -100, 100));
    env.set("y", ot::random_value(rng, -100, 100));
    Value v = e.eval(env);
    if (v.is_negative()) v = -v;
    CHECK(v <= bound(e, env));
  }
}
