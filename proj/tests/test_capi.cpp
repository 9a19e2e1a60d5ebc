// Exercises the shared library straight through the public C header.
#include <doctest.h>
#include <json.hpp>

#include <string>
#include <vector>

#include "odecalc/odecalc.h"

namespace {

const std::string kProblems = ODECALC_SHARE_DIR "/problems/";
const std::string kRm = ODECALC_SHARE_DIR "/rm/";

std::string take(char* s) {
  std::string out = s ? s : "";
  odc_string_free(s);
  return out;
}

std::string value_str(const odc_value* v) {
  return take(odc_value_str(v));
}

struct V {
  odc_value* h = nullptr;
  explicit V(const char* text) { REQUIRE(odc_value_parse(text, &h) == ODC_OK); }
  explicit V(int64_t v) : h(odc_value_from_int64(v)) {}
  ~V() { odc_value_free(h); }
};

}  // namespace

TEST_CASE("value basics through the C API") {
  V a("123456789012345678901234567890");
  CHECK(value_str(a.h) == "123456789012345678901234567890");

  V b("0b101"), c(int64_t{5});
  CHECK(odc_value_cmp(b.h, c.h) == 0);

  odc_value* sum = odc_value_add(b.h, c.h);
  CHECK(value_str(sum) == "10");
  odc_value_free(sum);

  odc_value* s = odc_value_sg(a.h);
  CHECK(value_str(s) == "1");
  odc_value_free(s);

  V zero(int64_t{0});
  odc_value* len = odc_value_length(zero.h);
  CHECK(value_str(len) == "1");
  odc_value_free(len);
  CHECK(odc_value_bit_length(a.h) == 97);

  odc_value* bad = nullptr;
  CHECK(odc_value_parse("12x", &bad) == ODC_ERR_SYNTAX);
  CHECK(std::string(odc_last_error()).find("literal") != std::string::npos);
}

TEST_CASE("expressions through the C API") {
  odc_expr* e = nullptr;
  REQUIRE(odc_expr_parse("x * sg(x - 2) + 7", &e) == ODC_OK);
  CHECK(take(odc_expr_render(e)) == "x * sg(x - 2) + 7");

  odc_value* deg = nullptr;
  REQUIRE(odc_expr_degree(e, "x", &deg) == ODC_OK);
  CHECK(value_str(deg) == "1");
  odc_value_free(deg);

  V five(int64_t{5});
  const char* names[] = {"x"};
  const odc_value* vals[] = {five.h};
  odc_value* out = nullptr;
  REQUIRE(odc_expr_eval(e, names, vals, 1, &out) == ODC_OK);
  CHECK(value_str(out) == "12");
  odc_value_free(out);

  odc_expr* bad = nullptr;
  CHECK(odc_expr_parse("sg x", &bad) == ODC_ERR_SYNTAX);
  odc_expr_free(e);
}

TEST_CASE("problem lifecycle") {
  odc_problem* p = nullptr;
  REQUIRE(odc_problem_load((kProblems + "pow2_lenprod.ode").c_str(), &p) == ODC_OK);
  CHECK(odc_problem_dim(p) == 1);
  CHECK(odc_problem_arity(p) == 1);

  char* report_text = nullptr;
  REQUIRE(odc_problem_check(p, &report_text) == ODC_OK);
  nlohmann::json report = nlohmann::json::parse(take(report_text));
  CHECK(report["accepted"].get<bool>());
  CHECK(report["A"][0][0].get<std::string>() == "h.p - 1");

  V x(int64_t{6}), y(int64_t{3});
  const odc_value* args[] = {y.h};
  odc_value** comps = nullptr;
  size_t dim = 0;
  odc_trace* trace = nullptr;
  REQUIRE(odc_problem_eval(p, x.h, args, 1, ODC_EVAL_GUARD, 0, 0, &comps, &dim, &trace) ==
          ODC_OK);
  REQUIRE(dim == 1);
  CHECK(value_str(comps[0]) == "64");
  odc_value_array_free(comps, dim);

  REQUIRE(trace != nullptr);
  CHECK(odc_trace_steps(trace) == 2);
  nlohmann::json tj = nlohmann::json::parse(take(odc_trace_json(trace)));
  REQUIRE(tj.is_array());
  REQUIRE(tj.size() == 2);
  for (const auto& step : tj) {
    CHECK(step.contains("t"));
    CHECK(step.contains("alpha"));
    CHECK(step.contains("deltaL"));
    CHECK(step["bits"].is_array());
    CHECK(step["value"].is_array());
    CHECK(step["value"][0].is_string());
  }
  odc_trace_free(trace);

  // arity mismatch
  odc_value** c2 = nullptr;
  size_t d2 = 0;
  CHECK(odc_problem_eval(p, x.h, nullptr, 0, 0, 0, 0, &c2, &d2, nullptr) == ODC_ERR_DOMAIN);
  odc_problem_free(p);

  odc_problem* missing = nullptr;
  CHECK(odc_problem_load((kProblems + "nope.ode").c_str(), &missing) == ODC_ERR_IO);
}

TEST_CASE("rejection and growth codes") {
  odc_problem* p = nullptr;
  REQUIRE(odc_problem_load((kProblems + "quadratic_reject.ode").c_str(), &p) == ODC_OK);
  char* report_text = nullptr;
  REQUIRE(odc_problem_check(p, &report_text) == ODC_OK);
  nlohmann::json report = nlohmann::json::parse(take(report_text));
  CHECK(!report["accepted"].get<bool>());
  CHECK(report["witness"].get<std::string>() == "f.0 * f.0");

  V x(int64_t{1000});
  odc_value** comps = nullptr;
  size_t dim = 0;
  CHECK(odc_problem_eval(p, x.h, nullptr, 0, ODC_EVAL_GUARD, 0, 0, &comps, &dim, nullptr) ==
        ODC_ERR_NOT_LINEAR);
  odc_problem_free(p);
}

TEST_CASE("solve-linear route") {
  odc_problem* p = nullptr;
  REQUIRE(odc_problem_load((kProblems + "bprod_linear.ode").c_str(), &p) == ODC_OK);
  V x(int64_t{4});
  odc_value** comps = nullptr;
  size_t dim = 0;
  REQUIRE(odc_problem_solve_linear(p, x.h, nullptr, 0, 0, &comps, &dim) == ODC_OK);
  CHECK(value_str(comps[0]) == "24");
  odc_value_array_free(comps, dim);
  odc_problem_free(p);

  odc_problem* wrong = nullptr;
  REQUIRE(odc_problem_load((kProblems + "pow2_length.ode").c_str(), &wrong) == ODC_OK);
  CHECK(odc_problem_solve_linear(wrong, x.h, nullptr, 0, 0, &comps, &dim) == ODC_ERR_DOMAIN);
  odc_problem_free(wrong);
}

TEST_CASE("register machines through the C API") {
  odc_rm* m = nullptr;
  REQUIRE(odc_rm_load((kRm + "add.rm").c_str(), &m) == ODC_OK);
  CHECK(odc_rm_instruction_count(m) == 3);
  CHECK(odc_rm_register_count(m) == 3);

  V a(int64_t{5}), b(int64_t{9});
  const odc_value* inputs[] = {a.h, b.h};
  odc_value** regs = nullptr;
  size_t nregs = 0;
  int halted = 0;
  uint64_t steps = 0;
  REQUIRE(odc_rm_run(m, inputs, 2, 100, &regs, &nregs, &halted, &steps) == ODC_OK);
  CHECK(value_str(regs[0]) == "14");
  CHECK(halted == 1);
  CHECK(steps == 2);
  odc_value_array_free(regs, nregs);

  odc_problem* compiled = nullptr;
  REQUIRE(odc_rm_compile(m, &compiled) == ODC_OK);
  char* report_text = nullptr;
  REQUIRE(odc_problem_check(compiled, &report_text) == ODC_OK);
  nlohmann::json report = nlohmann::json::parse(take(report_text));
  CHECK(report["accepted"].get<bool>());

  odc_value** state = nullptr;
  size_t dim = 0;
  REQUIRE(odc_problem_iterate(compiled, 3, inputs, 2, &state, &dim) == ODC_OK);
  REQUIRE(dim == 4);
  CHECK(value_str(state[1]) == "14");
  odc_value_array_free(state, dim);

  char* emitted = nullptr;
  REQUIRE(odc_problem_emit(compiled, &emitted) == ODC_OK);
  std::string text = take(emitted);
  odc_problem* reparsed = nullptr;
  REQUIRE(odc_problem_parse(text.c_str(), ".", &reparsed) == ODC_OK);
  CHECK(odc_problem_dim(reparsed) == 4);
  odc_problem_free(reparsed);

  odc_value* r0 = nullptr;
  REQUIRE(odc_rm_clocked(m, inputs, 2, 2, &r0, &halted) == ODC_OK);
  CHECK(value_str(r0) == "14");
  CHECK(halted == 1);
  odc_value_free(r0);

  odc_problem_free(compiled);
  odc_rm_free(m);
}

TEST_CASE("stdlib through the C API") {
  nlohmann::json list = nlohmann::json::parse(take(odc_stdlib_list()));
  CHECK(list.size() == 8);

  const char* args[] = {"10"};
  odc_value* out = nullptr;
  odc_trace* trace = nullptr;
  REQUIRE(odc_stdlib_run("floor_sqrt", args, 1, &out, &trace) == ODC_OK);
  CHECK(value_str(out) == "3");
  CHECK(odc_trace_steps(trace) <= 4 + 2);
  odc_trace_free(trace);

  odc_value* expected = nullptr;
  REQUIRE(odc_stdlib_oracle("floor_sqrt", args, 1, &expected) == ODC_OK);
  CHECK(odc_value_cmp(out, expected) == 0);
  odc_value_free(expected);
  odc_value_free(out);

  CHECK(odc_stdlib_run("nope", args, 1, &out, nullptr) == ODC_ERR_DOMAIN);
  CHECK(odc_stdlib_run("floor_sqrt", args, 0, &out, nullptr) == ODC_ERR_DOMAIN);
}
