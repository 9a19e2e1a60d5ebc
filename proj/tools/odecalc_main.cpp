// Batch front end for the odecalc shared library.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "odecalc/odecalc.h"

namespace {

constexpr int kExitRejected = 1;
constexpr int kExitUsage = 2;

int exit_code_for(odc_status st) {
  switch (st) {
    case ODC_OK:
      return 0;
    case ODC_ERR_NOT_LINEAR:
    case ODC_ERR_GROWTH:
    case ODC_ERR_BUDGET:
    case ODC_ERR_STEP_LIMIT:
    case ODC_ERR_DOMAIN:
      return kExitRejected;
    default:
      return kExitUsage;
  }
}

[[noreturn]] void fail(odc_status st) {
  std::cerr << "error: " << odc_last_error() << "\n";
  std::exit(exit_code_for(st));
}

struct ValueHandle {
  odc_value* v = nullptr;
  ~ValueHandle() { odc_value_free(v); }
};

odc_value* parse_value_or_die(const std::string& text) {
  odc_value* out = nullptr;
  if (odc_status st = odc_value_parse(text.c_str(), &out); st != ODC_OK) fail(st);
  return out;
}

std::string take_string(char* s) {
  std::string out = s ? s : "";
  odc_string_free(s);
  return out;
}

std::vector<odc_value*> parse_values(const std::vector<std::string>& texts) {
  std::vector<odc_value*> out;
  for (const std::string& t : texts) out.push_back(parse_value_or_die(t));
  return out;
}

void free_values(std::vector<odc_value*>& vs) {
  for (odc_value* v : vs) odc_value_free(v);
  vs.clear();
}

void print_components(odc_value** comps, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    if (i) std::cout << ' ';
    std::cout << take_string(odc_value_str(comps[i]));
  }
  std::cout << "\n";
}

void write_trace(odc_trace* trace, const std::string& path) {
  std::string json = take_string(odc_trace_json(trace));
  if (path.empty() || path == "-") {
    std::cout << json << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    std::exit(kExitUsage);
  }
  out << json << "\n";
}

uint64_t default_max_steps() {
  if (const char* env = std::getenv("ODECALC_MAX_STEPS")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && v > 0) return v;
    std::cerr << "error: ODECALC_MAX_STEPS must be a positive integer\n";
    std::exit(kExitUsage);
  }
  return 0;  // library default
}

odc_problem* load_problem_or_die(const std::string& path) {
  odc_problem* p = nullptr;
  if (odc_status st = odc_problem_load(path.c_str(), &p); st != ODC_OK) fail(st);
  return p;
}

void check_arity_or_die(const odc_problem* p, size_t given) {
  size_t arity = odc_problem_arity(p);
  if (given != arity) {
    std::cerr << "error: problem takes " << arity << " parameter(s), got " << given << "\n";
    std::exit(kExitUsage);
  }
}

int cmd_check(const std::string& path) {
  odc_problem* p = load_problem_or_die(path);
  char* report_text = nullptr;
  if (odc_status st = odc_problem_check(p, &report_text); st != ODC_OK) fail(st);
  nlohmann::json report = nlohmann::json::parse(take_string(report_text));

  std::printf("%-12s %-8s %s\n", "component", "term", "degree");
  for (const auto& row : report["degrees"])
    std::printf("%-12s %-8s %s\n", row["component"].get<std::string>().c_str(),
                row["term"].get<std::string>().c_str(),
                row["degree"].get<std::string>().c_str());

  if (report["accepted"].get<bool>()) {
    std::cout << "ACCEPT\n";
    const auto& a = report["A"];
    for (size_t r = 0; r < a.size(); ++r)
      for (size_t c = 0; c < a[r].size(); ++c)
        std::cout << "A[" << r << "][" << c << "] = " << a[r][c].get<std::string>() << "\n";
    const auto& b = report["B"];
    for (size_t r = 0; r < b.size(); ++r)
      std::cout << "B[" << r << "] = " << b[r].get<std::string>() << "\n";
    odc_problem_free(p);
    return 0;
  }
  std::cout << "REJECT: component f." << report["component"].get<size_t>()
            << " is not essentially linear in " << report["term"].get<std::string>()
            << "; witness: " << report["witness"].get<std::string>() << "\n";
  odc_problem_free(p);
  return kExitRejected;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"odecalc: exact evaluator for driver-scaled difference systems"};
  app.require_subcommand(1);

  // check
  std::string check_file;
  CLI::App* check = app.add_subcommand("check", "analyze a problem file for linearity");
  check->add_option("file", check_file)->required();

  // eval
  std::string eval_file, eval_x, eval_trace_path, eval_budget;
  std::vector<std::string> eval_args;
  bool eval_guard = false;
  uint64_t eval_max_steps = default_max_steps();
  CLI::App* eval = app.add_subcommand("eval", "evaluate a problem at x");
  eval->add_option("file", eval_file)->required();
  eval->add_option("x", eval_x)->required();
  eval->add_option("y", eval_args, "parameter values y.0 y.1 ...");
  eval->add_flag("--guard", eval_guard, "evaluate under the growth guard");
  eval->add_option("--trace", eval_trace_path, "write the step trace JSON here ('-' = stdout)");
  eval->add_option("--budget", eval_budget, "pin the per-step coefficient bit budget");
  eval->add_option("--max-steps", eval_max_steps, "hard step cap (default 2^22)");

  // solve-linear
  std::string sl_file, sl_x;
  std::vector<std::string> sl_args;
  uint64_t sl_max_steps = default_max_steps();
  CLI::App* sl = app.add_subcommand(
      "solve-linear", "closed-form evaluation of an ordinary linear system (driver scan: x)");
  sl->add_option("file", sl_file)->required();
  sl->add_option("x", sl_x)->required();
  sl->add_option("y", sl_args);
  sl->add_option("--max-steps", sl_max_steps);

  // trace
  std::string tr_file, tr_x, tr_out;
  std::vector<std::string> tr_args;
  uint64_t tr_max_steps = default_max_steps();
  CLI::App* tr = app.add_subcommand("trace", "evaluate and print the step trace JSON");
  tr->add_option("file", tr_file)->required();
  tr->add_option("x", tr_x)->required();
  tr->add_option("y", tr_args);
  tr->add_option("--out", tr_out, "trace file (default stdout)");
  tr->add_option("--max-steps", tr_max_steps);

  // compile-rm
  std::string crm_file, crm_emit;
  CLI::App* crm = app.add_subcommand("compile-rm",
                                     "compile register-machine assembly to a length-ODE");
  crm->add_option("asmfile", crm_file)->required();
  crm->add_option("--emit", crm_emit, "write the problem file here (default stdout)");

  // run-rm
  std::string rrm_file;
  std::vector<std::string> rrm_inputs;
  uint64_t rrm_fuel = 1u << 22;
  unsigned rrm_clock = 0;
  int64_t rrm_ode_steps = -1;
  CLI::App* rrm = app.add_subcommand("run-rm", "simulate a register machine");
  rrm->add_option("asmfile", rrm_file)->required();
  rrm->add_option("inputs", rrm_inputs);
  rrm->add_option("--fuel", rrm_fuel, "instruction budget (default 2^22)");
  rrm->add_option("--clock", rrm_clock,
                  "run the compiled system for (sum of input lengths)^C steps");
  rrm->add_option("--ode-steps", rrm_ode_steps,
                  "print the compiled state after this many steps");

  // stdlib
  CLI::App* stdlib = app.add_subcommand("stdlib", "named example programs");
  stdlib->require_subcommand(1);
  CLI::App* stdlib_list = stdlib->add_subcommand("list", "list available programs");
  std::string run_name, run_trace_path;
  std::vector<std::string> run_args;
  bool run_check_oracle = false;
  CLI::App* stdlib_run = stdlib->add_subcommand("run", "run a program by name");
  stdlib_run->add_option("name", run_name)->required();
  stdlib_run->add_option("args", run_args);
  stdlib_run->add_option("--trace", run_trace_path, "write the step trace JSON here");
  stdlib_run->add_flag("--check-oracle", run_check_oracle,
                       "also run the reference oracle and compare");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (check->parsed()) return cmd_check(check_file);

  if (eval->parsed()) {
    odc_problem* p = load_problem_or_die(eval_file);
    check_arity_or_die(p, eval_args.size());
    ValueHandle x{parse_value_or_die(eval_x)};
    std::vector<odc_value*> args = parse_values(eval_args);
    uint64_t budget = 0;
    if (!eval_budget.empty()) budget = std::strtoull(eval_budget.c_str(), nullptr, 10);
    odc_value** comps = nullptr;
    size_t dim = 0;
    odc_trace* trace = nullptr;
    odc_status st = odc_problem_eval(
        p, x.v, args.data(), args.size(), eval_guard ? ODC_EVAL_GUARD : 0, eval_max_steps,
        budget, &comps, &dim, eval_trace_path.empty() ? nullptr : &trace);
    free_values(args);
    if (st != ODC_OK) fail(st);
    print_components(comps, dim);
    odc_value_array_free(comps, dim);
    if (trace) {
      write_trace(trace, eval_trace_path);
      odc_trace_free(trace);
    }
    odc_problem_free(p);
    return 0;
  }

  if (sl->parsed()) {
    odc_problem* p = load_problem_or_die(sl_file);
    check_arity_or_die(p, sl_args.size());
    ValueHandle x{parse_value_or_die(sl_x)};
    std::vector<odc_value*> args = parse_values(sl_args);
    odc_value** comps = nullptr;
    size_t dim = 0;
    odc_status st =
        odc_problem_solve_linear(p, x.v, args.data(), args.size(), sl_max_steps, &comps, &dim);
    free_values(args);
    if (st != ODC_OK) fail(st);
    print_components(comps, dim);
    odc_value_array_free(comps, dim);
    odc_problem_free(p);
    return 0;
  }

  if (tr->parsed()) {
    odc_problem* p = load_problem_or_die(tr_file);
    check_arity_or_die(p, tr_args.size());
    ValueHandle x{parse_value_or_die(tr_x)};
    std::vector<odc_value*> args = parse_values(tr_args);
    odc_value** comps = nullptr;
    size_t dim = 0;
    odc_trace* trace = nullptr;
    odc_status st = odc_problem_eval(p, x.v, args.data(), args.size(), 0, tr_max_steps, 0,
                                     &comps, &dim, &trace);
    free_values(args);
    if (st != ODC_OK) fail(st);
    odc_value_array_free(comps, dim);
    write_trace(trace, tr_out);
    odc_trace_free(trace);
    odc_problem_free(p);
    return 0;
  }

  if (crm->parsed()) {
    odc_rm* m = nullptr;
    if (odc_status st = odc_rm_load(crm_file.c_str(), &m); st != ODC_OK) fail(st);
    odc_problem* p = nullptr;
    if (odc_status st = odc_rm_compile(m, &p); st != ODC_OK) fail(st);
    char* text = nullptr;
    if (odc_status st = odc_problem_emit(p, &text); st != ODC_OK) fail(st);
    std::string body = take_string(text);
    if (crm_emit.empty()) {
      std::cout << body;
    } else {
      std::ofstream out(crm_emit);
      if (!out) {
        std::cerr << "error: cannot write " << crm_emit << "\n";
        return kExitUsage;
      }
      out << body;
      std::cerr << "wrote " << crm_emit << " (" << odc_problem_dim(p) << " components, "
                << odc_rm_instruction_count(m) << " instructions)\n";
    }
    odc_problem_free(p);
    odc_rm_free(m);
    return 0;
  }

  if (rrm->parsed()) {
    odc_rm* m = nullptr;
    if (odc_status st = odc_rm_load(rrm_file.c_str(), &m); st != ODC_OK) fail(st);
    std::vector<odc_value*> inputs = parse_values(rrm_inputs);

    int code = 0;
    if (rrm_clock > 0) {
      odc_value* r0 = nullptr;
      int halted = 0;
      odc_status st =
          odc_rm_clocked(m, inputs.data(), inputs.size(), rrm_clock, &r0, &halted);
      if (st != ODC_OK) {
        free_values(inputs);
        fail(st);
      }
      std::cout << take_string(odc_value_str(r0)) << (halted ? " halted" : " running") << "\n";
      odc_value_free(r0);
    } else if (rrm_ode_steps >= 0) {
      odc_problem* p = nullptr;
      if (odc_status st = odc_rm_compile(m, &p); st != ODC_OK) fail(st);
      odc_value** comps = nullptr;
      size_t dim = 0;
      odc_status st = odc_problem_iterate(p, static_cast<uint64_t>(rrm_ode_steps),
                                          inputs.data(), inputs.size(), &comps, &dim);
      if (st != ODC_OK) {
        free_values(inputs);
        fail(st);
      }
      print_components(comps, dim);
      odc_value_array_free(comps, dim);
      odc_problem_free(p);
    } else {
      odc_value** regs = nullptr;
      size_t nregs = 0;
      int halted = 0;
      uint64_t steps = 0;
      odc_status st = odc_rm_run(m, inputs.data(), inputs.size(), rrm_fuel, &regs, &nregs,
                                 &halted, &steps);
      if (st != ODC_OK) {
        free_values(inputs);
        fail(st);
      }
      std::cout << take_string(odc_value_str(regs[0])) << " "
                << (halted ? "halted" : "fuel-exhausted") << " after " << steps << " steps\n";
      odc_value_array_free(regs, nregs);
    }
    free_values(inputs);
    odc_rm_free(m);
    return code;
  }

  if (stdlib_list->parsed()) {
    nlohmann::json list = nlohmann::json::parse(take_string(odc_stdlib_list()));
    for (const auto& entry : list)
      std::printf("%-14s %-28s %s\n", entry["name"].get<std::string>().c_str(),
                  entry["usage"].get<std::string>().c_str(),
                  entry["recipe"].get<std::string>().c_str());
    return 0;
  }

  if (stdlib_run->parsed()) {
    std::vector<const char*> argv_c;
    for (const std::string& a : run_args) argv_c.push_back(a.c_str());
    odc_value* out = nullptr;
    odc_trace* trace = nullptr;
    odc_status st = odc_stdlib_run(run_name.c_str(), argv_c.data(), argv_c.size(), &out,
                                   run_trace_path.empty() ? nullptr : &trace);
    if (st != ODC_OK) fail(st);
    std::cout << take_string(odc_value_str(out)) << "\n";
    if (run_check_oracle) {
      odc_value* expected = nullptr;
      st = odc_stdlib_oracle(run_name.c_str(), argv_c.data(), argv_c.size(), &expected);
      if (st != ODC_OK) fail(st);
      if (odc_value_cmp(out, expected) != 0) {
        std::cerr << "oracle mismatch: expected " << take_string(odc_value_str(expected))
                  << "\n";
        odc_value_free(expected);
        odc_value_free(out);
        return kExitRejected;
      }
      std::cerr << "oracle agrees\n";
      odc_value_free(expected);
    }
    if (trace) {
      write_trace(trace, run_trace_path);
      odc_trace_free(trace);
    }
    odc_value_free(out);
    return 0;
  }

  return kExitUsage;
}
