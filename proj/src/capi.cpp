#include "odecalc/odecalc.h"

#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <optional>
#include <string>

#include "ode.hpp"
#include "problem_file.hpp"
#include "rm.hpp"
#include "stdlib_programs.hpp"

namespace oc = odecalc;

struct odc_value {
  oc::Value v;
};

struct odc_expr {
  oc::Expr e;
};

struct odc_trace {
  oc::EvalTrace t;
};

struct odc_problem {
  oc::ProblemFile file;
  std::optional<oc::rm::CompiledSystem> compiled;
};

struct odc_rm {
  oc::rm::RegisterProgram prog;
};

namespace {

thread_local std::string g_error = "no error";

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename F>
odc_status guard(F&& body) {
  try {
    return body();
  } catch (const oc::SyntaxError& e) {
    g_error = e.what();
    return ODC_ERR_SYNTAX;
  } catch (const oc::UnboundTermError& e) {
    g_error = e.what();
    return ODC_ERR_UNBOUND;
  } catch (const oc::NotEssentiallyLinearError& e) {
    g_error = e.what();
    return ODC_ERR_NOT_LINEAR;
  } catch (const oc::GrowthBoundViolatedError& e) {
    g_error = e.what();
    return ODC_ERR_GROWTH;
  } catch (const oc::BudgetExceededError& e) {
    g_error = e.what();
    return ODC_ERR_BUDGET;
  } catch (const oc::StepLimitError& e) {
    g_error = e.what();
    return ODC_ERR_STEP_LIMIT;
  } catch (const oc::DomainError& e) {
    g_error = e.what();
    return ODC_ERR_DOMAIN;
  } catch (const oc::IoError& e) {
    g_error = e.what();
    return ODC_ERR_IO;
  } catch (const std::exception& e) {
    g_error = e.what();
    return ODC_ERR_INVALID;
  }
}

odc_status invalid(const char* what) {
  g_error = what;
  return ODC_ERR_INVALID;
}

oc::EvalLimits limits_from(uint64_t max_steps) {
  oc::EvalLimits limits;
  if (max_steps != 0) limits.max_steps = max_steps;
  return limits;
}

odc_status build_params(const odc_value* const* args, size_t nargs, size_t arity,
                        oc::Valuation& out) {
  if (nargs != arity) {
    g_error = "problem takes " + std::to_string(arity) + " parameters, got " +
              std::to_string(nargs);
    return ODC_ERR_DOMAIN;
  }
  for (size_t i = 0; i < nargs; ++i) {
    if (!args || !args[i]) return invalid("null parameter value");
    out.set(oc::y_term(i), args[i]->v);
  }
  return ODC_OK;
}

odc_status export_vector(const oc::ValueVector& v, odc_value*** out_components,
                         size_t* out_dim) {
  if (!out_components || !out_dim) return invalid("null output pointer");
  odc_value** arr = static_cast<odc_value**>(std::malloc(v.arity() * sizeof(odc_value*)));
  if (!arr) return invalid("out of memory");
  for (size_t i = 0; i < v.arity(); ++i) arr[i] = new odc_value{v[i]};
  *out_components = arr;
  *out_dim = v.arity();
  return ODC_OK;
}

}  // namespace

extern "C" {

const char* odc_last_error(void) { return g_error.c_str(); }

void odc_string_free(char* s) { std::free(s); }

/* ------------------------------------------------------------------ */

odc_status odc_value_parse(const char* text, odc_value** out) {
  if (!text || !out) return invalid("null argument");
  return guard([&] {
    *out = new odc_value{oc::Value::parse(text)};
    return ODC_OK;
  });
}

odc_value* odc_value_from_int64(int64_t v) {
  return new odc_value{oc::Value(static_cast<long>(v))};
}

odc_value* odc_value_clone(const odc_value* v) { return v ? new odc_value{v->v} : nullptr; }

void odc_value_free(odc_value* v) { delete v; }

char* odc_value_str(const odc_value* v) { return v ? dup_string(v->v.str()) : nullptr; }

int odc_value_cmp(const odc_value* a, const odc_value* b) {
  if (a->v < b->v) return -1;
  if (b->v < a->v) return 1;
  return 0;
}

odc_value* odc_value_add(const odc_value* a, const odc_value* b) {
  return a && b ? new odc_value{a->v + b->v} : nullptr;
}
odc_value* odc_value_sub(const odc_value* a, const odc_value* b) {
  return a && b ? new odc_value{a->v - b->v} : nullptr;
}
odc_value* odc_value_mul(const odc_value* a, const odc_value* b) {
  return a && b ? new odc_value{a->v * b->v} : nullptr;
}
odc_value* odc_value_neg(const odc_value* a) { return a ? new odc_value{-a->v} : nullptr; }

odc_value* odc_value_sg(const odc_value* v) { return v ? new odc_value{oc::sg(v->v)} : nullptr; }
odc_value* odc_value_cosg(const odc_value* v) {
  return v ? new odc_value{oc::cosg(v->v)} : nullptr;
}
odc_value* odc_value_cond(const odc_value* x, const odc_value* y, const odc_value* z) {
  return x && y && z ? new odc_value{oc::cond(x->v, y->v, z->v)} : nullptr;
}
odc_value* odc_value_length(const odc_value* v) {
  return v ? new odc_value{oc::length(v->v)} : nullptr;
}
uint64_t odc_value_bit_length(const odc_value* v) { return v ? v->v.bit_length() : 0; }

void odc_value_array_free(odc_value** arr, size_t n) {
  if (!arr) return;
  for (size_t i = 0; i < n; ++i) delete arr[i];
  std::free(arr);
}

/* ------------------------------------------------------------------ */

odc_status odc_expr_parse(const char* text, odc_expr** out) {
  if (!text || !out) return invalid("null argument");
  return guard([&] {
    *out = new odc_expr{oc::parse_expr(text)};
    return ODC_OK;
  });
}

void odc_expr_free(odc_expr* e) { delete e; }

char* odc_expr_render(const odc_expr* e) { return e ? dup_string(e->e.render()) : nullptr; }

odc_status odc_expr_degree(const odc_expr* e, const char* term, odc_value** out) {
  if (!e || !term || !out) return invalid("null argument");
  return guard([&] {
    *out = new odc_value{e->e.degree(term)};
    return ODC_OK;
  });
}

odc_status odc_expr_eval(const odc_expr* e, const char* const* names,
                         const odc_value* const* values, size_t n, odc_value** out) {
  if (!e || !out || (n > 0 && (!names || !values))) return invalid("null argument");
  return guard([&] {
    oc::Valuation env;
    for (size_t i = 0; i < n; ++i) {
      if (!names[i] || !values[i]) return invalid("null binding");
      env.set(names[i], values[i]->v);
    }
    *out = new odc_value{e->e.eval(env)};
    return ODC_OK;
  });
}

/* ------------------------------------------------------------------ */

char* odc_trace_json(const odc_trace* t) {
  return t ? dup_string(oc::trace_to_json(t->t)) : nullptr;
}

uint64_t odc_trace_steps(const odc_trace* t) { return t ? t->t.steps.size() : 0; }

void odc_trace_free(odc_trace* t) { delete t; }

/* ------------------------------------------------------------------ */

odc_status odc_problem_load(const char* path, odc_problem** out) {
  if (!path || !out) return invalid("null argument");
  return guard([&] {
    *out = new odc_problem{oc::load_problem_file(path), std::nullopt};
    return ODC_OK;
  });
}

odc_status odc_problem_parse(const char* text, const char* base_dir, odc_problem** out) {
  if (!text || !out) return invalid("null argument");
  return guard([&] {
    *out = new odc_problem{oc::parse_problem_text(text, base_dir ? base_dir : "."), std::nullopt};
    return ODC_OK;
  });
}

void odc_problem_free(odc_problem* p) { delete p; }

size_t odc_problem_dim(const odc_problem* p) { return p ? p->file.problem.dim : 0; }
size_t odc_problem_arity(const odc_problem* p) { return p ? p->file.arity : 0; }

odc_status odc_problem_check(const odc_problem* p, char** report_json) {
  if (!p || !report_json) return invalid("null argument");
  return guard([&] {
    oc::LinearityReport report = oc::analyze_linearity(p->file.problem);
    nlohmann::json j;
    j["accepted"] = report.accepted;
    nlohmann::json degrees = nlohmann::json::array();
    for (size_t i = 0; i < report.degrees.size(); ++i)
      for (size_t k = 0; k < report.pivots.size(); ++k)
        degrees.push_back({{"component", oc::f_term(i)},
                           {"term", report.pivots[k]},
                           {"degree", report.degrees[i][k].str()}});
    j["degrees"] = degrees;
    if (report.accepted) {
      const size_t dim = report.degrees.size();
      nlohmann::json a = nlohmann::json::array();
      for (size_t r = 0; r < dim; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (size_t k = 0; k < dim; ++k) row.push_back(report.a_entries[r * dim + k]);
        a.push_back(row);
      }
      j["A"] = a;
      j["B"] = report.b_entries;
    } else {
      j["component"] = report.bad_component;
      j["term"] = report.bad_term;
      j["witness"] = report.witness;
    }
    *report_json = dup_string(j.dump());
    return ODC_OK;
  });
}

odc_status odc_problem_eval(const odc_problem* p, const odc_value* x,
                            const odc_value* const* args, size_t nargs,
                            unsigned flags, uint64_t max_steps, uint64_t budget_bits,
                            odc_value*** out_components, size_t* out_dim,
                            odc_trace** out_trace) {
  if (!p || !x) return invalid("null argument");
  return guard([&] {
    oc::Valuation y;
    if (odc_status st = build_params(args, nargs, p->file.arity, y); st != ODC_OK) return st;
    const oc::EvalLimits limits = limits_from(max_steps);

    oc::ValueVector result;
    oc::EvalTrace trace;
    if (flags & ODC_EVAL_GUARD) {
      oc::GrowthBudget budget;
      if (budget_bits != 0) budget.pinned_coeff_bits = budget_bits;
      oc::GuardedResult r = oc::guarded_eval(p->file.problem, x->v, y, budget, nullptr,
                                             limits, out_trace != nullptr);
      result = std::move(r.value);
      trace = std::move(r.trace);
    } else {
      result = oc::eval_lode_compressed(p->file.problem, x->v, y,
                                        out_trace ? &trace : nullptr, limits);
    }
    if (odc_status st = export_vector(result, out_components, out_dim); st != ODC_OK) return st;
    if (out_trace) *out_trace = new odc_trace{std::move(trace)};
    return ODC_OK;
  });
}

odc_status odc_problem_solve_linear(const odc_problem* p, const odc_value* x,
                                    const odc_value* const* args, size_t nargs,
                                    uint64_t max_steps, odc_value*** out_components,
                                    size_t* out_dim) {
  if (!p || !x) return invalid("null argument");
  return guard([&] {
    if (!p->file.identity_driver) {
      g_error = "solve-linear needs a problem with 'driver scan: x'";
      return ODC_ERR_DOMAIN;
    }
    oc::Valuation y;
    if (odc_status st = build_params(args, nargs, p->file.arity, y); st != ODC_OK) return st;

    oc::LinearDecomposition d = oc::check_linear(p->file.problem);
    oc::LinearOdeSystem sys;
    sys.dim = p->file.problem.dim;
    sys.init = p->file.problem.init;
    sys.a = d.q1;
    sys.b = d.q2;
    sys.aux = p->file.problem.aux;
    oc::ValueVector result = oc::solve_linear_closed(sys, x->v, y, limits_from(max_steps));
    return export_vector(result, out_components, out_dim);
  });
}

odc_status odc_problem_iterate(const odc_problem* p, uint64_t steps,
                               const odc_value* const* args, size_t nargs,
                               odc_value*** out_components, size_t* out_dim) {
  if (!p) return invalid("null argument");
  return guard([&] {
    if (!p->compiled) {
      g_error = "odc_problem_iterate applies to compiled register machines";
      return ODC_ERR_INVALID;
    }
    std::vector<oc::Value> inputs;
    for (size_t i = 0; i < nargs; ++i) {
      if (!args || !args[i]) return invalid("null input value");
      inputs.push_back(args[i]->v);
    }
    oc::ValueVector state =
        oc::rm::eval_compiled(*p->compiled, oc::Value(static_cast<unsigned long>(steps)), inputs);
    return export_vector(state, out_components, out_dim);
  });
}

odc_status odc_problem_emit(const odc_problem* p, char** text) {
  if (!p || !text) return invalid("null argument");
  if (!p->compiled) return invalid("only compiled systems can be emitted");
  *text = dup_string(oc::render_problem_text(p->compiled->text));
  return ODC_OK;
}

/* ------------------------------------------------------------------ */

odc_status odc_rm_load(const char* path, odc_rm** out) {
  if (!path || !out) return invalid("null argument");
  return guard([&] {
    *out = new odc_rm{oc::rm::load_program(path)};
    return ODC_OK;
  });
}

odc_status odc_rm_parse(const char* text, odc_rm** out) {
  if (!text || !out) return invalid("null argument");
  return guard([&] {
    *out = new odc_rm{oc::rm::parse_program(text)};
    return ODC_OK;
  });
}

void odc_rm_free(odc_rm* m) { delete m; }

size_t odc_rm_instruction_count(const odc_rm* m) {
  return m ? m->prog.instructions.size() : 0;
}

size_t odc_rm_register_count(const odc_rm* m) {
  return m ? static_cast<size_t>(m->prog.register_count) : 0;
}

odc_status odc_rm_run(const odc_rm* m, const odc_value* const* inputs, size_t n,
                      uint64_t fuel, odc_value*** out_registers, size_t* out_n,
                      int* out_halted, uint64_t* out_steps) {
  if (!m) return invalid("null argument");
  return guard([&] {
    std::vector<oc::Value> in;
    for (size_t i = 0; i < n; ++i) {
      if (!inputs || !inputs[i]) return invalid("null input value");
      in.push_back(inputs[i]->v);
    }
    oc::rm::RunResult r =
        oc::rm::run(m->prog, in, oc::Value(static_cast<unsigned long>(fuel)));
    if (odc_status st = export_vector(r.registers, out_registers, out_n); st != ODC_OK)
      return st;
    if (out_halted) *out_halted = r.halted ? 1 : 0;
    if (out_steps) *out_steps = r.steps_used;
    return ODC_OK;
  });
}

odc_status odc_rm_compile(const odc_rm* m, odc_problem** out) {
  if (!m || !out) return invalid("null argument");
  return guard([&] {
    oc::rm::CompiledSystem compiled = oc::rm::compile(m->prog);
    auto* p = new odc_problem;
    p->file.problem = compiled.problem;
    p->file.arity = compiled.input_arity;
    p->file.component_labels = compiled.component_labels;
    p->file.source_path = "<compiled>";
    p->compiled = std::move(compiled);
    *out = p;
    return ODC_OK;
  });
}

odc_status odc_rm_clocked(const odc_rm* m, const odc_value* const* inputs, size_t n,
                          unsigned clock_exponent, odc_value** out_r0, int* out_halted) {
  if (!m || !out_r0) return invalid("null argument");
  return guard([&] {
    std::vector<oc::Value> in;
    for (size_t i = 0; i < n; ++i) {
      if (!inputs || !inputs[i]) return invalid("null input value");
      in.push_back(inputs[i]->v);
    }
    oc::rm::CompiledSystem compiled = oc::rm::compile(m->prog);
    oc::rm::ClockedResult r = oc::rm::clocked_output(compiled, in, clock_exponent);
    *out_r0 = new odc_value{r.r0};
    if (out_halted) *out_halted = r.halted ? 1 : 0;
    return ODC_OK;
  });
}

/* ------------------------------------------------------------------ */

char* odc_stdlib_list(void) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : oc::stdprog::registry())
    arr.push_back({{"name", p.name}, {"usage", p.usage}, {"recipe", p.recipe}});
  return dup_string(arr.dump());
}

odc_status odc_stdlib_run(const char* name, const char* const* args, size_t nargs,
                          odc_value** out, odc_trace** out_trace) {
  if (!name || !out) return invalid("null argument");
  return guard([&] {
    const oc::stdprog::NamedProgram* prog = oc::stdprog::find_program(name);
    if (!prog) {
      g_error = std::string("unknown program '") + name + "'";
      return ODC_ERR_DOMAIN;
    }
    if (nargs != prog->arg_count) {
      g_error = "usage: " + prog->usage;
      return ODC_ERR_DOMAIN;
    }
    std::vector<std::string> argv;
    for (size_t i = 0; i < nargs; ++i) argv.emplace_back(args[i]);
    oc::stdprog::StdlibResult r = prog->run(argv);
    *out = new odc_value{std::move(r.value)};
    if (out_trace) *out_trace = new odc_trace{std::move(r.trace)};
    return ODC_OK;
  });
}

odc_status odc_stdlib_oracle(const char* name, const char* const* args, size_t nargs,
                             odc_value** out) {
  if (!name || !out) return invalid("null argument");
  return guard([&] {
    const oc::stdprog::NamedProgram* prog = oc::stdprog::find_program(name);
    if (!prog) {
      g_error = std::string("unknown program '") + name + "'";
      return ODC_ERR_DOMAIN;
    }
    if (nargs != prog->arg_count) {
      g_error = "usage: " + prog->usage;
      return ODC_ERR_DOMAIN;
    }
    std::vector<std::string> argv;
    for (size_t i = 0; i < nargs; ++i) argv.emplace_back(args[i]);
    *out = new odc_value{prog->oracle(argv)};
    return ODC_OK;
  });
}

}  // extern "C"
