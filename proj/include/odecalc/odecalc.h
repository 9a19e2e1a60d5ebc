/* odecalc: exact-arithmetic engine for discrete (finite-difference)
 * ordinary differential equations.
 *
 * C interface of the shared library. All objects are opaque handles
 * owned by the library; every function that can fail returns an
 * odc_status, with a description retrievable through odc_last_error()
 * (thread-local, valid until the next failing call on that thread).
 * Strings returned as char* are heap copies; release them with
 * odc_string_free. Null handles are rejected with ODC_ERR_INVALID.
 */
#ifndef ODECALC_H
#define ODECALC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum odc_status {
  ODC_OK = 0,
  ODC_ERR_SYNTAX = 1,     /* malformed expression, problem file or assembly */
  ODC_ERR_UNBOUND = 2,    /* unknown identifier or unbound term */
  ODC_ERR_DOMAIN = 3,     /* precondition violation (negative argument, arity, ...) */
  ODC_ERR_NOT_LINEAR = 4, /* right-hand side not essentially linear */
  ODC_ERR_GROWTH = 5,     /* per-step growth bound violated */
  ODC_ERR_BUDGET = 6,     /* cumulative bit-length budget exceeded */
  ODC_ERR_STEP_LIMIT = 7, /* step cap reached */
  ODC_ERR_IO = 8,
  ODC_ERR_INVALID = 9     /* null handle or unsupported usage */
} odc_status;

/* Message of the most recent failure on this thread; never NULL. */
const char* odc_last_error(void);

void odc_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Exact integers                                                      */

typedef struct odc_value odc_value;

/* Decimal or 0b-prefixed binary literal, optional leading '-'. */
odc_status odc_value_parse(const char* text, odc_value** out);
odc_value* odc_value_from_int64(int64_t v);
odc_value* odc_value_clone(const odc_value* v);
void odc_value_free(odc_value* v);

/* Canonical decimal rendering. */
char* odc_value_str(const odc_value* v);

/* negative, zero, positive => -1, 0, 1 */
int odc_value_cmp(const odc_value* a, const odc_value* b);

odc_value* odc_value_add(const odc_value* a, const odc_value* b);
odc_value* odc_value_sub(const odc_value* a, const odc_value* b);
odc_value* odc_value_mul(const odc_value* a, const odc_value* b);
odc_value* odc_value_neg(const odc_value* a);

/* 1 when v > 0, else 0. */
odc_value* odc_value_sg(const odc_value* v);
/* 1 when v = 0, else 0. */
odc_value* odc_value_cosg(const odc_value* v);
/* y when x = 0, z otherwise. */
odc_value* odc_value_cond(const odc_value* x, const odc_value* y, const odc_value* z);
/* Binary length of |v|; 1 for 0. */
odc_value* odc_value_length(const odc_value* v);
uint64_t odc_value_bit_length(const odc_value* v);

/* ------------------------------------------------------------------ */
/* sg-polynomial expressions                                           */

typedef struct odc_expr odc_expr;

odc_status odc_expr_parse(const char* text, odc_expr** out);
void odc_expr_free(odc_expr* e);
char* odc_expr_render(const odc_expr* e);

/* Degree of `term` in e under the sg-aware rules (sign truncates). */
odc_status odc_expr_degree(const odc_expr* e, const char* term, odc_value** out);

/* Evaluates e with names[i] bound to values[i]. */
odc_status odc_expr_eval(const odc_expr* e, const char* const* names,
                         const odc_value* const* values, size_t n, odc_value** out);

/* ------------------------------------------------------------------ */
/* Evaluation traces                                                   */

typedef struct odc_trace odc_trace;

/* JSON array of per-step records:
 *   {"t": step, "alpha": "jump index", "deltaL": "driver change",
 *    "bits": [per-component bit lengths], "value": ["decimal", ...]}
 * Values are decimal strings because they routinely exceed native
 * number ranges. */
char* odc_trace_json(const odc_trace* t);
uint64_t odc_trace_steps(const odc_trace* t);
void odc_trace_free(odc_trace* t);

/* ------------------------------------------------------------------ */
/* Problems (driver-scaled difference systems)                         */

typedef struct odc_problem odc_problem;

odc_status odc_problem_load(const char* path, odc_problem** out);
/* base_dir resolves nested ode("...") references. */
odc_status odc_problem_parse(const char* text, const char* base_dir, odc_problem** out);
void odc_problem_free(odc_problem* p);

size_t odc_problem_dim(const odc_problem* p);
size_t odc_problem_arity(const odc_problem* p);

/* Linearity analysis. Always returns a JSON report:
 *   {"accepted": bool,
 *    "degrees": [{"component": "f.0", "term": "f.0", "degree": "1"}, ...],
 *    "A": [["..."]], "B": ["..."]            when accepted,
 *    "component": i, "term": "...", "witness": "..."  when rejected } */
odc_status odc_problem_check(const odc_problem* p, char** report_json);

/* Evaluation flags. */
#define ODC_EVAL_GUARD 1u /* run under the growth guard */

/* Evaluates the problem at x with parameters y.0..y.(nargs-1).
 * max_steps = 0 keeps the default cap (2^22); budget_bits = 0 lets the
 * guard estimate its budget. On success *out_components holds
 * odc_problem_dim values (free with odc_value_array_free); *out_trace,
 * when non-NULL was passed, receives the step trace. */
odc_status odc_problem_eval(const odc_problem* p, const odc_value* x,
                            const odc_value* const* args, size_t nargs,
                            unsigned flags, uint64_t max_steps, uint64_t budget_bits,
                            odc_value*** out_components, size_t* out_dim,
                            odc_trace** out_trace);

/* Closed-form evaluation of f' = A f + B for systems whose driver is
 * literally "scan: x"; A and B come from the linearity analysis. */
odc_status odc_problem_solve_linear(const odc_problem* p, const odc_value* x,
                                    const odc_value* const* args, size_t nargs,
                                    uint64_t max_steps, odc_value*** out_components,
                                    size_t* out_dim);

/* `steps` serial right-hand-side applications from the initial state
 * (the rescaled-time view). Only for compiled register machines. */
odc_status odc_problem_iterate(const odc_problem* p, uint64_t steps,
                               const odc_value* const* args, size_t nargs,
                               odc_value*** out_components, size_t* out_dim);

/* Problem-file rendering of a compiled system. */
odc_status odc_problem_emit(const odc_problem* p, char** text);

/* ------------------------------------------------------------------ */
/* Register machines                                                   */

typedef struct odc_rm odc_rm;

odc_status odc_rm_load(const char* path, odc_rm** out);
odc_status odc_rm_parse(const char* text, odc_rm** out);
void odc_rm_free(odc_rm* m);

size_t odc_rm_instruction_count(const odc_rm* m);
size_t odc_rm_register_count(const odc_rm* m);

/* Simulates up to `fuel` instructions. *out_registers receives all
 * registers R_0..R_k; *out_halted reports whether a halt was reached
 * (running out of fuel is not an error). */
odc_status odc_rm_run(const odc_rm* m, const odc_value* const* inputs, size_t n,
                      uint64_t fuel, odc_value*** out_registers, size_t* out_n,
                      int* out_halted, uint64_t* out_steps);

/* The machine as a linear length-ODE: component 0 is the instruction
 * counter, component 1 + j is register j. */
odc_status odc_rm_compile(const odc_rm* m, odc_problem** out);

/* R_0 after (sum of input lengths)^clock_exponent compiled steps. */
odc_status odc_rm_clocked(const odc_rm* m, const odc_value* const* inputs, size_t n,
                          unsigned clock_exponent, odc_value** out_r0, int* out_halted);

/* ------------------------------------------------------------------ */
/* Named programs                                                      */

/* JSON array of {"name": ..., "usage": ..., "recipe": ...}. */
char* odc_stdlib_list(void);

/* Runs a named program on textual arguments (integers, or an
 * expression for function-valued parameters). */
odc_status odc_stdlib_run(const char* name, const char* const* args, size_t nargs,
                          odc_value** out, odc_trace** out_trace);

/* Reference oracle of the same program, for cross-checking. */
odc_status odc_stdlib_oracle(const char* name, const char* const* args, size_t nargs,
                             odc_value** out);

void odc_value_array_free(odc_value** arr, size_t n);

#ifdef __cplusplus
}
#endif

#endif /* ODECALC_H */
