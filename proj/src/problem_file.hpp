#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ode.hpp"

namespace odecalc {

// A problem loaded from the text format:
//
//   # comment
//   dim 1
//   driver length            | driver scan: <expression over x, y.k>
//   init <expression>        (one line per component, in parameter terms)
//   rhs <sg-polynomial>      (one line per component, over f.i, h.j, x, y.k)
//   aux <name> = <expression>
//   aux <name> = ode("<relative path>"[, <argument expression> ...])
//
// rhs lines are pure sg-polynomials. init, scan and aux expressions may
// additionally call the builtins length(e) and pow2(e), and aux
// definitions may reference another problem file, whose solution at the
// given arguments becomes the slot value. An aux named n is referenced
// as h.n; the parameter arity is inferred from the highest y.k used.
struct ProblemFile {
  LOdeProblem problem;
  std::size_t arity = 0;
  std::vector<std::string> aux_names;        // term names, declaration order
  std::vector<std::string> component_labels;  // optional, e.g. from compile-rm
  std::string source_path;
  bool identity_driver = false;  // driver is literally "scan: x"
};

ProblemFile load_problem_file(const std::string& path);
ProblemFile parse_problem_text(std::string_view text, const std::string& base_dir);

// Symbolic, renderable description of a problem; what compile-rm emits.
struct ProblemText {
  std::size_t dim = 0;
  std::string driver = "length";
  std::vector<std::string> init;
  std::vector<std::string> rhs;
  std::vector<std::pair<std::string, std::string>> aux;  // name, source text
  std::vector<std::string> comments;                     // emitted at the top
};

std::string render_problem_text(const ProblemText& t);

}  // namespace odecalc
