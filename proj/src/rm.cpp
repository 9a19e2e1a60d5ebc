#include "rm.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace odecalc::rm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

int parse_operand(std::string_view tok, int line, const char* what) {
  try {
    std::size_t used = 0;
    int v = std::stoi(std::string(tok), &used);
    if (used != tok.size() || v < 0) throw std::invalid_argument("range");
    return v;
  } catch (const std::exception&) {
    throw SyntaxError(std::string("invalid ") + what + " '" + std::string(tok) + "'", line, 1);
  }
}

}  // namespace

RegisterProgram parse_program(std::string_view text) {
  RegisterProgram prog;
  int max_reg = 0;
  std::vector<std::pair<int, int>> jump_sites;  // label, target

  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = raw;
    if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;

    std::istringstream ls{std::string(s)};
    std::string op, t1, t2, extra;
    ls >> op >> t1 >> t2 >> extra;
    if (!extra.empty()) throw SyntaxError("trailing tokens after instruction", line, 1);
    for (char& c : op) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));

    Instruction ins{};
    if (op == "HALT") {
      if (!t1.empty()) throw SyntaxError("HALT takes no operands", line, 1);
      ins.op = Opcode::Halt;
    } else if (op == "ADD" || op == "SUB") {
      if (t1.empty() || t2.empty()) throw SyntaxError(op + " expects two registers", line, 1);
      ins.op = op == "ADD" ? Opcode::AddReg : Opcode::SubReg;
      ins.a = parse_operand(t1, line, "register");
      ins.b = parse_operand(t2, line, "register");
      max_reg = std::max({max_reg, ins.a, ins.b});
    } else if (op == "SET") {
      if (t1.empty() || t2.empty()) throw SyntaxError("SET expects a register and 0 or 1", line, 1);
      ins.op = Opcode::SetConst;
      ins.a = parse_operand(t1, line, "register");
      ins.b = parse_operand(t2, line, "constant");
      if (ins.b != 0 && ins.b != 1) throw SyntaxError("SET constant must be 0 or 1", line, 1);
      max_reg = std::max(max_reg, ins.a);
    } else if (op == "JGEZ") {
      if (t1.empty() || t2.empty()) throw SyntaxError("JGEZ expects a register and a label", line, 1);
      ins.op = Opcode::JumpIfNonNeg;
      ins.a = parse_operand(t1, line, "register");
      ins.b = parse_operand(t2, line, "label");
      max_reg = std::max(max_reg, ins.a);
      jump_sites.emplace_back(static_cast<int>(prog.instructions.size()), ins.b);
    } else {
      throw SyntaxError("unknown opcode '" + op + "'", line, 1);
    }
    prog.instructions.push_back(ins);
  }

  if (prog.instructions.empty()) throw SyntaxError("empty program", 1, 1);
  for (auto [label, target] : jump_sites)
    if (target >= static_cast<int>(prog.instructions.size()))
      throw SyntaxError("jump target " + std::to_string(target) + " at instruction " +
                            std::to_string(label) + " is past the program end",
                        label + 1, 1);
  prog.register_count = max_reg + 1;
  return prog;
}

RegisterProgram load_program(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open program file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_program(buf.str());
}

MachineState initial_state(const RegisterProgram& prog, const std::vector<Value>& inputs) {
  if (inputs.size() + 1 > static_cast<std::size_t>(prog.register_count))
    throw DomainError("program has " + std::to_string(prog.register_count) +
                      " registers but got " + std::to_string(inputs.size()) + " inputs");
  for (const Value& v : inputs)
    if (v.is_negative()) throw DomainError("machine inputs must be non-negative, got " + v.str());
  MachineState s{Value(0), ValueVector(static_cast<std::size_t>(prog.register_count))};
  for (std::size_t j = 0; j < inputs.size(); ++j) s.registers[j + 1] = inputs[j];
  return s;
}

MachineState step(const RegisterProgram& prog, const MachineState& s) {
  if (s.inst.is_negative() || s.inst >= Value(static_cast<long>(prog.instructions.size())))
    return s;  // past the program: frozen
  const Instruction& ins = prog.instructions[s.inst.to_u64()];
  MachineState next = s;
  switch (ins.op) {
    case Opcode::AddReg:
      next.registers[ins.a] += s.registers[ins.b];
      ++next.inst;
      break;
    case Opcode::SubReg:
      next.registers[ins.a] -= s.registers[ins.b];
      ++next.inst;
      break;
    case Opcode::SetConst:
      next.registers[ins.a] = Value(ins.b);
      ++next.inst;
      break;
    case Opcode::JumpIfNonNeg:
      if (s.registers[ins.a] >= Value(0))
        next.inst = Value(ins.b);
      else
        ++next.inst;
      break;
    case Opcode::Halt:
      break;
  }
  return next;
}

namespace {

bool is_halted(const RegisterProgram& prog, const MachineState& s) {
  if (s.inst.is_negative() || s.inst >= Value(static_cast<long>(prog.instructions.size())))
    return true;
  return prog.instructions[s.inst.to_u64()].op == Opcode::Halt;
}

}  // namespace

RunResult run(const RegisterProgram& prog, const std::vector<Value>& inputs,
              const Value& fuel, const EvalLimits& limits) {
  if (fuel.is_negative()) throw DomainError("negative fuel");
  if (!fuel.fits_u64() || fuel.to_u64() > limits.max_steps)
    throw StepLimitError("fuel " + fuel.str() + " exceeds the step cap");
  MachineState s = initial_state(prog, inputs);
  RunResult out;
  const std::uint64_t budget = fuel.to_u64();
  for (std::uint64_t used = 0; used < budget; ++used) {
    if (is_halted(prog, s)) break;
    s = step(prog, s);
    ++out.steps_used;
  }
  out.halted = is_halted(prog, s);
  out.registers = s.registers;
  return out;
}

// ---------------------------------------------------------------------------
// Compilation to a linear length-ODE

namespace {

Expr c(long v) { return Expr::constant(Value(v)); }
Expr neg(Expr e) { return Expr::sub(c(0), std::move(e)); }

Expr cosg_expr(const Expr& e) {
  return Expr::mul(Expr::sub(c(1), Expr::sg(e)), Expr::sub(c(1), Expr::sg(neg(e))));
}

// z + cosg(gate) * (y - z): y when gate = 0, z otherwise.
Expr cond_expr(const Expr& gate, const Expr& y, const Expr& z) {
  return Expr::add(z, Expr::mul(cosg_expr(gate), Expr::sub(y, z)));
}

// Selects label l: (prod over i < l of sg(inst - i)) * cosg(inst - l).
Expr selector(const Expr& inst, std::size_t l) {
  Expr gate = cosg_expr(Expr::sub(inst, c(static_cast<long>(l))));
  if (l == 0) return gate;
  Expr prod = Expr::sg(Expr::sub(inst, c(0)));
  for (std::size_t i = 1; i < l; ++i)
    prod = Expr::mul(std::move(prod), Expr::sg(Expr::sub(inst, c(static_cast<long>(i)))));
  return Expr::mul(std::move(prod), std::move(gate));
}

// Evolution of component `comp` (0 = inst, 1 + j = R_j) under the
// instruction at label l.
Expr next_table(const Instruction& ins, std::size_t comp, const Expr& inst,
                const std::vector<Expr>& regs) {
  const bool is_inst = comp == 0;
  const std::size_t j = comp - 1;
  switch (ins.op) {
    case Opcode::AddReg:
      if (is_inst) return c(1);
      return j == static_cast<std::size_t>(ins.a) ? regs[ins.b] : c(0);
    case Opcode::SubReg:
      if (is_inst) return c(1);
      return j == static_cast<std::size_t>(ins.a) ? neg(regs[ins.b]) : c(0);
    case Opcode::SetConst:
      if (is_inst) return c(1);
      return j == static_cast<std::size_t>(ins.a) ? Expr::sub(c(ins.b), regs[ins.a]) : c(0);
    case Opcode::JumpIfNonNeg:
      if (is_inst)
        return cond_expr(Expr::sg(Expr::add(regs[ins.a], c(1))), c(1),
                         Expr::sub(c(ins.b), inst));
      return c(0);
    case Opcode::Halt:
      return c(0);
  }
  throw Error("corrupt instruction");
}

}  // namespace

CompiledSystem compile(const RegisterProgram& prog) {
  const std::size_t k = static_cast<std::size_t>(prog.register_count) - 1;
  const std::size_t dim = k + 2;

  Expr inst = Expr::term(f_term(0));
  std::vector<Expr> regs;
  for (std::size_t j = 0; j <= k; ++j) regs.push_back(Expr::term(f_term(j + 1)));

  CompiledSystem out;
  out.input_arity = k;
  out.problem.dim = dim;
  out.problem.driver = Driver::length();

  out.component_labels.push_back("inst");
  for (std::size_t j = 0; j <= k; ++j) out.component_labels.push_back("R" + std::to_string(j));
  for (const Instruction& ins : prog.instructions)
    out.halt_labels.push_back(ins.op == Opcode::Halt);

  for (std::size_t comp = 0; comp < dim; ++comp) {
    Expr rhs = c(0);
    bool first = true;
    for (std::size_t l = 0; l < prog.instructions.size(); ++l) {
      Expr summand = Expr::mul(selector(inst, l), next_table(prog.instructions[l], comp, inst, regs));
      rhs = first ? std::move(summand) : Expr::add(std::move(rhs), std::move(summand));
      first = false;
    }
    out.problem.rhs.push_back(std::move(rhs));
  }

  out.problem.init = [dim, k](const Valuation& y) {
    ValueVector g(dim);
    for (std::size_t j = 1; j <= k; ++j) g[j + 1] = y.get(y_term(j - 1));
    return g;
  };

  out.text.dim = dim;
  out.text.driver = "length";
  out.text.init.push_back("0");  // inst
  out.text.init.push_back("0");  // R_0
  for (std::size_t j = 1; j <= k; ++j) out.text.init.push_back(y_term(j - 1));
  for (const Expr& e : out.problem.rhs) out.text.rhs.push_back(e.render());
  {
    std::ostringstream os;
    os << "components:";
    for (std::size_t i = 0; i < dim; ++i) os << ' ' << f_term(i) << '=' << out.component_labels[i];
    out.text.comments.push_back(os.str());
  }
  return out;
}

ValueVector compiled_initial(const CompiledSystem& c, const std::vector<Value>& inputs) {
  if (inputs.size() > c.input_arity)
    throw DomainError("compiled system takes at most " + std::to_string(c.input_arity) +
                      " inputs, got " + std::to_string(inputs.size()));
  for (const Value& v : inputs)
    if (v.is_negative()) throw DomainError("machine inputs must be non-negative, got " + v.str());
  Valuation y;
  for (std::size_t i = 0; i < c.input_arity; ++i)
    y.set(y_term(i), i < inputs.size() ? inputs[i] : Value(0));
  return c.problem.init(y);
}

ValueVector compiled_step(const CompiledSystem& c, const ValueVector& state) {
  Valuation env;
  for (std::size_t i = 0; i < c.problem.dim; ++i) env.set(f_term(i), state[i]);
  ValueVector next = state;
  for (std::size_t i = 0; i < c.problem.dim; ++i) next[i] += c.problem.rhs[i].eval(env);
  return next;
}

ValueVector eval_compiled(const CompiledSystem& c, const Value& steps,
                          const std::vector<Value>& inputs, const EvalLimits& limits) {
  if (steps.is_negative()) throw DomainError("negative step count");
  if (!steps.fits_u64() || steps.to_u64() > limits.max_steps)
    throw StepLimitError("eval_compiled: " + steps.str() + " steps exceed the cap");
  ValueVector state = compiled_initial(c, inputs);
  const std::uint64_t n = steps.to_u64();
  for (std::uint64_t t = 0; t < n; ++t) state = compiled_step(c, state);
  return state;
}

ClockedResult clocked_output(const CompiledSystem& c, const std::vector<Value>& inputs,
                             unsigned clock_exponent, const EvalLimits& limits) {
  if (clock_exponent == 0) throw DomainError("clock exponent must be at least 1");
  Value total_len(0);
  for (const Value& v : inputs) total_len += length(v);
  Value clock(1);
  for (unsigned i = 0; i < clock_exponent; ++i) clock *= total_len;
  if (!clock.fits_u64() || clock.to_u64() > limits.max_steps)
    throw StepLimitError("clocked evaluation of " + clock.str() + " steps exceeds the cap");

  ClockedResult out;
  out.state = compiled_initial(c, inputs);
  const std::uint64_t n = clock.to_u64();
  auto on_halt_label = [&](const ValueVector& state) {
    const Value& inst = state[0];
    return !inst.is_negative() && inst < Value(static_cast<long>(c.halt_labels.size())) &&
           c.halt_labels[inst.to_u64()];
  };
  for (std::uint64_t t = 0; t < n; ++t) {
    // A halt label freezes the state; the remaining clock is a no-op.
    if (on_halt_label(out.state)) break;
    out.state = compiled_step(c, out.state);
    ++out.steps;
  }
  out.r0 = out.state[1];
  out.halted = on_halt_label(out.state);
  return out;
}

}  // namespace odecalc::rm
