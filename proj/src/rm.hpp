#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "problem_file.hpp"

namespace odecalc::rm {

// Assembly text, one instruction per line, labels are line numbers
// counted from 0, '#' starts a comment:
//   ADD j i    R_j := R_j + R_i
//   SUB j i    R_j := R_j - R_i
//   SET j a    R_j := a, a in {0, 1}
//   JGEZ j p   if R_j >= 0 goto p
//   HALT
enum class Opcode { AddReg, SubReg, SetConst, JumpIfNonNeg, Halt };

struct Instruction {
  Opcode op;
  int a = 0;  // register j
  int b = 0;  // register i, constant, or jump target
};

struct RegisterProgram {
  std::vector<Instruction> instructions;
  int register_count = 1;  // 1 + highest index used
};

RegisterProgram parse_program(std::string_view text);
RegisterProgram load_program(const std::string& path);

struct MachineState {
  Value inst;
  ValueVector registers;
};

// Inputs load into R_1.. in order; more inputs than spare registers is
// an error. R_0 and unassigned registers start at 0, the label at 0.
MachineState initial_state(const RegisterProgram& prog, const std::vector<Value>& inputs);

// One transition. Halting (or running past the last instruction)
// leaves the state unchanged.
MachineState step(const RegisterProgram& prog, const MachineState& s);

struct RunResult {
  ValueVector registers;
  bool halted = false;
  std::uint64_t steps_used = 0;
};

// Iterates until halt or fuel runs out; not halting is reported, not
// fatal. Fuel above the step cap is rejected.
RunResult run(const RegisterProgram& prog, const std::vector<Value>& inputs,
              const Value& fuel, const EvalLimits& limits = {});

// The machine as a linear length-ODE of dimension k + 2: component 0 is
// the instruction counter, component 1 + j is register j. Every
// right-hand side is a sum over labels l of
//   (prod over i < l of sg(inst - i)) * cosg(inst - l) * next_l
// where the next tables encode one instruction each, and cosg(e) is
// spelled (1 - sg(e)) * (1 - sg(-e)).
struct CompiledSystem {
  LOdeProblem problem;
  std::size_t input_arity = 0;  // = register count - 1
  std::vector<std::string> component_labels;
  std::vector<bool> halt_labels;  // per instruction label
  ProblemText text;               // emittable problem-file form
};

CompiledSystem compile(const RegisterProgram& prog);

// State vector (inst, R_0..R_k) at time 0 for the given inputs.
ValueVector compiled_initial(const CompiledSystem& c, const std::vector<Value>& inputs);

// One right-hand-side application.
ValueVector compiled_step(const CompiledSystem& c, const ValueVector& state);

// `steps` serial right-hand-side applications from the initial state.
ValueVector eval_compiled(const CompiledSystem& c, const Value& steps,
                          const std::vector<Value>& inputs,
                          const EvalLimits& limits = {});

struct ClockedResult {
  Value r0;
  bool halted = false;
  std::uint64_t steps = 0;
  ValueVector state;
};

// R_0 after (sum of input lengths)^clock_exponent steps. Iteration
// stops early once the machine sits on a halt label, where the state is
// fixed forever.
ClockedResult clocked_output(const CompiledSystem& c, const std::vector<Value>& inputs,
                             unsigned clock_exponent, const EvalLimits& limits = {});

}  // namespace odecalc::rm
