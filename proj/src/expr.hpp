#pragma once

#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "value.hpp"

namespace odecalc {

enum class ExprKind { Const, Term, Add, Sub, Mul, Sg };

// Immutable sg-polynomial expression: integer constants, named terms,
// +, -, * and the sign function. Copies are cheap (shared nodes).
class Expr {
 public:
  Expr() : Expr(constant(Value(0))) {}

  static Expr constant(Value v);
  static Expr term(std::string name);
  static Expr add(Expr a, Expr b);
  static Expr sub(Expr a, Expr b);
  static Expr mul(Expr a, Expr b);
  static Expr sg(Expr a);

  ExprKind kind() const { return node_->kind; }
  const Value& value() const { return node_->value; }      // Const only
  const std::string& name() const { return node_->name; }  // Term only
  const Expr& lhs() const;                                 // Add/Sub/Mul
  const Expr& rhs() const;                                 // Add/Sub/Mul
  const Expr& operand() const;                             // Sg

  // Exact evaluation; every term must be bound. A zero left factor of a
  // multiplication short-circuits the right factor (operands are pure,
  // so the result is unchanged).
  Value eval(const Valuation& env) const;

  // Inductive degree of a term: deg(t, t) = 1, constants and other
  // terms 0, max over +/-, sum over *, 0 under sg.
  Value degree(std::string_view term) const;

  // Degree with all names in `pivots` identified as one variable.
  Value joint_degree(const std::set<std::string, std::less<>>& pivots) const;

  std::string render() const;

  bool structurally_equal(const Expr& o) const;

  // Same shared node, not just the same shape.
  bool same_node(const Expr& o) const { return node_ == o.node_; }

  void collect_terms(std::set<std::string>& out) const;

 private:
  struct Node {
    ExprKind kind;
    Value value;
    std::string name;
    std::shared_ptr<const Node> a, b;
  };
  using NodePtr = std::shared_ptr<const Node>;

  explicit Expr(NodePtr node) : node_(std::move(node)) {}
  static Value eval_node(const Node& n, const Valuation& env);

  NodePtr node_;
};

// Parses the expression grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor ('*' factor)*
//   factor := INT | IDENT | 'sg' '(' expr ')' | '(' expr ')' | '-' factor
//   IDENT  := [A-Za-z_][A-Za-z0-9_.]*
//   INT    := decimal or 0b-prefixed binary literal
// 'sg' is reserved. Whitespace is insignificant. '-' INT folds into a
// negative constant. Throws SyntaxError with line/column on failure.
Expr parse_expr(std::string_view text);

// Raises UnboundTermError for the first term of e not in `allowed`.
void validate_terms(const Expr& e, const std::set<std::string, std::less<>>& allowed);

using ExprVector = std::vector<Expr>;

class ExprMatrix {
 public:
  ExprMatrix() : rows_(0), cols_(0) {}
  ExprMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), cells_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const Expr& at(std::size_t r, std::size_t c) const { return cells_[r * cols_ + c]; }
  Expr& at(std::size_t r, std::size_t c) { return cells_[r * cols_ + c]; }

 private:
  std::size_t rows_, cols_;
  std::vector<Expr> cells_;
};

bool is_essentially_constant(const Expr& e, std::string_view term);
bool is_essentially_constant(const ExprVector& v, std::string_view term);
bool is_essentially_constant(const ExprMatrix& m, std::string_view term);

// P decomposed as Q1 * pivots + Q2, with Q1 and Q2 essentially
// constant in every pivot.
struct LinearDecomposition {
  ExprMatrix q1;                    // entries x pivots
  ExprVector q2;                    // one per entry
  std::vector<std::string> pivots;
};

// Requires each entry to have joint degree <= 1 over the pivots (so
// products of two pivots are rejected); multiplication is distributed
// over +/- only as far as needed to isolate pivot factors, and never
// under sg. Throws NotEssentiallyLinearError with a witness otherwise.
LinearDecomposition linear_decompose(const ExprVector& entries,
                                     const std::vector<std::string>& pivots);

}  // namespace odecalc
