#include "expr.hpp"

#include <cctype>
#include <map>
#include <utility>

namespace odecalc {

Expr Expr::constant(Value v) {
  return Expr(std::make_shared<Node>(Node{ExprKind::Const, std::move(v), {}, nullptr, nullptr}));
}

Expr Expr::term(std::string name) {
  return Expr(std::make_shared<Node>(Node{ExprKind::Term, Value(0), std::move(name), nullptr, nullptr}));
}

Expr Expr::add(Expr a, Expr b) {
  return Expr(std::make_shared<Node>(Node{ExprKind::Add, Value(0), {}, std::move(a.node_), std::move(b.node_)}));
}

Expr Expr::sub(Expr a, Expr b) {
  return Expr(std::make_shared<Node>(Node{ExprKind::Sub, Value(0), {}, std::move(a.node_), std::move(b.node_)}));
}

Expr Expr::mul(Expr a, Expr b) {
  return Expr(std::make_shared<Node>(Node{ExprKind::Mul, Value(0), {}, std::move(a.node_), std::move(b.node_)}));
}

Expr Expr::sg(Expr a) {
  return Expr(std::make_shared<Node>(Node{ExprKind::Sg, Value(0), {}, std::move(a.node_), nullptr}));
}

// Expr is a single shared_ptr, so a child pointer can be viewed as an
// Expr without bumping the reference count.
const Expr& Expr::lhs() const {
  static_assert(sizeof(Expr) == sizeof(NodePtr));
  return reinterpret_cast<const Expr&>(node_->a);
}

const Expr& Expr::rhs() const { return reinterpret_cast<const Expr&>(node_->b); }

const Expr& Expr::operand() const { return reinterpret_cast<const Expr&>(node_->a); }

Value Expr::eval_node(const Node& n, const Valuation& env) {
  switch (n.kind) {
    case ExprKind::Const:
      return n.value;
    case ExprKind::Term:
      return env.get(n.name);
    case ExprKind::Add:
      return eval_node(*n.a, env) + eval_node(*n.b, env);
    case ExprKind::Sub:
      return eval_node(*n.a, env) - eval_node(*n.b, env);
    case ExprKind::Mul: {
      Value va = eval_node(*n.a, env);
      if (va.is_zero()) return va;
      return va * eval_node(*n.b, env);
    }
    case ExprKind::Sg:
      return odecalc::sg(eval_node(*n.a, env));
  }
  throw Error("corrupt expression node");
}

Value Expr::eval(const Valuation& env) const { return eval_node(*node_, env); }

namespace {

Value max_value(Value a, Value b) { return a >= b ? a : b; }

template <typename TermDegree>
Value degree_walk(const Expr& e, const TermDegree& term_degree) {
  switch (e.kind()) {
    case ExprKind::Const:
      return Value(0);
    case ExprKind::Term:
      return term_degree(e.name());
    case ExprKind::Add:
    case ExprKind::Sub:
      return max_value(degree_walk(e.lhs(), term_degree),
                       degree_walk(e.rhs(), term_degree));
    case ExprKind::Mul:
      return degree_walk(e.lhs(), term_degree) + degree_walk(e.rhs(), term_degree);
    case ExprKind::Sg:
      return Value(0);
  }
  throw Error("corrupt expression node");
}

}  // namespace

Value Expr::degree(std::string_view term) const {
  return degree_walk(*this, [&](const std::string& n) {
    return n == term ? Value(1) : Value(0);
  });
}

Value Expr::joint_degree(const std::set<std::string, std::less<>>& pivots) const {
  return degree_walk(*this, [&](const std::string& n) {
    return pivots.contains(n) ? Value(1) : Value(0);
  });
}

namespace {

// Precedence levels: additive 1, multiplicative 2, atoms 3.
int precedence(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::Add:
      return 1;
    case ExprKind::Sub:
      // Negation (0 - e, with e non-constant) prints as a unary factor.
      if (e.lhs().kind() == ExprKind::Const && e.lhs().value().is_zero() &&
          e.rhs().kind() != ExprKind::Const)
        return 3;
      return 1;
    case ExprKind::Mul:
      return 2;
    default:
      return 3;
  }
}

void render_into(const Expr& e, int min_prec, std::string& out) {
  const int prec = precedence(e);
  const bool parens = prec < min_prec;
  if (parens) out += '(';
  switch (e.kind()) {
    case ExprKind::Const:
      out += e.value().str();
      break;
    case ExprKind::Term:
      out += e.name();
      break;
    case ExprKind::Sg:
      out += "sg(";
      render_into(e.operand(), 1, out);
      out += ')';
      break;
    case ExprKind::Add:
      render_into(e.lhs(), 1, out);
      out += " + ";
      render_into(e.rhs(), 2, out);
      break;
    case ExprKind::Sub:
      if (prec == 3) {  // unary minus
        out += '-';
        render_into(e.rhs(), 3, out);
      } else {
        render_into(e.lhs(), 1, out);
        out += " - ";
        render_into(e.rhs(), 2, out);
      }
      break;
    case ExprKind::Mul:
      render_into(e.lhs(), 2, out);
      out += " * ";
      render_into(e.rhs(), 3, out);
      break;
  }
  if (parens) out += ')';
}

}  // namespace

std::string Expr::render() const {
  std::string out;
  render_into(*this, 1, out);
  return out;
}

bool Expr::structurally_equal(const Expr& o) const {
  if (node_ == o.node_) return true;
  if (kind() != o.kind()) return false;
  switch (kind()) {
    case ExprKind::Const:
      return value() == o.value();
    case ExprKind::Term:
      return name() == o.name();
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
      return lhs().structurally_equal(o.lhs()) && rhs().structurally_equal(o.rhs());
    case ExprKind::Sg:
      return operand().structurally_equal(o.operand());
  }
  return false;
}

void Expr::collect_terms(std::set<std::string>& out) const {
  switch (kind()) {
    case ExprKind::Const:
      return;
    case ExprKind::Term:
      out.insert(name());
      return;
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
      lhs().collect_terms(out);
      rhs().collect_terms(out);
      return;
    case ExprKind::Sg:
      operand().collect_terms(out);
      return;
  }
}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct Token {
  enum Kind { Int, Ident, Plus, Minus, Star, LParen, RParen, End } kind;
  std::string text;
  int line;
  int column;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_ws();
    const int line = line_, col = col_;
    if (pos_ >= src_.size()) return {Token::End, "", line, col};
    char c = src_[pos_];
    switch (c) {
      case '+': advance(); return {Token::Plus, "+", line, col};
      case '-': advance(); return {Token::Minus, "-", line, col};
      case '*': advance(); return {Token::Star, "*", line, col};
      case '(': advance(); return {Token::LParen, "(", line, col};
      case ')': advance(); return {Token::RParen, ")", line, col};
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return lex_int(line, col);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return lex_ident(line, col);
    throw SyntaxError(std::string("unexpected character '") + c + "'", line, col);
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
  }

  Token lex_int(int line, int col) {
    std::size_t start = pos_;
    bool binary = false;
    if (src_[pos_] == '0' && pos_ + 1 < src_.size() &&
        (src_[pos_ + 1] == 'b' || src_[pos_ + 1] == 'B')) {
      binary = true;
      advance();
      advance();
      if (pos_ >= src_.size() || (src_[pos_] != '0' && src_[pos_] != '1'))
        throw SyntaxError("expected binary digits after 0b", line, col);
    }
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (binary ? (c == '0' || c == '1') : std::isdigit(static_cast<unsigned char>(c)))
        advance();
      else
        break;
    }
    if (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')
        throw SyntaxError("malformed integer literal", line, col);
    }
    return {Token::Int, std::string(src_.substr(start, pos_ - start)), line, col};
  }

  Token lex_ident(int line, int col) {
    std::size_t start = pos_;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')
        advance();
      else
        break;
    }
    return {Token::Ident, std::string(src_.substr(start, pos_ - start)), line, col};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lexer_(src) { shift(); }

  Expr parse() {
    Expr e = parse_expr();
    expect(Token::End, "end of input");
    return e;
  }

 private:
  void shift() { tok_ = lexer_.next(); }

  void expect(Token::Kind kind, const char* what) {
    if (tok_.kind != kind)
      throw SyntaxError(std::string("expected ") + what + ", got '" +
                            (tok_.kind == Token::End ? "end of input" : tok_.text) + "'",
                        tok_.line, tok_.column);
    if (kind != Token::End) shift();
  }

  Expr parse_expr() {
    Expr e = parse_term();
    while (tok_.kind == Token::Plus || tok_.kind == Token::Minus) {
      bool plus = tok_.kind == Token::Plus;
      shift();
      Expr r = parse_term();
      e = plus ? Expr::add(std::move(e), std::move(r)) : Expr::sub(std::move(e), std::move(r));
    }
    return e;
  }

  Expr parse_term() {
    Expr e = parse_factor();
    while (tok_.kind == Token::Star) {
      shift();
      e = Expr::mul(std::move(e), parse_factor());
    }
    return e;
  }

  Expr parse_factor() {
    switch (tok_.kind) {
      case Token::Int: {
        Value v = Value::parse(tok_.text);
        shift();
        return Expr::constant(std::move(v));
      }
      case Token::Ident: {
        if (tok_.text == "sg") {
          Token at = tok_;
          shift();
          if (tok_.kind != Token::LParen)
            throw SyntaxError("expected '(' after sg", at.line, at.column);
          shift();
          Expr inner = parse_expr();
          expect(Token::RParen, "')'");
          return Expr::sg(std::move(inner));
        }
        std::string name = tok_.text;
        shift();
        return Expr::term(std::move(name));
      }
      case Token::LParen: {
        shift();
        Expr inner = parse_expr();
        expect(Token::RParen, "')'");
        return inner;
      }
      case Token::Minus: {
        shift();
        Expr inner = parse_factor();
        if (inner.kind() == ExprKind::Const) return Expr::constant(-inner.value());
        return Expr::sub(Expr::constant(Value(0)), std::move(inner));
      }
      default:
        throw SyntaxError("expected an expression, got '" +
                              (tok_.kind == Token::End ? "end of input" : tok_.text) + "'",
                          tok_.line, tok_.column);
    }
  }

  Lexer lexer_;
  Token tok_{Token::End, "", 1, 1};
};

}  // namespace

Expr parse_expr(std::string_view text) { return Parser(text).parse(); }

void validate_terms(const Expr& e, const std::set<std::string, std::less<>>& allowed) {
  std::set<std::string> used;
  e.collect_terms(used);
  for (const std::string& t : used)
    if (!allowed.contains(t)) throw UnboundTermError(t);
}

bool is_essentially_constant(const Expr& e, std::string_view term) {
  return e.degree(term).is_zero();
}

bool is_essentially_constant(const ExprVector& v, std::string_view term) {
  for (const Expr& e : v)
    if (!is_essentially_constant(e, term)) return false;
  return true;
}

bool is_essentially_constant(const ExprMatrix& m, std::string_view term) {
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (!is_essentially_constant(m.at(r, c), term)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Linear decomposition

namespace {

using PivotSet = std::set<std::string, std::less<>>;

bool is_const(const Expr& e, long v) {
  return e.kind() == ExprKind::Const && e.value() == Value(v);
}

Expr add_s(Expr a, Expr b) {
  if (is_const(a, 0)) return b;
  if (is_const(b, 0)) return a;
  return Expr::add(std::move(a), std::move(b));
}

Expr sub_s(Expr a, Expr b) {
  if (is_const(b, 0)) return a;
  if (is_const(a, 0) && b.kind() == ExprKind::Const) return Expr::constant(-b.value());
  return Expr::sub(std::move(a), std::move(b));
}

Expr mul_s(Expr a, Expr b) {
  if (is_const(a, 0) || is_const(b, 0)) return Expr::constant(Value(0));
  if (is_const(a, 1)) return b;
  if (is_const(b, 1)) return a;
  return Expr::mul(std::move(a), std::move(b));
}

struct Parts {
  std::map<std::string, Expr> coef;  // pivot -> coefficient
  Expr rest = Expr::constant(Value(0));
};

Parts decompose(const Expr& e, const PivotSet& pivots) {
  // Pivot-free subtrees pass through unchanged, sharing their nodes
  // with the input.
  if (e.joint_degree(pivots).is_zero()) return Parts{{}, e};
  switch (e.kind()) {
    case ExprKind::Const:
    case ExprKind::Sg:
      return Parts{{}, e};
    case ExprKind::Term:
      if (pivots.contains(e.name()))
        return Parts{{{e.name(), Expr::constant(Value(1))}}, Expr::constant(Value(0))};
      return Parts{{}, e};
    case ExprKind::Add:
    case ExprKind::Sub: {
      const bool is_add = e.kind() == ExprKind::Add;
      Parts l = decompose(e.lhs(), pivots);
      Parts r = decompose(e.rhs(), pivots);
      Parts out;
      out.rest = is_add ? add_s(l.rest, r.rest) : sub_s(l.rest, r.rest);
      for (auto& [name, c] : l.coef) out.coef.emplace(name, c);
      for (auto& [name, c] : r.coef) {
        auto it = out.coef.find(name);
        Expr folded = it == out.coef.end()
                          ? (is_add ? c : sub_s(Expr::constant(Value(0)), c))
                          : (is_add ? add_s(it->second, c) : sub_s(it->second, c));
        if (it == out.coef.end())
          out.coef.emplace(name, std::move(folded));
        else
          it->second = std::move(folded);
      }
      return out;
    }
    case ExprKind::Mul: {
      Value dl = e.lhs().joint_degree(pivots);
      Value dr = e.rhs().joint_degree(pivots);
      if (dl.is_zero() && dr.is_zero()) return Parts{{}, e};
      Parts out;
      if (dr.is_zero()) {
        Parts l = decompose(e.lhs(), pivots);
        for (auto& [name, c] : l.coef) out.coef.emplace(name, mul_s(c, e.rhs()));
        out.rest = mul_s(l.rest, e.rhs());
      } else {
        Parts r = decompose(e.rhs(), pivots);
        for (auto& [name, c] : r.coef) out.coef.emplace(name, mul_s(e.lhs(), c));
        out.rest = mul_s(e.lhs(), r.rest);
      }
      return out;
    }
  }
  throw Error("corrupt expression node");
}

// The smallest subtree whose joint degree exceeds 1.
const Expr* find_witness(const Expr& e, const PivotSet& pivots) {
  switch (e.kind()) {
    case ExprKind::Add:
    case ExprKind::Sub:
      if (e.lhs().joint_degree(pivots) > Value(1)) return find_witness(e.lhs(), pivots);
      return find_witness(e.rhs(), pivots);
    case ExprKind::Mul:
      if (e.lhs().joint_degree(pivots) > Value(1)) return find_witness(e.lhs(), pivots);
      if (e.rhs().joint_degree(pivots) > Value(1)) return find_witness(e.rhs(), pivots);
      return &e;  // both factors carry a pivot
    default:
      return &e;
  }
}

}  // namespace

LinearDecomposition linear_decompose(const ExprVector& entries,
                                     const std::vector<std::string>& pivots) {
  PivotSet pivot_set(pivots.begin(), pivots.end());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].joint_degree(pivot_set) > Value(1)) {
      const Expr* witness = find_witness(entries[i], pivot_set);
      std::string term;
      for (const std::string& p : pivots)
        if (!witness->degree(p).is_zero()) {
          term = p;
          break;
        }
      throw NotEssentiallyLinearError(i, term, witness->render());
    }
  }

  LinearDecomposition out;
  out.pivots = pivots;
  out.q1 = ExprMatrix(entries.size(), pivots.size());
  out.q2.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    Parts parts = decompose(entries[i], pivot_set);
    for (std::size_t j = 0; j < pivots.size(); ++j) {
      auto it = parts.coef.find(pivots[j]);
      out.q1.at(i, j) = it == parts.coef.end() ? Expr::constant(Value(0)) : it->second;
    }
    out.q2.push_back(parts.rest);
  }
  return out;
}

}  // namespace odecalc
