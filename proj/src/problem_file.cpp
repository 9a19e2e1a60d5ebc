#include "problem_file.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>

namespace odecalc {

namespace {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Auxiliary expressions: the sg-polynomial grammar extended with the
// builtins length(e) and pow2(e) and nested problem references
// ode("file", args...). Used for init, scan drivers and aux slots;
// never inside a right-hand side.

struct AuxNode;
using AuxPtr = std::shared_ptr<const AuxNode>;

struct NestedRef {
  std::shared_ptr<const ProblemFile> file;
  std::vector<AuxPtr> args;  // first is the evaluation point
};

struct AuxNode {
  enum Kind { Const, X, Param, Sg, Add, Sub, Mul, Length, Pow2, Nested } kind;
  Value cval;
  std::size_t param = 0;
  AuxPtr a, b;
  std::shared_ptr<NestedRef> nested;
};

AuxPtr aux_const(Value v) {
  return std::make_shared<AuxNode>(AuxNode{AuxNode::Const, std::move(v), 0, nullptr, nullptr, nullptr});
}

AuxPtr aux_node(AuxNode::Kind k, AuxPtr a, AuxPtr b = nullptr) {
  return std::make_shared<AuxNode>(AuxNode{k, Value(0), 0, std::move(a), std::move(b), nullptr});
}

Value aux_eval(const AuxNode& n, const Value& x, const Valuation& y);

Value eval_nested(const NestedRef& ref, const Value& x, const Valuation& y) {
  Value point = aux_eval(*ref.args[0], x, y);
  Valuation params;
  for (std::size_t k = 1; k < ref.args.size(); ++k)
    params.set(y_term(k - 1), aux_eval(*ref.args[k], x, y));
  ValueVector out = eval_lode_compressed(ref.file->problem, point, params);
  return out[0];
}

Value aux_eval(const AuxNode& n, const Value& x, const Valuation& y) {
  switch (n.kind) {
    case AuxNode::Const:
      return n.cval;
    case AuxNode::X:
      return x;
    case AuxNode::Param:
      return y.get(y_term(n.param));
    case AuxNode::Sg:
      return sg(aux_eval(*n.a, x, y));
    case AuxNode::Add:
      return aux_eval(*n.a, x, y) + aux_eval(*n.b, x, y);
    case AuxNode::Sub:
      return aux_eval(*n.a, x, y) - aux_eval(*n.b, x, y);
    case AuxNode::Mul: {
      Value va = aux_eval(*n.a, x, y);
      if (va.is_zero()) return va;
      return va * aux_eval(*n.b, x, y);
    }
    case AuxNode::Length:
      return length(aux_eval(*n.a, x, y));
    case AuxNode::Pow2:
      return pow2(aux_eval(*n.a, x, y));
    case AuxNode::Nested:
      return eval_nested(*n.nested, x, y);
  }
  throw Error("corrupt aux expression");
}

void aux_scan(const AuxNode& n, bool& uses_x, std::size_t& max_param, bool& has_param) {
  switch (n.kind) {
    case AuxNode::X:
      uses_x = true;
      return;
    case AuxNode::Param:
      has_param = true;
      max_param = std::max(max_param, n.param);
      return;
    case AuxNode::Const:
      return;
    case AuxNode::Nested:
      for (const AuxPtr& a : n.nested->args) aux_scan(*a, uses_x, max_param, has_param);
      return;
    default:
      if (n.a) aux_scan(*n.a, uses_x, max_param, has_param);
      if (n.b) aux_scan(*n.b, uses_x, max_param, has_param);
      return;
  }
}

// Loader context, for nested references and cycle detection.
struct LoadContext {
  std::string base_dir;
  std::vector<std::string> stack;  // canonical paths being loaded
};

ProblemFile load_with_context(const std::string& path, LoadContext& ctx);

class AuxParser {
 public:
  AuxParser(std::string_view src, int line, LoadContext* ctx)
      : src_(src), line_(line), ctx_(ctx) {}

  AuxPtr parse() {
    AuxPtr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size())
      throw SyntaxError("trailing input in expression", line_, int(pos_) + 1);
    return e;
  }

 private:
  AuxPtr parse_expr() {
    AuxPtr e = parse_term();
    for (;;) {
      skip_ws();
      if (peek() == '+' || peek() == '-') {
        char op = take();
        AuxPtr r = parse_term();
        e = aux_node(op == '+' ? AuxNode::Add : AuxNode::Sub, e, r);
      } else {
        return e;
      }
    }
  }

  AuxPtr parse_term() {
    AuxPtr e = parse_factor();
    for (;;) {
      skip_ws();
      if (peek() == '*') {
        take();
        e = aux_node(AuxNode::Mul, e, parse_factor());
      } else {
        return e;
      }
    }
  }

  AuxPtr parse_factor() {
    skip_ws();
    char c = peek();
    if (c == '(') {
      take();
      AuxPtr e = parse_expr();
      expect(')');
      return e;
    }
    if (c == '-') {
      take();
      AuxPtr inner = parse_factor();
      if (inner->kind == AuxNode::Const) return aux_const(-inner->cval);
      return aux_node(AuxNode::Sub, aux_const(Value(0)), inner);
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return parse_int();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    throw SyntaxError(std::string("unexpected character '") + c + "' in expression",
                      line_, int(pos_) + 1);
  }

  AuxPtr parse_int() {
    std::size_t start = pos_;
    if (peek() == '0' && pos_ + 1 < src_.size() &&
        (src_[pos_ + 1] == 'b' || src_[pos_ + 1] == 'B')) {
      pos_ += 2;
      while (pos_ < src_.size() && (src_[pos_] == '0' || src_[pos_] == '1')) ++pos_;
    } else {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    return aux_const(Value::parse(src_.substr(start, pos_ - start)));
  }

  AuxPtr parse_ident() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' ||
            src_[pos_] == '.'))
      ++pos_;
    std::string name(src_.substr(start, pos_ - start));
    if (name == "x") return aux_node(AuxNode::X, nullptr);
    if (name == "sg") return aux_node(AuxNode::Sg, parse_parenthesized());
    if (name == "length") return aux_node(AuxNode::Length, parse_parenthesized());
    if (name == "pow2") return aux_node(AuxNode::Pow2, parse_parenthesized());
    if (name == "ode") return parse_nested();
    if (name.rfind("y.", 0) == 0) {
      try {
        std::size_t k = std::stoul(name.substr(2));
        auto node = std::make_shared<AuxNode>(
            AuxNode{AuxNode::Param, Value(0), k, nullptr, nullptr, nullptr});
        return node;
      } catch (const std::exception&) {
        throw SyntaxError("malformed parameter '" + name + "'", line_, int(start) + 1);
      }
    }
    throw UnboundTermError(name);
  }

  AuxPtr parse_parenthesized() {
    skip_ws();
    expect('(');
    AuxPtr e = parse_expr();
    expect(')');
    return e;
  }

  AuxPtr parse_nested() {
    if (!ctx_)
      throw SyntaxError("nested problem references are not allowed here", line_, int(pos_) + 1);
    skip_ws();
    expect('(');
    skip_ws();
    if (peek() != '"') throw SyntaxError("expected a quoted path in ode(...)", line_, int(pos_) + 1);
    take();
    std::size_t start = pos_;
    while (pos_ < src_.size() && src_[pos_] != '"') ++pos_;
    if (pos_ == src_.size()) throw SyntaxError("unterminated path string", line_, int(start) + 1);
    std::string rel(src_.substr(start, pos_ - start));
    take();  // closing quote

    auto ref = std::make_shared<NestedRef>();
    for (;;) {
      skip_ws();
      if (peek() == ',') {
        take();
        ref->args.push_back(parse_expr());
      } else {
        break;
      }
    }
    expect(')');
    if (ref->args.empty())
      throw SyntaxError("ode(...) needs at least the evaluation point", line_, int(pos_) + 1);

    fs::path target = fs::path(ctx_->base_dir) / rel;
    ref->file = std::make_shared<ProblemFile>(load_with_context(target.string(), *ctx_));
    return std::make_shared<AuxNode>(
        AuxNode{AuxNode::Nested, Value(0), 0, nullptr, nullptr, std::move(ref)});
  }

  char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }
  char take() { return src_[pos_++]; }
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  void expect(char c) {
    skip_ws();
    if (peek() != c)
      throw SyntaxError(std::string("expected '") + c + "'", line_, int(pos_) + 1);
    take();
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_;
  LoadContext* ctx_;
};

AuxPtr parse_aux_expr(std::string_view src, int line, LoadContext* ctx) {
  return AuxParser(src, line, ctx).parse();
}

// ---------------------------------------------------------------------------
// File parsing

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

struct RawSection {
  std::string keyword;
  std::string body;
  int line;
};

std::vector<RawSection> split_sections(std::string_view text) {
  std::vector<RawSection> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = raw;
    if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    std::size_t sp = s.find_first_of(" \t");
    std::string keyword(sp == std::string_view::npos ? s : s.substr(0, sp));
    std::string body(sp == std::string_view::npos ? "" : trim(s.substr(sp)));
    out.push_back({std::move(keyword), std::move(body), line});
  }
  return out;
}

bool valid_aux_name(std::string_view name) {
  if (name.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(name[0])) && name[0] != '_') return false;
  for (char c : name)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

ProblemFile build_problem(std::string_view text, LoadContext& ctx,
                          const std::string& display_path) {
  std::vector<RawSection> sections = split_sections(text);

  std::optional<std::size_t> dim;
  std::optional<std::string> driver_body;
  int driver_line = 0;
  std::vector<std::pair<std::string, int>> init_lines, rhs_lines;
  std::vector<std::tuple<std::string, std::string, int>> aux_lines;  // name, body, line

  for (RawSection& s : sections) {
    if (s.keyword == "dim") {
      if (dim) throw SyntaxError("duplicate dim section", s.line, 1);
      try {
        dim = std::stoul(s.body);
      } catch (const std::exception&) {
        throw SyntaxError("dim expects a positive integer", s.line, 1);
      }
      if (*dim == 0) throw SyntaxError("dim must be positive", s.line, 1);
    } else if (s.keyword == "driver") {
      if (driver_body) throw SyntaxError("duplicate driver section", s.line, 1);
      driver_body = s.body;
      driver_line = s.line;
    } else if (s.keyword == "init") {
      init_lines.emplace_back(s.body, s.line);
    } else if (s.keyword == "rhs") {
      rhs_lines.emplace_back(s.body, s.line);
    } else if (s.keyword == "aux") {
      std::size_t eq = s.body.find('=');
      if (eq == std::string::npos)
        throw SyntaxError("aux expects '<name> = <expression>'", s.line, 1);
      std::string name(trim(std::string_view(s.body).substr(0, eq)));
      std::string body(trim(std::string_view(s.body).substr(eq + 1)));
      if (!valid_aux_name(name))
        throw SyntaxError("invalid aux name '" + name + "'", s.line, 1);
      aux_lines.emplace_back(std::move(name), std::move(body), s.line);
    } else {
      throw SyntaxError("unknown section '" + s.keyword + "'", s.line, 1);
    }
  }

  if (!dim) throw SyntaxError("missing dim section", 1, 1);
  if (!driver_body) throw SyntaxError("missing driver section", 1, 1);
  if (init_lines.size() != *dim)
    throw SyntaxError("expected " + std::to_string(*dim) + " init lines, found " +
                          std::to_string(init_lines.size()),
                      1, 1);
  if (rhs_lines.size() != *dim)
    throw SyntaxError("expected " + std::to_string(*dim) + " rhs lines, found " +
                          std::to_string(rhs_lines.size()),
                      1, 1);

  ProblemFile out;
  out.source_path = display_path;
  out.problem.dim = *dim;

  std::size_t max_param = 0;
  bool has_param = false;

  // Driver.
  AuxPtr scan_expr;
  if (*driver_body == "length") {
    out.problem.driver = Driver::length();
  } else if (driver_body->rfind("scan:", 0) == 0) {
    scan_expr = parse_aux_expr(trim(std::string_view(*driver_body).substr(5)), driver_line, &ctx);
    bool ux = false;
    aux_scan(*scan_expr, ux, max_param, has_param);
    out.identity_driver = scan_expr->kind == AuxNode::X;
    out.problem.driver = Driver::custom(
        [scan_expr](const Value& x, const Valuation& y) { return aux_eval(*scan_expr, x, y); });
  } else {
    throw SyntaxError("driver must be 'length' or 'scan: <expression>'", driver_line, 1);
  }

  // Initial conditions: parameter terms only.
  std::vector<AuxPtr> init_exprs;
  for (auto& [body, line] : init_lines) {
    AuxPtr e = parse_aux_expr(body, line, &ctx);
    bool ux = false;
    aux_scan(*e, ux, max_param, has_param);
    if (ux) throw SyntaxError("init expressions may not reference x", line, 1);
    init_exprs.push_back(std::move(e));
  }
  out.problem.init = [init_exprs, dim = *dim](const Valuation& y) {
    ValueVector g(dim);
    for (std::size_t i = 0; i < dim; ++i) g[i] = aux_eval(*init_exprs[i], Value(0), y);
    return g;
  };

  // Aux slots.
  std::set<std::string> seen_aux;
  for (auto& [name, body, line] : aux_lines) {
    if (!seen_aux.insert(name).second)
      throw SyntaxError("duplicate aux name '" + name + "'", line, 1);
    AuxPtr e = parse_aux_expr(body, line, &ctx);
    bool ux = false;
    aux_scan(*e, ux, max_param, has_param);
    std::string term = "h." + name;
    out.aux_names.push_back(term);
    out.problem.aux.push_back(NamedAux{
        term, [e](const Value& x, const Valuation& y) { return aux_eval(*e, x, y); }});
  }

  // Right-hand sides: pure sg-polynomials over the declared terms.
  std::set<std::string, std::less<>> allowed;
  allowed.insert(kXTerm);
  for (std::size_t i = 0; i < *dim; ++i) allowed.insert(f_term(i));
  for (const std::string& term : out.aux_names) allowed.insert(term);

  std::vector<Expr> parsed_rhs;
  std::set<std::string> rhs_terms;
  for (auto& [body, line] : rhs_lines) {
    Expr e = [&] {
      try {
        return parse_expr(body);
      } catch (const SyntaxError& err) {
        throw SyntaxError(err.message, line, err.column);
      }
    }();
    e.collect_terms(rhs_terms);
    parsed_rhs.push_back(std::move(e));
  }
  for (const std::string& term : rhs_terms) {
    if (allowed.contains(term)) continue;
    if (term.rfind("y.", 0) == 0) {
      try {
        std::size_t k = std::stoul(term.substr(2));
        has_param = true;
        max_param = std::max(max_param, k);
        continue;
      } catch (const std::exception&) {
      }
    }
    throw UnboundTermError(term);
  }
  out.problem.rhs = std::move(parsed_rhs);

  out.arity = has_param ? max_param + 1 : 0;
  return out;
}

ProblemFile load_with_context(const std::string& path, LoadContext& ctx) {
  std::error_code ec;
  fs::path canonical = fs::weakly_canonical(path, ec);
  std::string key = ec ? path : canonical.string();
  for (const std::string& open : ctx.stack)
    if (open == key) throw IoError("cyclic problem reference through " + path);
  if (ctx.stack.size() >= 16) throw IoError("problem references nested too deeply");

  std::ifstream in(path);
  if (!in) throw IoError("cannot open problem file " + path);
  std::stringstream buf;
  buf << in.rdbuf();

  LoadContext sub{fs::path(path).parent_path().string(), ctx.stack};
  sub.stack.push_back(key);
  ProblemFile out = build_problem(buf.str(), sub, path);
  return out;
}

}  // namespace

ProblemFile load_problem_file(const std::string& path) {
  LoadContext ctx;
  ctx.base_dir = fs::path(path).parent_path().string();
  return load_with_context(path, ctx);
}

ProblemFile parse_problem_text(std::string_view text, const std::string& base_dir) {
  LoadContext ctx;
  ctx.base_dir = base_dir;
  return build_problem(text, ctx, "<text>");
}

std::string render_problem_text(const ProblemText& t) {
  std::ostringstream os;
  for (const std::string& c : t.comments) os << "# " << c << "\n";
  os << "dim " << t.dim << "\n";
  os << "driver " << t.driver << "\n";
  for (const std::string& e : t.init) os << "init " << e << "\n";
  for (const std::string& e : t.rhs) os << "rhs " << e << "\n";
  for (const auto& [name, body] : t.aux) os << "aux " << name << " = " << body << "\n";
  return os.str();
}

}  // namespace odecalc
