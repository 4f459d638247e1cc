#pragma once

#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hyperflow/error.hpp"
#include "hyperflow/lang/ast.hpp"

namespace hyperflow::lang {

// Lexer -----------------------------------------------------------------------

enum class Tok {
  Ident,
  Int,
  Decimal,
  Keyword,
  Punct,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int col = 1;
};

inline const std::set<std::string, std::less<>>& keywords() {
  static const std::set<std::string, std::less<>> k = {
      "skip", "if",    "then", "else", "fi",  "reveal", "atomic", "local", "in",     "vis",  "hid",
      "uniform", "true", "false", "and", "or", "not",   "xor",    "div",   "mod", "agents", "bool"};
  return k;
}

inline bool is_keyword(std::string_view s) { return keywords().count(s) != 0; }

[[noreturn]] inline void syntax_error(int line, int col, const std::string& msg) {
  throw Error(Errc::SyntaxError, std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
}

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  static const char* puncts[] = {":=", "<-", "<=", ">=", "!=", "..", ";", ",", "(", ")", "{", "}", "[",
                                 "]",  "@",  ":",  "=",  "<",  ">",  "+", "-", "*", "/", "^"};
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '\''))
        ++j;
      t.text = std::string(src.substr(i, j - i));
      t.kind = is_keyword(t.text) ? Tok::Keyword : Tok::Ident;
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Tok::Int;
      if (j + 1 < src.size() && src[j] == '.' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        t.kind = Tok::Decimal;
      }
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    bool matched = false;
    for (const char* p : puncts) {
      std::string_view ps(p);
      if (src.substr(i, ps.size()) == ps) {
        t.kind = Tok::Punct;
        t.text = std::string(ps);
        advance(ps.size());
        out.push_back(std::move(t));
        matched = true;
        break;
      }
    }
    if (!matched) syntax_error(line, col, std::string("unexpected character '") + c + "'");
  }
  Token end;
  end.kind = Tok::End;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

// Parser ----------------------------------------------------------------------

struct ParseOptions {
  /// Accept `local` declarations without an initializer (uniform default).
  bool allow_uniform_default = false;
};

namespace detail {

class Parser {
 public:
  Parser(std::string_view src, ParseOptions opts) : toks_(tokenize(src)), opts_(opts) {}

  Program program() {
    Program p;
    while (true) {
      if (at_kw("agents")) {
        next();
        do {
          p.agents.push_back(ident("agent name"));
        } while (accept(","));
        expect(";");
      } else if (at_kw("vis") || at_kw("hid")) {
        Visibility vis = visibility();
        std::vector<std::string> names = name_list();
        expect(":");
        std::vector<Value> dom = domain();
        expect(";");
        for (auto& n : names) p.globals.push_back(VarDecl{n, dom, vis});
      } else {
        break;
      }
    }
    if (peek().kind == Tok::End) {
      p.body = skip();
    } else {
      p.body = stmt();
    }
    if (peek().kind != Tok::End) fail("expected end of input, found '" + peek().text + "'");
    return p;
  }

  StmtPtr stmt_only() {
    StmtPtr s = stmt();
    if (peek().kind != Tok::End) fail("expected end of input, found '" + peek().text + "'");
    return s;
  }

  ExprPtr expr_only() {
    ExprPtr e = expr();
    if (peek().kind != Tok::End) fail("expected end of input, found '" + peek().text + "'");
    return e;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  ParseOptions opts_;

  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool at(std::string_view punct) const { return peek().kind == Tok::Punct && peek().text == punct; }
  bool at_kw(std::string_view kw) const { return peek().kind == Tok::Keyword && peek().text == kw; }
  bool accept(std::string_view punct) {
    if (!at(punct)) return false;
    next();
    return true;
  }
  bool accept_kw(std::string_view kw) {
    if (!at_kw(kw)) return false;
    next();
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const { syntax_error(peek().line, peek().col, msg); }
  void expect(std::string_view punct) {
    if (!accept(punct)) fail("expected '" + std::string(punct) + "', found '" + describe(peek()) + "'");
  }
  void expect_kw(std::string_view kw) {
    if (!accept_kw(kw)) fail("expected '" + std::string(kw) + "', found '" + describe(peek()) + "'");
  }
  static std::string describe(const Token& t) { return t.kind == Tok::End ? "end of input" : t.text; }
  std::string ident(const char* what) {
    if (peek().kind != Tok::Ident) fail(std::string("expected ") + what + ", found '" + describe(peek()) + "'");
    return next().text;
  }

  // Declarations.

  Visibility visibility() {
    if (accept_kw("hid")) return Visibility::hidden();
    expect_kw("vis");
    if (accept("{")) {
      std::set<std::string> agents;
      if (!at("}")) {
        do {
          agents.insert(ident("agent name"));
        } while (accept(","));
      }
      expect("}");
      return Visibility::of_agents(std::move(agents));
    }
    return Visibility::visible();
  }

  std::vector<std::string> name_list() {
    std::vector<std::string> names;
    do {
      names.push_back(ident("variable name"));
    } while (accept(","));
    return names;
  }

  Value domain_literal() {
    if (accept_kw("true")) return Value::boolean(true);
    if (accept_kw("false")) return Value::boolean(false);
    if (peek().kind == Tok::Ident) return Value::atom(next().text);
    bool neg = accept("-");
    Rational r = number_token();
    if (accept("/")) {
      Rational d = number_token();
      if (d == 0) fail("zero denominator in domain literal");
      r /= d;
    }
    return Value::number(neg ? Rational(-r) : r);
  }

  Rational number_token() {
    if (peek().kind != Tok::Int && peek().kind != Tok::Decimal)
      fail("expected a literal, found '" + describe(peek()) + "'");
    return parse_rational(next().text);
  }

  std::vector<Value> domain() {
    if (accept_kw("bool")) return {Value::boolean(false), Value::boolean(true)};
    expect("{");
    std::vector<Value> vals;
    Value first = domain_literal();
    if (accept("..")) {
      Value last = domain_literal();
      if (!first.is_integer() || !last.is_integer()) fail("range bounds must be integers");
      const BigInt lo = numerator(first.as_number());
      const BigInt hi = numerator(last.as_number());
      if (hi < lo) fail("empty range");
      if (hi - lo > 100000) fail("range too large");
      for (BigInt x = lo; x <= hi; ++x) vals.push_back(Value::number(Rational(x)));
    } else {
      vals.push_back(first);
      while (accept(",")) vals.push_back(domain_literal());
    }
    expect("}");
    return vals;
  }

  // Statements.

  StmtPtr stmt() {
    std::vector<StmtPtr> parts;
    parts.push_back(choice_stmt());
    while (accept(";")) {
      if (stmt_terminator()) break;
      parts.push_back(choice_stmt());
    }
    return seq_all(parts);
  }

  bool stmt_terminator() const {
    return peek().kind == Tok::End || at("}") || at_kw("fi") || at_kw("else");
  }

  StmtPtr choice_stmt() {
    StmtPtr left = prim_stmt();
    while (accept("[")) {
      ExprPtr q = expr();
      expect("]");
      StmtPtr right = prim_stmt();
      left = choice(left, q, right);
    }
    return left;
  }

  StmtPtr prim_stmt() {
    if (accept_kw("skip")) return skip();
    if (accept_kw("if")) {
      ExprPtr g = expr();
      expect_kw("then");
      StmtPtr t = stmt();
      StmtPtr e = skip();
      if (accept_kw("else")) e = stmt();
      expect_kw("fi");
      return if_stmt(g, t, e);
    }
    if (accept_kw("reveal")) return reveal(expr());
    if (accept_kw("atomic")) {
      expect("{");
      StmtPtr b = stmt();
      expect("}");
      return atomic(b);
    }
    if (accept_kw("local")) return local_block();
    if (accept("{")) {
      StmtPtr b = stmt();
      expect("}");
      return b;
    }
    if (at("(")) {
      next();
      std::string a = ident("variable name");
      expect("^");
      std::string b = ident("variable name");
      expect(")");
      expect(":=");
      return make_stmt(XorAssign{a, b, expr()});
    }
    if (peek().kind == Tok::Ident) {
      std::string name = next().text;
      if (accept(":=")) return assign(name, expr());
      if (accept("<-")) return choose(name, dist_expr());
      fail("expected ':=' or '<-' after '" + name + "'");
    }
    fail("expected a statement, found '" + describe(peek()) + "'");
  }

  StmtPtr local_block() {
    std::vector<LocalDecl> decls;
    do {
      Visibility vis = visibility();
      std::vector<std::string> names = name_list();
      expect(":");
      std::vector<Value> dom = domain();
      LocalInit init;
      if (accept(":=")) {
        init.kind = LocalInit::Kind::Assign;
        init.value = expr();
      } else if (accept("<-")) {
        init.kind = LocalInit::Kind::Choose;
        init.dist = dist_expr();
      } else if (opts_.allow_uniform_default) {
        init.kind = LocalInit::Kind::UniformDefault;
      } else {
        fail("local variable '" + names.front() + "' needs an initializer (':=' or '<-')");
      }
      for (auto& n : names) decls.push_back(LocalDecl{VarDecl{n, dom, vis}, init});
    } while (accept(";"));
    expect_kw("in");
    expect("{");
    StmtPtr body = stmt();
    expect("}");
    return make_stmt(Local{std::move(decls), body});
  }

  // Distribution expressions.

  DistPtr dist_expr() {
    DistPtr d = dist_primary();
    while (at("[")) {
      const std::size_t saved = pos_;
      next();
      ExprPtr p = expr();
      expect("]");
      std::optional<DistPtr> e;
      if (at_kw("uniform") || at("{") || at("(")) {
        const std::size_t operand = pos_;
        try {
          e = dist_primary();
          if (at(":=")) e.reset();
        } catch (const Error& err) {
          if (err.code() != Errc::SyntaxError) throw;
        }
        if (!e) pos_ = operand;
      }
      // Not a mixture: the bracket belongs to a statement choice.
      if (!e) {
        pos_ = saved;
        break;
      }
      d = mix(d, p, *e);
    }
    if (accept_kw("if")) {
      ExprPtr g = or_expr();
      expect_kw("else");
      DistPtr e = dist_expr();
      return cond_dist(d, g, e);
    }
    return d;
  }

  /// `a [p] b` over distributions, pushed through conditionals and
  /// flattened into explicit entries.
  static DistPtr mix(const DistPtr& a, const ExprPtr& p, const DistPtr& b) {
    ExprPtr q;
    if (const auto* l = std::get_if<Lit>(&p->node); l && l->value.is_number())
      q = lit_num(Rational(1) - l->value.as_number());
    else
      q = binary(BinOp::Sub, lit_int(1), p);
    if (const auto* c = std::get_if<CondDist>(&a->node)) return cond_dist(mix(c->then_d, p, b), c->guard, mix(c->else_d, p, b));
    if (const auto* c = std::get_if<CondDist>(&b->node)) return cond_dist(mix(a, p, c->then_d), c->guard, mix(a, p, c->else_d));
    std::vector<std::pair<ExprPtr, ExprPtr>> entries;
    auto scaled = [&](const DistPtr& d, const ExprPtr& w) {
      if (const auto* u = std::get_if<UniformDist>(&d->node)) {
        const ExprPtr each = lit_num(Rational(1, static_cast<long>(u->items.size())));
        for (const auto& v : u->items) entries.emplace_back(v, times(w, each));
      } else {
        for (const auto& [v, r] : std::get<ExplicitDist>(d->node).entries) entries.emplace_back(v, times(w, r));
      }
    };
    scaled(a, p);
    scaled(b, q);
    return explicit_dist(std::move(entries));
  }

  static ExprPtr times(const ExprPtr& a, const ExprPtr& b) {
    const auto* x = std::get_if<Lit>(&a->node);
    const auto* y = std::get_if<Lit>(&b->node);
    if (x && y && x->value.is_number() && y->value.is_number()) return lit_num(x->value.as_number() * y->value.as_number());
    return binary(BinOp::Mul, a, b);
  }

  DistPtr dist_primary() {
    if (accept_kw("uniform")) {
      expect("{");
      std::vector<ExprPtr> items;
      do {
        items.push_back(expr());
      } while (accept(","));
      expect("}");
      return uniform_dist(std::move(items));
    }
    if (at("(")) {
      // Either a parenthesized distribution or an expression operand of
      // the infix form; try the former and fall back.
      const std::size_t saved = pos_;
      try {
        next();
        DistPtr d = dist_expr();
        expect(")");
        if (peek().kind == Tok::End || at(";") || at(")") || at("}") || at("[") || at_kw("if") || at_kw("else") ||
            at_kw("fi") || at_kw("in"))
          return d;
      } catch (const Error& e) {
        if (e.code() != Errc::SyntaxError) throw;
      }
      pos_ = saved;
    }
    if (accept("{")) {
      std::vector<std::pair<ExprPtr, ExprPtr>> entries;
      do {
        ExprPtr v = expr();
        expect("@");
        ExprPtr p = expr();
        entries.emplace_back(v, p);
      } while (accept(","));
      expect("}");
      return explicit_dist(std::move(entries));
    }
    ExprPtr a = or_expr();
    if (accept("[")) {
      ExprPtr p = expr();
      expect("]");
      ExprPtr b = or_expr();
      ExprPtr q;
      if (const auto* l = std::get_if<Lit>(&p->node); l && l->value.is_number())
        q = lit_num(Rational(1) - l->value.as_number());
      else
        q = binary(BinOp::Sub, lit_int(1), p);
      return explicit_dist({{a, p}, {b, q}});
    }
    return explicit_dist({{a, lit_int(1)}});
  }

  // Expressions.

  ExprPtr expr() {
    ExprPtr a = or_expr();
    if (accept_kw("if")) {
      ExprPtr g = or_expr();
      expect_kw("else");
      ExprPtr b = expr();
      return cond_expr(a, g, b);
    }
    return a;
  }

  ExprPtr or_expr() {
    ExprPtr a = xor_expr();
    while (accept_kw("or")) a = binary(BinOp::Or, a, xor_expr());
    return a;
  }
  ExprPtr xor_expr() {
    ExprPtr a = and_expr();
    while (accept_kw("xor")) a = binary(BinOp::Xor, a, and_expr());
    return a;
  }
  ExprPtr and_expr() {
    ExprPtr a = not_expr();
    while (accept_kw("and")) a = binary(BinOp::And, a, not_expr());
    return a;
  }
  ExprPtr not_expr() {
    if (accept_kw("not")) return unary(UnOp::Not, not_expr());
    return cmp_expr();
  }
  ExprPtr cmp_expr() {
    ExprPtr a = add_expr();
    static const std::pair<const char*, BinOp> ops[] = {{"=", BinOp::Eq},  {"!=", BinOp::Ne}, {"<=", BinOp::Le},
                                                        {">=", BinOp::Ge}, {"<", BinOp::Lt},  {">", BinOp::Gt}};
    for (const auto& [s, op] : ops) {
      if (accept(s)) return binary(op, a, add_expr());
    }
    return a;
  }
  ExprPtr add_expr() {
    ExprPtr a = mul_expr();
    while (true) {
      if (accept("+"))
        a = binary(BinOp::Add, a, mul_expr());
      else if (accept("-"))
        a = binary(BinOp::Sub, a, mul_expr());
      else
        return a;
    }
  }
  ExprPtr mul_expr() {
    ExprPtr a = unary_expr();
    while (true) {
      if (accept("*")) {
        a = binary(BinOp::Mul, a, unary_expr());
      } else if (at("/")) {
        const Token& slash = next();
        ExprPtr b = unary_expr();
        a = fold_division(a, b, slash);
      } else if (accept_kw("div")) {
        a = binary(BinOp::IntDiv, a, unary_expr());
      } else if (accept_kw("mod")) {
        a = binary(BinOp::Mod, a, unary_expr());
      } else {
        return a;
      }
    }
  }

  // Numeric literals joined by '/' become a single rational literal.
  ExprPtr fold_division(const ExprPtr& a, const ExprPtr& b, const Token& at_tok) {
    const auto* la = std::get_if<Lit>(&a->node);
    const auto* lb = std::get_if<Lit>(&b->node);
    if (la && lb && la->value.is_number() && lb->value.is_number()) {
      if (lb->value.as_number() == 0) syntax_error(at_tok.line, at_tok.col, "division by the constant 0");
      return lit_num(la->value.as_number() / lb->value.as_number());
    }
    return binary(BinOp::Div, a, b);
  }

  ExprPtr unary_expr() {
    if (accept("-")) {
      ExprPtr e = unary_expr();
      if (const auto* l = std::get_if<Lit>(&e->node); l && l->value.is_number())
        return lit_num(-l->value.as_number());
      return unary(UnOp::Neg, e);
    }
    return primary();
  }

  ExprPtr primary() {
    const Token& t = peek();
    if (t.kind == Tok::Int || t.kind == Tok::Decimal) return lit_num(parse_rational(next().text));
    if (accept_kw("true")) return lit_bool(true);
    if (accept_kw("false")) return lit_bool(false);
    if (t.kind == Tok::Ident) return var(next().text);
    if (accept("(")) {
      ExprPtr e = expr();
      expect(")");
      return e;
    }
    fail("expected an expression, found '" + describe(t) + "'");
  }
};

}  // namespace detail

/// Syntax only: identifiers stay `Var` nodes until atoms are resolved.
inline Program parse_syntax(std::string_view src, const ParseOptions& opts = {}) {
  return detail::Parser(src, opts).program();
}

inline StmtPtr parse_stmt_syntax(std::string_view src, const ParseOptions& opts = {}) {
  return detail::Parser(src, opts).stmt_only();
}

inline ExprPtr parse_expr_syntax(std::string_view src) { return detail::Parser(src, {}).expr_only(); }

}  // namespace hyperflow::lang
