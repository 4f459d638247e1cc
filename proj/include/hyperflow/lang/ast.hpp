#pragma once

#include <memory>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hyperflow/probcore/value.hpp"

namespace hyperflow::lang {

// Expressions -----------------------------------------------------------------

enum class UnOp { Neg, Not };
enum class BinOp { Add, Sub, Mul, Div, IntDiv, Mod, Eq, Ne, Lt, Le, Gt, Ge, And, Or, Xor };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Lit {
  Value value;
};
struct Var {
  std::string name;
};
struct Unary {
  UnOp op;
  ExprPtr operand;
};
struct Binary {
  BinOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};
/// `then_e if guard else else_e`
struct CondExpr {
  ExprPtr then_e;
  ExprPtr guard;
  ExprPtr else_e;
};

struct Expr {
  std::variant<Lit, Var, Unary, Binary, CondExpr> node;
};

inline ExprPtr lit(Value v) { return std::make_shared<const Expr>(Expr{Lit{std::move(v)}}); }
inline ExprPtr lit_int(std::int64_t i) { return lit(Value::integer(i)); }
inline ExprPtr lit_num(Rational r) { return lit(Value::number(std::move(r))); }
inline ExprPtr lit_bool(bool b) { return lit(Value::boolean(b)); }
inline ExprPtr var(std::string name) { return std::make_shared<const Expr>(Expr{Var{std::move(name)}}); }
inline ExprPtr unary(UnOp op, ExprPtr e) { return std::make_shared<const Expr>(Expr{Unary{op, std::move(e)}}); }
inline ExprPtr binary(BinOp op, ExprPtr a, ExprPtr b) {
  return std::make_shared<const Expr>(Expr{Binary{op, std::move(a), std::move(b)}});
}
inline ExprPtr cond_expr(ExprPtr then_e, ExprPtr guard, ExprPtr else_e) {
  return std::make_shared<const Expr>(Expr{CondExpr{std::move(then_e), std::move(guard), std::move(else_e)}});
}

// Distribution expressions ----------------------------------------------------

struct DistExpr;
using DistPtr = std::shared_ptr<const DistExpr>;

/// `{e1 @ p1, ..., en @ pn}`
struct ExplicitDist {
  std::vector<std::pair<ExprPtr, ExprPtr>> entries;
};
/// `uniform{e1, ..., en}`
struct UniformDist {
  std::vector<ExprPtr> items;
};
/// `D1 if guard else D2`
struct CondDist {
  DistPtr then_d;
  ExprPtr guard;
  DistPtr else_d;
};

struct DistExpr {
  std::variant<ExplicitDist, UniformDist, CondDist> node;
};

inline DistPtr explicit_dist(std::vector<std::pair<ExprPtr, ExprPtr>> entries) {
  return std::make_shared<const DistExpr>(DistExpr{ExplicitDist{std::move(entries)}});
}
inline DistPtr uniform_dist(std::vector<ExprPtr> items) {
  return std::make_shared<const DistExpr>(DistExpr{UniformDist{std::move(items)}});
}
inline DistPtr cond_dist(DistPtr then_d, ExprPtr guard, DistPtr else_d) {
  return std::make_shared<const DistExpr>(DistExpr{CondDist{std::move(then_d), std::move(guard), std::move(else_d)}});
}

// Declarations ----------------------------------------------------------------

struct Visibility {
  enum class Kind { Visible, Hidden, Agents };
  Kind kind = Kind::Hidden;
  std::set<std::string> agents;

  static Visibility visible() { return {Kind::Visible, {}}; }
  static Visibility hidden() { return {Kind::Hidden, {}}; }
  static Visibility of_agents(std::set<std::string> a) { return {Kind::Agents, std::move(a)}; }

  friend bool operator==(const Visibility&, const Visibility&) = default;
};

struct VarDecl {
  std::string name;
  std::vector<Value> domain;
  Visibility visibility;

  friend bool operator==(const VarDecl&, const VarDecl&) = default;
};

// Statements ------------------------------------------------------------------

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

struct Skip {};
/// `x := e`
struct Assign {
  std::string var;
  ExprPtr value;
};
/// `x <- D`
struct Choose {
  std::string var;
  DistPtr dist;
};
/// `(x ^ y) := e`, the exclusive-or split of a boolean.
struct XorAssign {
  std::string first;
  std::string second;
  ExprPtr value;
};
struct Seq {
  StmtPtr first;
  StmtPtr second;
};
/// `P [q] Q`: P with probability q.
struct Choice {
  StmtPtr left;
  ExprPtr prob;
  StmtPtr right;
};
struct If {
  ExprPtr guard;
  StmtPtr then_s;
  StmtPtr else_s;
};
struct Atomic {
  StmtPtr body;
};
struct Reveal {
  ExprPtr value;
};

struct LocalInit {
  enum class Kind { Assign, Choose, UniformDefault };
  Kind kind = Kind::Assign;
  ExprPtr value;
  DistPtr dist;
};

struct LocalDecl {
  VarDecl decl;
  LocalInit init;
};

/// `local decls in { body }`
struct Local {
  std::vector<LocalDecl> decls;
  StmtPtr body;
};

struct Stmt {
  std::variant<Skip, Assign, Choose, XorAssign, Seq, Choice, If, Atomic, Reveal, Local> node;
};

inline StmtPtr make_stmt(auto node) { return std::make_shared<const Stmt>(Stmt{std::move(node)}); }
inline StmtPtr skip() { return make_stmt(Skip{}); }
inline StmtPtr assign(std::string v, ExprPtr e) { return make_stmt(Assign{std::move(v), std::move(e)}); }
inline StmtPtr choose(std::string v, DistPtr d) { return make_stmt(Choose{std::move(v), std::move(d)}); }
inline StmtPtr seq(StmtPtr a, StmtPtr b) { return make_stmt(Seq{std::move(a), std::move(b)}); }
inline StmtPtr choice(StmtPtr a, ExprPtr q, StmtPtr b) { return make_stmt(Choice{std::move(a), std::move(q), std::move(b)}); }
inline StmtPtr if_stmt(ExprPtr g, StmtPtr a, StmtPtr b) { return make_stmt(If{std::move(g), std::move(a), std::move(b)}); }
inline StmtPtr atomic(StmtPtr body) { return make_stmt(Atomic{std::move(body)}); }
inline StmtPtr reveal(ExprPtr e) { return make_stmt(Reveal{std::move(e)}); }

/// Right-nested sequence of the given statements (skip when empty).
inline StmtPtr seq_all(const std::vector<StmtPtr>& parts) {
  if (parts.empty()) return skip();
  StmtPtr out = parts.back();
  for (std::size_t i = parts.size() - 1; i-- > 0;) out = seq(parts[i], out);
  return out;
}

struct Program {
  std::vector<std::string> agents;
  std::vector<VarDecl> globals;
  StmtPtr body;
};

// Structural equality ---------------------------------------------------------

inline bool equal(const Expr& a, const Expr& b);
inline bool equal(const DistExpr& a, const DistExpr& b);
inline bool equal(const Stmt& a, const Stmt& b);

inline bool equal_ptr(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return equal(*a, *b);
}
inline bool equal_ptr(const DistPtr& a, const DistPtr& b) {
  if (!a || !b) return !a && !b;
  return equal(*a, *b);
}
inline bool equal_ptr(const StmtPtr& a, const StmtPtr& b) {
  if (!a || !b) return !a && !b;
  return equal(*a, *b);
}

inline bool equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Lit>) return x.value == y.value;
        else if constexpr (std::is_same_v<T, Var>) return x.name == y.name;
        else if constexpr (std::is_same_v<T, Unary>) return x.op == y.op && equal_ptr(x.operand, y.operand);
        else if constexpr (std::is_same_v<T, Binary>)
          return x.op == y.op && equal_ptr(x.lhs, y.lhs) && equal_ptr(x.rhs, y.rhs);
        else
          return equal_ptr(x.then_e, y.then_e) && equal_ptr(x.guard, y.guard) && equal_ptr(x.else_e, y.else_e);
      },
      a.node);
}

inline bool equal(const DistExpr& a, const DistExpr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, ExplicitDist>) {
          if (x.entries.size() != y.entries.size()) return false;
          for (std::size_t i = 0; i < x.entries.size(); ++i)
            if (!equal_ptr(x.entries[i].first, y.entries[i].first) ||
                !equal_ptr(x.entries[i].second, y.entries[i].second))
              return false;
          return true;
        } else if constexpr (std::is_same_v<T, UniformDist>) {
          if (x.items.size() != y.items.size()) return false;
          for (std::size_t i = 0; i < x.items.size(); ++i)
            if (!equal_ptr(x.items[i], y.items[i])) return false;
          return true;
        } else {
          return equal_ptr(x.then_d, y.then_d) && equal_ptr(x.guard, y.guard) && equal_ptr(x.else_d, y.else_d);
        }
      },
      a.node);
}

inline bool equal(const LocalInit& a, const LocalInit& b) {
  return a.kind == b.kind && equal_ptr(a.value, b.value) && equal_ptr(a.dist, b.dist);
}

inline bool equal(const Stmt& a, const Stmt& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Skip>) return true;
        else if constexpr (std::is_same_v<T, Assign>) return x.var == y.var && equal_ptr(x.value, y.value);
        else if constexpr (std::is_same_v<T, Choose>) return x.var == y.var && equal_ptr(x.dist, y.dist);
        else if constexpr (std::is_same_v<T, XorAssign>)
          return x.first == y.first && x.second == y.second && equal_ptr(x.value, y.value);
        else if constexpr (std::is_same_v<T, Seq>) return equal_ptr(x.first, y.first) && equal_ptr(x.second, y.second);
        else if constexpr (std::is_same_v<T, Choice>)
          return equal_ptr(x.left, y.left) && equal_ptr(x.prob, y.prob) && equal_ptr(x.right, y.right);
        else if constexpr (std::is_same_v<T, If>)
          return equal_ptr(x.guard, y.guard) && equal_ptr(x.then_s, y.then_s) && equal_ptr(x.else_s, y.else_s);
        else if constexpr (std::is_same_v<T, Atomic>) return equal_ptr(x.body, y.body);
        else if constexpr (std::is_same_v<T, Reveal>) return equal_ptr(x.value, y.value);
        else {
          if (x.decls.size() != y.decls.size()) return false;
          for (std::size_t i = 0; i < x.decls.size(); ++i)
            if (!(x.decls[i].decl == y.decls[i].decl) || !equal(x.decls[i].init, y.decls[i].init)) return false;
          return equal_ptr(x.body, y.body);
        }
      },
      a.node);
}

inline bool equal(const Program& a, const Program& b) {
  return a.agents == b.agents && a.globals == b.globals && equal_ptr(a.body, b.body);
}

/// Number of statement nodes (used to check that views preserve structure).
inline std::size_t node_count(const Stmt& s) {
  return std::visit(
      [](const auto& x) -> std::size_t {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Seq>) return 1 + node_count(*x.first) + node_count(*x.second);
        else if constexpr (std::is_same_v<T, Choice>) return 1 + node_count(*x.left) + node_count(*x.right);
        else if constexpr (std::is_same_v<T, If>) return 1 + node_count(*x.then_s) + node_count(*x.else_s);
        else if constexpr (std::is_same_v<T, Atomic>) return 1 + node_count(*x.body);
        else if constexpr (std::is_same_v<T, Local>) return 1 + node_count(*x.body);
        else return 1;
      },
      s.node);
}

}  // namespace hyperflow::lang
