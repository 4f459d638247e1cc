#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "hyperflow/lang/ast.hpp"
#include "hyperflow/lang/expr_eval.hpp"
#include "hyperflow/lang/transform.hpp"
#include "hyperflow/semantics/layout.hpp"

namespace hyperflow::semantics {

/// Position of a variable in the visible or hidden digit vector.
struct Slot {
  bool visible = false;
  std::uint32_t index = 0;
};

struct CExpr;
using CExprPtr = std::shared_ptr<const CExpr>;

struct CExpr {
  enum class Kind { Lit, Slot, Unary, Binary, Cond };
  Kind kind = Kind::Lit;
  Value value;
  Slot slot;
  lang::UnOp uop = lang::UnOp::Neg;
  lang::BinOp bop = lang::BinOp::Add;
  CExprPtr a, b, c;
};

struct CDist {
  enum class Kind { Explicit, Uniform, Cond };
  Kind kind = Kind::Explicit;
  std::vector<std::pair<CExprPtr, CExprPtr>> entries;
  std::vector<CExprPtr> items;
  std::shared_ptr<const CDist> then_d, else_d;
  CExprPtr guard;
};
using CDistPtr = std::shared_ptr<const CDist>;

struct CStmt;
using CStmtPtr = std::shared_ptr<const CStmt>;

struct CStmt {
  enum class Kind { Skip, Assign, Choose, Seq, Choice, If, Atomic, Local };
  Kind kind = Kind::Skip;
  Slot target;
  CExprPtr expr;  // assigned value, choice probability or guard
  CDistPtr dist;
  CStmtPtr first, second;
  // Local blocks: layout inside the block and the initialization statement.
  LayoutPtr inner;
  CStmtPtr init;
  std::string text;  // source of the original statement, for messages
};

/// Digit vectors of one state under a layout.
struct Env {
  const Layout* layout = nullptr;
  std::vector<std::uint32_t> v, h;

  Env(const Layout& l, JointKey k) : layout(&l), v(l.decode(true, k.v)), h(l.decode(false, k.h)) {}

  const Value& get(Slot s) const {
    return layout->part(s.visible)[s.index].domain[(s.visible ? v : h)[s.index]];
  }
  JointKey key() const { return {layout->encode(true, v), layout->encode(false, h)}; }
};

inline Value eval(const CExpr& e, const Env& env) {
  switch (e.kind) {
    case CExpr::Kind::Lit: return e.value;
    case CExpr::Kind::Slot: return env.get(e.slot);
    case CExpr::Kind::Unary: return lang::apply_unary(e.uop, eval(*e.a, env));
    case CExpr::Kind::Binary: {
      Value l = eval(*e.a, env);
      if ((e.bop == lang::BinOp::And || e.bop == lang::BinOp::Or) && l.is_bool() &&
          l.as_bool() == (e.bop == lang::BinOp::Or))
        return l;
      return lang::apply_binary(e.bop, l, eval(*e.b, env));
    }
    case CExpr::Kind::Cond: {
      Value g = eval(*e.b, env);
      if (!g.is_bool()) throw Error(Errc::TypeMismatch, "conditional guard must be boolean");
      return eval(g.as_bool() ? *e.a : *e.c, env);
    }
  }
  throw Error(Errc::Internal, "unknown expression kind");
}

inline Rational eval_number(const CExpr& e, const Env& env, const char* what) {
  Value x = eval(e, env);
  if (!x.is_number()) throw Error(Errc::TypeMismatch, std::string(what) + " must be a number");
  return x.as_number();
}

inline bool eval_bool(const CExpr& e, const Env& env) {
  Value x = eval(e, env);
  if (!x.is_bool()) throw Error(Errc::TypeMismatch, "condition must be boolean");
  return x.as_bool();
}

/// Weighted values of a distribution expression in one state. Weights are
/// checked to be nonnegative and to sum to exactly 1.
inline std::vector<std::pair<Value, Rational>> eval_dist(const CDist& d, const Env& env, const std::string& text) {
  switch (d.kind) {
    case CDist::Kind::Cond: return eval_dist(eval_bool(*d.guard, env) ? *d.then_d : *d.else_d, env, text);
    case CDist::Kind::Uniform: {
      std::vector<std::pair<Value, Rational>> out;
      const Rational w(1, static_cast<long>(d.items.size()));
      for (const auto& it : d.items) out.emplace_back(eval(*it, env), w);
      return out;
    }
    case CDist::Kind::Explicit: {
      std::vector<std::pair<Value, Rational>> out;
      Rational total = 0;
      for (const auto& [v, p] : d.entries) {
        Rational w = eval_number(*p, env, "probability");
        if (w < 0)
          throw Error(Errc::DistNotOneSumming, "negative weight " + to_string(w) + " in '" + text + "' at state " +
                                                   env.layout->text(true, env.key().v) + " | " +
                                                   env.layout->text(false, env.key().h));
        total += w;
        if (w != 0) out.emplace_back(eval(*v, env), std::move(w));
      }
      if (total != 1)
        throw Error(Errc::DistNotOneSumming, "weights of '" + text + "' sum to " + to_string(total) + " at state " +
                                                 env.layout->text(true, env.key().v) + " | " +
                                                 env.layout->text(false, env.key().h));
      return out;
    }
  }
  throw Error(Errc::Internal, "unknown distribution kind");
}

inline std::uint32_t domain_index(const Layout& l, Slot s, const Value& x) {
  if (auto i = l.index_of(s.visible, s.index, x)) return *i;
  throw Error(Errc::ValueOutOfDomain,
              to_string(x) + " is outside the domain of '" + l.part(s.visible)[s.index].name + "'");
}

inline Rational choice_probability(const CStmt& s, const Env& env) {
  Rational q = eval_number(*s.expr, env, "choice probability");
  if (q < 0 || q > 1)
    throw Error(Errc::DistNotOneSumming, "choice probability " + to_string(q) + " of '" + s.text + "' is outside [0,1]");
  return q;
}

namespace detail {

class Compiler {
 public:
  explicit Compiler(LayoutPtr layout) : layout_(std::move(layout)) {
    for (std::uint32_t i = 0; i < layout_->visible().size(); ++i) scope_[layout_->visible()[i].name] = {true, i};
    for (std::uint32_t i = 0; i < layout_->hidden().size(); ++i) scope_[layout_->hidden()[i].name] = {false, i};
  }

  CExprPtr expr(const lang::Expr& e) const {
    auto out = std::make_shared<CExpr>();
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, lang::Lit>) {
            out->kind = CExpr::Kind::Lit;
            out->value = n.value;
          } else if constexpr (std::is_same_v<T, lang::Var>) {
            out->kind = CExpr::Kind::Slot;
            out->slot = lookup(n.name);
          } else if constexpr (std::is_same_v<T, lang::Unary>) {
            out->kind = CExpr::Kind::Unary;
            out->uop = n.op;
            out->a = expr(*n.operand);
          } else if constexpr (std::is_same_v<T, lang::Binary>) {
            out->kind = CExpr::Kind::Binary;
            out->bop = n.op;
            out->a = expr(*n.lhs);
            out->b = expr(*n.rhs);
          } else {
            out->kind = CExpr::Kind::Cond;
            out->a = expr(*n.then_e);
            out->b = expr(*n.guard);
            out->c = expr(*n.else_e);
          }
        },
        e.node);
    return out;
  }

  CDistPtr dist(const lang::DistExpr& d) const {
    auto out = std::make_shared<CDist>();
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, lang::ExplicitDist>) {
            out->kind = CDist::Kind::Explicit;
            for (const auto& [v, p] : n.entries) out->entries.emplace_back(expr(*v), expr(*p));
          } else if constexpr (std::is_same_v<T, lang::UniformDist>) {
            out->kind = CDist::Kind::Uniform;
            for (const auto& v : n.items) out->items.push_back(expr(*v));
          } else {
            out->kind = CDist::Kind::Cond;
            out->then_d = dist(*n.then_d);
            out->guard = expr(*n.guard);
            out->else_d = dist(*n.else_d);
          }
        },
        d.node);
    return out;
  }

  CStmtPtr stmt(const lang::Stmt& s) {
    auto out = std::make_shared<CStmt>();
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, lang::Skip>) {
            out->kind = CStmt::Kind::Skip;
          } else if constexpr (std::is_same_v<T, lang::Assign>) {
            out->kind = CStmt::Kind::Assign;
            out->target = lookup(n.var);
            out->expr = expr(*n.value);
            out->text = lang::to_source(s);
          } else if constexpr (std::is_same_v<T, lang::Choose>) {
            out->kind = CStmt::Kind::Choose;
            out->target = lookup(n.var);
            out->dist = dist(*n.dist);
            out->text = lang::to_source(*n.dist);
          } else if constexpr (std::is_same_v<T, lang::Seq>) {
            out->kind = CStmt::Kind::Seq;
            out->first = stmt(*n.first);
            out->second = stmt(*n.second);
          } else if constexpr (std::is_same_v<T, lang::Choice>) {
            out->kind = CStmt::Kind::Choice;
            out->first = stmt(*n.left);
            out->expr = expr(*n.prob);
            out->second = stmt(*n.right);
            out->text = lang::to_source(*n.prob);
          } else if constexpr (std::is_same_v<T, lang::If>) {
            out->kind = CStmt::Kind::If;
            out->expr = expr(*n.guard);
            out->first = stmt(*n.then_s);
            out->second = stmt(*n.else_s);
          } else if constexpr (std::is_same_v<T, lang::Atomic>) {
            out->kind = CStmt::Kind::Atomic;
            out->first = stmt(*n.body);
          } else if constexpr (std::is_same_v<T, lang::Local>) {
            local(n, *out);
          } else {
            throw Error(Errc::UnsupportedConstruct, "statement must be desugared before evaluation");
          }
        },
        s.node);
    return out;
  }

 private:
  LayoutPtr layout_;
  std::map<std::string, Slot> scope_;

  Slot lookup(const std::string& name) const {
    auto it = scope_.find(name);
    if (it == scope_.end()) throw Error(Errc::UndeclaredVariable, "'" + name + "' is not declared");
    return it->second;
  }

  void local(const lang::Local& n, CStmt& out) {
    out.kind = CStmt::Kind::Local;
    auto inner = std::make_shared<Layout>(*layout_);
    const LayoutPtr saved_layout = layout_;
    const auto saved_scope = scope_;
    std::vector<lang::StmtPtr> inits;
    for (const auto& d : n.decls) {
      VarInfo info = Layout::from_decl(d.decl);
      inner->add(info);
      scope_[info.name] = {info.visible, static_cast<std::uint32_t>(inner->part(info.visible).size() - 1)};
      switch (d.init.kind) {
        case lang::LocalInit::Kind::Assign: inits.push_back(lang::assign(d.decl.name, d.init.value)); break;
        case lang::LocalInit::Kind::Choose: inits.push_back(lang::choose(d.decl.name, d.init.dist)); break;
        case lang::LocalInit::Kind::UniformDefault: {
          std::vector<lang::ExprPtr> items;
          for (const auto& v : info.domain) items.push_back(lang::lit(v));
          inits.push_back(lang::choose(d.decl.name, lang::uniform_dist(std::move(items))));
          break;
        }
      }
    }
    layout_ = inner;
    out.inner = inner;
    out.init = stmt(*lang::seq_all(inits));
    out.first = stmt(*n.body);
    layout_ = saved_layout;
    scope_ = saved_scope;
  }
};

}  // namespace detail

/// A program ready for evaluation: desugared, with variables resolved to slots.
struct CompiledProgram {
  LayoutPtr layout;
  CStmtPtr body;
};

inline CompiledProgram compile(const lang::Program& p) {
  lang::require_valid(p);
  const lang::Program q = lang::desugar(p);
  LayoutPtr layout = Layout::of_program(q);
  return CompiledProgram{layout, detail::Compiler(layout).stmt(*q.body)};
}

/// Compiles an expression against a program's global declarations.
inline CExprPtr compile_expr(const lang::Expr& e, const LayoutPtr& layout) {
  return detail::Compiler(layout).expr(e);
}

// Classical (relational) semantics.

inline FiniteDist<JointKey> classical_step(const CStmt& s, const Layout& l, JointKey k);

inline FiniteDist<JointKey> classical_then(const CStmt& s, const Layout& l, const FiniteDist<JointKey>& d) {
  DistBuilder<JointKey> b;
  for (const auto& [k, w] : d) b.add_all(classical_step(s, l, k), w);
  return b.build();
}

inline FiniteDist<JointKey> classical_step(const CStmt& s, const Layout& l, JointKey k) {
  switch (s.kind) {
    case CStmt::Kind::Skip: return FiniteDist<JointKey>::point(k);
    case CStmt::Kind::Assign: {
      Env env(l, k);
      const Value x = eval(*s.expr, env);
      (s.target.visible ? env.v : env.h)[s.target.index] = domain_index(l, s.target, x);
      return FiniteDist<JointKey>::point(env.key());
    }
    case CStmt::Kind::Choose: {
      Env env(l, k);
      DistBuilder<JointKey> b;
      for (const auto& [x, w] : eval_dist(*s.dist, env, s.text)) {
        (s.target.visible ? env.v : env.h)[s.target.index] = domain_index(l, s.target, x);
        b.add(env.key(), w);
      }
      return b.build();
    }
    case CStmt::Kind::Seq: return classical_then(*s.second, l, classical_step(*s.first, l, k));
    case CStmt::Kind::Choice: {
      const Rational q = choice_probability(s, Env(l, k));
      DistBuilder<JointKey> b;
      if (q != 0) b.add_all(classical_step(*s.first, l, k), q);
      if (q != 1) b.add_all(classical_step(*s.second, l, k), 1 - q);
      return b.build();
    }
    case CStmt::Kind::If: return classical_step(eval_bool(*s.expr, Env(l, k)) ? *s.first : *s.second, l, k);
    case CStmt::Kind::Atomic: return classical_step(*s.first, l, k);
    case CStmt::Kind::Local: {
      const std::uint64_t pv = s.inner->v_size() / l.v_size();
      const std::uint64_t ph = s.inner->h_size() / l.h_size();
      auto inside = classical_then(*s.first, *s.inner, classical_step(*s.init, *s.inner, {k.v * pv, k.h * ph}));
      DistBuilder<JointKey> b;
      for (const auto& [x, w] : inside) b.add({x.v / pv, x.h / ph}, w);
      return b.build();
    }
  }
  throw Error(Errc::Internal, "unknown statement kind");
}

/// Output distribution of p started in state k, ignoring visibility.
inline FiniteDist<JointKey> classical_eval(const CompiledProgram& p, JointKey k) {
  return classical_step(*p.body, *p.layout, k);
}

}  // namespace hyperflow::semantics
