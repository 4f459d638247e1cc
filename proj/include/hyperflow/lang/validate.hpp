#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hyperflow/lang/ast.hpp"
#include "hyperflow/lang/expr_eval.hpp"
#include "hyperflow/lang/parser.hpp"
#include "hyperflow/lang/printer.hpp"

namespace hyperflow::lang {

enum class DiagKind {
  UndeclaredVariable,
  TypeMismatch,
  WeightsNotOneSumming,
  NegativeWeight,
  DuplicateVariable,
  BadDomain,
  UnknownAgent,
  UnsupportedConstruct,
  DivisionByZero,
  BadXorAssign,
  UniformLocalDefault,
};

enum class Severity { Error, Warning };

struct Diagnostic {
  DiagKind kind;
  Severity severity = Severity::Error;
  std::string message;
};

inline const char* diag_name(DiagKind k) {
  switch (k) {
    case DiagKind::UndeclaredVariable: return "UndeclaredVariable";
    case DiagKind::TypeMismatch: return "TypeMismatch";
    case DiagKind::WeightsNotOneSumming: return "WeightsNotOneSumming";
    case DiagKind::NegativeWeight: return "NegativeWeight";
    case DiagKind::DuplicateVariable: return "DuplicateVariable";
    case DiagKind::BadDomain: return "BadDomain";
    case DiagKind::UnknownAgent: return "UnknownAgent";
    case DiagKind::UnsupportedConstruct: return "UnsupportedConstruct";
    case DiagKind::DivisionByZero: return "DivisionByZero";
    case DiagKind::BadXorAssign: return "BadXorAssign";
    case DiagKind::UniformLocalDefault: return "UniformLocalDefault";
  }
  return "?";
}

inline std::string to_string(const Diagnostic& d) {
  return std::string(d.severity == Severity::Error ? "error" : "warning") + " [" + diag_name(d.kind) + "] " +
         d.message;
}

inline bool has_errors(const std::vector<Diagnostic>& ds) {
  for (const auto& d : ds)
    if (d.severity == Severity::Error) return true;
  return false;
}

/// Agents a program talks about: the `agents` header when present,
/// otherwise every agent named in a visibility annotation.
inline std::set<std::string> known_agents(const Program& p);

namespace detail {

inline void collect_annotation_agents(const Stmt& s, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Seq>) {
          collect_annotation_agents(*n.first, out);
          collect_annotation_agents(*n.second, out);
        } else if constexpr (std::is_same_v<T, Choice>) {
          collect_annotation_agents(*n.left, out);
          collect_annotation_agents(*n.right, out);
        } else if constexpr (std::is_same_v<T, If>) {
          collect_annotation_agents(*n.then_s, out);
          collect_annotation_agents(*n.else_s, out);
        } else if constexpr (std::is_same_v<T, Atomic>) {
          collect_annotation_agents(*n.body, out);
        } else if constexpr (std::is_same_v<T, Local>) {
          for (const auto& d : n.decls) out.insert(d.decl.visibility.agents.begin(), d.decl.visibility.agents.end());
          collect_annotation_agents(*n.body, out);
        }
      },
      s.node);
}

inline void collect_domain_atoms(const std::vector<Value>& dom, std::set<std::string>& out) {
  for (const auto& v : dom)
    if (v.is_atom()) out.insert(v.atom_name());
}

inline void collect_atoms(const Stmt& s, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Seq>) {
          collect_atoms(*n.first, out);
          collect_atoms(*n.second, out);
        } else if constexpr (std::is_same_v<T, Choice>) {
          collect_atoms(*n.left, out);
          collect_atoms(*n.right, out);
        } else if constexpr (std::is_same_v<T, If>) {
          collect_atoms(*n.then_s, out);
          collect_atoms(*n.else_s, out);
        } else if constexpr (std::is_same_v<T, Atomic>) {
          collect_atoms(*n.body, out);
        } else if constexpr (std::is_same_v<T, Local>) {
          for (const auto& d : n.decls) collect_domain_atoms(d.decl.domain, out);
          collect_atoms(*n.body, out);
        }
      },
      s.node);
}

using Scope = std::map<std::string, const VarDecl*>;

/// Rewrites `Var` nodes naming an atom (and no variable in scope) into literals.
class AtomResolver {
 public:
  explicit AtomResolver(std::set<std::string> atoms) : atoms_(std::move(atoms)) {}

  ExprPtr expr(const ExprPtr& e, const std::set<std::string>& vars) const {
    return std::visit(
        [&](const auto& n) -> ExprPtr {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Lit>) {
            return e;
          } else if constexpr (std::is_same_v<T, Var>) {
            if (!vars.count(n.name) && atoms_.count(n.name)) return lit(Value::atom(n.name));
            return e;
          } else if constexpr (std::is_same_v<T, Unary>) {
            return unary(n.op, expr(n.operand, vars));
          } else if constexpr (std::is_same_v<T, Binary>) {
            return binary(n.op, expr(n.lhs, vars), expr(n.rhs, vars));
          } else {
            return cond_expr(expr(n.then_e, vars), expr(n.guard, vars), expr(n.else_e, vars));
          }
        },
        e->node);
  }

  DistPtr dist(const DistPtr& d, const std::set<std::string>& vars) const {
    return std::visit(
        [&](const auto& n) -> DistPtr {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, ExplicitDist>) {
            std::vector<std::pair<ExprPtr, ExprPtr>> es;
            for (const auto& [v, p] : n.entries) es.emplace_back(expr(v, vars), expr(p, vars));
            return explicit_dist(std::move(es));
          } else if constexpr (std::is_same_v<T, UniformDist>) {
            std::vector<ExprPtr> items;
            for (const auto& v : n.items) items.push_back(expr(v, vars));
            return uniform_dist(std::move(items));
          } else {
            return cond_dist(dist(n.then_d, vars), expr(n.guard, vars), dist(n.else_d, vars));
          }
        },
        d->node);
  }

  StmtPtr stmt(const StmtPtr& s, const std::set<std::string>& vars) const {
    return std::visit(
        [&](const auto& n) -> StmtPtr {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Skip>) {
            return s;
          } else if constexpr (std::is_same_v<T, Assign>) {
            return assign(n.var, expr(n.value, vars));
          } else if constexpr (std::is_same_v<T, Choose>) {
            return choose(n.var, dist(n.dist, vars));
          } else if constexpr (std::is_same_v<T, XorAssign>) {
            return make_stmt(XorAssign{n.first, n.second, expr(n.value, vars)});
          } else if constexpr (std::is_same_v<T, Seq>) {
            return seq(stmt(n.first, vars), stmt(n.second, vars));
          } else if constexpr (std::is_same_v<T, Choice>) {
            return choice(stmt(n.left, vars), expr(n.prob, vars), stmt(n.right, vars));
          } else if constexpr (std::is_same_v<T, If>) {
            return if_stmt(expr(n.guard, vars), stmt(n.then_s, vars), stmt(n.else_s, vars));
          } else if constexpr (std::is_same_v<T, Atomic>) {
            return atomic(stmt(n.body, vars));
          } else if constexpr (std::is_same_v<T, Reveal>) {
            return reveal(expr(n.value, vars));
          } else {
            std::set<std::string> inner = vars;
            std::vector<LocalDecl> decls;
            for (const auto& d : n.decls) {
              inner.insert(d.decl.name);
              LocalDecl nd = d;
              if (d.init.value) nd.init.value = expr(d.init.value, inner);
              if (d.init.dist) nd.init.dist = dist(d.init.dist, inner);
              decls.push_back(std::move(nd));
            }
            return make_stmt(Local{std::move(decls), stmt(n.body, inner)});
          }
        },
        s->node);
  }

 private:
  std::set<std::string> atoms_;
};

inline bool is_closed(const Expr& e) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Lit>) return true;
        else if constexpr (std::is_same_v<T, Var>) return false;
        else if constexpr (std::is_same_v<T, Unary>) return is_closed(*n.operand);
        else if constexpr (std::is_same_v<T, Binary>) return is_closed(*n.lhs) && is_closed(*n.rhs);
        else return is_closed(*n.then_e) && is_closed(*n.guard) && is_closed(*n.else_e);
      },
      e.node);
}

/// Static checker. Types are the value kinds of the declared domains.
class Validator {
 public:
  explicit Validator(const Program& p) : prog_(p) {}

  std::vector<Diagnostic> run() {
    std::set<std::string> declared_agents(prog_.agents.begin(), prog_.agents.end());
    Scope scope;
    for (const auto& d : prog_.globals) {
      check_decl(d, scope, declared_agents);
      scope[d.name] = &d;
    }
    stmt(*prog_.body, scope, false);
    return std::move(diags_);
  }

 private:
  using Type = std::optional<Value::Kind>;
  const Program& prog_;
  std::vector<Diagnostic> diags_;

  void report(DiagKind k, std::string msg, Severity sev = Severity::Error) {
    diags_.push_back(Diagnostic{k, sev, std::move(msg)});
  }

  static Type domain_type(const VarDecl& d) {
    if (d.domain.empty()) return std::nullopt;
    return d.domain.front().kind();
  }

  void check_decl(const VarDecl& d, const Scope& scope, const std::set<std::string>& declared_agents) {
    if (scope.count(d.name)) report(DiagKind::DuplicateVariable, "variable '" + d.name + "' is already declared");
    if (d.domain.empty()) report(DiagKind::BadDomain, "domain of '" + d.name + "' is empty");
    std::set<Value> seen;
    for (const auto& v : d.domain) {
      if (!seen.insert(v).second)
        report(DiagKind::BadDomain, "domain of '" + d.name + "' repeats " + hyperflow::to_string(v));
      if (v.kind() != d.domain.front().kind())
        report(DiagKind::BadDomain, "domain of '" + d.name + "' mixes value kinds");
    }
    if (d.visibility.kind == Visibility::Kind::Agents && !declared_agents.empty()) {
      for (const auto& a : d.visibility.agents)
        if (!declared_agents.count(a))
          report(DiagKind::UnknownAgent, "agent '" + a + "' of '" + d.name + "' is not declared");
    }
  }

  Type expr(const Expr& e, const Scope& scope) {
    return std::visit(
        [&](const auto& n) -> Type {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Lit>) {
            return n.value.kind();
          } else if constexpr (std::is_same_v<T, Var>) {
            auto it = scope.find(n.name);
            if (it == scope.end()) {
              report(DiagKind::UndeclaredVariable, "'" + n.name + "' is not declared");
              return std::nullopt;
            }
            return domain_type(*it->second);
          } else if constexpr (std::is_same_v<T, Unary>) {
            Type t = expr(*n.operand, scope);
            Value::Kind want = n.op == UnOp::Neg ? Value::Kind::Number : Value::Kind::Bool;
            expect(t, want, n.op == UnOp::Neg ? "operand of '-'" : "operand of 'not'");
            return want;
          } else if constexpr (std::is_same_v<T, Binary>) {
            Type a = expr(*n.lhs, scope);
            Type b = expr(*n.rhs, scope);
            const std::string what = std::string("operand of '") + op_spelling(n.op) + "'";
            switch (n.op) {
              case BinOp::Add:
              case BinOp::Sub:
              case BinOp::Mul:
              case BinOp::Div:
              case BinOp::IntDiv:
              case BinOp::Mod:
                expect(a, Value::Kind::Number, what);
                expect(b, Value::Kind::Number, what);
                if (n.op == BinOp::Div || n.op == BinOp::IntDiv || n.op == BinOp::Mod) {
                  if (const auto* l = std::get_if<Lit>(&n.rhs->node); l && l->value.is_number() && l->value.as_number() == 0)
                    report(DiagKind::DivisionByZero, "division by the constant 0 in '" + to_source(e) + "'");
                }
                return Value::Kind::Number;
              case BinOp::Eq:
              case BinOp::Ne:
                if (a && b && *a != *b)
                  report(DiagKind::TypeMismatch, "cannot compare " + std::string(kind_name(*a)) + " with " +
                                                     kind_name(*b) + " in '" + to_source(e) + "'");
                return Value::Kind::Bool;
              case BinOp::Lt:
              case BinOp::Le:
              case BinOp::Gt:
              case BinOp::Ge:
                expect(a, Value::Kind::Number, what);
                expect(b, Value::Kind::Number, what);
                return Value::Kind::Bool;
              case BinOp::And:
              case BinOp::Or:
              case BinOp::Xor:
                expect(a, Value::Kind::Bool, what);
                expect(b, Value::Kind::Bool, what);
                return Value::Kind::Bool;
            }
            return std::nullopt;
          } else {
            expect(expr(*n.guard, scope), Value::Kind::Bool, "conditional guard");
            Type a = expr(*n.then_e, scope);
            Type b = expr(*n.else_e, scope);
            if (a && b && *a != *b)
              report(DiagKind::TypeMismatch, "branches of '" + to_source(e) + "' have different types");
            return a ? a : b;
          }
        },
        e.node);
  }

  void expect(Type t, Value::Kind want, const std::string& what) {
    if (t && *t != want)
      report(DiagKind::TypeMismatch, what + " must be " + kind_name(want) + ", found " + kind_name(*t));
  }

  void dist(const DistExpr& d, Type target, const Scope& scope) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, ExplicitDist>) {
            bool all_closed = true;
            Rational total = 0;
            for (const auto& [v, p] : n.entries) {
              expect(expr(*v, scope), target.value_or(Value::Kind::Number), "distribution value");
              if (!target) expr(*v, scope);
              expect(expr(*p, scope), Value::Kind::Number, "probability");
              if (is_closed(*p)) {
                try {
                  Value w = eval_expr(*p, [](const std::string&) -> Value { return {}; });
                  if (w.is_number()) {
                    if (w.as_number() < 0)
                      report(DiagKind::NegativeWeight, "negative weight in '" + to_source(d) + "'");
                    total += w.as_number();
                  }
                } catch (const Error&) {
                  all_closed = false;
                }
              } else {
                all_closed = false;
              }
            }
            if (all_closed && total != 1)
              report(DiagKind::WeightsNotOneSumming,
                     "weights of '" + to_source(d) + "' sum to " + hyperflow::to_string(total));
          } else if constexpr (std::is_same_v<T, UniformDist>) {
            for (const auto& v : n.items) expect(expr(*v, scope), target.value_or(Value::Kind::Number), "distribution value");
          } else {
            expect(expr(*n.guard, scope), Value::Kind::Bool, "distribution guard");
            dist(*n.then_d, target, scope);
            dist(*n.else_d, target, scope);
          }
        },
        d.node);
  }

  const VarDecl* target(const std::string& name, const Scope& scope) {
    auto it = scope.find(name);
    if (it == scope.end()) {
      report(DiagKind::UndeclaredVariable, "'" + name + "' is not declared");
      return nullptr;
    }
    return it->second;
  }

  void stmt(const Stmt& s, const Scope& scope, bool in_atomic) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Skip>) {
          } else if constexpr (std::is_same_v<T, Assign>) {
            const VarDecl* d = target(n.var, scope);
            Type t = expr(*n.value, scope);
            if (d) expect(t, *domain_type(*d), "value assigned to '" + n.var + "'");
          } else if constexpr (std::is_same_v<T, Choose>) {
            const VarDecl* d = target(n.var, scope);
            dist(*n.dist, d ? domain_type(*d) : std::nullopt, scope);
          } else if constexpr (std::is_same_v<T, XorAssign>) {
            for (const auto* name : {&n.first, &n.second}) {
              const VarDecl* d = target(*name, scope);
              if (d && domain_type(*d) != Value::Kind::Bool)
                report(DiagKind::TypeMismatch, "'" + *name + "' in an exclusive-or split must be boolean");
            }
            if (n.first == n.second) report(DiagKind::BadXorAssign, "exclusive-or split needs two distinct variables");
            if (mentions(*n.value, n.first) || mentions(*n.value, n.second))
              report(DiagKind::BadXorAssign, "right-hand side of an exclusive-or split must not mention its targets");
            expect(expr(*n.value, scope), Value::Kind::Bool, "value of an exclusive-or split");
          } else if constexpr (std::is_same_v<T, Seq>) {
            stmt(*n.first, scope, in_atomic);
            stmt(*n.second, scope, in_atomic);
          } else if constexpr (std::is_same_v<T, Choice>) {
            expect(expr(*n.prob, scope), Value::Kind::Number, "choice probability");
            if (is_closed(*n.prob)) {
              try {
                Value q = eval_expr(*n.prob, [](const std::string&) -> Value { return {}; });
                if (q.is_number() && (q.as_number() < 0 || q.as_number() > 1))
                  report(DiagKind::WeightsNotOneSumming, "choice probability " + to_source(*n.prob) + " is outside [0,1]");
              } catch (const Error&) {
              }
            }
            stmt(*n.left, scope, in_atomic);
            stmt(*n.right, scope, in_atomic);
          } else if constexpr (std::is_same_v<T, If>) {
            expect(expr(*n.guard, scope), Value::Kind::Bool, "condition");
            stmt(*n.then_s, scope, in_atomic);
            stmt(*n.else_s, scope, in_atomic);
          } else if constexpr (std::is_same_v<T, Atomic>) {
            stmt(*n.body, scope, true);
          } else if constexpr (std::is_same_v<T, Reveal>) {
            if (in_atomic)
              report(DiagKind::UnsupportedConstruct, "reveal (a local block) inside atomic brackets is not supported");
            expr(*n.value, scope);
          } else {
            if (in_atomic)
              report(DiagKind::UnsupportedConstruct, "local block inside atomic brackets is not supported");
            std::set<std::string> declared_agents(prog_.agents.begin(), prog_.agents.end());
            Scope inner = scope;
            for (const auto& d : n.decls) {
              check_decl(d.decl, inner, declared_agents);
              inner[d.decl.name] = &d.decl;
              switch (d.init.kind) {
                case LocalInit::Kind::Assign:
                  expect(expr(*d.init.value, inner), *domain_type(d.decl), "initial value of '" + d.decl.name + "'");
                  break;
                case LocalInit::Kind::Choose: dist(*d.init.dist, domain_type(d.decl), inner); break;
                case LocalInit::Kind::UniformDefault:
                  report(DiagKind::UniformLocalDefault,
                         "local '" + d.decl.name + "' has no initializer; using a uniform choice", Severity::Warning);
                  break;
              }
            }
            stmt(*n.body, inner, in_atomic);
          }
        },
        s.node);
  }

  static bool mentions(const Expr& e, const std::string& name) {
    return std::visit(
        [&](const auto& n) -> bool {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Lit>) return false;
          else if constexpr (std::is_same_v<T, Var>) return n.name == name;
          else if constexpr (std::is_same_v<T, Unary>) return mentions(*n.operand, name);
          else if constexpr (std::is_same_v<T, Binary>) return mentions(*n.lhs, name) || mentions(*n.rhs, name);
          else return mentions(*n.then_e, name) || mentions(*n.guard, name) || mentions(*n.else_e, name);
        },
        e.node);
  }
};

}  // namespace detail

inline std::set<std::string> known_agents(const Program& p) {
  if (!p.agents.empty()) return {p.agents.begin(), p.agents.end()};
  std::set<std::string> out;
  for (const auto& d : p.globals) out.insert(d.visibility.agents.begin(), d.visibility.agents.end());
  detail::collect_annotation_agents(*p.body, out);
  return out;
}

/// Every atom spelled in some declared domain.
inline std::set<std::string> program_atoms(const Program& p) {
  std::set<std::string> atoms;
  for (const auto& d : p.globals) detail::collect_domain_atoms(d.domain, atoms);
  detail::collect_atoms(*p.body, atoms);
  return atoms;
}

/// Turns identifiers that name atoms (and no variable in scope) into literals.
inline Program resolve_atoms(const Program& p) {
  detail::AtomResolver r(program_atoms(p));
  std::set<std::string> vars;
  for (const auto& d : p.globals) vars.insert(d.name);
  Program out = p;
  out.body = r.stmt(p.body, vars);
  return out;
}

/// All static checks; diagnostics are returned, never thrown.
inline std::vector<Diagnostic> validate(const Program& p) { return detail::Validator(p).run(); }

/// Parses, resolves atoms and rejects undeclared names and type errors.
/// Other diagnostics are left to `validate`.
inline Program parse(std::string_view src, const ParseOptions& opts = {}) {
  Program p = resolve_atoms(parse_syntax(src, opts));
  for (const auto& d : validate(p)) {
    if (d.kind == DiagKind::UndeclaredVariable) throw Error(Errc::UndeclaredVariable, d.message);
    if (d.kind == DiagKind::TypeMismatch) throw Error(Errc::TypeMismatch, d.message);
  }
  return p;
}

/// Throws on the first error-severity diagnostic.
inline void require_valid(const Program& p) {
  for (const auto& d : validate(p)) {
    if (d.severity != Severity::Error) continue;
    switch (d.kind) {
      case DiagKind::UndeclaredVariable: throw Error(Errc::UndeclaredVariable, d.message);
      case DiagKind::TypeMismatch: throw Error(Errc::TypeMismatch, d.message);
      case DiagKind::WeightsNotOneSumming:
      case DiagKind::NegativeWeight: throw Error(Errc::DistNotOneSumming, d.message);
      case DiagKind::UnknownAgent: throw Error(Errc::UnknownAgent, d.message);
      case DiagKind::UnsupportedConstruct: throw Error(Errc::UnsupportedConstruct, d.message);
      default: throw Error(Errc::InvalidArgument, to_string(d));
    }
  }
}

}  // namespace hyperflow::lang
