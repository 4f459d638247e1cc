#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "hyperflow/lang/ast.hpp"
#include "hyperflow/lang/expr_eval.hpp"
#include "hyperflow/lang/validate.hpp"

namespace hyperflow::lang {

namespace detail {

inline Visibility view_of(const Visibility& v, const std::string& agent) {
  if (v.kind != Visibility::Kind::Agents) return v;
  return Visibility{v.agents.count(agent) ? Visibility::Kind::Visible : Visibility::Kind::Hidden, {}};
}

inline StmtPtr view_stmt(const StmtPtr& s, const std::string& agent) {
  return std::visit(
      [&](const auto& n) -> StmtPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Seq>) {
          return seq(view_stmt(n.first, agent), view_stmt(n.second, agent));
        } else if constexpr (std::is_same_v<T, Choice>) {
          return choice(view_stmt(n.left, agent), n.prob, view_stmt(n.right, agent));
        } else if constexpr (std::is_same_v<T, If>) {
          return if_stmt(n.guard, view_stmt(n.then_s, agent), view_stmt(n.else_s, agent));
        } else if constexpr (std::is_same_v<T, Atomic>) {
          return atomic(view_stmt(n.body, agent));
        } else if constexpr (std::is_same_v<T, Local>) {
          std::vector<LocalDecl> decls = n.decls;
          for (auto& d : decls) d.decl.visibility = view_of(d.decl.visibility, agent);
          return make_stmt(Local{std::move(decls), view_stmt(n.body, agent)});
        } else {
          return s;
        }
      },
      s->node);
}

inline void collect_names(const Stmt& s, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Seq>) {
          collect_names(*n.first, out);
          collect_names(*n.second, out);
        } else if constexpr (std::is_same_v<T, Choice>) {
          collect_names(*n.left, out);
          collect_names(*n.right, out);
        } else if constexpr (std::is_same_v<T, If>) {
          collect_names(*n.then_s, out);
          collect_names(*n.else_s, out);
        } else if constexpr (std::is_same_v<T, Atomic>) {
          collect_names(*n.body, out);
        } else if constexpr (std::is_same_v<T, Local>) {
          for (const auto& d : n.decls) out.insert(d.decl.name);
          collect_names(*n.body, out);
        }
      },
      s.node);
}

inline void free_vars(const Expr& e, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Var>) {
          out.insert(n.name);
        } else if constexpr (std::is_same_v<T, Unary>) {
          free_vars(*n.operand, out);
        } else if constexpr (std::is_same_v<T, Binary>) {
          free_vars(*n.lhs, out);
          free_vars(*n.rhs, out);
        } else if constexpr (std::is_same_v<T, CondExpr>) {
          free_vars(*n.then_e, out);
          free_vars(*n.guard, out);
          free_vars(*n.else_e, out);
        }
      },
      e.node);
}

constexpr std::size_t kRevealEnumerationCap = 1u << 20;

/// Every value `e` takes over the product of the domains of its free variables.
inline std::vector<Value> expr_range(const Expr& e, const std::map<std::string, const VarDecl*>& scope) {
  std::set<std::string> names;
  free_vars(e, names);
  std::vector<const VarDecl*> vars;
  std::size_t total = 1;
  for (const auto& n : names) {
    auto it = scope.find(n);
    if (it == scope.end()) throw Error(Errc::UndeclaredVariable, "'" + n + "' is not declared");
    vars.push_back(it->second);
    total *= it->second->domain.size();
    if (total > kRevealEnumerationCap)
      throw Error(Errc::UnsupportedConstruct, "revealed expression ranges over too many states");
  }
  std::set<Value> out;
  std::vector<std::size_t> idx(vars.size(), 0);
  std::map<std::string, Value> env;
  for (std::size_t k = 0; k < total; ++k) {
    for (std::size_t i = 0; i < vars.size(); ++i) env[vars[i]->name] = vars[i]->domain[idx[i]];
    try {
      out.insert(eval_expr(e, [&](const std::string& n) { return env.at(n); }));
    } catch (const Error&) {
    }
    for (std::size_t i = vars.size(); i-- > 0;) {
      if (++idx[i] < vars[i]->domain.size()) break;
      idx[i] = 0;
    }
  }
  return {out.begin(), out.end()};
}

class Desugarer {
 public:
  explicit Desugarer(const Program& p) {
    for (const auto& d : p.globals) taken_.insert(d.name);
    collect_names(*p.body, taken_);
  }

  StmtPtr stmt(const StmtPtr& s, const std::map<std::string, const VarDecl*>& scope) {
    return std::visit(
        [&](const auto& n) -> StmtPtr {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Seq>) {
            return seq(stmt(n.first, scope), stmt(n.second, scope));
          } else if constexpr (std::is_same_v<T, Choice>) {
            return choice(stmt(n.left, scope), n.prob, stmt(n.right, scope));
          } else if constexpr (std::is_same_v<T, If>) {
            return if_stmt(n.guard, stmt(n.then_s, scope), stmt(n.else_s, scope));
          } else if constexpr (std::is_same_v<T, Atomic>) {
            return atomic(stmt(n.body, scope));
          } else if constexpr (std::is_same_v<T, XorAssign>) {
            return seq(choose(n.first, uniform_dist({lit_bool(true), lit_bool(false)})),
                       assign(n.second, binary(BinOp::Xor, var(n.first), n.value)));
          } else if constexpr (std::is_same_v<T, Reveal>) {
            std::vector<Value> dom = expr_range(*n.value, scope);
            if (dom.empty()) throw Error(Errc::InvalidArgument, "revealed expression never evaluates");
            if (dom.front().is_bool()) dom = {Value::boolean(false), Value::boolean(true)};
            LocalDecl d;
            d.decl = VarDecl{fresh(), dom, Visibility{Visibility::Kind::Visible, {}}};
            d.init.kind = LocalInit::Kind::Assign;
            d.init.value = lit(dom.front());
            const std::string name = d.decl.name;
            return make_stmt(Local{{std::move(d)}, assign(name, n.value)});
          } else if constexpr (std::is_same_v<T, Local>) {
            auto inner = scope;
            for (const auto& d : n.decls) inner[d.decl.name] = &d.decl;
            return make_stmt(Local{n.decls, stmt(n.body, inner)});
          } else {
            return s;
          }
        },
        s->node);
  }

 private:
  std::set<std::string> taken_;
  int counter_ = 0;

  std::string fresh() {
    for (;;) {
      std::string name = "_r" + std::to_string(counter_++);
      if (taken_.insert(name).second) return name;
    }
  }
};

}  // namespace detail

/// Per-agent view: agent-annotated variables become `vis` when the agent is
/// in their set and `hid` otherwise. Global markers and `reveal` are kept.
inline Program project_view(const Program& p, const std::string& agent) {
  const auto agents = known_agents(p);
  if (!agents.count(agent)) throw Error(Errc::UnknownAgent, "agent '" + agent + "' does not occur in the program");
  Program out = p;
  for (auto& d : out.globals) d.visibility = detail::view_of(d.visibility, agent);
  out.body = detail::view_stmt(p.body, agent);
  return out;
}

/// Rewrites `reveal e` into a fresh visible local assigned `e`, and
/// `(x ^ y) := e` into `x <- uniform{true, false}; y := x xor e`.
inline Program desugar(const Program& p) {
  std::map<std::string, const VarDecl*> scope;
  for (const auto& d : p.globals) scope[d.name] = &d;
  Program out = p;
  out.body = detail::Desugarer(p).stmt(p.body, scope);
  return out;
}

}  // namespace hyperflow::lang
