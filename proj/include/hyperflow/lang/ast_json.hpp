#pragma once

#include "json.hpp"

#include "hyperflow/lang/ast.hpp"
#include "hyperflow/lang/expr_eval.hpp"
#include "hyperflow/lang/printer.hpp"

namespace hyperflow::lang {

using Json = nlohmann::ordered_json;

inline Json expr_json(const Expr& e) {
  return std::visit(
      [](const auto& n) -> Json {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, Lit>) {
          return {{"lit", to_string(n.value)}, {"kind", kind_name(n.value.kind())}};
        } else if constexpr (std::is_same_v<N, Var>) {
          return {{"var", n.name}};
        } else if constexpr (std::is_same_v<N, Unary>) {
          return {{"op", n.op == UnOp::Neg ? "-" : "not"}, {"arg", expr_json(*n.operand)}};
        } else if constexpr (std::is_same_v<N, Binary>) {
          return {{"op", op_spelling(n.op)}, {"lhs", expr_json(*n.lhs)}, {"rhs", expr_json(*n.rhs)}};
        } else {
          return {{"op", "if"}, {"guard", expr_json(*n.guard)}, {"then", expr_json(*n.then_e)},
                  {"else", expr_json(*n.else_e)}};
        }
      },
      e.node);
}

inline Json dist_json(const DistExpr& d) {
  return std::visit(
      [](const auto& n) -> Json {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, ExplicitDist>) {
          Json items = Json::array();
          for (const auto& [v, p] : n.entries) items.push_back({{"value", expr_json(*v)}, {"prob", expr_json(*p)}});
          return {{"dist", "explicit"}, {"entries", items}};
        } else if constexpr (std::is_same_v<N, UniformDist>) {
          Json items = Json::array();
          for (const auto& v : n.items) items.push_back(expr_json(*v));
          return {{"dist", "uniform"}, {"items", items}};
        } else {
          return {{"dist", "if"}, {"guard", expr_json(*n.guard)}, {"then", dist_json(*n.then_d)},
                  {"else", dist_json(*n.else_d)}};
        }
      },
      d.node);
}

inline Json decl_json(const VarDecl& d) {
  Json dom = Json::array();
  for (const auto& v : d.domain) dom.push_back(to_string(v));
  return {{"name", d.name}, {"visibility", detail::visibility_text(d.visibility)}, {"domain", dom}};
}

inline Json stmt_json(const Stmt& s) {
  return std::visit(
      [](const auto& n) -> Json {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, Skip>) {
          return {{"stmt", "skip"}};
        } else if constexpr (std::is_same_v<N, Assign>) {
          return {{"stmt", "assign"}, {"var", n.var}, {"value", expr_json(*n.value)}};
        } else if constexpr (std::is_same_v<N, Choose>) {
          return {{"stmt", "choose"}, {"var", n.var}, {"dist", dist_json(*n.dist)}};
        } else if constexpr (std::is_same_v<N, XorAssign>) {
          return {{"stmt", "xor_assign"}, {"vars", {n.first, n.second}}, {"value", expr_json(*n.value)}};
        } else if constexpr (std::is_same_v<N, Seq>) {
          return {{"stmt", "seq"}, {"first", stmt_json(*n.first)}, {"second", stmt_json(*n.second)}};
        } else if constexpr (std::is_same_v<N, Choice>) {
          return {{"stmt", "choice"}, {"prob", expr_json(*n.prob)}, {"left", stmt_json(*n.left)},
                  {"right", stmt_json(*n.right)}};
        } else if constexpr (std::is_same_v<N, If>) {
          return {{"stmt", "if"}, {"guard", expr_json(*n.guard)}, {"then", stmt_json(*n.then_s)},
                  {"else", stmt_json(*n.else_s)}};
        } else if constexpr (std::is_same_v<N, Atomic>) {
          return {{"stmt", "atomic"}, {"body", stmt_json(*n.body)}};
        } else if constexpr (std::is_same_v<N, Reveal>) {
          return {{"stmt", "reveal"}, {"value", expr_json(*n.value)}};
        } else {
          Json decls = Json::array();
          for (const auto& ld : n.decls) {
            Json d = decl_json(ld.decl);
            switch (ld.init.kind) {
              case LocalInit::Kind::Assign: d["init"] = {{"assign", expr_json(*ld.init.value)}}; break;
              case LocalInit::Kind::Choose: d["init"] = {{"choose", dist_json(*ld.init.dist)}}; break;
              case LocalInit::Kind::UniformDefault: d["init"] = "uniform"; break;
            }
            decls.push_back(std::move(d));
          }
          return {{"stmt", "local"}, {"decls", decls}, {"body", stmt_json(*n.body)}};
        }
      },
      s.node);
}

/// {"agents":[...],"globals":[...],"body":{...}}
inline Json program_json(const Program& p) {
  Json globals = Json::array();
  for (const auto& d : p.globals) globals.push_back(decl_json(d));
  return {{"agents", p.agents}, {"globals", globals}, {"body", stmt_json(*p.body)}};
}

}  // namespace hyperflow::lang
