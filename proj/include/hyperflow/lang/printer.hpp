#pragma once

#include <sstream>
#include <string>

#include "hyperflow/lang/ast.hpp"
#include "hyperflow/lang/expr_eval.hpp"

namespace hyperflow::lang {

namespace detail {

enum Prec : int { kCond = 0, kOr, kXor, kAnd, kNot, kCmp, kAdd, kMul, kUnary, kAtom };

inline int binop_prec(BinOp op) {
  switch (op) {
    case BinOp::Or: return kOr;
    case BinOp::Xor: return kXor;
    case BinOp::And: return kAnd;
    case BinOp::Eq:
    case BinOp::Ne:
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge: return kCmp;
    case BinOp::Add:
    case BinOp::Sub: return kAdd;
    default: return kMul;
  }
}

inline int expr_prec(const Expr& e) {
  return std::visit(
      [](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Lit>) {
          if (!n.value.is_number()) return kAtom;
          if (!is_integral(n.value.as_number())) return kMul;
          return n.value.as_number() < 0 ? kUnary : kAtom;
        } else if constexpr (std::is_same_v<T, Var>) {
          return kAtom;
        } else if constexpr (std::is_same_v<T, Unary>) {
          return n.op == UnOp::Neg ? kUnary : kNot;
        } else if constexpr (std::is_same_v<T, Binary>) {
          return binop_prec(n.op);
        } else {
          return kCond;
        }
      },
      e.node);
}

inline void print_expr(std::ostream& os, const Expr& e, int min_prec);

inline void print_sub(std::ostream& os, const Expr& e, int min_prec) {
  if (expr_prec(e) < min_prec) {
    os << '(';
    print_expr(os, e, kCond);
    os << ')';
  } else {
    print_expr(os, e, min_prec);
  }
}

inline void print_expr(std::ostream& os, const Expr& e, int /*min_prec*/) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Lit>) {
          os << to_string(n.value);
        } else if constexpr (std::is_same_v<T, Var>) {
          os << n.name;
        } else if constexpr (std::is_same_v<T, Unary>) {
          if (n.op == UnOp::Neg) {
            os << '-';
            print_sub(os, *n.operand, kUnary);
          } else {
            os << "not ";
            print_sub(os, *n.operand, kNot);
          }
        } else if constexpr (std::is_same_v<T, Binary>) {
          const int p = binop_prec(n.op);
          // Comparisons do not chain; everything else is left-associative.
          print_sub(os, *n.lhs, p == kCmp ? p + 1 : p);
          os << ' ' << op_spelling(n.op) << ' ';
          print_sub(os, *n.rhs, p + 1);
        } else {
          print_sub(os, *n.then_e, kOr);
          os << " if ";
          print_sub(os, *n.guard, kOr);
          os << " else ";
          print_sub(os, *n.else_e, kCond);
        }
      },
      e.node);
}

inline void print_dist(std::ostream& os, const DistExpr& d, bool as_operand);

inline void print_dist(std::ostream& os, const DistExpr& d, bool as_operand) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ExplicitDist>) {
          os << '{';
          for (std::size_t i = 0; i < n.entries.size(); ++i) {
            if (i) os << ", ";
            print_sub(os, *n.entries[i].first, kCond);
            os << " @ ";
            print_sub(os, *n.entries[i].second, kCond);
          }
          os << '}';
        } else if constexpr (std::is_same_v<T, UniformDist>) {
          os << "uniform{";
          for (std::size_t i = 0; i < n.items.size(); ++i) {
            if (i) os << ", ";
            print_sub(os, *n.items[i], kCond);
          }
          os << '}';
        } else {
          if (as_operand) os << '(';
          print_dist(os, *n.then_d, true);
          os << " if ";
          print_sub(os, *n.guard, kOr);
          os << " else ";
          print_dist(os, *n.else_d, false);
          if (as_operand) os << ')';
        }
      },
      d.node);
}

inline std::string domain_text(const std::vector<Value>& dom) {
  if (dom.size() == 2 && dom[0] == Value::boolean(false) && dom[1] == Value::boolean(true)) return "bool";
  bool contiguous = dom.size() >= 3;
  for (std::size_t i = 0; contiguous && i < dom.size(); ++i) {
    if (!dom[i].is_integer()) contiguous = false;
    else if (i > 0 && dom[i].as_number() != dom[i - 1].as_number() + 1) contiguous = false;
  }
  std::string out = "{";
  if (contiguous) {
    out += to_string(dom.front()) + ".." + to_string(dom.back());
  } else {
    for (std::size_t i = 0; i < dom.size(); ++i) {
      if (i) out += ", ";
      out += to_string(dom[i]);
    }
  }
  return out + "}";
}

inline std::string visibility_text(const Visibility& v) {
  switch (v.kind) {
    case Visibility::Kind::Visible: return "vis";
    case Visibility::Kind::Hidden: return "hid";
    case Visibility::Kind::Agents: {
      std::string s = "vis{";
      bool first = true;
      for (const auto& a : v.agents) {
        if (!first) s += ", ";
        s += a;
        first = false;
      }
      return s + "}";
    }
  }
  return "hid";
}

class StmtPrinter {
 public:
  explicit StmtPrinter(std::ostream& os) : os_(os) {}

  void stmt(const Stmt& s, int indent) {
    if (const auto* q = std::get_if<Seq>(&s.node)) {
      stmt(*q->first, indent);
      os_ << ";\n";
      stmt(*q->second, indent);
      return;
    }
    pad(indent);
    inline_stmt(s, indent);
  }

 private:
  std::ostream& os_;

  void pad(int indent) {
    for (int i = 0; i < indent; ++i) os_ << "  ";
  }

  void block(const Stmt& s, int indent) {
    os_ << "{\n";
    stmt(s, indent + 1);
    os_ << '\n';
    pad(indent);
    os_ << '}';
  }

  // Operand of a choice: sequences, and choices on the right, need braces.
  void choice_operand(const Stmt& s, int indent, bool right) {
    const bool needs = std::holds_alternative<Seq>(s.node) || (right && std::holds_alternative<Choice>(s.node));
    if (needs)
      block(s, indent);
    else
      inline_stmt(s, indent);
  }

  void inline_stmt(const Stmt& s, int indent) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Skip>) {
            os_ << "skip";
          } else if constexpr (std::is_same_v<T, Assign>) {
            os_ << n.var << " := ";
            print_sub(os_, *n.value, kCond);
          } else if constexpr (std::is_same_v<T, Choose>) {
            os_ << n.var << " <- ";
            print_dist(os_, *n.dist, false);
          } else if constexpr (std::is_same_v<T, XorAssign>) {
            os_ << '(' << n.first << " ^ " << n.second << ") := ";
            print_sub(os_, *n.value, kCond);
          } else if constexpr (std::is_same_v<T, Seq>) {
            block(s, indent);
          } else if constexpr (std::is_same_v<T, Choice>) {
            choice_operand(*n.left, indent, false);
            os_ << " [";
            print_sub(os_, *n.prob, kCond);
            os_ << "] ";
            choice_operand(*n.right, indent, true);
          } else if constexpr (std::is_same_v<T, If>) {
            os_ << "if ";
            print_sub(os_, *n.guard, kCond);
            os_ << " then\n";
            stmt(*n.then_s, indent + 1);
            os_ << '\n';
            pad(indent);
            os_ << "else\n";
            stmt(*n.else_s, indent + 1);
            os_ << '\n';
            pad(indent);
            os_ << "fi";
          } else if constexpr (std::is_same_v<T, Atomic>) {
            os_ << "atomic ";
            block(*n.body, indent);
          } else if constexpr (std::is_same_v<T, Reveal>) {
            os_ << "reveal ";
            print_sub(os_, *n.value, kCond);
          } else {
            os_ << "local ";
            for (std::size_t i = 0; i < n.decls.size(); ++i) {
              if (i) {
                os_ << ";\n";
                pad(indent + 3);
              }
              const LocalDecl& d = n.decls[i];
              os_ << visibility_text(d.decl.visibility) << ' ' << d.decl.name << " : " << domain_text(d.decl.domain);
              switch (d.init.kind) {
                case LocalInit::Kind::Assign:
                  os_ << " := ";
                  print_sub(os_, *d.init.value, kCond);
                  break;
                case LocalInit::Kind::Choose:
                  os_ << " <- ";
                  print_dist(os_, *d.init.dist, false);
                  break;
                case LocalInit::Kind::UniformDefault: break;
              }
            }
            os_ << " in ";
            block(*n.body, indent);
          }
        },
        s.node);
  }
};

}  // namespace detail

inline std::string to_source(const Expr& e) {
  std::ostringstream os;
  detail::print_sub(os, e, detail::kCond);
  return os.str();
}

inline std::string to_source(const DistExpr& d) {
  std::ostringstream os;
  detail::print_dist(os, d, false);
  return os.str();
}

inline std::string to_source(const Stmt& s) {
  std::ostringstream os;
  detail::StmtPrinter(os).stmt(s, 0);
  return os.str();
}

/// Canonical source text; parsing it yields a structurally equal program.
inline std::string pretty_print(const Program& p) {
  std::ostringstream os;
  if (!p.agents.empty()) {
    os << "agents ";
    for (std::size_t i = 0; i < p.agents.size(); ++i) os << (i ? ", " : "") << p.agents[i];
    os << ";\n";
  }
  for (const auto& d : p.globals)
    os << detail::visibility_text(d.visibility) << ' ' << d.name << " : " << detail::domain_text(d.domain) << ";\n";
  detail::StmtPrinter(os).stmt(*p.body, 0);
  os << '\n';
  return os.str();
}

}  // namespace hyperflow::lang
