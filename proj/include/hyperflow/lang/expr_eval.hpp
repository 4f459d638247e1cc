#pragma once

#include <string>
#include <type_traits>

#include "hyperflow/error.hpp"
#include "hyperflow/lang/ast.hpp"

namespace hyperflow::lang {

inline const char* op_spelling(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::IntDiv: return "div";
    case BinOp::Mod: return "mod";
    case BinOp::Eq: return "=";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::And: return "and";
    case BinOp::Or: return "or";
    case BinOp::Xor: return "xor";
  }
  return "?";
}

namespace detail {

[[noreturn]] inline void type_error(const std::string& what) { throw Error(Errc::TypeMismatch, what); }

inline BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;  // truncates toward zero
  if ((a % b != 0) && ((a < 0) != (b < 0))) q -= 1;
  return q;
}

}  // namespace detail

inline Value apply_unary(UnOp op, const Value& x) {
  if (op == UnOp::Neg) {
    if (!x.is_number()) detail::type_error("unary '-' needs a number, got " + std::string(kind_name(x.kind())));
    return Value::number(-x.as_number());
  }
  if (!x.is_bool()) detail::type_error("'not' needs a boolean, got " + std::string(kind_name(x.kind())));
  return Value::boolean(!x.as_bool());
}

inline Value apply_binary(BinOp op, const Value& a, const Value& b) {
  auto need_numbers = [&] {
    if (!a.is_number() || !b.is_number())
      detail::type_error(std::string("'") + op_spelling(op) + "' needs numbers");
  };
  auto need_bools = [&] {
    if (!a.is_bool() || !b.is_bool()) detail::type_error(std::string("'") + op_spelling(op) + "' needs booleans");
  };
  switch (op) {
    case BinOp::Add: need_numbers(); return Value::number(a.as_number() + b.as_number());
    case BinOp::Sub: need_numbers(); return Value::number(a.as_number() - b.as_number());
    case BinOp::Mul: need_numbers(); return Value::number(a.as_number() * b.as_number());
    case BinOp::Div:
      need_numbers();
      if (b.as_number() == 0) throw Error(Errc::InvalidArgument, "division by zero");
      return Value::number(a.as_number() / b.as_number());
    case BinOp::IntDiv:
    case BinOp::Mod: {
      need_numbers();
      if (!a.is_integer() || !b.is_integer())
        detail::type_error(std::string("'") + op_spelling(op) + "' needs integers");
      const BigInt x = numerator(a.as_number());
      const BigInt y = numerator(b.as_number());
      if (y == 0) throw Error(Errc::InvalidArgument, std::string("'") + op_spelling(op) + "' by zero");
      const BigInt q = detail::floor_div(x, y);
      if (op == BinOp::IntDiv) return Value::number(Rational(q));
      return Value::number(Rational(BigInt(x - q * y)));
    }
    case BinOp::Eq:
    case BinOp::Ne:
      if (a.kind() != b.kind())
        detail::type_error(std::string("cannot compare ") + kind_name(a.kind()) + " with " + kind_name(b.kind()));
      return Value::boolean((a == b) == (op == BinOp::Eq));
    case BinOp::Lt: need_numbers(); return Value::boolean(a.as_number() < b.as_number());
    case BinOp::Le: need_numbers(); return Value::boolean(a.as_number() <= b.as_number());
    case BinOp::Gt: need_numbers(); return Value::boolean(a.as_number() > b.as_number());
    case BinOp::Ge: need_numbers(); return Value::boolean(a.as_number() >= b.as_number());
    case BinOp::And: need_bools(); return Value::boolean(a.as_bool() && b.as_bool());
    case BinOp::Or: need_bools(); return Value::boolean(a.as_bool() || b.as_bool());
    case BinOp::Xor: need_bools(); return Value::boolean(a.as_bool() != b.as_bool());
  }
  throw Error(Errc::Internal, "unknown operator");
}

/// Evaluates an expression; `lookup(name)` supplies variable values.
template <class Lookup>
Value eval_expr(const Expr& e, Lookup&& lookup) {
  return std::visit(
      [&](const auto& n) -> Value {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Lit>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, Var>) {
          return lookup(n.name);
        } else if constexpr (std::is_same_v<T, Unary>) {
          return apply_unary(n.op, eval_expr(*n.operand, lookup));
        } else if constexpr (std::is_same_v<T, Binary>) {
          Value l = eval_expr(*n.lhs, lookup);
          if ((n.op == BinOp::And || n.op == BinOp::Or) && l.is_bool() &&
              l.as_bool() == (n.op == BinOp::Or))
            return l;
          return apply_binary(n.op, l, eval_expr(*n.rhs, lookup));
        } else {
          Value g = eval_expr(*n.guard, lookup);
          if (!g.is_bool()) detail::type_error("conditional guard must be boolean");
          return eval_expr(g.as_bool() ? *n.then_e : *n.else_e, lookup);
        }
      },
      e.node);
}

}  // namespace hyperflow::lang
