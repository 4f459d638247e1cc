#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <utility>

#include "hyperflow/probcore/rational.hpp"

namespace hyperflow {

/// A scalar held by a program variable: a boolean, an exact number or a
/// symbolic atom such as `bot`.
class Value {
 public:
  enum class Kind : std::uint8_t { Bool, Number, Atom };

  Value() = default;

  static Value boolean(bool b) {
    Value v;
    v.kind_ = Kind::Bool;
    v.bool_ = b;
    return v;
  }
  static Value number(Rational r) {
    Value v;
    v.kind_ = Kind::Number;
    v.num_ = std::move(r);
    return v;
  }
  static Value integer(std::int64_t i) { return number(Rational(i)); }
  static Value atom(std::string name) {
    Value v;
    v.kind_ = Kind::Atom;
    v.atom_ = std::move(name);
    return v;
  }

  Kind kind() const { return kind_; }
  bool is_bool() const { return kind_ == Kind::Bool; }
  bool is_number() const { return kind_ == Kind::Number; }
  bool is_atom() const { return kind_ == Kind::Atom; }
  bool is_integer() const { return kind_ == Kind::Number && is_integral(num_); }

  bool as_bool() const { return bool_; }
  const Rational& as_number() const { return num_; }
  const std::string& atom_name() const { return atom_; }

  friend bool operator==(const Value& a, const Value& b) {
    if (a.kind_ != b.kind_) return false;
    switch (a.kind_) {
      case Kind::Bool: return a.bool_ == b.bool_;
      case Kind::Number: return a.num_ == b.num_;
      case Kind::Atom: return a.atom_ == b.atom_;
    }
    return false;
  }

  /// Booleans before numbers before atoms; false < true; numbers numerically.
  friend std::strong_ordering operator<=>(const Value& a, const Value& b) {
    if (a.kind_ != b.kind_) return a.kind_ <=> b.kind_;
    switch (a.kind_) {
      case Kind::Bool: return a.bool_ <=> b.bool_;
      case Kind::Number: return compare(a.num_, b.num_);
      case Kind::Atom: return a.atom_.compare(b.atom_) <=> 0;
    }
    return std::strong_ordering::equal;
  }

 private:
  Kind kind_ = Kind::Number;
  bool bool_ = false;
  Rational num_;
  std::string atom_;
};

inline const char* kind_name(Value::Kind k) {
  switch (k) {
    case Value::Kind::Bool: return "bool";
    case Value::Kind::Number: return "number";
    case Value::Kind::Atom: return "atom";
  }
  return "?";
}

/// Source-level spelling: `true`, `3`, `1/4`, `-2`, `bot`.
inline std::string to_string(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::Bool: return v.as_bool() ? "true" : "false";
    case Value::Kind::Number: return to_short_string(v.as_number());
    case Value::Kind::Atom: return v.atom_name();
  }
  return "?";
}

}  // namespace hyperflow
