#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hyperflow/error.hpp"
#include "hyperflow/lang/ast.hpp"
#include "hyperflow/probcore/dist.hpp"
#include "hyperflow/probcore/value.hpp"

namespace hyperflow::semantics {

/// Mixed-radix code of a visible-state tuple.
struct VKey {
  std::uint64_t code = 0;
  friend auto operator<=>(const VKey&, const VKey&) = default;
};

/// Mixed-radix code of a hidden-state tuple.
struct HKey {
  std::uint64_t code = 0;
  friend auto operator<=>(const HKey&, const HKey&) = default;
};

/// A full state (v, h).
struct JointKey {
  std::uint64_t v = 0;
  std::uint64_t h = 0;
  friend auto operator<=>(const JointKey&, const JointKey&) = default;
};

struct VarInfo {
  std::string name;
  std::vector<Value> domain;
  bool visible = false;
};

/// Domain order used for state codes: bool as false < true, numbers
/// ascending, atoms in declaration order.
inline std::vector<Value> canonical_domain(std::vector<Value> dom) {
  if (!dom.empty() && !dom.front().is_atom()) std::sort(dom.begin(), dom.end());
  return dom;
}

constexpr std::uint64_t kMaxStates = std::uint64_t(1) << 40;

/// Variables split into the visible and hidden parts of a state. The first
/// declared variable of each part is the most significant digit.
class Layout {
 public:
  Layout() = default;

  explicit Layout(const std::vector<VarInfo>& vars) {
    for (const auto& v : vars) add(v);
  }

  static std::shared_ptr<const Layout> of_program(const lang::Program& p) {
    auto out = std::make_shared<Layout>();
    for (const auto& d : p.globals) out->add(from_decl(d));
    return out;
  }

  static VarInfo from_decl(const lang::VarDecl& d) {
    if (d.visibility.kind == lang::Visibility::Kind::Agents)
      throw Error(Errc::UnresolvedVisibility,
                  "'" + d.name + "' is annotated for specific agents; select an agent view first");
    if (d.domain.empty()) throw Error(Errc::InvalidArgument, "domain of '" + d.name + "' is empty");
    return VarInfo{d.name, canonical_domain(d.domain), d.visibility.kind == lang::Visibility::Kind::Visible};
  }

  const std::vector<VarInfo>& visible() const { return vis_; }
  const std::vector<VarInfo>& hidden() const { return hid_; }
  const std::vector<VarInfo>& part(bool visible) const { return visible ? vis_ : hid_; }
  std::uint64_t v_size() const { return v_size_; }
  std::uint64_t h_size() const { return h_size_; }

  void add(const VarInfo& v) {
    auto& part = v.visible ? vis_ : hid_;
    auto& size = v.visible ? v_size_ : h_size_;
    if (size > kMaxStates / std::max<std::uint64_t>(v.domain.size(), 1))
      throw Error(Errc::UnsupportedConstruct, "state space is too large");
    part.push_back(v);
    size *= v.domain.size();
  }

  std::vector<std::uint32_t> decode(bool visible, std::uint64_t code) const {
    const auto& p = part(visible);
    std::vector<std::uint32_t> digits(p.size());
    for (std::size_t i = p.size(); i-- > 0;) {
      const auto n = p[i].domain.size();
      digits[i] = static_cast<std::uint32_t>(code % n);
      code /= n;
    }
    return digits;
  }

  std::uint64_t encode(bool visible, const std::vector<std::uint32_t>& digits) const {
    const auto& p = part(visible);
    std::uint64_t code = 0;
    for (std::size_t i = 0; i < p.size(); ++i) code = code * p[i].domain.size() + digits[i];
    return code;
  }

  std::optional<std::uint32_t> index_of(bool visible, std::size_t var, const Value& value) const {
    const auto& dom = part(visible)[var].domain;
    for (std::size_t i = 0; i < dom.size(); ++i)
      if (dom[i] == value) return static_cast<std::uint32_t>(i);
    return std::nullopt;
  }

  std::optional<std::pair<bool, std::size_t>> find(const std::string& name) const {
    for (std::size_t i = 0; i < vis_.size(); ++i)
      if (vis_[i].name == name) return std::pair{true, i};
    for (std::size_t i = 0; i < hid_.size(); ++i)
      if (hid_[i].name == name) return std::pair{false, i};
    return std::nullopt;
  }

  std::vector<Value> values(bool visible, std::uint64_t code) const {
    const auto digits = decode(visible, code);
    std::vector<Value> out;
    for (std::size_t i = 0; i < digits.size(); ++i) out.push_back(part(visible)[i].domain[digits[i]]);
    return out;
  }

  /// "v=bot, w=1"; "-" for the empty tuple.
  std::string text(bool visible, std::uint64_t code) const {
    const auto vals = values(visible, code);
    if (vals.empty()) return "-";
    std::string s;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (i) s += ", ";
      s += part(visible)[i].name + "=" + to_string(vals[i]);
    }
    return s;
  }

  friend bool operator==(const Layout& a, const Layout& b) {
    auto same = [](const std::vector<VarInfo>& x, const std::vector<VarInfo>& y) {
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i].name != y[i].name || x[i].domain != y[i].domain) return false;
      return true;
    };
    return same(a.vis_, b.vis_) && same(a.hid_, b.hid_);
  }

 private:
  std::vector<VarInfo> vis_, hid_;
  std::uint64_t v_size_ = 1, h_size_ = 1;
};

using LayoutPtr = std::shared_ptr<const Layout>;

inline void require_same_layout(const Layout& a, const Layout& b) {
  if (!(a == b)) throw Error(Errc::DomainMismatch, "the two states range over different declarations");
}

}  // namespace hyperflow::semantics
