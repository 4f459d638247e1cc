#pragma once

#include <compare>
#include <string>
#include <utility>
#include <vector>

#include "hyperflow/semantics/compile.hpp"

namespace hyperflow::semantics {

/// A known visible state with a full distribution over hidden states.
struct SplitState {
  VKey v;
  FiniteDist<HKey> delta;

  friend bool operator==(const SplitState&, const SplitState&) = default;
  friend std::strong_ordering operator<=>(const SplitState& a, const SplitState& b) {
    if (auto c = a.v <=> b.v; c != 0) return c;
    return a.delta <=> b.delta;
  }
};

/// Distribution over split-states. The outer distribution is canonical:
/// equal split-states are merged and entries are sorted by (v, delta).
struct HyperDist {
  LayoutPtr layout;
  FiniteDist<SplitState> outer;

  friend bool operator==(const HyperDist& a, const HyperDist& b) {
    return *a.layout == *b.layout && a.outer == b.outer;
  }
};

/// Groups a joint distribution by visible state (Hide). Input weight may
/// be below 1; each group keeps its share and its normalized conditional.
inline FiniteDist<SplitState> hide(const FiniteDist<JointKey>& d) {
  DistBuilder<SplitState> out;
  const auto& es = d.entries();
  for (std::size_t i = 0; i < es.size();) {
    const std::uint64_t v = es[i].first.v;
    std::vector<FiniteDist<HKey>::Entry> group;
    Rational mass = 0;
    for (; i < es.size() && es[i].first.v == v; ++i) {
      group.emplace_back(HKey{es[i].first.h}, es[i].second);
      mass += es[i].second;
    }
    for (auto& g : group) g.second /= mass;
    out.add(SplitState{VKey{v}, FiniteDist<HKey>::from_sorted(std::move(group))}, mass);
  }
  return out.build();
}

/// Hyper-distribution of a full joint prior over (v, h).
inline HyperDist hide_embed(const FiniteDist<JointKey>& d, LayoutPtr layout) {
  if (d.weight() != 1) throw Error(Errc::DistNotOneSumming, "initial distribution must have weight 1");
  return HyperDist{std::move(layout), hide(d)};
}

inline HyperDist point_hyper(SplitState s, LayoutPtr layout) {
  return HyperDist{std::move(layout), FiniteDist<SplitState>::point(std::move(s))};
}

/// Merges equal split-states, drops zero weights and sorts. Idempotent.
inline HyperDist reduce_hyper(const HyperDist& h) {
  DistBuilder<SplitState> b;
  for (const auto& [s, w] : h.outer) b.add(s, w);
  return HyperDist{h.layout, b.build()};
}

/// Joint distribution of all (v, h) pairs: the functional projection.
inline FiniteDist<JointKey> joint_of(const FiniteDist<SplitState>& outer) {
  DistBuilder<JointKey> b;
  for (const auto& [s, w] : outer)
    for (const auto& [h, p] : s.delta) b.add(JointKey{s.v.code, h.code}, w * p);
  return b.build();
}

/// Expected classical output over the inner distribution of s.
inline FiniteDist<JointKey> classical_over(const CStmt& body, const Layout& l, const SplitState& s) {
  DistBuilder<JointKey> b;
  for (const auto& [h, p] : s.delta) b.add_all(classical_step(body, l, JointKey{s.v.code, h.code}), p);
  return b.build();
}

inline FiniteDist<SplitState> hyper_step(const CStmt& s, const Layout& l, const SplitState& st);

inline void hyper_then(const CStmt& s, const Layout& l, const FiniteDist<SplitState>& in, const Rational& scale,
                       DistBuilder<SplitState>& out) {
  for (const auto& [st, w] : in) {
    const Rational ws = w * scale;
    for (const auto& [r, p] : hyper_step(s, l, st)) out.add(r, ws * p);
  }
}

/// Runs `branch` on `st` conditioned by per-state weights `q` of total mass `p`.
template <class Q>
void hyper_branch(const CStmt& branch, const Layout& l, const SplitState& st, Q&& q, DistBuilder<SplitState>& out) {
  Rational p = 0;
  for (const auto& [h, w] : st.delta) p += w * q(h);
  if (p == 0) return;
  SplitState cond{st.v, posterior(st.delta, q)};
  for (const auto& [r, w] : hyper_step(branch, l, cond)) out.add(r, p * w);
}

inline FiniteDist<SplitState> hyper_step(const CStmt& s, const Layout& l, const SplitState& st) {
  switch (s.kind) {
    case CStmt::Kind::Skip: return FiniteDist<SplitState>::point(st);
    case CStmt::Kind::Assign:
    case CStmt::Kind::Choose: return hide(classical_over(s, l, st));
    case CStmt::Kind::Atomic: return hide(classical_over(*s.first, l, st));
    case CStmt::Kind::Seq: {
      DistBuilder<SplitState> out;
      hyper_then(*s.second, l, hyper_step(*s.first, l, st), Rational(1), out);
      return out.build();
    }
    case CStmt::Kind::Choice: {
      std::vector<Rational> qs;
      for (const auto& [h, w] : st.delta) qs.push_back(choice_probability(s, Env(l, JointKey{st.v.code, h.code})));
      auto weight = [&](bool left) {
        return [&, left](const HKey& h) {
          auto it = std::lower_bound(st.delta.begin(), st.delta.end(), h,
                                     [](const auto& e, const HKey& k) { return e.first < k; });
          const Rational& q = qs[static_cast<std::size_t>(it - st.delta.begin())];
          return left ? q : 1 - q;
        };
      };
      DistBuilder<SplitState> out;
      hyper_branch(*s.first, l, st, weight(true), out);
      hyper_branch(*s.second, l, st, weight(false), out);
      return out.build();
    }
    case CStmt::Kind::If: {
      auto guard = [&](bool want) {
        return [&, want](const HKey& h) { return eval_bool(*s.expr, Env(l, JointKey{st.v.code, h.code})) == want; };
      };
      DistBuilder<SplitState> out;
      hyper_branch(*s.first, l, st, guard(true), out);
      hyper_branch(*s.second, l, st, guard(false), out);
      return out.build();
    }
    case CStmt::Kind::Local: {
      const Layout& in = *s.inner;
      const std::uint64_t pv = in.v_size() / l.v_size();
      const std::uint64_t ph = in.h_size() / l.h_size();
      std::vector<FiniteDist<HKey>::Entry> ext;
      for (const auto& [h, w] : st.delta) ext.emplace_back(HKey{h.code * ph}, w);
      const SplitState entry{VKey{st.v.code * pv}, FiniteDist<HKey>::from_sorted(std::move(ext))};
      DistBuilder<SplitState> body;
      hyper_then(*s.first, in, hyper_step(*s.init, in, entry), Rational(1), body);
      DistBuilder<SplitState> out;
      for (const auto& [r, w] : body.build()) {
        DistBuilder<HKey> d;
        for (const auto& [h, p] : r.delta) d.add(HKey{h.code / ph}, p);
        out.add(SplitState{VKey{r.v.code / pv}, d.build()}, w);
      }
      return out.build();
    }
  }
  throw Error(Errc::Internal, "unknown statement kind");
}

/// Split-state semantics from a single split-state.
inline HyperDist eval(const CompiledProgram& p, const SplitState& s) {
  return HyperDist{p.layout, hyper_step(*p.body, *p.layout, s)};
}

/// Split-state semantics lifted to an initial hyper-distribution.
inline HyperDist eval(const CompiledProgram& p, const HyperDist& init) {
  require_same_layout(*p.layout, *init.layout);
  DistBuilder<SplitState> out;
  hyper_then(*p.body, *p.layout, init.outer, Rational(1), out);
  return HyperDist{p.layout, out.build()};
}

inline HyperDist eval(const lang::Program& p, const SplitState& s) { return eval(compile(p), s); }

/// Hide of the expected classical output: the meaning of atomic{p}.
inline HyperDist eval_atomic_block(const CompiledProgram& p, const SplitState& s) {
  return HyperDist{p.layout, hide(classical_over(*p.body, *p.layout, s))};
}

/// Split-state from visible and hidden values given as name -> value.
inline SplitState make_split_state(const Layout& l, const std::vector<Value>& v, const FiniteDist<HKey>& delta) {
  if (v.size() != l.visible().size()) throw Error(Errc::InvalidArgument, "wrong number of visible values");
  std::vector<std::uint32_t> digits;
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto idx = l.index_of(true, i, v[i]);
    if (!idx) throw Error(Errc::ValueOutOfDomain, to_string(v[i]) + " is outside the domain of '" + l.visible()[i].name + "'");
    digits.push_back(*idx);
  }
  if (delta.weight() != 1) throw Error(Errc::DistNotOneSumming, "inner distribution must have weight 1");
  return SplitState{VKey{l.encode(true, digits)}, delta};
}

/// Hidden-state code of a tuple of hidden values.
inline HKey hidden_key(const Layout& l, const std::vector<Value>& h) {
  if (h.size() != l.hidden().size()) throw Error(Errc::InvalidArgument, "wrong number of hidden values");
  std::vector<std::uint32_t> digits;
  for (std::size_t i = 0; i < h.size(); ++i) {
    auto idx = l.index_of(false, i, h[i]);
    if (!idx) throw Error(Errc::ValueOutOfDomain, to_string(h[i]) + " is outside the domain of '" + l.hidden()[i].name + "'");
    digits.push_back(*idx);
  }
  return HKey{l.encode(false, digits)};
}

inline VKey visible_key(const Layout& l, const std::vector<Value>& v) {
  if (v.size() != l.visible().size()) throw Error(Errc::InvalidArgument, "wrong number of visible values");
  std::vector<std::uint32_t> digits;
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto idx = l.index_of(true, i, v[i]);
    if (!idx) throw Error(Errc::ValueOutOfDomain, to_string(v[i]) + " is outside the domain of '" + l.visible()[i].name + "'");
    digits.push_back(*idx);
  }
  return VKey{l.encode(true, digits)};
}

/// Human-readable rendering, one split-state per line.
inline std::string to_text(const HyperDist& h) {
  std::string out;
  for (const auto& [s, w] : h.outer) {
    out += to_string(w) + " : (" + h.layout->text(true, s.v.code) + ") {";
    bool first = true;
    for (const auto& [k, p] : s.delta) {
      out += (first ? "" : ", ") + std::string("[") + h.layout->text(false, k.code) + "] @ " + to_string(p);
      first = false;
    }
    out += "}\n";
  }
  return out;
}

}  // namespace hyperflow::semantics
