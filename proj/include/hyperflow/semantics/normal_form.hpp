#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hyperflow/semantics/hyper.hpp"

namespace hyperflow::semantics {

/// Square sparse rational matrix over joint states (v, h), indexed by
/// v * |H| + h.
class SparseMatrix {
 public:
  explicit SparseMatrix(std::size_t n = 0) : rows_(n) {}

  std::size_t size() const { return rows_.size(); }
  const std::map<std::size_t, Rational>& row(std::size_t i) const { return rows_[i]; }

  void add(std::size_t i, std::size_t j, const Rational& x) {
    if (x == 0) return;
    auto [it, inserted] = rows_[i].try_emplace(j, x);
    if (!inserted) {
      it->second += x;
      if (it->second == 0) rows_[i].erase(it);
    }
  }

  Rational at(std::size_t i, std::size_t j) const {
    auto it = rows_[i].find(j);
    return it == rows_[i].end() ? Rational(0) : it->second;
  }

  bool is_zero() const {
    for (const auto& r : rows_)
      if (!r.empty()) return false;
    return true;
  }

  friend SparseMatrix operator*(const SparseMatrix& a, const SparseMatrix& b) {
    SparseMatrix out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      for (const auto& [k, x] : a.rows_[i])
        for (const auto& [j, y] : b.rows_[k]) out.add(i, j, x * y);
    return out;
  }

  /// Keeps only columns whose joint state has visible part v.
  SparseMatrix select_v(std::uint64_t v, std::uint64_t h_size) const {
    SparseMatrix out(size());
    for (std::size_t i = 0; i < size(); ++i)
      for (const auto& [j, x] : rows_[i])
        if (j / h_size == v) out.rows_[i].emplace(j, x);
    return out;
  }

  /// Scales row i by d[i].
  SparseMatrix scale_rows(const std::vector<Rational>& d) const {
    SparseMatrix out(size());
    for (std::size_t i = 0; i < size(); ++i)
      if (d[i] != 0)
        for (const auto& [j, x] : rows_[i]) out.rows_[i].emplace(j, x * d[i]);
    return out;
  }

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::vector<std::map<std::size_t, Rational>> rows_;
};

/// Indexed family of matrices; zero members are kept so that the size of a
/// sequential composition is the product of the sizes of its parts.
struct NormalForm {
  LayoutPtr layout;
  std::vector<SparseMatrix> matrices;
};

constexpr std::size_t kMaxNormalFormSize = std::size_t(1) << 16;

/// Row-stochastic matrix of the classical semantics of `s`.
inline SparseMatrix classical_matrix(const CStmt& s, const Layout& l) {
  const std::uint64_t nh = l.h_size();
  SparseMatrix m(l.v_size() * nh);
  for (std::uint64_t v = 0; v < l.v_size(); ++v)
    for (std::uint64_t h = 0; h < nh; ++h)
      for (const auto& [k, w] : classical_step(s, l, JointKey{v, h})) m.add(v * nh + h, k.v * nh + k.h, w);
  return m;
}

namespace detail {

inline std::vector<SparseMatrix> nf(const CStmt& s, const Layout& l) {
  const std::uint64_t nh = l.h_size();
  const std::uint64_t n = l.v_size() * nh;
  auto atomic_nf = [&](const CStmt& body) {
    const SparseMatrix c = classical_matrix(body, l);
    std::vector<SparseMatrix> out;
    for (std::uint64_t v = 0; v < l.v_size(); ++v) out.push_back(c.select_v(v, nh));
    return out;
  };
  auto diag = [&](auto&& f) {
    std::vector<Rational> d(n);
    for (std::uint64_t v = 0; v < l.v_size(); ++v)
      for (std::uint64_t h = 0; h < nh; ++h) d[v * nh + h] = f(JointKey{v, h});
    return d;
  };
  auto branches = [&](const std::vector<Rational>& q) {
    std::vector<Rational> r(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) r[i] = 1 - q[i];
    std::vector<SparseMatrix> out;
    for (const auto& m : nf(*s.first, l)) out.push_back(m.scale_rows(q));
    for (const auto& m : nf(*s.second, l)) out.push_back(m.scale_rows(r));
    return out;
  };
  switch (s.kind) {
    case CStmt::Kind::Skip:
    case CStmt::Kind::Assign:
    case CStmt::Kind::Choose: return atomic_nf(s);
    case CStmt::Kind::Atomic: return atomic_nf(*s.first);
    case CStmt::Kind::Seq: {
      const auto a = nf(*s.first, l);
      const auto b = nf(*s.second, l);
      if (a.size() * b.size() > kMaxNormalFormSize)
        throw Error(Errc::UnsupportedConstruct, "normal form has too many matrices");
      std::vector<SparseMatrix> out;
      for (const auto& x : a)
        for (const auto& y : b) out.push_back(x * y);
      return out;
    }
    case CStmt::Kind::Choice:
      return branches(diag([&](JointKey k) { return choice_probability(s, Env(l, k)); }));
    case CStmt::Kind::If:
      return branches(diag([&](JointKey k) { return Rational(eval_bool(*s.expr, Env(l, k)) ? 1 : 0); }));
    case CStmt::Kind::Local: throw Error(Errc::UnsupportedConstruct, "normal form of a local block is not defined");
  }
  throw Error(Errc::Internal, "unknown statement kind");
}

}  // namespace detail

inline NormalForm normal_form(const CompiledProgram& p) { return NormalForm{p.layout, detail::nf(*p.body, *p.layout)}; }

/// Applies every matrix to the row vector of s and regroups the results.
inline HyperDist eval_via_normal_form(const NormalForm& nf, const SplitState& s) {
  const std::uint64_t nh = nf.layout->h_size();
  DistBuilder<SplitState> out;
  for (const auto& m : nf.matrices) {
    std::map<std::size_t, Rational> row;
    for (const auto& [h, p] : s.delta)
      for (const auto& [j, x] : m.row(s.v.code * nh + h.code)) row[j] += p * x;
    DistBuilder<JointKey> joint;
    for (const auto& [j, x] : row) joint.add(JointKey{j / nh, j % nh}, x);
    for (const auto& [st, w] : hide(joint.build())) out.add(st, w);
  }
  return HyperDist{nf.layout, out.build()};
}

inline HyperDist eval_via_normal_form(const CompiledProgram& p, const SplitState& s) {
  return eval_via_normal_form(normal_form(p), s);
}

struct AtomicityResult {
  bool holds = true;
  // Counterexample: from v, two intermediates v1 and v2 both reach v_final.
  std::uint64_t v = 0, v_final = 0, v_mid1 = 0, v_mid2 = 0;
};

/// Whether atomic{p1; p2} splits into atomic{p1}; atomic{p2}: for every
/// start and final visible state at most one intermediate visible state is
/// reachable through p1 then p2.
inline AtomicityResult check_atomic_distribution(const CompiledProgram& p1, const CompiledProgram& p2) {
  require_same_layout(*p1.layout, *p2.layout);
  const Layout& l = *p1.layout;
  const std::uint64_t nv = l.v_size();
  const std::uint64_t nh = l.h_size();
  const SparseMatrix c1 = classical_matrix(*p1.body, l);
  const SparseMatrix c2 = classical_matrix(*p2.body, l);
  // reach[v][mid][final]
  std::vector<std::vector<std::vector<bool>>> reach(nv, std::vector<std::vector<bool>>(nv, std::vector<bool>(nv)));
  for (std::uint64_t i = 0; i < nv * nh; ++i)
    for (const auto& [k, x] : c1.row(i))
      for (const auto& [j, y] : c2.row(k)) reach[i / nh][k / nh][j / nh] = true;
  for (std::uint64_t v = 0; v < nv; ++v)
    for (std::uint64_t f = 0; f < nv; ++f) {
      std::optional<std::uint64_t> seen;
      for (std::uint64_t m = 0; m < nv; ++m) {
        if (!reach[v][m][f]) continue;
        if (seen) return AtomicityResult{false, v, f, *seen, m};
        seen = m;
      }
    }
  return {};
}

}  // namespace hyperflow::semantics
