#pragma once

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hyperflow/error.hpp"
#include "hyperflow/probcore/rational.hpp"

namespace hyperflow::lp {

enum class Relation { Le, Eq, Ge };

struct Constraint {
  std::vector<Rational> coeffs;
  Relation rel = Relation::Eq;
  Rational rhs = 0;
};

/// max/min objective . x subject to constraints and per-variable bounds.
/// Lower bounds default to 0; a missing lower bound makes the variable free.
struct LinearProgram {
  std::size_t num_vars = 0;
  std::vector<Constraint> constraints;
  std::vector<Rational> objective;
  bool maximize = true;
  std::vector<std::optional<Rational>> lower;
  std::vector<std::optional<Rational>> upper;

  explicit LinearProgram(std::size_t n = 0)
      : num_vars(n), objective(n, Rational(0)), lower(n, Rational(0)), upper(n) {}

  void add(std::vector<Rational> coeffs, Relation rel, Rational rhs) {
    if (coeffs.size() != num_vars) throw Error(Errc::InvalidArgument, "constraint row does not match variable count");
    constraints.push_back(Constraint{std::move(coeffs), rel, std::move(rhs)});
  }
};

struct Options {
  bool verbose = false;  // dump tableaus to stderr
};

/// Rows of the system a certificate ranges over: the constraints, then one
/// `x_j >= l_j` row per finite lower bound, then one `x_j <= u_j` row per
/// finite upper bound.
struct CertificateRow {
  std::vector<Rational> coeffs;
  Relation rel;
  Rational rhs;
};

inline std::vector<CertificateRow> certificate_rows(const LinearProgram& lp) {
  std::vector<CertificateRow> rows;
  for (const auto& c : lp.constraints) rows.push_back({c.coeffs, c.rel, c.rhs});
  for (std::size_t j = 0; j < lp.num_vars; ++j)
    if (lp.lower[j]) {
      std::vector<Rational> a(lp.num_vars, Rational(0));
      a[j] = 1;
      rows.push_back({std::move(a), Relation::Ge, *lp.lower[j]});
    }
  for (std::size_t j = 0; j < lp.num_vars; ++j)
    if (lp.upper[j]) {
      std::vector<Rational> a(lp.num_vars, Rational(0));
      a[j] = 1;
      rows.push_back({std::move(a), Relation::Le, *lp.upper[j]});
    }
  return rows;
}

/// Exact check that x satisfies every constraint and bound.
inline bool satisfies(const LinearProgram& lp, const std::vector<Rational>& x) {
  if (x.size() != lp.num_vars) return false;
  for (const auto& r : certificate_rows(lp)) {
    Rational s = 0;
    for (std::size_t j = 0; j < lp.num_vars; ++j) s += r.coeffs[j] * x[j];
    if ((r.rel == Relation::Le && s > r.rhs) || (r.rel == Relation::Ge && s < r.rhs) ||
        (r.rel == Relation::Eq && s != r.rhs))
      return false;
  }
  return true;
}

/// Farkas condition: y >= 0 on <= rows, y <= 0 on >= rows, y^T A = 0 and
/// y^T b < 0. Such a y proves that no x satisfies the system.
inline bool is_infeasibility_certificate(const LinearProgram& lp, const std::vector<Rational>& y) {
  const auto rows = certificate_rows(lp);
  if (y.size() != rows.size()) return false;
  std::vector<Rational> ya(lp.num_vars, Rational(0));
  Rational yb = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].rel == Relation::Le && y[i] < 0) return false;
    if (rows[i].rel == Relation::Ge && y[i] > 0) return false;
    if (y[i] == 0) continue;
    for (std::size_t j = 0; j < lp.num_vars; ++j) ya[j] += y[i] * rows[i].coeffs[j];
    yb += y[i] * rows[i].rhs;
  }
  for (const auto& v : ya)
    if (v != 0) return false;
  return yb < 0;
}

namespace detail {

/// Binomial coefficient, saturating at UINT64_MAX.
inline std::uint64_t binomial_saturating(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  const BigInt cap = BigInt(std::numeric_limits<std::uint64_t>::max());
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * BigInt(n - k + i) / BigInt(i);
    if (r >= cap) return std::numeric_limits<std::uint64_t>::max();
  }
  return r.convert_to<std::uint64_t>();
}

/// Equality form A x = b, x >= 0, b >= 0, with the map back to the
/// original variables.
struct StandardForm {
  std::vector<std::vector<Rational>> a;
  std::vector<Rational> b;
  std::vector<Rational> cost;  // minimized
  std::size_t cols = 0;
  std::vector<int> slack_basis;  // per row: column usable as initial basis, or -1
  struct VarMap {
    int pos = -1, neg = -1;
    Rational shift = 0;
  };
  std::vector<VarMap> map;
};

inline StandardForm to_standard(const LinearProgram& lp) {
  StandardForm sf;
  for (std::size_t j = 0; j < lp.num_vars; ++j) {
    StandardForm::VarMap m;
    if (lp.lower[j]) {
      m.pos = static_cast<int>(sf.cols++);
      m.shift = *lp.lower[j];
    } else {
      m.pos = static_cast<int>(sf.cols++);
      m.neg = static_cast<int>(sf.cols++);
    }
    sf.map.push_back(m);
  }
  struct Row {
    std::vector<Rational> coeffs;
    Relation rel;
    Rational rhs;
  };
  std::vector<Row> rows;
  auto structural = [&](const std::vector<Rational>& coeffs, Relation rel, const Rational& rhs) {
    Row r{std::vector<Rational>(sf.cols, Rational(0)), rel, rhs};
    for (std::size_t j = 0; j < lp.num_vars; ++j) {
      if (coeffs[j] == 0) continue;
      const auto& m = sf.map[j];
      r.coeffs[m.pos] += coeffs[j];
      if (m.neg >= 0) r.coeffs[m.neg] -= coeffs[j];
      r.rhs -= coeffs[j] * m.shift;
    }
    rows.push_back(std::move(r));
  };
  for (const auto& c : lp.constraints) structural(c.coeffs, c.rel, c.rhs);
  for (std::size_t j = 0; j < lp.num_vars; ++j)
    if (lp.upper[j]) {
      std::vector<Rational> e(lp.num_vars, Rational(0));
      e[j] = 1;
      structural(e, Relation::Le, *lp.upper[j]);
    }
  std::size_t slacks = 0;
  for (const auto& r : rows)
    if (r.rel != Relation::Eq) ++slacks;
  const std::size_t total = sf.cols + slacks;
  std::size_t next_slack = sf.cols;
  for (auto& r : rows) {
    std::vector<Rational> coeffs = std::move(r.coeffs);
    coeffs.resize(total, Rational(0));
    int slack = -1;
    if (r.rel != Relation::Eq) {
      slack = static_cast<int>(next_slack++);
      coeffs[slack] = r.rel == Relation::Le ? 1 : -1;
    }
    Rational rhs = r.rhs;
    if (rhs < 0) {
      for (auto& c : coeffs) c = -c;
      rhs = -rhs;
    }
    sf.slack_basis.push_back(slack >= 0 && coeffs[slack] == 1 ? slack : -1);
    sf.a.push_back(std::move(coeffs));
    sf.b.push_back(std::move(rhs));
  }
  sf.cols = total;
  sf.cost.assign(total, Rational(0));
  for (std::size_t j = 0; j < lp.num_vars; ++j) {
    const Rational c = lp.maximize ? -lp.objective[j] : lp.objective[j];
    if (c == 0) continue;
    sf.cost[sf.map[j].pos] += c;
    if (sf.map[j].neg >= 0) sf.cost[sf.map[j].neg] -= c;
  }
  return sf;
}

/// Dense tableau with Bland's rule. Columns [0, cols) are structural,
/// [cols, cols + artificials) artificial; the last column is the rhs.
class Tableau {
 public:
  enum class Status { Optimal, Infeasible, Unbounded };

  Tableau(const StandardForm& sf, const Options& opts) : opts_(opts), cols_(sf.cols) {
    const std::size_t m = sf.a.size();
    std::size_t arts = 0;
    for (int s : sf.slack_basis)
      if (s < 0) ++arts;
    width_ = cols_ + arts + 1;
    std::size_t next_art = cols_;
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<Rational> row(width_, Rational(0));
      for (std::size_t j = 0; j < cols_; ++j) row[j] = sf.a[i][j];
      row[width_ - 1] = sf.b[i];
      if (sf.slack_basis[i] >= 0) {
        basis_.push_back(static_cast<std::size_t>(sf.slack_basis[i]));
      } else {
        row[next_art] = 1;
        basis_.push_back(next_art++);
      }
      t_.push_back(std::move(row));
    }
    cap_ = binomial_saturating(width_ - 1, t_.size());
  }

  Status phase1() {
    std::vector<Rational> cost(width_ - 1, Rational(0));
    for (std::size_t j = cols_; j < width_ - 1; ++j) cost[j] = 1;
    set_objective(cost);
    if (run(width_ - 1) == Status::Unbounded) throw Error(Errc::Internal, "phase 1 reported unbounded");
    if (-d_[width_ - 1] > 0) return Status::Infeasible;
    // Drive artificials out of the basis; drop rows that are redundant.
    for (std::size_t i = 0; i < t_.size();) {
      if (basis_[i] < cols_) {
        ++i;
        continue;
      }
      std::size_t j = 0;
      while (j < cols_ && t_[i][j] == 0) ++j;
      if (j < cols_) {
        pivot(i, j);
        ++i;
      } else {
        t_.erase(t_.begin() + static_cast<long>(i));
        basis_.erase(basis_.begin() + static_cast<long>(i));
      }
    }
    return Status::Optimal;
  }

  Status phase2(const std::vector<Rational>& cost) {
    std::vector<Rational> c = cost;
    c.resize(width_ - 1, Rational(0));
    set_objective(c);
    return run(cols_);
  }

  std::vector<Rational> solution() const {
    std::vector<Rational> x(cols_, Rational(0));
    for (std::size_t i = 0; i < t_.size(); ++i)
      if (basis_[i] < cols_) x[basis_[i]] = t_[i][width_ - 1];
    return x;
  }

 private:
  Options opts_;
  std::size_t cols_;
  std::size_t width_ = 0;
  std::vector<std::vector<Rational>> t_;
  std::vector<std::size_t> basis_;
  std::vector<Rational> d_;  // reduced costs; last entry is -objective
  std::uint64_t cap_ = 0;

  void set_objective(const std::vector<Rational>& cost) {
    d_.assign(width_, Rational(0));
    for (std::size_t j = 0; j + 1 < width_; ++j) d_[j] = cost[j];
    for (std::size_t i = 0; i < t_.size(); ++i) {
      const Rational cb = d_[basis_[i]];
      if (cb == 0) continue;
      for (std::size_t j = 0; j < width_; ++j) d_[j] -= cb * t_[i][j];
    }
  }

  void pivot(std::size_t r, std::size_t e) {
    const Rational p = t_[r][e];
    for (auto& x : t_[r]) x /= p;
    for (std::size_t i = 0; i < t_.size(); ++i) {
      if (i == r || t_[i][e] == 0) continue;
      const Rational f = t_[i][e];
      for (std::size_t j = 0; j < width_; ++j)
        if (t_[r][j] != 0) t_[i][j] -= f * t_[r][j];
    }
    if (d_[e] != 0) {
      const Rational f = d_[e];
      for (std::size_t j = 0; j < width_; ++j)
        if (t_[r][j] != 0) d_[j] -= f * t_[r][j];
    }
    basis_[r] = e;
  }

  void dump(std::uint64_t iter) const {
    std::cerr << "tableau after " << iter << " pivots\n";
    for (std::size_t i = 0; i < t_.size(); ++i) {
      std::cerr << "  x" << basis_[i] << " |";
      for (const auto& x : t_[i]) std::cerr << ' ' << to_short_string(x);
      std::cerr << '\n';
    }
    std::cerr << "  d  |";
    for (const auto& x : d_) std::cerr << ' ' << to_short_string(x);
    std::cerr << '\n';
  }

  /// Minimizes over entering columns [0, limit).
  Status run(std::size_t limit) {
    for (std::uint64_t iter = 0;; ++iter) {
      if (opts_.verbose) dump(iter);
      if (iter > cap_) throw Error(Errc::Internal, "simplex exceeded its iteration bound");
      std::size_t e = limit;
      for (std::size_t j = 0; j < limit; ++j)
        if (d_[j] < 0) {
          e = j;
          break;
        }
      if (e == limit) return Status::Optimal;
      std::optional<std::size_t> leave;
      Rational best;
      for (std::size_t i = 0; i < t_.size(); ++i) {
        if (t_[i][e] <= 0) continue;
        Rational ratio = t_[i][width_ - 1] / t_[i][e];
        if (!leave || ratio < best || (ratio == best && basis_[i] < basis_[*leave])) {
          leave = i;
          best = std::move(ratio);
        }
      }
      if (!leave) return Status::Unbounded;
      pivot(*leave, e);
    }
  }
};

inline std::vector<Rational> map_back(const StandardForm& sf, const std::vector<Rational>& z) {
  std::vector<Rational> x;
  for (const auto& m : sf.map) {
    Rational v = z[m.pos] + m.shift;
    if (m.neg >= 0) v -= z[m.neg];
    x.push_back(std::move(v));
  }
  return x;
}

/// Point of the feasible region, or nullopt.
inline std::optional<std::vector<Rational>> find_point(const LinearProgram& lp, const Options& opts) {
  const StandardForm sf = to_standard(lp);
  Tableau t(sf, opts);
  if (t.phase1() == Tableau::Status::Infeasible) return std::nullopt;
  return map_back(sf, t.solution());
}

/// LP whose feasible points are the Farkas certificates with y^T b = -1.
inline LinearProgram certificate_program(const LinearProgram& lp) {
  const auto rows = certificate_rows(lp);
  LinearProgram alt(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    switch (rows[i].rel) {
      case Relation::Le: alt.lower[i] = Rational(0); break;
      case Relation::Ge:
        alt.lower[i] = std::nullopt;
        alt.upper[i] = Rational(0);
        break;
      case Relation::Eq: alt.lower[i] = std::nullopt; break;
    }
  }
  for (std::size_t j = 0; j < lp.num_vars; ++j) {
    std::vector<Rational> col(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) col[i] = rows[i].coeffs[j];
    alt.add(std::move(col), Relation::Eq, Rational(0));
  }
  std::vector<Rational> b(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) b[i] = rows[i].rhs;
  alt.add(std::move(b), Relation::Eq, Rational(-1));
  return alt;
}

}  // namespace detail

struct FeasibilityResult {
  bool feasible = false;
  std::vector<Rational> point;        // when feasible
  std::vector<Rational> certificate;  // when infeasible; indexed like certificate_rows
};

/// Exact phase-1 simplex. Points and certificates are verified before return.
inline FeasibilityResult solve_feasibility(const LinearProgram& lp, const Options& opts = {}) {
  if (auto x = detail::find_point(lp, opts)) {
    if (!satisfies(lp, *x)) throw Error(Errc::Internal, "simplex returned a point violating the constraints");
    return {true, std::move(*x), {}};
  }
  auto y = detail::find_point(detail::certificate_program(lp), opts);
  if (!y || !is_infeasibility_certificate(lp, *y))
    throw Error(Errc::Internal, "infeasible program without a valid Farkas certificate");
  return {false, {}, std::move(*y)};
}

struct Optimum {
  Rational value;
  std::vector<Rational> point;
};

/// Exact optimal basic solution of a feasible, bounded program.
inline Optimum solve_max(const LinearProgram& lp, const Options& opts = {}) {
  const detail::StandardForm sf = detail::to_standard(lp);
  detail::Tableau t(sf, opts);
  if (t.phase1() == detail::Tableau::Status::Infeasible) throw Error(Errc::Infeasible, "linear program is infeasible");
  if (t.phase2(sf.cost) == detail::Tableau::Status::Unbounded)
    throw Error(Errc::Unbounded, "linear program is unbounded");
  Optimum out;
  out.point = detail::map_back(sf, t.solution());
  if (!satisfies(lp, out.point)) throw Error(Errc::Internal, "simplex returned a point violating the constraints");
  out.value = 0;
  for (std::size_t j = 0; j < lp.num_vars; ++j) out.value += lp.objective[j] * out.point[j];
  return out;
}

}  // namespace hyperflow::lp
