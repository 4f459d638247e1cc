#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hyperflow/lp/simplex.hpp"
#include "hyperflow/measures/measures.hpp"
#include "hyperflow/refine/matrix.hpp"

namespace hyperflow::refine {

struct VWitness {
  VKey v;
  RatMatrix r;  // rows: target fractions, columns: source fractions
  Partition source, target;
};

struct RefinementResult {
  bool refined = false;
  bool functional_mismatch = false;
  std::vector<VWitness> witness;
  // Set when the per-v program is infeasible.
  std::optional<VKey> failing_v;
  Partition failing_source, failing_target;
  std::vector<HKey> columns;
  std::vector<Rational> certificate;
};

/// Variables R[r][c] at index r * |source| + c. Rows: one column-sum row per
/// source fraction, then one row per (target fraction, hidden column).
inline lp::LinearProgram refinement_lp(const Partition& source, const Partition& target,
                                       const std::vector<HKey>& columns) {
  const std::size_t ns = source.size(), nt = target.size(), nh = columns.size();
  lp::LinearProgram prog(nt * ns);
  for (std::size_t c = 0; c < ns; ++c) {
    std::vector<Rational> row(nt * ns, Rational(0));
    for (std::size_t r = 0; r < nt; ++r) row[r * ns + c] = 1;
    prog.add(std::move(row), lp::Relation::Eq, Rational(1));
  }
  const RatMatrix s = partition_matrix(source, columns);
  const RatMatrix t = partition_matrix(target, columns);
  for (std::size_t r = 0; r < nt; ++r)
    for (std::size_t h = 0; h < nh; ++h) {
      std::vector<Rational> row(nt * ns, Rational(0));
      for (std::size_t c = 0; c < ns; ++c) row[r * ns + c] = s(c, h);
      prog.add(std::move(row), lp::Relation::Eq, t(r, h));
    }
  return prog;
}

/// Exact R x source = target with R column-stochastic.
inline bool verify_witness(const RatMatrix& r, const Partition& source, const Partition& target) {
  if (r.rows() != target.size() || r.cols() != source.size() || !r.is_refinement_matrix()) return false;
  const auto cols = support_columns(source, target);
  return r * partition_matrix(source, cols) == partition_matrix(target, cols);
}

/// Per-v refinement matrix from source to target, or the Farkas certificate
/// of the infeasible program.
struct PartitionCheck {
  bool refined = false;
  RatMatrix r;
  std::vector<HKey> columns;
  std::vector<Rational> certificate;
};

inline PartitionCheck check_partition(const Partition& source, const Partition& target) {
  PartitionCheck out;
  out.columns = support_columns(source, target);
  if (source.empty() || target.empty()) {
    out.refined = source.empty() && target.empty();
    return out;
  }
  const auto res = lp::solve_feasibility(refinement_lp(source, target, out.columns));
  if (!res.feasible) {
    out.certificate = res.certificate;
    return out;
  }
  out.r = RatMatrix(target.size(), source.size());
  for (std::size_t i = 0; i < target.size(); ++i)
    for (std::size_t j = 0; j < source.size(); ++j) out.r(i, j) = res.point[i * source.size() + j];
  if (!verify_witness(out.r, source, target)) throw Error(Errc::Internal, "refinement witness failed re-verification");
  out.refined = true;
  return out;
}

/// Decides S ⊑ I pointwise on two output hyper-distributions.
inline RefinementResult check_refinement(const HyperDist& s, const HyperDist& i) {
  semantics::require_same_layout(*s.layout, *i.layout);
  RefinementResult out;
  if (measures::ft(s) != measures::ft(i)) {
    out.functional_mismatch = true;
    return out;
  }
  for (VKey v : visible_values(s, i)) {
    Partition ps = extract_partition(s, v), pi = extract_partition(i, v);
    PartitionCheck pc = check_partition(ps, pi);
    if (!pc.refined) {
      out.failing_v = v;
      out.failing_source = std::move(ps);
      out.failing_target = std::move(pi);
      out.columns = std::move(pc.columns);
      out.certificate = std::move(pc.certificate);
      return out;
    }
    out.witness.push_back(VWitness{v, std::move(pc.r), std::move(ps), std::move(pi)});
  }
  out.refined = true;
  return out;
}

/// [{"v":"1","R":[["1/1","1/2","0/1"],...]}, ...]
inline nlohmann::ordered_json witness_json(const RefinementResult& res, const semantics::Layout& l) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& w : res.witness) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < w.r.rows(); ++i) {
      nlohmann::ordered_json row = nlohmann::ordered_json::array();
      for (std::size_t j = 0; j < w.r.cols(); ++j) row.push_back(to_string(w.r(i, j)));
      rows.push_back(row);
    }
    arr.push_back({{"v", v_label(l, w.v)}, {"R", rows}});
  }
  return arr;
}

/// Greedy convex decomposition of a refinement matrix into simple ones:
/// per column take the least nonzero entry (first row on ties), subtract
/// the smallest of these times the selecting matrix, repeat.
inline std::vector<std::pair<Rational, RatMatrix>> decompose_refinement(const RatMatrix& r) {
  if (r.rows() == 0 || r.cols() == 0 || !r.is_refinement_matrix())
    throw Error(Errc::NotRefinementMatrix, "matrix is not nonnegative with one-summing columns");
  std::vector<std::pair<Rational, RatMatrix>> out;
  RatMatrix rest = r;
  while (!rest.is_zero()) {
    RatMatrix m(r.rows(), r.cols());
    std::optional<Rational> c;
    for (std::size_t j = 0; j < r.cols(); ++j) {
      std::optional<std::size_t> pick;
      for (std::size_t i = 0; i < r.rows(); ++i)
        if (rest(i, j) != 0 && (!pick || rest(i, j) < rest(*pick, j))) pick = i;
      if (!pick) throw Error(Errc::Internal, "column exhausted before the matrix");
      m(*pick, j) = 1;
      if (!c || rest(*pick, j) < *c) c = rest(*pick, j);
    }
    rest = rest - (*c) * m;
    out.emplace_back(*c, std::move(m));
  }
  return out;
}

}  // namespace hyperflow::refine
