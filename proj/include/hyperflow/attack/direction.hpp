#pragma once

#include <cstdint>
#include <vector>

#include "hyperflow/lp/simplex.hpp"
#include "hyperflow/refine/refinement.hpp"

namespace hyperflow::attack {

using refine::Partition;
using refine::RatMatrix;
using semantics::HKey;

constexpr std::uint64_t kDefaultVertexCap = std::uint64_t{1} << 20;

/// Normal of a hyperplane strictly separating the refinements of the source
/// partition from the target partition. Rows: target fractions; columns: the
/// hidden states in `columns`.
struct SeparatingDirection {
  RatMatrix x;
  Rational margin;
  std::vector<HKey> columns;
};

/// Entrywise product sum, i.e. Tr(a * b^T).
inline Rational dot(const RatMatrix& a, const RatMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(Errc::InvalidArgument, "matrix dimensions do not match");
  Rational s = 0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * b(i, j);
  return s;
}

/// Largest <M * source, x> over simple refinement matrices M: each source
/// fraction independently picks the row of x it scores best against.
inline Rational vertex_max(const RatMatrix& source, const RatMatrix& x) {
  if (source.cols() != x.cols()) throw Error(Errc::InvalidArgument, "matrix dimensions do not match");
  Rational total = 0;
  for (std::size_t c = 0; c < source.rows(); ++c) {
    Rational best;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      Rational s = 0;
      for (std::size_t h = 0; h < x.cols(); ++h) s += x(r, h) * source(c, h);
      if (r == 0 || s > best) best = s;
    }
    total += best;
  }
  return total;
}

/// <target, x> minus the best refinement score; positive iff x separates.
inline Rational separation_margin(const Partition& source, const Partition& target, const RatMatrix& x,
                                  const std::vector<HKey>& columns) {
  return dot(refine::partition_matrix(target, columns), x) - vertex_max(refine::partition_matrix(source, columns), x);
}

/// Number of simple matrices target.size() x source.size(), saturating.
inline std::uint64_t vertex_count(const Partition& source, const Partition& target) {
  std::uint64_t n = 1;
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (target.size() != 0 && n > UINT64_MAX / target.size()) return UINT64_MAX;
    n *= target.size();
  }
  return n;
}

namespace detail {

inline void require_separable_instance(const Partition& source, const Partition& target) {
  if (source.empty() || target.empty()) throw Error(Errc::PreconditionViolated, "both partitions must be non-empty");
  if (source.weight() != target.weight()) throw Error(Errc::PreconditionViolated, "partitions have different weights");
}

}  // namespace detail

/// Max-margin direction over the enumerated vertices M * source, with every
/// entry of x in [-1, 1].
inline SeparatingDirection separating_direction(const Partition& source, const Partition& target,
                                                std::uint64_t vertex_cap = kDefaultVertexCap) {
  detail::require_separable_instance(source, target);
  const std::uint64_t count = vertex_count(source, target);
  if (count > vertex_cap)
    throw Error(Errc::VertexBudgetExceeded, std::to_string(count) + " vertices exceed the cap of " + std::to_string(vertex_cap));

  SeparatingDirection out;
  out.columns = refine::support_columns(source, target);
  const RatMatrix s = refine::partition_matrix(source, out.columns);
  const RatMatrix t = refine::partition_matrix(target, out.columns);
  const std::size_t nt = target.size(), ns = source.size(), nh = out.columns.size();
  const std::size_t eps = nt * nh;

  lp::LinearProgram prog(eps + 1);
  for (std::size_t k = 0; k < eps; ++k) {
    prog.lower[k] = Rational(-1);
    prog.upper[k] = Rational(1);
  }
  prog.lower[eps] = std::nullopt;
  prog.objective[eps] = 1;

  // pick[c] is the target row that source fraction c is merged into.
  std::vector<std::size_t> pick(ns, 0);
  for (std::uint64_t v = 0; v < count; ++v) {
    std::vector<Rational> row(eps + 1, Rational(0));
    for (std::size_t c = 0; c < ns; ++c)
      for (std::size_t h = 0; h < nh; ++h) row[pick[c] * nh + h] += s(c, h);
    for (std::size_t r = 0; r < nt; ++r)
      for (std::size_t h = 0; h < nh; ++h) row[r * nh + h] -= t(r, h);
    row[eps] = 1;
    prog.add(std::move(row), lp::Relation::Le, Rational(0));
    for (std::size_t c = 0; c < ns && ++pick[c] == nt; ++c) pick[c] = 0;
  }

  const lp::Optimum opt = lp::solve_max(prog);
  if (opt.value <= 0) throw Error(Errc::NotSeparable, "target lies in the convex hull of the source refinements");
  out.x = RatMatrix(nt, nh);
  for (std::size_t r = 0; r < nt; ++r)
    for (std::size_t h = 0; h < nh; ++h) out.x(r, h) = opt.point[r * nh + h];
  out.margin = separation_margin(source, target, out.x, out.columns);
  if (out.margin != opt.value) throw Error(Errc::Internal, "separation margin disagrees with the optimum");
  return out;
}

/// Direction read off the Farkas certificate of the refinement program:
/// x = -(multipliers of the product rows). Needs no vertex enumeration.
inline SeparatingDirection farkas_direction(const Partition& source, const Partition& target,
                                            const std::vector<Rational>& certificate) {
  detail::require_separable_instance(source, target);
  SeparatingDirection out;
  out.columns = refine::support_columns(source, target);
  const std::size_t ns = source.size(), nt = target.size(), nh = out.columns.size();
  if (certificate.size() < ns + nt * nh) throw Error(Errc::InvalidArgument, "certificate is too short");
  out.x = RatMatrix(nt, nh);
  for (std::size_t r = 0; r < nt; ++r)
    for (std::size_t h = 0; h < nh; ++h) out.x(r, h) = -certificate[ns + r * nh + h];
  out.margin = separation_margin(source, target, out.x, out.columns);
  if (out.margin <= 0) throw Error(Errc::NotSeparable, "certificate does not yield a separating direction");
  return out;
}

/// Certificate path starting from the partitions alone.
inline SeparatingDirection farkas_direction(const Partition& source, const Partition& target) {
  const auto pc = refine::check_partition(source, target);
  if (pc.refined) throw Error(Errc::PreconditionViolated, "target refines the source");
  return farkas_direction(source, target, pc.certificate);
}

}  // namespace hyperflow::attack
