#pragma once

#include <string>
#include <vector>

#include "hyperflow/error.hpp"
#include "hyperflow/probcore/rational.hpp"
#include "hyperflow/refine/partition.hpp"

namespace hyperflow::refine {

/// Dense rows x cols matrix of rationals.
class RatMatrix {
 public:
  RatMatrix() = default;
  RatMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, Rational(0)) {}

  static RatMatrix from_rows(const std::vector<std::vector<Rational>>& rows) {
    if (rows.empty() || rows.front().empty()) throw Error(Errc::InvalidArgument, "matrix must be non-empty");
    RatMatrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols_) throw Error(Errc::InvalidArgument, "ragged matrix rows");
      for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
    }
    return m;
  }

  static RatMatrix identity(std::size_t n) {
    RatMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Rational& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Rational& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  RatMatrix transposed() const {
    RatMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  bool is_zero() const {
    for (const auto& x : data_)
      if (x != 0) return false;
    return true;
  }

  friend RatMatrix operator*(const RatMatrix& a, const RatMatrix& b) {
    if (a.cols_ != b.rows_) throw Error(Errc::InvalidArgument, "matrix dimensions do not match");
    RatMatrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        if (a(i, k) == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += a(i, k) * b(k, j);
      }
    return out;
  }

  friend RatMatrix operator*(const Rational& c, const RatMatrix& m) {
    RatMatrix out = m;
    for (auto& x : out.data_) x *= c;
    return out;
  }

  friend RatMatrix operator+(const RatMatrix& a, const RatMatrix& b) {
    RatMatrix out = a;
    for (std::size_t k = 0; k < out.data_.size(); ++k) out.data_[k] += b.data_[k];
    return out;
  }

  friend RatMatrix operator-(const RatMatrix& a, const RatMatrix& b) {
    RatMatrix out = a;
    for (std::size_t k = 0; k < out.data_.size(); ++k) out.data_[k] -= b.data_[k];
    return out;
  }

  friend bool operator==(const RatMatrix&, const RatMatrix&) = default;

  /// Nonnegative with every column summing to 1.
  bool is_refinement_matrix() const {
    for (std::size_t j = 0; j < cols_; ++j) {
      Rational s = 0;
      for (std::size_t i = 0; i < rows_; ++i) {
        if ((*this)(i, j) < 0) return false;
        s += (*this)(i, j);
      }
      if (s != 1) return false;
    }
    return true;
  }

  /// 0/1 with exactly one 1 per column.
  bool is_simple() const {
    for (std::size_t j = 0; j < cols_; ++j) {
      int ones = 0;
      for (std::size_t i = 0; i < rows_; ++i) {
        const Rational& x = (*this)(i, j);
        if (x == 1) ++ones;
        else if (x != 0) return false;
      }
      if (ones != 1) return false;
    }
    return true;
  }

  std::string to_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < rows_; ++i) {
      s += i ? ", [" : "[";
      for (std::size_t j = 0; j < cols_; ++j) s += (j ? ", " : "") + to_short_string((*this)(i, j));
      s += "]";
    }
    return s + "]";
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Rational> data_;
};

/// One row per fraction, one column per listed hidden state.
inline RatMatrix partition_matrix(const Partition& p, const std::vector<HKey>& columns) {
  RatMatrix m(p.size(), columns.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < columns.size(); ++j) m(i, j) = p.fractions[i].prob(columns[j]);
  return m;
}

}  // namespace hyperflow::refine
