#pragma once
// Dense linear algebra over a prime field: row reduction, kernels and
// solving affine systems.

#include <cstdint>
#include <optional>
#include <vector>

#include "epschar/error.hpp"
#include "epschar/scalars.hpp"

namespace epschar {

/// Row-major rows x cols matrix over F_p.
class FpMatrix {
 public:
  FpMatrix() = default;
  FpMatrix(int p, int rows, int cols)
      : p_(p), rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, 0) {}

  int p() const noexcept { return p_; }
  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  int& at(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  int at(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

  void append_row(const std::vector<int>& row) {
    if (static_cast<int>(row.size()) != cols_) throw DomainError("FpMatrix: row length mismatch");
    for (int v : row) a_.push_back(((v % p_) + p_) % p_);
    ++rows_;
  }

 private:
  int p_ = 0;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> a_;
};

/// Reduced row echelon form of an F_p matrix; pivot columns in increasing order.
struct Rref {
  FpMatrix m;
  std::vector<int> pivots;
  int rank() const noexcept { return static_cast<int>(pivots.size()); }
};

inline int fp_inv(int a, int p) {
  // p is small; extended Euclid.
  int t = 0, nt = 1, r = p, nr = ((a % p) + p) % p;
  if (nr == 0) throw DomainError("inverse of zero in F_p");
  while (nr != 0) {
    const int q = r / nr;
    int tmp = t - q * nt;
    t = nt;
    nt = tmp;
    tmp = r - q * nr;
    r = nr;
    nr = tmp;
  }
  return ((t % p) + p) % p;
}

inline Rref rref(FpMatrix m) {
  const int p = m.p();
  Rref out;
  int row = 0;
  for (int col = 0; col < m.cols() && row < m.rows(); ++col) {
    int piv = -1;
    for (int i = row; i < m.rows(); ++i)
      if (m.at(i, col) != 0) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    if (piv != row)
      for (int j = 0; j < m.cols(); ++j) std::swap(m.at(piv, j), m.at(row, j));
    const int inv = fp_inv(m.at(row, col), p);
    for (int j = 0; j < m.cols(); ++j) m.at(row, j) = m.at(row, j) * inv % p;
    for (int i = 0; i < m.rows(); ++i) {
      if (i == row || m.at(i, col) == 0) continue;
      const int f = m.at(i, col);
      for (int j = 0; j < m.cols(); ++j) m.at(i, j) = ((m.at(i, j) - f * m.at(row, j)) % p + p) % p;
    }
    out.pivots.push_back(col);
    ++row;
  }
  out.m = std::move(m);
  return out;
}

inline int rank(const FpMatrix& m) { return rref(m).rank(); }

/// Basis of {v : M v = 0}.
inline std::vector<std::vector<int>> kernel(const FpMatrix& m) {
  const Rref r = rref(m);
  const int p = m.p();
  std::vector<char> is_pivot(static_cast<std::size_t>(m.cols()), 0);
  for (int c : r.pivots) is_pivot[static_cast<std::size_t>(c)] = 1;
  std::vector<std::vector<int>> basis;
  for (int f = 0; f < m.cols(); ++f) {
    if (is_pivot[static_cast<std::size_t>(f)]) continue;
    std::vector<int> v(static_cast<std::size_t>(m.cols()), 0);
    v[static_cast<std::size_t>(f)] = 1;
    for (int i = 0; i < r.rank(); ++i)
      v[static_cast<std::size_t>(r.pivots[static_cast<std::size_t>(i)])] = (p - r.m.at(i, f)) % p;
    basis.push_back(std::move(v));
  }
  return basis;
}

/// Some v with M v = b, or nullopt when the system is inconsistent.
inline std::optional<std::vector<int>> solve(const FpMatrix& m, const std::vector<int>& b) {
  if (static_cast<int>(b.size()) != m.rows()) throw DomainError("solve: rhs length mismatch");
  const int p = m.p();
  FpMatrix aug(p, m.rows(), m.cols() + 1);
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) aug.at(i, j) = m.at(i, j);
    aug.at(i, m.cols()) = ((b[static_cast<std::size_t>(i)] % p) + p) % p;
  }
  const Rref r = rref(aug);
  if (!r.pivots.empty() && r.pivots.back() == m.cols()) return std::nullopt;
  std::vector<int> v(static_cast<std::size_t>(m.cols()), 0);
  for (int i = 0; i < r.rank(); ++i) v[static_cast<std::size_t>(r.pivots[static_cast<std::size_t>(i)])] = r.m.at(i, m.cols());
  return v;
}

}  // namespace epschar
