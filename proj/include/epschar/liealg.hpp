#pragma once
// gl_n(F_p) with the trace form: matrices, brackets, subspaces, root data of
// the diagonal torus, centralizers of regular semisimple elements and the
// maps built from them.

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "epschar/error.hpp"
#include "epschar/fp_linalg.hpp"

namespace epschar {

inline constexpr int kMaxN = 3;

/// An n x n matrix over F_p (n <= 3). Used both for Lie algebra elements and
/// for elements of GL_n(F_p).
struct Mat {
  int n = 0;
  int p = 0;
  std::array<int32_t, kMaxN * kMaxN> a{};

  Mat() = default;
  Mat(int n_, int p_) : n(n_), p(p_) {
    if (n_ < 1 || n_ > kMaxN) throw DomainError("matrix size must be 1..3");
  }

  static Mat zero(int n, int p) { return Mat(n, p); }
  static Mat identity(int n, int p) {
    Mat m(n, p);
    for (int i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }
  /// Elementary matrix E_ij.
  static Mat unit(int n, int p, int i, int j) {
    Mat m(n, p);
    m(i, j) = 1;
    return m;
  }
  static Mat diag(int p, const std::vector<int>& d) {
    Mat m(static_cast<int>(d.size()), p);
    for (int i = 0; i < m.n; ++i) m(i, i) = ((d[static_cast<std::size_t>(i)] % p) + p) % p;
    return m;
  }
  static Mat from_rows(int p, const std::vector<std::vector<int>>& rows) {
    Mat m(static_cast<int>(rows.size()), p);
    for (int i = 0; i < m.n; ++i) {
      if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != m.n)
        throw DomainError("from_rows: matrix must be square");
      for (int j = 0; j < m.n; ++j) m(i, j) = ((rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] % p) + p) % p;
    }
    return m;
  }
  /// Entries in row-major order.
  static Mat from_vec(int n, int p, const std::vector<int>& v, std::size_t offset = 0) {
    Mat m(n, p);
    for (int k = 0; k < n * n; ++k) m.a[static_cast<std::size_t>(k)] = ((v[offset + static_cast<std::size_t>(k)] % p) + p) % p;
    return m;
  }
  std::vector<int> to_vec() const { return std::vector<int>(a.begin(), a.begin() + n * n); }

  int32_t& operator()(int i, int j) { return a[static_cast<std::size_t>(i * n + j)]; }
  int32_t operator()(int i, int j) const { return a[static_cast<std::size_t>(i * n + j)]; }
  int size() const noexcept { return n * n; }

  bool is_zero() const {
    for (int k = 0; k < n * n; ++k)
      if (a[static_cast<std::size_t>(k)] != 0) return false;
    return true;
  }
  bool is_diagonal() const {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && (*this)(i, j) != 0) return false;
    return true;
  }
  /// Upper triangular (membership in the Borel subalgebra / subgroup).
  bool is_upper() const {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j)
        if ((*this)(i, j) != 0) return false;
    return true;
  }
  bool is_strict_upper() const {
    if (!is_upper()) return false;
    for (int i = 0; i < n; ++i)
      if ((*this)(i, i) != 0) return false;
    return true;
  }
  std::vector<int> diagonal() const {
    std::vector<int> d(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = (*this)(i, i);
    return d;
  }

  friend bool operator==(const Mat& x, const Mat& y) {
    if (x.n != y.n || x.p != y.p) return false;
    for (int k = 0; k < x.n * x.n; ++k)
      if (x.a[static_cast<std::size_t>(k)] != y.a[static_cast<std::size_t>(k)]) return false;
    return true;
  }
  friend bool operator!=(const Mat& x, const Mat& y) { return !(x == y); }

  std::string str() const {
    std::string s = "[";
    for (int i = 0; i < n; ++i) {
      if (i) s += ";";
      for (int j = 0; j < n; ++j) {
        if (j) s += ",";
        s += std::to_string((*this)(i, j));
      }
    }
    return s + "]";
  }
  friend std::ostream& operator<<(std::ostream& os, const Mat& m) { return os << m.str(); }
};

inline void check_shape(const Mat& x, const Mat& y) {
  if (x.n != y.n || x.p != y.p) throw DomainError("matrix shape or modulus mismatch");
}

inline Mat operator+(const Mat& x, const Mat& y) {
  check_shape(x, y);
  Mat r(x.n, x.p);
  for (int k = 0; k < x.n * x.n; ++k) {
    const auto s = static_cast<std::size_t>(k);
    int v = x.a[s] + y.a[s];
    r.a[s] = v >= x.p ? v - x.p : v;
  }
  return r;
}
inline Mat operator-(const Mat& x, const Mat& y) {
  check_shape(x, y);
  Mat r(x.n, x.p);
  for (int k = 0; k < x.n * x.n; ++k) {
    const auto s = static_cast<std::size_t>(k);
    int v = x.a[s] - y.a[s];
    r.a[s] = v < 0 ? v + x.p : v;
  }
  return r;
}
inline Mat operator-(const Mat& x) { return Mat::zero(x.n, x.p) - x; }
inline Mat operator*(long long c, const Mat& x) {
  Mat r(x.n, x.p);
  const long long cc = ((c % x.p) + x.p) % x.p;
  for (int k = 0; k < x.n * x.n; ++k)
    r.a[static_cast<std::size_t>(k)] = static_cast<int32_t>(cc * x.a[static_cast<std::size_t>(k)] % x.p);
  return r;
}
inline Mat operator*(const Mat& x, const Mat& y) {
  check_shape(x, y);
  const int n = x.n;
  Mat r(n, x.p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      int32_t s = 0;
      for (int k = 0; k < n; ++k) s += x(i, k) * y(k, j);
      r(i, j) = s % x.p;
    }
  return r;
}
inline Mat& operator+=(Mat& x, const Mat& y) { return x = x + y; }
inline Mat& operator-=(Mat& x, const Mat& y) { return x = x - y; }

/// [X, Y] = XY - YX
inline Mat bracket(const Mat& x, const Mat& y) { return x * y - y * x; }

/// <X, Y> = tr(XY)
inline int pairing(const Mat& x, const Mat& y) {
  check_shape(x, y);
  long long s = 0;
  for (int i = 0; i < x.n; ++i)
    for (int k = 0; k < x.n; ++k) s += static_cast<long long>(x(i, k)) * y(k, i);
  return static_cast<int>(s % x.p);
}

inline int trace(const Mat& x) {
  int s = 0;
  for (int i = 0; i < x.n; ++i) s += x(i, i);
  return s % x.p;
}

inline int det(const Mat& m) {
  const int p = m.p;
  long long d = 0;
  if (m.n == 1) d = m(0, 0);
  else if (m.n == 2) d = static_cast<long long>(m(0, 0)) * m(1, 1) - static_cast<long long>(m(0, 1)) * m(1, 0);
  else
    d = static_cast<long long>(m(0, 0)) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
        static_cast<long long>(m(0, 1)) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
        static_cast<long long>(m(0, 2)) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
  return static_cast<int>(((d % p) + p) % p);
}

inline bool invertible(const Mat& m) { return det(m) != 0; }

/// Inverse of an invertible matrix (adjugate formula).
inline Mat inverse(const Mat& m) {
  const int d = det(m);
  if (d == 0) throw DomainError("matrix not invertible: " + m.str());
  const int di = fp_inv(d, m.p);
  const int n = m.n;
  Mat adj(n, m.p);
  if (n == 1) adj(0, 0) = 1;
  else if (n == 2) {
    adj(0, 0) = m(1, 1);
    adj(1, 1) = m(0, 0);
    adj(0, 1) = (m.p - m(0, 1)) % m.p;
    adj(1, 0) = (m.p - m(1, 0)) % m.p;
  } else {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
        const int cof = m(r0, c0) * m(r1, c1) - m(r0, c1) * m(r1, c0);
        adj(i, j) = ((cof % m.p) + m.p) % m.p;
      }
  }
  return di * adj;
}

/// ^g X = g X g^{-1}
inline Mat Ad(const Mat& g, const Mat& x) { return g * x * inverse(g); }
/// Same with a precomputed inverse.
inline Mat Ad(const Mat& g, const Mat& x, const Mat& g_inv) { return g * x * g_inv; }

inline Mat transpose(const Mat& x) {
  Mat r(x.n, x.p);
  for (int i = 0; i < x.n; ++i)
    for (int j = 0; j < x.n; ++j) r(i, j) = x(j, i);
  return r;
}

/// Strictly lower, diagonal and strictly upper parts.
inline Mat lower_part(const Mat& x) {
  Mat r(x.n, x.p);
  for (int i = 0; i < x.n; ++i)
    for (int j = 0; j < i; ++j) r(i, j) = x(i, j);
  return r;
}
inline Mat diag_part(const Mat& x) {
  Mat r(x.n, x.p);
  for (int i = 0; i < x.n; ++i) r(i, i) = x(i, i);
  return r;
}
inline Mat upper_part(const Mat& x) {
  Mat r(x.n, x.p);
  for (int i = 0; i < x.n; ++i)
    for (int j = i + 1; j < x.n; ++j) r(i, j) = x(i, j);
  return r;
}

/// A subspace of gl_n(F_p) given by a basis in reduced echelon form.
class Subspace {
 public:
  Subspace(int n, int p) : n_(n), p_(p) {}

  static Subspace span(int n, int p, const std::vector<Mat>& gens) {
    Subspace s(n, p);
    FpMatrix m(p, 0, n * n);
    for (const auto& g : gens) m.append_row(g.to_vec());
    const Rref r = rref(m);
    for (int i = 0; i < r.rank(); ++i) {
      std::vector<int> row(static_cast<std::size_t>(n * n));
      for (int j = 0; j < n * n; ++j) row[static_cast<std::size_t>(j)] = r.m.at(i, j);
      s.basis_.push_back(Mat::from_vec(n, p, row));
    }
    return s;
  }
  static Subspace whole(int n, int p) {
    std::vector<Mat> g;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g.push_back(Mat::unit(n, p, i, j));
    return span(n, p, g);
  }
  /// Diagonal matrices (Lie algebra of the diagonal torus).
  static Subspace torus(int n, int p) {
    std::vector<Mat> g;
    for (int i = 0; i < n; ++i) g.push_back(Mat::unit(n, p, i, i));
    return span(n, p, g);
  }
  /// Upper triangular matrices.
  static Subspace borel(int n, int p) {
    std::vector<Mat> g;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) g.push_back(Mat::unit(n, p, i, j));
    return span(n, p, g);
  }
  /// Strictly upper triangular matrices.
  static Subspace nilradical(int n, int p) {
    std::vector<Mat> g;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) g.push_back(Mat::unit(n, p, i, j));
    return span(n, p, g);
  }
  /// Ad(g) applied to every basis vector.
  Subspace transported(const Mat& g) const {
    const Mat gi = inverse(g);
    std::vector<Mat> gens;
    for (const auto& b : basis_) gens.push_back(Ad(g, b, gi));
    return span(n_, p_, gens);
  }

  int dim() const noexcept { return static_cast<int>(basis_.size()); }
  const std::vector<Mat>& basis() const noexcept { return basis_; }
  int n() const noexcept { return n_; }
  int p() const noexcept { return p_; }

  bool contains(const Mat& x) const {
    std::vector<Mat> g = basis_;
    g.push_back(x);
    return span(n_, p_, g).dim() == dim();
  }
  friend bool operator==(const Subspace& a, const Subspace& b) {
    if (a.dim() != b.dim()) return false;
    for (const auto& v : b.basis_)
      if (!a.contains(v)) return false;
    return true;
  }

  /// E^perp = { xi : <xi, E> = 0 }.
  Subspace perp() const {
    FpMatrix m(p_, 0, n_ * n_);
    for (const auto& b : basis_) {
      // <xi, B> = sum_{i,k} xi_ik B_ki
      std::vector<int> row(static_cast<std::size_t>(n_ * n_));
      for (int i = 0; i < n_; ++i)
        for (int k = 0; k < n_; ++k) row[static_cast<std::size_t>(i * n_ + k)] = b(k, i);
      m.append_row(row);
    }
    if (basis_.empty()) return whole(n_, p_);
    std::vector<Mat> gens;
    for (const auto& v : kernel(m)) gens.push_back(Mat::from_vec(n_, p_, v));
    return span(n_, p_, gens);
  }

 private:
  int n_;
  int p_;
  std::vector<Mat> basis_;
};

/// Matrix of ad(R): vec(X) -> vec([R, X]) in the row-major basis.
inline FpMatrix ad_matrix(const Mat& r) {
  const int n = r.n, d = n * n;
  FpMatrix m(r.p, d, d);
  for (int c = 0; c < d; ++c) {
    const Mat e = Mat::unit(n, r.p, c / n, c % n);
    const Mat b = bracket(r, e);
    for (int k = 0; k < d; ++k) m.at(k, c) = b.a[static_cast<std::size_t>(k)];
  }
  return m;
}

/// Positive roots alpha_ij (i < j) of the diagonal torus; e^alpha(t) = t_i/t_j,
/// alpha(A) = a_i - a_j, root space spanned by E_ij.
struct Root {
  int i;
  int j;
  friend bool operator==(const Root& a, const Root& b) { return a.i == b.i && a.j == b.j; }
  friend bool operator<(const Root& a, const Root& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; }
};

class RootDatum {
 public:
  explicit RootDatum(int n) : n_(n) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) positive_.push_back({i, j});
  }
  int n() const noexcept { return n_; }
  int Delta() const noexcept { return n_ * n_; }
  int delta() const noexcept { return n_; }
  const std::vector<Root>& positive() const noexcept { return positive_; }
  /// All roots: positives followed by their negatives (j, i).
  std::vector<Root> all() const {
    std::vector<Root> r = positive_;
    for (const auto& a : positive_) r.push_back({a.j, a.i});
    return r;
  }
  static int eval(const Root& a, const Mat& diag_elt) {
    return ((diag_elt(a.i, a.i) - diag_elt(a.j, a.j)) % diag_elt.p + diag_elt.p) % diag_elt.p;
  }
  /// e^alpha(t) for an invertible diagonal t.
  static int character(const Root& a, const Mat& t) {
    return static_cast<int>(static_cast<long long>(t(a.i, a.i)) * fp_inv(t(a.j, a.j), t.p) % t.p);
  }

 private:
  int n_;
  std::vector<Root> positive_;
};

/// Xi_y = { alpha > 0 : 1 + e^alpha(y) = 0 } for an invertible diagonal y.
inline std::vector<Root> xi_y(const Mat& y) {
  if (!y.is_diagonal() || !invertible(y)) throw DomainError("xi_y: expected an invertible diagonal matrix");
  std::vector<Root> out;
  const RootDatum rd(y.n);
  for (const auto& a : rd.positive())
    if ((1 + RootDatum::character(a, y)) % y.p == 0) out.push_back(a);
  return out;
}

/// X = X^0 + sum_alpha X^alpha with X^alpha the (i,j) entry for alpha = alpha_ij.
struct RootComponents {
  Mat x0;
  std::vector<std::pair<Root, int>> comps;  // all roots, coefficient of E_ij
};
inline RootComponents root_components(const Mat& x) {
  RootComponents rc{diag_part(x), {}};
  for (const auto& a : RootDatum(x.n).all()) rc.comps.push_back({a, x(a.i, a.j)});
  return rc;
}

/// Eigenvalues of R in F_p (with their geometric multiplicities).
inline std::vector<std::pair<int, int>> eigenvalues(const Mat& r) {
  std::vector<std::pair<int, int>> out;
  for (int l = 0; l < r.p; ++l) {
    const Mat m = r - l * Mat::identity(r.n, r.p);
    FpMatrix fm(r.p, r.n, r.n);
    for (int i = 0; i < r.n; ++i)
      for (int j = 0; j < r.n; ++j) fm.at(i, j) = m(i, j);
    const int nullity = r.n - rank(fm);
    if (nullity > 0) out.push_back({l, nullity});
  }
  return out;
}

/// Characteristic polynomial coefficients c_0..c_n of det(t - R) (c_n = 1).
inline std::vector<int> char_poly(const Mat& r) {
  const int p = r.p;
  std::vector<int> c(static_cast<std::size_t>(r.n) + 1, 0);
  c[static_cast<std::size_t>(r.n)] = 1;
  const int tr = trace(r);
  if (r.n == 1) c[0] = (p - r(0, 0)) % p;
  else if (r.n == 2) {
    c[1] = (p - tr) % p;
    c[0] = det(r);
  } else {
    c[2] = (p - tr) % p;
    // sum of principal 2x2 minors
    long long m2 = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) m2 += static_cast<long long>(r(i, i)) * r(j, j) - static_cast<long long>(r(i, j)) * r(j, i);
    c[1] = static_cast<int>(((m2 % p) + p) % p);
    c[0] = (p - det(r)) % p;
  }
  return c;
}

inline bool is_regular_split(const Mat& r) {
  const auto ev = eigenvalues(r);
  return static_cast<int>(ev.size()) == r.n;
}

/// Centralizer data of a regular semisimple R with eigenvalues in F_p.
struct Centralizer {
  Subspace t_R;  // { Z : [Z, R] = 0 }
  /// x with R = -Ad(x^{-1}) A for the target A, when R and -A share their
  /// spectrum: columns of x^{-1} are eigenvectors for -a_1, ..., -a_n with
  /// first nonzero entry 1.
  std::optional<Mat> x;
};

inline Centralizer centralizer(const Mat& r, const Mat& target_a) {
  if (!target_a.is_diagonal()) throw DomainError("centralizer: target must be diagonal");
  const auto ev = eigenvalues(r);
  if (static_cast<int>(ev.size()) != r.n) {
    int total = 0;
    for (const auto& e : ev) total += e.second;
    if (total == r.n) throw DomainError("centralizer: " + r.str() + " has repeated eigenvalues (not regular)");
    throw DomainError("centralizer: " + r.str() + " has eigenvalues outside F_p (unsupported)");
  }
  std::vector<Mat> gens;
  for (const auto& v : kernel(ad_matrix(r))) gens.push_back(Mat::from_vec(r.n, r.p, v));
  Centralizer c{Subspace::span(r.n, r.p, gens), std::nullopt};

  Mat xinv(r.n, r.p);
  for (int i = 0; i < r.n; ++i) {
    const int lam = (r.p - target_a(i, i)) % r.p;
    const Mat m = r - lam * Mat::identity(r.n, r.p);
    FpMatrix fm(r.p, r.n, r.n);
    for (int a = 0; a < r.n; ++a)
      for (int b = 0; b < r.n; ++b) fm.at(a, b) = m(a, b);
    const auto ker = kernel(fm);
    if (ker.size() != 1) return c;  // spectrum differs from that of -A
    std::vector<int> v = ker[0];
    int lead = 0;
    for (int k = 0; k < r.n; ++k)
      if (v[static_cast<std::size_t>(k)] != 0) {
        lead = v[static_cast<std::size_t>(k)];
        break;
      }
    const int li = fp_inv(lead, r.p);
    for (int k = 0; k < r.n; ++k) xinv(k, i) = v[static_cast<std::size_t>(k)] * li % r.p;
  }
  c.x = inverse(xinv);
  return c;
}

/// (X^-, X^0, X^+) relative to the decomposition g = g^-_R + t_R + g^+_R
/// defined by a conjugator x (R = -Ad(x^{-1})A, A diagonal regular).
struct PM0 {
  Mat minus;
  Mat zero;
  Mat plus;
};
inline PM0 pm0_decompose_with(const Mat& x, const Mat& v) {
  const Mat xi = inverse(x);
  const Mat w = Ad(x, v, xi);
  return {Ad(xi, lower_part(w), x), Ad(xi, diag_part(w), x), Ad(xi, upper_part(w), x)};
}
inline PM0 pm0_decompose(const Mat& r, const Mat& target_a, const Mat& v) {
  const Centralizer c = centralizer(r, target_a);
  if (!c.x) throw DomainError("pm0_decompose: R is not conjugate to -A");
  return pm0_decompose_with(*c.x, v);
}

/// Some X with [X, R] = xi, or nullopt when xi is not in the image of ad(R).
inline std::optional<Mat> solve_bracket(const Mat& r, const Mat& xi) {
  // [X, R] = -ad(R) X
  const FpMatrix m = ad_matrix(r);
  std::vector<int> rhs = (-xi).to_vec();
  auto sol = solve(m, rhs);
  if (!sol) return std::nullopt;
  return Mat::from_vec(r.n, r.p, *sol);
}

/// Xi_{R,z}(xi) = [X, ^z xi] mod t_R^perp with xi = [X, R]; the class is
/// represented by its t_R-component, which is canonical because
/// g = t_R + t_R^perp for regular semisimple R.
inline Mat xi_map(const Mat& r, const Mat& z, const Mat& xi, const Mat& target_a) {
  const Centralizer c = centralizer(r, target_a);
  if (!c.x) throw DomainError("xi_map: R is not conjugate to -A");
  if (Ad(z, r) != r) throw DomainError("xi_map: z does not centralize R");
  const auto x = solve_bracket(r, xi);
  if (!x) throw DomainError("xi_map: xi is not in the image of ad(R)");
  return pm0_decompose_with(*c.x, bracket(*x, Ad(z, xi))).zero;
}

}  // namespace epschar
