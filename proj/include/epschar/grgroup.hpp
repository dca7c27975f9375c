#pragma once
// G_r = GL_n(F_p[eps]/(eps^r)): matrix model, factored coordinates
// x|X_1,...,X_{r-1}|, BCH group law, subgroups, indexing and enumeration.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "epschar/bch.hpp"
#include "epschar/error.hpp"
#include "epschar/liealg.hpp"
#include "epschar/rng.hpp"
#include "epschar/scalars.hpp"

namespace epschar {

using ElementIndex = uint64_t;

/// Default refusal threshold for full enumerations.
inline constexpr uint64_t kDefaultBudget = uint64_t{1} << 24;

/// Matrix over F_p[eps]/(eps^r): coefficient matrices c[0..r-1].
struct KrMatrix {
  int n = 0;
  int p = 0;
  int r = 0;
  std::vector<Mat> c;

  KrMatrix() = default;
  KrMatrix(int n_, int p_, int r_) : n(n_), p(p_), r(r_), c(static_cast<std::size_t>(r_), Mat(n_, p_)) {}

  static KrMatrix identity(int n, int p, int r) {
    KrMatrix m(n, p, r);
    m.c[0] = Mat::identity(n, p);
    return m;
  }
  static KrMatrix constant(const Mat& x, int r) {
    KrMatrix m(x.n, x.p, r);
    m.c[0] = x;
    return m;
  }

  bool invertible() const { return epschar::invertible(c[0]); }
  bool is_upper() const {
    for (const auto& m : c)
      if (!m.is_upper()) return false;
    return true;
  }
  bool is_diagonal() const {
    for (const auto& m : c)
      if (!m.is_diagonal()) return false;
    return true;
  }
  /// Upper unitriangular over k_r.
  bool is_unipotent_upper() const {
    if (!is_upper()) return false;
    for (int i = 0; i < n; ++i) {
      if (c[0](i, i) != 1) return false;
      for (int k = 1; k < r; ++k)
        if (c[static_cast<std::size_t>(k)](i, i) != 0) return false;
    }
    return true;
  }

  friend bool operator==(const KrMatrix& a, const KrMatrix& b) {
    return a.n == b.n && a.p == b.p && a.r == b.r && a.c == b.c;
  }
  friend bool operator!=(const KrMatrix& a, const KrMatrix& b) { return !(a == b); }

  std::string str() const {
    std::string s;
    for (int k = 0; k < r; ++k) {
      if (k) s += " + eps^" + std::to_string(k) + "*";
      s += c[static_cast<std::size_t>(k)].str();
    }
    return s;
  }
};

inline void check_shape(const KrMatrix& a, const KrMatrix& b) {
  if (a.n != b.n || a.p != b.p || a.r != b.r) throw DomainError("KrMatrix shape mismatch");
}

inline KrMatrix operator*(const KrMatrix& a, const KrMatrix& b) {
  check_shape(a, b);
  KrMatrix m(a.n, a.p, a.r);
  for (int i = 0; i < a.r; ++i)
    for (int j = 0; i + j < a.r; ++j) {
      if (a.c[static_cast<std::size_t>(i)].is_zero() || b.c[static_cast<std::size_t>(j)].is_zero()) continue;
      m.c[static_cast<std::size_t>(i + j)] += a.c[static_cast<std::size_t>(i)] * b.c[static_cast<std::size_t>(j)];
    }
  return m;
}

inline KrMatrix operator+(const KrMatrix& a, const KrMatrix& b) {
  check_shape(a, b);
  KrMatrix m = a;
  for (int k = 0; k < a.r; ++k) m.c[static_cast<std::size_t>(k)] += b.c[static_cast<std::size_t>(k)];
  return m;
}

inline KrMatrix inverse(const KrMatrix& a) {
  if (!a.invertible()) throw DomainError("KrMatrix: constant term not invertible");
  const Mat x0i = inverse(a.c[0]);
  // a = a0 (1 + M), (1 + M)^{-1} = sum_k (-M)^k
  KrMatrix m = KrMatrix::constant(x0i, a.r) * a;
  m.c[0] = Mat(a.n, a.p);
  KrMatrix neg = m;
  for (auto& cm : neg.c) cm = -cm;
  KrMatrix sum = KrMatrix::identity(a.n, a.p, a.r);
  KrMatrix power = sum;
  for (int k = 1; k < a.r; ++k) {
    power = power * neg;
    sum = sum + power;
  }
  return sum * KrMatrix::constant(x0i, a.r);
}

/// e^{eps^m X} = sum_{k m < r} eps^{k m} X^k / k!
inline KrMatrix exp_eps(int m, const Mat& x, int r) {
  if (m < 1) throw DomainError("exp_eps: m must be >= 1");
  if (x.p < r) throw ConfigError("exp_eps: p < r");
  KrMatrix e = KrMatrix::identity(x.n, x.p, r);
  Mat power = Mat::identity(x.n, x.p);
  int inv_fact = 1;
  for (int k = 1; k * m < r; ++k) {
    power = power * x;
    inv_fact = inv_fact * fp_inv(k, x.p) % x.p;
    e.c[static_cast<std::size_t>(k * m)] = inv_fact * power;
  }
  return e;
}

/// x|X_1, ..., X_{r-1}| = x e^{eps X_1} ... e^{eps^{r-1} X_{r-1}}
struct Factored {
  Mat x;
  std::vector<Mat> X;  // X[0] = X_1

  friend bool operator==(const Factored& a, const Factored& b) { return a.x == b.x && a.X == b.X; }
};

inline KrMatrix from_factored(const Factored& f, int r) {
  KrMatrix g = KrMatrix::constant(f.x, r);
  for (int i = 1; i < r; ++i) g = g * exp_eps(i, f.X[static_cast<std::size_t>(i - 1)], r);
  return g;
}

/// Peels eps-degrees in increasing order.
inline Factored to_factored(const KrMatrix& g) {
  if (!g.invertible()) throw DomainError("to_factored: not invertible");
  Factored f{g.c[0], {}};
  KrMatrix h = KrMatrix::constant(inverse(g.c[0]), g.r) * g;
  for (int i = 1; i < g.r; ++i) {
    const Mat xi = h.c[static_cast<std::size_t>(i)];
    f.X.push_back(xi);
    h = exp_eps(i, -xi, g.r) * h;
  }
  return f;
}

/// d_r: B_r -> T_r, the diagonal part.
inline KrMatrix d_r(const KrMatrix& b) {
  if (!b.is_upper() || !b.invertible()) throw DomainError("d_r: element not in B_r");
  KrMatrix t(b.n, b.p, b.r);
  for (int k = 0; k < b.r; ++k) t.c[static_cast<std::size_t>(k)] = diag_part(b.c[static_cast<std::size_t>(k)]);
  return t;
}

/// dim of H = ker(B_r -> T): r(Delta + delta)/2 - delta.
inline int dim_H(int r, int Delta, int delta) {
  if ((r * (Delta + delta)) % 2 != 0) throw DomainError("dim_H: r(Delta+delta) must be even");
  return r * (Delta + delta) / 2 - delta;
}

/// GL_n(F_p) in increasing index order.
inline std::vector<Mat> enumerate_gl(int n, int p) {
  std::vector<Mat> out;
  int total = 1;
  for (int k = 0; k < n * n; ++k) total *= p;
  for (int idx = 0; idx < total; ++idx) {
    Mat m(n, p);
    int v = idx;
    for (int k = 0; k < n * n; ++k) {
      m.a[static_cast<std::size_t>(k)] = v % p;
      v /= p;
    }
    if (invertible(m)) out.push_back(m);
  }
  return out;
}

inline ElementIndex mat_index(const Mat& m) {
  ElementIndex idx = 0, w = 1;
  for (int k = 0; k < m.n * m.n; ++k) {
    idx += w * static_cast<ElementIndex>(m.a[static_cast<std::size_t>(k)]);
    w *= static_cast<ElementIndex>(m.p);
  }
  return idx;
}

/// The group G_r for fixed (n, p, r), with compiled BCH polynomials.
class GroupCtx {
 public:
  GroupCtx(int n, int p, int r) : n_(n), p_(p), r_(r), roots_(n) {
    if (n < 1 || n > kMaxN) throw ConfigError("n must lie in [1, 3]");
    PrimeField check(p);  // validates p
    if (r < 1) throw ConfigError("r must be >= 1");
    if (p < r) throw ConfigError("p >= r violated (p = " + std::to_string(p) + ", r = " + std::to_string(r) + ")");
    // Index fits in 64 bits?
    long double total = 1;
    for (int k = 0; k < r * n * n; ++k) total *= p;
    index_ok_ = total < 1.8e19L;
    if (r >= 2) {
      const auto& lt = bch::lie_tables(r);
      z_ = std::make_shared<bch::Compiled>(p, lt.z);
      u_ = std::make_shared<bch::Compiled>(p, lt.u);
    }
  }

  int n() const noexcept { return n_; }
  int p() const noexcept { return p_; }
  int r() const noexcept { return r_; }
  int Delta() const noexcept { return n_ * n_; }
  int delta() const noexcept { return n_; }
  int r_prime() const noexcept { return r_ / 2; }
  const RootDatum& roots() const noexcept { return roots_; }
  const bch::Compiled& z_poly() const { return *z_; }
  const bch::Compiled& u_poly() const { return *u_; }
  int dim_H() const { return epschar::dim_H(r_, Delta(), delta()); }

  // ---- indexing

  /// base-p digits of all entries, eps-degree major then row-major.
  ElementIndex index(const KrMatrix& g) const {
    if (!index_ok_) throw DomainError("index: p^(r n^2) exceeds 64 bits");
    ElementIndex idx = 0, w = 1;
    for (int k = 0; k < r_; ++k)
      for (int e = 0; e < n_ * n_; ++e) {
        idx += w * static_cast<ElementIndex>(g.c[static_cast<std::size_t>(k)].a[static_cast<std::size_t>(e)]);
        w *= static_cast<ElementIndex>(p_);
      }
    return idx;
  }
  KrMatrix from_index(ElementIndex idx) const {
    if (!index_ok_) throw DomainError("index: p^(r n^2) exceeds 64 bits");
    KrMatrix g(n_, p_, r_);
    for (int k = 0; k < r_; ++k)
      for (int e = 0; e < n_ * n_; ++e) {
        g.c[static_cast<std::size_t>(k)].a[static_cast<std::size_t>(e)] = static_cast<int32_t>(idx % static_cast<ElementIndex>(p_));
        idx /= static_cast<ElementIndex>(p_);
      }
    return g;
  }

  // ---- cardinalities

  uint64_t gl_order() const {
    uint64_t o = 1, pn = 1;
    for (int i = 0; i < n_; ++i) pn *= static_cast<uint64_t>(p_);
    uint64_t pi = 1;
    for (int i = 0; i < n_; ++i) {
      o *= pn - pi;
      pi *= static_cast<uint64_t>(p_);
    }
    return o;
  }
  uint64_t order() const { return sat_mul(gl_order(), ipow_u(static_cast<uint64_t>(p_), (r_ - 1) * n_ * n_)); }
  uint64_t borel_order() const {
    const int dimb = n_ * (n_ + 1) / 2;
    return sat_mul(ipow_u(static_cast<uint64_t>(p_ - 1), n_),
                   ipow_u(static_cast<uint64_t>(p_), dimb - n_ + (r_ - 1) * dimb));
  }
  uint64_t torus_order() const {
    return sat_mul(ipow_u(static_cast<uint64_t>(p_ - 1), n_), ipow_u(static_cast<uint64_t>(p_), (r_ - 1) * n_));
  }
  uint64_t unipotent_order() const {
    const int dimn = n_ * (n_ - 1) / 2;
    return ipow_u(static_cast<uint64_t>(p_), r_ * dimn);
  }

  // ---- group law in factored coordinates

  /// (x|X|)(y|Y|) = xy|Z| with Z_i = z_i(_yX, Y).
  Factored mul_bch(const Factored& a, const Factored& b) const {
    if (r_ == 1) return {a.x * b.x, {}};
    const Mat yi = inverse(b.x);
    bch::Compiled::Assignment as;
    for (int i = 1; i < r_; ++i) {
      as[bch::symbol(bch::Family::X, i)] = Ad(yi, a.X[static_cast<std::size_t>(i - 1)], b.x);
      as[bch::symbol(bch::Family::Y, i)] = b.X[static_cast<std::size_t>(i - 1)];
    }
    return {a.x * b.x, z_->eval(as, n_)};
  }

  /// (x|X|)(y|Y|)(x|X|)^{-1} = xyx^{-1}| ^x u_i(_yX, Y, X) |.
  Factored conj_bch(const Factored& a, const Factored& b) const {
    const Mat xi = inverse(a.x);
    if (r_ == 1) return {a.x * b.x * xi, {}};
    const Mat yi = inverse(b.x);
    bch::Compiled::Assignment as;
    for (int i = 1; i < r_; ++i) {
      as[bch::symbol(bch::Family::Xp, i)] = Ad(yi, a.X[static_cast<std::size_t>(i - 1)], b.x);
      as[bch::symbol(bch::Family::Y, i)] = b.X[static_cast<std::size_t>(i - 1)];
      as[bch::symbol(bch::Family::X, i)] = a.X[static_cast<std::size_t>(i - 1)];
    }
    std::vector<Mat> u = u_->eval(as, n_);
    for (auto& m : u) m = Ad(a.x, m, xi);
    return {a.x * b.x * xi, u};
  }

  KrMatrix from_factored(const Factored& f) const { return epschar::from_factored(f, r_); }

  // ---- enumeration

  void check_budget(uint64_t required, uint64_t budget, bool force) const {
    if (required > budget && !force)
      throw BudgetError("enumeration of " + std::to_string(required) + " elements exceeds the budget", required);
  }

  /// All of G_r in increasing index order.
  std::vector<KrMatrix> enumerate_group(uint64_t budget = kDefaultBudget, bool force = false) const {
    check_budget(order(), budget, force);
    const auto gl = enumerate_gl(n_, p_);
    const uint64_t hi_count = ipow_u(static_cast<uint64_t>(p_), (r_ - 1) * n_ * n_);
    std::vector<KrMatrix> out;
    out.reserve(order());
    for (uint64_t hi = 0; hi < hi_count; ++hi) {
      KrMatrix g(n_, p_, r_);
      uint64_t v = hi;
      for (int k = 1; k < r_; ++k)
        for (int e = 0; e < n_ * n_; ++e) {
          g.c[static_cast<std::size_t>(k)].a[static_cast<std::size_t>(e)] = static_cast<int32_t>(v % static_cast<uint64_t>(p_));
          v /= static_cast<uint64_t>(p_);
        }
      for (const auto& x : gl) {
        g.c[0] = x;
        out.push_back(g);
      }
    }
    return out;
  }

  enum class Subgroup { G, B, T, U };

  /// Elements of a standard subgroup, sorted by index.
  std::vector<KrMatrix> enumerate(Subgroup s, uint64_t budget = kDefaultBudget, bool force = false) const {
    if (s == Subgroup::G) return enumerate_group(budget, force);
    const uint64_t size = s == Subgroup::B ? borel_order() : s == Subgroup::T ? torus_order() : unipotent_order();
    check_budget(size, budget, force);
    // free entry positions and the allowed value ranges
    struct Slot {
      int k, i, j;
      bool unit;   // must be invertible (constant diagonal of B, T)
      bool fixed;  // fixed value 1 (constant diagonal of U)
    };
    std::vector<Slot> slots;
    for (int k = 0; k < r_; ++k)
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) {
          const bool diag = i == j;
          if (s == Subgroup::T && !diag) continue;
          if ((s == Subgroup::B || s == Subgroup::U) && j < i) continue;
          if (s == Subgroup::U && diag) {
            if (k == 0) slots.push_back({k, i, j, false, true});
            continue;
          }
          slots.push_back({k, i, j, k == 0 && diag, false});
        }
    std::vector<KrMatrix> out;
    KrMatrix g(n_, p_, r_);
    std::function<void(std::size_t)> rec = [&](std::size_t d) {
      if (d == slots.size()) {
        out.push_back(g);
        return;
      }
      const Slot& sl = slots[d];
      if (sl.fixed) {
        g.c[static_cast<std::size_t>(sl.k)](sl.i, sl.j) = 1;
        rec(d + 1);
        return;
      }
      for (int v = sl.unit ? 1 : 0; v < p_; ++v) {
        g.c[static_cast<std::size_t>(sl.k)](sl.i, sl.j) = v;
        rec(d + 1);
      }
    };
    rec(0);
    if (index_ok_)
      std::sort(out.begin(), out.end(), [&](const KrMatrix& a, const KrMatrix& b) { return index(a) < index(b); });
    return out;
  }

  // ---- cosets

  /// Least-index representatives of T\G (T = invertible diagonal matrices).
  const std::vector<Mat>& torus_coset_reps() const {
    if (t_reps_.empty()) t_reps_ = coset_reps(false);
    return t_reps_;
  }
  /// Least-index representatives of B\G.
  const std::vector<Mat>& borel_coset_reps() const {
    if (b_reps_.empty()) b_reps_ = coset_reps(true);
    return b_reps_;
  }

  /// Representatives |N_1,...,N_{r-1}| x_c of B_r\G_r, with x_c in B\G and
  /// N_j strictly lower triangular.
  std::vector<KrMatrix> borel_r_coset_reps() const {
    std::vector<KrMatrix> out;
    const int dn = n_ * (n_ - 1) / 2;
    const uint64_t count = ipow_u(static_cast<uint64_t>(p_), (r_ - 1) * dn);
    for (const auto& xc : borel_coset_reps()) {
      for (uint64_t v = 0; v < count; ++v) {
        uint64_t w = v;
        KrMatrix g = KrMatrix::identity(n_, p_, r_);
        for (int k = 1; k < r_; ++k) {
          Mat nk(n_, p_);
          for (int i = 0; i < n_; ++i)
            for (int j = 0; j < i; ++j) {
              nk(i, j) = static_cast<int32_t>(w % static_cast<uint64_t>(p_));
              w /= static_cast<uint64_t>(p_);
            }
          g = g * exp_eps(k, nk, r_);
        }
        out.push_back(g * KrMatrix::constant(xc, r_));
      }
    }
    return out;
  }

  /// Torus elements (invertible diagonal matrices) of GL_n(F_p).
  std::vector<Mat> torus_elements() const {
    std::vector<Mat> out;
    std::vector<int> d(static_cast<std::size_t>(n_), 1);
    while (true) {
      out.push_back(Mat::diag(p_, d));
      std::size_t i = 0;
      while (i < d.size() && ++d[i] == p_) d[i++] = 1;
      if (i == d.size()) break;
    }
    return out;
  }

  // ---- random elements

  Mat random_mat(SplitMix64& rng) const {
    Mat m(n_, p_);
    for (int k = 0; k < n_ * n_; ++k) m.a[static_cast<std::size_t>(k)] = rng.uniform(p_);
    return m;
  }
  Mat random_gl(SplitMix64& rng) const {
    while (true) {
      Mat m = random_mat(rng);
      if (invertible(m)) return m;
    }
  }
  Mat random_torus(SplitMix64& rng) const {
    Mat m(n_, p_);
    for (int i = 0; i < n_; ++i) m(i, i) = 1 + rng.uniform(p_ - 1);
    return m;
  }
  Mat random_borel(SplitMix64& rng) const {
    Mat m = random_torus(rng);
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) m(i, j) = rng.uniform(p_);
    return m;
  }
  Mat random_diag(SplitMix64& rng) const {
    Mat m(n_, p_);
    for (int i = 0; i < n_; ++i) m(i, i) = rng.uniform(p_);
    return m;
  }
  Mat random_upper(SplitMix64& rng) const {
    Mat m(n_, p_);
    for (int i = 0; i < n_; ++i)
      for (int j = i; j < n_; ++j) m(i, j) = rng.uniform(p_);
    return m;
  }
  Mat random_strict_upper(SplitMix64& rng) const {
    Mat m(n_, p_);
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) m(i, j) = rng.uniform(p_);
    return m;
  }
  Factored random_factored(SplitMix64& rng) const {
    Factored f{random_gl(rng), {}};
    for (int i = 1; i < r_; ++i) f.X.push_back(random_mat(rng));
    return f;
  }
  KrMatrix random_element(SplitMix64& rng) const { return from_factored(random_factored(rng)); }
  /// Random element of B_r: upper-triangular constant term and eps-parts.
  KrMatrix random_borel_r(SplitMix64& rng) const {
    Factored f{random_borel(rng), {}};
    for (int i = 1; i < r_; ++i) f.X.push_back(random_upper(rng));
    return from_factored(f);
  }

  /// Saturating at UINT64_MAX, so oversized groups compare above any budget.
  static uint64_t sat_mul(uint64_t a, uint64_t b) {
    uint64_t r = 0;
    return __builtin_mul_overflow(a, b, &r) ? UINT64_MAX : r;
  }
  static uint64_t ipow_u(uint64_t b, int e) {
    uint64_t r = 1;
    while (e-- > 0) r = sat_mul(r, b);
    return r;
  }

 private:
  std::vector<Mat> coset_reps(bool borel) const {
    const auto gl = enumerate_gl(n_, p_);
    std::vector<Mat> sub;
    for (const auto& g : gl)
      if (borel ? g.is_upper() : g.is_diagonal()) sub.push_back(g);
    std::unordered_set<ElementIndex> seen;
    std::vector<Mat> reps;
    for (const auto& g : gl) {
      if (seen.count(mat_index(g))) continue;
      reps.push_back(g);
      for (const auto& s : sub) seen.insert(mat_index(s * g));
    }
    return reps;
  }

  int n_, p_, r_;
  RootDatum roots_;
  bool index_ok_ = true;
  std::shared_ptr<bch::Compiled> z_, u_;
  mutable std::vector<Mat> t_reps_, b_reps_;
};

}  // namespace epschar
