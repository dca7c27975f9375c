#pragma once
// Exact scalars: the prime field F_p, the cyclotomic ring Z[zeta_N] with
// N = p(p-1), additive/multiplicative characters and affine Gauss sums.

#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "epschar/error.hpp"

namespace epschar {

inline bool is_prime(long long n) {
  if (n < 2) return false;
  for (long long d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

inline long long euler_phi(long long n) {
  long long result = n;
  for (long long d = 2; d * d <= n; ++d) {
    if (n % d == 0) {
      while (n % d == 0) n /= d;
      result -= result / d;
    }
  }
  if (n > 1) result -= result / n;
  return result;
}

/// The prime field F_p for an odd prime p, with a fixed generator of F_p^*
/// (the least primitive root) and a discrete-log table.
class PrimeField {
 public:
  explicit PrimeField(int p) : p_(p) {
    if (p == 2) throw ConfigError("p = 2 is not supported (p must be odd)");
    if (!is_prime(p)) throw ConfigError("p = " + std::to_string(p) + " is not prime");
    if (p > (1 << 15)) throw ConfigError("p too large for the small-field kernels");
    inv_.assign(static_cast<std::size_t>(p), 0);
    for (int a = 1; a < p; ++a)
      for (int b = 1; b < p; ++b)
        if (a * b % p == 1) inv_[static_cast<std::size_t>(a)] = b;
    for (int g = 2; g < p; ++g) {
      int v = 1;
      int order = 0;
      do {
        v = v * g % p;
        ++order;
      } while (v != 1);
      if (order == p - 1) {
        gamma_ = g;
        break;
      }
    }
    dlog_.assign(static_cast<std::size_t>(p), -1);
    int v = 1;
    for (int k = 0; k < p - 1; ++k) {
      dlog_[static_cast<std::size_t>(v)] = k;
      v = v * gamma_ % p;
    }
  }

  int p() const noexcept { return p_; }
  int generator() const noexcept { return gamma_; }

  int norm(long long a) const noexcept {
    long long r = a % p_;
    return static_cast<int>(r < 0 ? r + p_ : r);
  }
  int add(int a, int b) const noexcept { return (a + b) % p_; }
  int sub(int a, int b) const noexcept { return (a - b + p_) % p_; }
  int neg(int a) const noexcept { return a == 0 ? 0 : p_ - a; }
  int mul(int a, int b) const noexcept { return a * b % p_; }
  int inv(int a) const {
    if (a % p_ == 0) throw DomainError("inverse of zero in F_p");
    return inv_[static_cast<std::size_t>(norm(a))];
  }
  int pow(int a, long long e) const noexcept {
    int r = 1;
    int b = norm(a);
    while (e > 0) {
      if (e & 1) r = r * b % p_;
      b = b * b % p_;
      e >>= 1;
    }
    return r;
  }
  int dlog(int a) const {
    int v = norm(a);
    if (v == 0) throw DomainError("discrete log of zero");
    return dlog_[static_cast<std::size_t>(v)];
  }

 private:
  int p_;
  int gamma_ = 0;
  std::vector<int> dlog_;
  std::vector<int> inv_;
};

/// Coefficients (constant term first) of the N-th cyclotomic polynomial.
inline std::vector<int64_t> cyclotomic_polynomial(int N) {
  if (N < 1) throw DomainError("cyclotomic order must be positive");
  // Phi_N = (x^N - 1) / prod_{d | N, d < N} Phi_d, by exact division.
  std::vector<int64_t> num(static_cast<std::size_t>(N) + 1, 0);
  num[0] = -1;
  num[static_cast<std::size_t>(N)] = 1;
  for (int d = 1; d < N; ++d) {
    if (N % d != 0) continue;
    auto den = cyclotomic_polynomial(d);
    const std::size_t dn = den.size() - 1;
    std::vector<int64_t> quot(num.size() - dn, 0);
    for (std::size_t i = num.size() - 1; i + 1 > dn; --i) {
      const int64_t c = num[i];  // den is monic
      quot[i - dn] = c;
      for (std::size_t k = 0; k <= dn; ++k) num[i - dn + k] -= c * den[k];
      if (i == dn) break;
    }
    num = std::move(quot);
  }
  return num;
}

/// Z[zeta_N] presented as Z[x]/(Phi_N).
class Cyclotomic {
 public:
  explicit Cyclotomic(int N) : N_(N), phi_(cyclotomic_polynomial(N)) {}

  int order() const noexcept { return N_; }
  int degree() const noexcept { return static_cast<int>(phi_.size()) - 1; }
  const std::vector<int64_t>& phi() const noexcept { return phi_; }

  /// Reduce an arbitrary-length coefficient vector modulo Phi_N in place.
  void reduce(std::vector<int64_t>& v) const {
    const std::size_t d = phi_.size() - 1;
    for (std::size_t i = v.size(); i-- > d;) {
      const int64_t c = v[i];
      if (c == 0) continue;
      for (std::size_t k = 0; k <= d; ++k) v[i - d + k] -= c * phi_[k];
    }
    v.resize(d, 0);
  }

 private:
  int N_;
  std::vector<int64_t> phi_;
};

using CycCtx = std::shared_ptr<const Cyclotomic>;

/// An element of Z[zeta_N] in canonical reduced form (length deg Phi_N).
class CycValue {
 public:
  CycValue() = default;
  explicit CycValue(CycCtx ctx) : ctx_(std::move(ctx)), c_(static_cast<std::size_t>(ctx_->degree()), 0) {}
  CycValue(CycCtx ctx, std::vector<int64_t> raw) : ctx_(std::move(ctx)), c_(std::move(raw)) {
    ctx_->reduce(c_);
  }

  static CycValue zero(const CycCtx& ctx) { return CycValue(ctx); }
  static CycValue integer(const CycCtx& ctx, int64_t v) {
    CycValue r(ctx);
    r.c_[0] = v;
    return r;
  }
  static CycValue one(const CycCtx& ctx) { return integer(ctx, 1); }
  /// zeta_N^k.
  static CycValue root(const CycCtx& ctx, long long k) {
    const int N = ctx->order();
    long long e = k % N;
    if (e < 0) e += N;
    std::vector<int64_t> raw(static_cast<std::size_t>(e) + 1, 0);
    raw[static_cast<std::size_t>(e)] = 1;
    return CycValue(ctx, std::move(raw));
  }

  const CycCtx& ctx() const noexcept { return ctx_; }
  const std::vector<int64_t>& coeffs() const noexcept { return c_; }
  bool valid() const noexcept { return ctx_ != nullptr; }

  CycValue& operator+=(const CycValue& o) {
    check(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  CycValue& operator-=(const CycValue& o) {
    check(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  CycValue& operator*=(int64_t s) {
    for (auto& v : c_) v *= s;
    return *this;
  }
  friend CycValue operator+(CycValue a, const CycValue& b) { return a += b; }
  friend CycValue operator-(CycValue a, const CycValue& b) { return a -= b; }
  friend CycValue operator*(CycValue a, int64_t s) { return a *= s; }
  friend CycValue operator*(int64_t s, CycValue a) { return a *= s; }
  CycValue operator-() const {
    CycValue r = *this;
    for (auto& v : r.c_) v = -v;
    return r;
  }

  friend CycValue operator*(const CycValue& a, const CycValue& b) {
    a.check(b);
    std::vector<int64_t> raw(a.c_.size() + b.c_.size(), 0);
    for (std::size_t i = 0; i < a.c_.size(); ++i) {
      if (a.c_[i] == 0) continue;
      for (std::size_t j = 0; j < b.c_.size(); ++j) raw[i + j] += a.c_[i] * b.c_[j];
    }
    return CycValue(a.ctx_, std::move(raw));
  }
  CycValue& operator*=(const CycValue& o) { return *this = *this * o; }

  /// Complex conjugation zeta -> zeta^{-1}.
  CycValue conj() const {
    const int N = ctx_->order();
    std::vector<int64_t> raw(static_cast<std::size_t>(N), 0);
    for (std::size_t k = 0; k < c_.size(); ++k)
      raw[(static_cast<std::size_t>(N) - k) % static_cast<std::size_t>(N)] += c_[k];
    return CycValue(ctx_, std::move(raw));
  }

  friend bool operator==(const CycValue& a, const CycValue& b) {
    a.check(b);
    return a.c_ == b.c_;
  }

  bool is_zero() const noexcept {
    for (auto v : c_)
      if (v != 0) return false;
    return true;
  }
  /// True when the value lies in Z (all non-constant coordinates vanish).
  bool is_integer() const noexcept {
    for (std::size_t i = 1; i < c_.size(); ++i)
      if (c_[i] != 0) return false;
    return true;
  }
  int64_t constant_term() const noexcept { return c_.empty() ? 0 : c_[0]; }

  /// this / d when every coordinate is divisible by d.
  std::optional<CycValue> divide_exact(int64_t d) const {
    if (d == 0) return std::nullopt;
    CycValue r = *this;
    for (auto& v : r.c_) {
      if (v % d != 0) return std::nullopt;
      v /= d;
    }
    return r;
  }

  std::string str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(c_[i]);
    }
    return s + "]";
  }
  friend std::ostream& operator<<(std::ostream& os, const CycValue& v) { return os << v.str(); }

 private:
  void check(const CycValue& o) const {
    if (ctx_ == nullptr || o.ctx_ == nullptr || ctx_->order() != o.ctx_->order())
      throw DomainError("cyclotomic context mismatch");
  }

  CycCtx ctx_;
  std::vector<int64_t> c_;
};

/// An element of the group ring Z[C_N]: multiplicities of each zeta^k.
/// Sums of roots of unity accumulate here and are reduced once at the end.
class RootSum {
 public:
  RootSum() = default;
  explicit RootSum(int N) : counts_(static_cast<std::size_t>(N), 0) {}

  int order() const noexcept { return static_cast<int>(counts_.size()); }
  void add(int k, int64_t mult = 1) noexcept { counts_[static_cast<std::size_t>(k)] += mult; }
  /// this += zeta^shift * o
  void add_shifted(const RootSum& o, int shift, int64_t mult = 1) noexcept {
    const std::size_t N = counts_.size();
    for (std::size_t k = 0; k < N; ++k)
      if (o.counts_[k] != 0) counts_[(k + static_cast<std::size_t>(shift)) % N] += mult * o.counts_[k];
  }
  RootSum& operator+=(const RootSum& o) noexcept {
    for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += o.counts_[k];
    return *this;
  }
  RootSum& operator-=(const RootSum& o) noexcept {
    for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] -= o.counts_[k];
    return *this;
  }
  RootSum& operator*=(int64_t s) noexcept {
    for (auto& v : counts_) v *= s;
    return *this;
  }
  const std::vector<int64_t>& counts() const noexcept { return counts_; }
  std::vector<int64_t>& counts() noexcept { return counts_; }

  CycValue value(const CycCtx& ctx) const { return CycValue(ctx, counts_); }

 private:
  std::vector<int64_t> counts_;
};

/// psi: (F_p,+) -> mu_p and tame torus characters, both valued in Z[zeta_N]
/// with N = p(p-1). Values are handled as exponents of zeta_N.
class Scalars {
 public:
  explicit Scalars(int p)
      : field_(p), cyc_(std::make_shared<const Cyclotomic>(p * (p - 1))) {}

  const PrimeField& field() const noexcept { return field_; }
  const CycCtx& cyc() const noexcept { return cyc_; }
  int p() const noexcept { return field_.p(); }
  int N() const noexcept { return cyc_->order(); }

  /// psi(a) = zeta_N^{(N/p) a}
  int psi_exponent(int a) const noexcept { return (p() - 1) * field_.norm(a); }
  CycValue psi(int a) const { return CycValue::root(cyc_, psi_exponent(a)); }

  /// lambda_0(diag(t)) = zeta_{p-1}^{sum c_i dlog t_i}, embedded as zeta_N^{p * ...}.
  int lambda0_exponent(std::span<const int> exponents, std::span<const int> diag) const {
    if (exponents.size() != diag.size()) throw DomainError("lambda0: length mismatch");
    long long e = 0;
    for (std::size_t i = 0; i < diag.size(); ++i) {
      if (field_.norm(diag[i]) == 0) throw DomainError("lambda0: torus element not invertible");
      e += static_cast<long long>(exponents[i]) * field_.dlog(diag[i]);
    }
    e %= (p() - 1);
    if (e < 0) e += p() - 1;
    return static_cast<int>(e * p() % N());
  }
  CycValue lambda0(std::span<const int> exponents, std::span<const int> diag) const {
    return CycValue::root(cyc_, lambda0_exponent(exponents, diag));
  }

  CycValue root(long long k) const { return CycValue::root(cyc_, k); }
  CycValue integer(int64_t v) const { return CycValue::integer(cyc_, v); }
  RootSum accumulator() const { return RootSum(N()); }

  int add_exp(int a, int b) const noexcept { return (a + b) % N(); }

 private:
  PrimeField field_;
  CycCtx cyc_;
};

/// v -> constant + sum_i linear[i] * v_i on F_p^k.
struct AffineForm {
  std::vector<int> linear;
  int constant = 0;
};

inline long long ipow(long long b, int e) {
  long long r = 1;
  while (e-- > 0) r *= b;
  return r;
}

/// sum_{v in F_p^k} psi(l(v)): zero unless l is constant, then p^k psi(c).
inline CycValue gauss_linear_sum(const Scalars& S, const AffineForm& l) {
  for (int a : l.linear)
    if (S.field().norm(a) != 0) return CycValue::zero(S.cyc());
  return S.psi(l.constant) * ipow(S.p(), static_cast<int>(l.linear.size()));
}

/// The same sum by enumerating all p^k points.
inline CycValue gauss_linear_sum_brute(const Scalars& S, const AffineForm& l) {
  const int p = S.p();
  const std::size_t k = l.linear.size();
  RootSum acc = S.accumulator();
  std::vector<int> v(k, 0);
  while (true) {
    long long val = l.constant;
    for (std::size_t i = 0; i < k; ++i) val += static_cast<long long>(l.linear[i]) * v[i];
    acc.add(S.psi_exponent(S.field().norm(val)));
    std::size_t i = 0;
    while (i < k && ++v[i] == p) v[i++] = 0;
    if (i == k) break;
  }
  return acc.value(S.cyc());
}

}  // namespace epschar
