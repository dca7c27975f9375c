#pragma once
// Fiberwise Fourier transform of t_K along g^{r-1} and the closed forms of
// its support and values for r = 2, 3, 4, together with the elimination
// identities used to derive them.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "epschar/charfun.hpp"
#include "epschar/lemmas.hpp"
#include "epschar/parallel.hpp"

namespace epschar {

/// Outcome of a sampled identity check.
struct CheckReport {
  std::string name;
  int samples = 0;
  int failures = 0;
  std::string note;
  bool pass() const noexcept { return samples > 0 && failures == 0; }
};

// ------------------------------------------------------------ fiber tables

/// Coordinates on g^{r-1}: Z_1 first, each matrix row-major, base p with
/// the least significant digit first.
struct FiberCoords {
  int n, p, r;

  int dim() const noexcept { return (r - 1) * n * n; }
  uint64_t size() const { return GroupCtx::ipow_u(static_cast<uint64_t>(p), dim()); }

  std::vector<Mat> decode(uint64_t code) const {
    std::vector<Mat> z;
    for (int j = 1; j < r; ++j) {
      Mat m(n, p);
      for (int k = 0; k < n * n; ++k) {
        m.a[static_cast<std::size_t>(k)] = static_cast<int32_t>(code % static_cast<uint64_t>(p));
        code /= static_cast<uint64_t>(p);
      }
      z.push_back(m);
    }
    return z;
  }
  uint64_t encode(const std::vector<Mat>& z) const {
    uint64_t code = 0, mult = 1;
    for (const Mat& m : z)
      for (int k = 0; k < n * n; ++k) {
        code += mult * static_cast<uint64_t>(m.a[static_cast<std::size_t>(k)]);
        mult *= static_cast<uint64_t>(p);
      }
    return code;
  }
};

/// Values of a function on the fiber {base|Z_1..Z_{r-1}|}.
struct FiberTable {
  Mat base;
  int r = 2;
  std::vector<CycValue> values;
};

/// t_K on the whole fiber above y.
inline FiberTable t_K_fiber(const CharCtx& C, const Mat& y, int jobs = 1, uint64_t budget = kDefaultBudget,
                            bool force = false) {
  const GroupCtx& G = C.group();
  const FiberCoords fc{G.n(), G.p(), G.r()};
  G.check_budget(fc.size(), budget, force);
  const std::vector<FiberSpec> specs{spec_K(G.r())};
  FiberTable t{y, G.r(), std::vector<CycValue>(fc.size())};
  G.torus_coset_reps();  // fill the lazy caches before the workers start
  G.borel_coset_reps();
  parallel_for(fc.size(), jobs, [&](uint64_t b, uint64_t e) {
    const FiberEngine eng = C.engine();
    for (uint64_t code = b; code < e; ++code)
      t.values[code] = eng.run(Factored{y, fc.decode(code)}, specs).front().value(C.scalars().cyc());
  });
  return t;
}

/// t^(R) = sum_Y t(Y) psi(sign * sum_j <Y_j, R_j>), one coordinate at a time.
inline FiberTable dft_fiber(const FiberTable& t, const Scalars& S, int sign = 1) {
  const int n = t.base.n, p = S.p();
  const FiberCoords fc{n, p, t.r};
  if (t.values.size() != fc.size())
    throw DomainError("dft_fiber: table has " + std::to_string(t.values.size()) + " entries, fiber has " +
                      std::to_string(fc.size()));
  std::vector<CycValue> roots;
  for (int k = 0; k < p; ++k) roots.push_back(S.psi(sign * k));
  std::vector<CycValue> cur = t.values, nxt(cur.size(), CycValue::zero(S.cyc()));
  uint64_t stride = 1;
  for (int d = 0; d < fc.dim(); ++d) {
    const uint64_t block = stride * static_cast<uint64_t>(p);
    for (uint64_t base = 0; base < cur.size(); base += block)
      for (uint64_t off = 0; off < stride; ++off)
        for (int rho = 0; rho < p; ++rho) {
          CycValue acc = CycValue::zero(S.cyc());
          for (int yv = 0; yv < p; ++yv) {
            const CycValue& v = cur[base + off + static_cast<uint64_t>(yv) * stride];
            if (v.is_zero()) continue;
            acc += v * roots[static_cast<std::size_t>((yv * rho) % p)];
          }
          nxt[base + off + static_cast<uint64_t>(rho) * stride] = acc;
        }
    std::swap(cur, nxt);
    stride = block;
  }
  // the digit dual to Y_{j,(a,b)} is R_{j,(b,a)}
  FiberTable out{t.base, t.r, std::vector<CycValue>(cur.size(), CycValue::zero(S.cyc()))};
  for (uint64_t code = 0; code < cur.size(); ++code) {
    auto z = fc.decode(code);
    for (auto& m : z) m = transpose(m);
    out.values[fc.encode(z)] = cur[code];
  }
  return out;
}

// ------------------------------------------------------------ roots and orbits

/// x with x R x^{-1} = -A (R in the orbit C of -A), canonical up to T.
inline std::optional<Mat> orbit_conjugator(const Mat& R, const Mat& A) {
  try {
    return centralizer(R, A).x;
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

/// e^alpha(t) for alpha = e_i - e_j.
inline int root_value(const Mat& t, int i, int j) { return t(i, i) * fp_inv(t(j, j), t.p) % t.p; }

inline std::string xi_label(const std::vector<std::pair<int, int>>& xi) {
  std::string s = "{";
  for (std::size_t k = 0; k < xi.size(); ++k) {
    if (k) s += ",";
    s += "a" + std::to_string(xi[k].first + 1) + std::to_string(xi[k].second + 1);
  }
  return s + "}";
}

/// Membership of a point y|R_1..R_{r-1}| in the predicted support Z.
struct ZInfo {
  bool member = false;
  Mat x;  // R_{r-1} = -_x A_{r-1}
  Mat t;  // x y x^{-1}
  std::string stratum;
  std::vector<std::pair<int, int>> xi;  // r = 3: positive roots with e^alpha(t) = -1
};

// ------------------------------------------------------------ r = 2

/// R_1 in C and ^y R_1 = R_1.
inline ZInfo z_predicate_r2(const GenericDatum& D, const Mat& y, const std::vector<Mat>& R) {
  ZInfo z;
  const auto x = orbit_conjugator(R[0], D.a(1));
  if (!x || y * R[0] != R[0] * y) return z;
  z.member = true;
  z.x = *x;
  z.t = *x * y * inverse(*x);
  z.stratum = "Z";
  return z;
}

// ------------------------------------------------------------ r = 3

/// R in C, y in T_R, (R_1)^0_R = -_x A_1; stratum Xi or Z'.
inline ZInfo z_predicate_r3(const GenericDatum& D, const Mat& y, const std::vector<Mat>& R) {
  ZInfo z;
  const auto x = orbit_conjugator(R[1], D.a(2));
  if (!x || y * R[1] != R[1] * y) return z;
  const Mat xi = inverse(*x);
  const Mat r1 = Ad(*x, R[0], xi);
  if (diag_part(r1) != -D.a(1)) return z;
  z.member = true;
  z.x = *x;
  z.t = *x * y * xi;
  const int n = D.n, p = D.p;
  bool prime = false;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if ((1 + root_value(z.t, i, j)) % p == 0) {
        z.xi.push_back({i, j});
        if (r1(i, j) != 0 || r1(j, i) != 0) prime = true;
      }
  z.stratum = prime ? "Z'" : xi_label(z.xi);
  return z;
}

/// Where R_1 is transported before taking root components: ^x R_1 (the
/// frame in which R = -A_2) or _x R_1.
enum class Transport { Upper, Lower };

/// kappa = sum over positive alpha outside Xi of
/// (2/alpha(A_2)) (1 - e^alpha(t)) / (1 + e^alpha(t)) <R_1^alpha, R_1^{-alpha}>.
inline int kappa_r3(const GenericDatum& D, const ZInfo& z, const Mat& R1, Transport tr = Transport::Upper) {
  const int n = D.n, p = D.p;
  const Mat r1 = tr == Transport::Upper ? Ad(z.x, R1, inverse(z.x)) : Ad(inverse(z.x), R1, z.x);
  long long s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const int e = root_value(z.t, i, j);
      if ((1 + e) % p == 0) continue;
      const int al = ((D.a(2)(i, i) - D.a(2)(j, j)) % p + p) % p;
      const long long num = 2LL * ((1 - e + p) % p) % p * r1(i, j) % p * r1(j, i) % p;
      s += num * fp_inv(al * (1 + e) % p, p) % p;
    }
  return static_cast<int>(s % p);
}

/// f on Z^empty, first form.
inline int f_r3(const GenericDatum& D, const Mat& y, const std::vector<Mat>& R, Transport tr = Transport::Upper) {
  const ZInfo z = z_predicate_r3(D, y, R);
  if (!z.member) throw DomainError("f_r3: point is not in Z");
  if (!z.xi.empty()) throw DomainError("f_r3: 1 + e^alpha(xyx^{-1}) = 0 for some positive alpha");
  return kappa_r3(D, z, R[0], tr);
}

/// f on Z^empty, second form: sum over all roots of (2/alpha(A_2)) / (1 + e^alpha) <R^alpha, R^{-alpha}>.
inline int f_r3_all_roots(const GenericDatum& D, const Mat& y, const std::vector<Mat>& R) {
  const ZInfo z = z_predicate_r3(D, y, R);
  if (!z.member || !z.xi.empty()) throw DomainError("f_r3_all_roots: point is not in Z^empty");
  const int n = D.n, p = D.p;
  const Mat r1 = Ad(z.x, R[0], inverse(z.x));
  long long s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int e = root_value(z.t, i, j);
      const int al = ((D.a(2)(i, i) - D.a(2)(j, j)) % p + p) % p;
      s += 2LL * r1(i, j) % p * r1(j, i) % p * fp_inv(al * (1 + e) % p, p) % p;
    }
  return static_cast<int>(s % p);
}

/// Closed-form value without the global constant: 0 off Z and on Z',
/// q^{#Xi} psi(kappa) lambda_0(x y x^{-1}) on Z^Xi.
struct Prediction {
  bool zero = true;
  int qpow = 0;
  int root_exp = 0;  // exponent of zeta_N

  CycValue value(const Scalars& S) const {
    if (zero) return CycValue::zero(S.cyc());
    return S.root(root_exp) * static_cast<int64_t>(GroupCtx::ipow_u(static_cast<uint64_t>(S.p()), qpow));
  }
};

inline Prediction predict_r2(const GenericDatum& D, const Scalars& S, const ZInfo& z) {
  if (!z.member) return {};
  return {false, 0, S.lambda0_exponent(D.lambda0, z.t.diagonal())};
}

inline Prediction predict_r3(const GenericDatum& D, const Scalars& S, const ZInfo& z, const Mat& R1,
                             Transport tr = Transport::Upper) {
  if (!z.member || z.stratum == "Z'") return {};
  return {false, static_cast<int>(z.xi.size()),
          S.add_exp(S.psi_exponent(kappa_r3(D, z, R1, tr)), S.lambda0_exponent(D.lambda0, z.t.diagonal()))};
}

/// Stalk of the fiber model at a point of Z (frame R = -A_2): the affine
/// space of X in g^- with A_1 + R_1 + [A_2, X + _yX]/2 in n, and
/// h^ = <X - _yX, R_1> on it.
struct StalkProfile {
  int kase = 0;  // 1, 2, 3; 0 when the point is outside the ambient locus
  Prediction predicted;
  uint64_t model_count = 0;
  uint64_t brute_count = 0;
  CycValue brute_sum;  // sum over the fiber of psi(h^) lambda_0(t)
};

inline StalkProfile stalk_profile_r3(const GenericDatum& D, const Scalars& S, const Mat& y, const std::vector<Mat>& R) {
  const int n = D.n, p = D.p;
  StalkProfile sp;
  sp.brute_sum = CycValue::zero(S.cyc());
  const ZInfo z = z_predicate_r3(D, y, R);
  if (!z.member) return sp;
  const Mat r1 = Ad(z.x, R[0], inverse(z.x));
  sp.kase = 3;
  for (const auto& [i, j] : z.xi) {
    if (r1(j, i) != 0) sp.kase = 1;
    else if (r1(i, j) != 0 && sp.kase == 3) sp.kase = 2;
  }
  if (sp.kase == 3) sp.predicted = predict_r3(D, S, z, R[0]);
  sp.model_count = sp.kase == 1 ? 0 : GroupCtx::ipow_u(static_cast<uint64_t>(p), static_cast<int>(z.xi.size()));

  const auto lower = detail::entries_strict_lower(n);
  const uint64_t count = GroupCtx::ipow_u(static_cast<uint64_t>(p), static_cast<int>(lower.size()));
  const Mat ti = inverse(z.t);
  const int lam = S.lambda0_exponent(D.lambda0, z.t.diagonal());
  RootSum acc = S.accumulator();
  for (uint64_t v = 0; v < count; ++v) {
    Mat X(n, p);
    uint64_t w = v;
    for (const auto& [a, b] : lower) {
      X(a, b) = static_cast<int32_t>(w % static_cast<uint64_t>(p));
      w /= static_cast<uint64_t>(p);
    }
    const Mat Xy = Ad(ti, X, z.t);
    const Mat cond = D.a(1) + r1 + fp_inv(2, p) * bracket(D.a(2), X + Xy);
    if (!cond.is_strict_upper()) continue;
    ++sp.brute_count;
    acc.add(S.add_exp(lam, S.psi_exponent(pairing(X - Xy, r1))));
  }
  sp.brute_sum = acc.value(S.cyc());
  return sp;
}

/// f(pi^(y, X, R_1, R)) = h^ with X in g^- solving the constraint system:
/// in the frame R = -A_2, X^{-alpha} = 2 R_1^{-alpha} / (alpha(A_2)(1 + e^alpha)),
/// h^ = <X - _yX, R_1>. Points of Z^empty are built from random (x, t, R_1).
inline CheckReport check_f_identity_r3(const GroupCtx& G, const GenericDatum& D, int samples, uint64_t seed,
                                       Transport tr = Transport::Upper) {
  CheckReport rep{"f = h^ on fiber points over Z^empty", 0, 0, ""};
  const int n = G.n(), p = G.p();
  SplitMix64 rng(seed);
  int skipped = 0;
  while (rep.samples < samples) {
    const Mat x = G.random_gl(rng), xi = inverse(x);
    const Mat t = G.random_torus(rng);
    bool empty_xi = true;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) empty_xi = empty_xi && (1 + root_value(t, i, j)) % p != 0;
    if (!empty_xi) {
      if (++skipped > 100 * samples) throw DomainError("check_f_identity_r3: no torus element with empty Xi");
      continue;
    }
    const Mat y = xi * t * x, yi = inverse(y);
    const Mat off = G.random_strict_upper(rng) + transpose(G.random_strict_upper(rng));
    const Mat r1f = off - D.a(1);  // R_1 in the frame of x
    const std::vector<Mat> R{Ad(xi, r1f, x), -Ad(xi, D.a(2), x)};
    Mat Xf(n, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j) {
        // X^{-alpha} for alpha = e_j - e_i, stored at (i, j)
        const int e = root_value(t, j, i);
        const int al = ((D.a(2)(j, j) - D.a(2)(i, i)) % p + p) % p;
        Xf(i, j) = static_cast<int32_t>(2LL * r1f(i, j) % p * fp_inv(al * (1 + e) % p, p) % p);
      }
    const Mat X = Ad(xi, Xf, x);
    const int hhat = ((pairing(X - Ad(yi, X, y), R[0]) % p) + p) % p;
    // the constraint system itself: A_1 + R_1 + [A_2, X + _yX]/2 lies in n in the frame
    const Mat cond = D.a(1) + r1f + fp_inv(2, p) * bracket(D.a(2), Xf + Ad(inverse(t), Xf, t));
    ++rep.samples;
    if (!cond.is_strict_upper() || f_r3(D, y, R, tr) != hhat) ++rep.failures;
  }
  return rep;
}

/// z_predicate_r3, kappa and the stratum do not depend on the representative
/// x in T x: recompute everything with t x for random t in T.
inline CheckReport check_x_invariance_r3(const GroupCtx& G, const GenericDatum& D, int samples, uint64_t seed,
                                         Transport tr = Transport::Upper) {
  CheckReport rep{"r=3 predicate and f invariant under x -> tx", 0, 0, ""};
  SplitMix64 rng(seed);
  while (rep.samples < samples) {
    const Mat x = G.random_gl(rng), xi = inverse(x);
    const Mat y = xi * G.random_torus(rng) * x;
    const Mat r1f = G.random_strict_upper(rng) + transpose(G.random_strict_upper(rng)) - D.a(1);
    const std::vector<Mat> R{Ad(xi, r1f, x), -Ad(xi, D.a(2), x)};
    const ZInfo z = z_predicate_r3(D, y, R);
    ZInfo w = z;
    const Mat s = G.random_torus(rng);
    w.x = s * z.x;
    w.t = w.x * y * inverse(w.x);
    // membership with the other representative: same diagonal condition
    const bool member_w = diag_part(Ad(w.x, R[0], inverse(w.x))) == -D.a(1);
    const bool ok = z.member && member_w && w.t == z.t && kappa_r3(D, z, R[0], tr) == kappa_r3(D, w, R[0], tr);
    ++rep.samples;
    if (!ok) ++rep.failures;
  }
  return rep;
}

// ------------------------------------------------------------ r = 4

/// Coefficients in the R_1 condition of the r = 4 support:
/// R_1 + _xA_1 + sign (c1 Xi_{R,1}(R'_2) + c2 Xi_{R,y^{-1}}(R'_2)) in t_R^perp.
struct R4Variant {
  bool swapped = false;  // (c1, c2) = (1/3, 1/6), or (1/6, 1/3) when swapped
  bool negated = false;

  std::string str() const {
    return std::string(swapped ? "c=(1/6,1/3)" : "c=(1/3,1/6)") + (negated ? ",sign=-" : ",sign=+");
  }
  static std::vector<R4Variant> all() { return {{false, false}, {false, true}, {true, false}, {true, true}}; }
};

inline ZInfo z_predicate_r4(const GenericDatum& D, const Mat& y, const std::vector<Mat>& R, R4Variant v) {
  ZInfo z;
  const int p = D.p;
  const auto x = orbit_conjugator(R[2], D.a(3));
  if (!x || y * R[2] != R[2] * y) return z;
  const Mat xi = inverse(*x);
  const Mat r2p = R[1] + Ad(xi, D.a(2), *x);
  if (!diag_part(Ad(*x, r2p, xi)).is_zero()) return z;
  const Mat k1 = xi_map(R[2], Mat::identity(D.n, p), r2p, D.a(3));
  const Mat k2 = xi_map(R[2], inverse(y), r2p, D.a(3));
  const long long c1 = fp_inv(v.swapped ? 6 : 3, p), c2 = fp_inv(v.swapped ? 3 : 6, p);
  Mat corr = c1 * k1 + c2 * k2;
  if (v.negated) corr = -corr;
  const Mat cond = R[0] + Ad(xi, D.a(1), *x) + corr;
  if (!diag_part(Ad(*x, cond, xi)).is_zero()) return z;
  z.member = true;
  z.x = *x;
  z.t = *x * y * xi;
  z.stratum = "Z";
  return z;
}

/// h~_0 = <X_1 - _yX_1, R_1> + <_xA_2, [_yX_1, X_1]/2> + <_xA_3, [_yX_1,[_yX_1,X_1]]/6 + [X_1,[_yX_1,X_1]]/6>.
inline int h_tilde0_r4(const GenericDatum& D, const Mat& x, const Mat& y, const Mat& X1, const Mat& R1) {
  const int p = D.p;
  const Mat xi = inverse(x), yi = inverse(y);
  const Mat xp = Ad(yi, X1, y);
  const long long half = fp_inv(2, p), sixth = fp_inv(6, p);
  long long s = pairing(X1 - xp, R1);
  s += half * pairing(Ad(xi, D.a(2), x), bracket(xp, X1));
  s += sixth * pairing(Ad(xi, D.a(3), x), bracket(xp, bracket(xp, X1)) + bracket(X1, bracket(xp, X1)));
  return static_cast<int>(((s % p) + p) % p);
}

/// X_1 with [X_1, _xA_3] = R_2 + _xA_2 (a choice within its t-orbit).
inline std::optional<Mat> x1_for_r4(const GenericDatum& D, const Mat& x, const std::vector<Mat>& R) {
  const Mat xi = inverse(x);
  const Mat r2p = R[1] + Ad(xi, D.a(2), x);
  // [X_1, _xA_3] = [X_1, -R_3] = [-X_1, R_3]
  const auto X = solve_bracket(R[2], r2p);
  if (!X) return std::nullopt;
  return -*X;
}

inline int h_hat_r4(const GenericDatum& D, const Mat& y, const std::vector<Mat>& R, R4Variant v) {
  const ZInfo z = z_predicate_r4(D, y, R, v);
  if (!z.member) throw DomainError("h_hat_r4: point is not in Z");
  const auto X1 = x1_for_r4(D, z.x, R);
  if (!X1) throw DomainError("h_hat_r4: [X_1, _xA_3] = R'_2 is inconsistent");
  return h_tilde0_r4(D, z.x, y, *X1, R[0]);
}

inline Prediction predict_r4(const GenericDatum& D, const Scalars& S, const Mat& y, const std::vector<Mat>& R, R4Variant v) {
  const ZInfo z = z_predicate_r4(D, y, R, v);
  if (!z.member) return {};
  return {false, 0, S.add_exp(S.psi_exponent(h_hat_r4(D, y, R, v)), S.lambda0_exponent(D.lambda0, z.t.diagonal()))};
}

/// The R_1 condition of T_0 in terms of X_1:
/// R_1 + _xA_1 + a [X_1,[X_1,_xA_3]] + b [X_1,[_yX_1,_xA_3]] in (_x t)^perp.
inline bool t0_condition_r4(const GenericDatum& D, const Mat& x, const Mat& y, const Mat& X1, const Mat& R1, bool swapped) {
  const int p = D.p;
  const Mat xi = inverse(x), yi = inverse(y);
  const Mat a3 = Ad(xi, D.a(3), x);
  const long long a = fp_inv(swapped ? 6 : 3, p), b = fp_inv(swapped ? 3 : 6, p);
  const Mat w = R1 + Ad(xi, D.a(1), x) + a * bracket(X1, bracket(X1, a3)) + b * bracket(X1, bracket(Ad(yi, X1, y), a3));
  return diag_part(Ad(x, w, xi)).is_zero();
}

// ------------------------------------------------------------ identity checks

/// Constrained point for the r = 4 rewriting chain: x y x^{-1} in T,
/// Y_1 = X_1 - _yX_1 + _x tau, R_3 = -_x A_3.
struct ChainPoint {
  Mat x, y, tau, X1, X2, Y2, R1, R2;
};

class ChainR4 {
 public:
  ChainR4(const GroupCtx& G, GenericDatum D) : G_(G), D_(std::move(D)), L_(G, D_) {
    if (G.r() != 4) throw ConfigError("the rewriting chain is set up for r = 4");
  }

  ChainPoint sample(SplitMix64& rng) const {
    ChainPoint c;
    c.x = G_.random_gl(rng);
    c.y = inverse(c.x) * G_.random_torus(rng) * c.x;
    c.tau = G_.random_diag(rng);
    c.X1 = G_.random_mat(rng);
    c.X2 = G_.random_mat(rng);
    c.Y2 = G_.random_mat(rng);
    c.R1 = G_.random_mat(rng);
    c.R2 = G_.random_mat(rng);
    return c;
  }

  /// h-bar from the universal polynomials: sum_{j<=2} <Y_j,R_j> + sum_{j<=2} <_xA_j,u_j> + <_xA_3, u'_3>.
  int via_bch(const ChainPoint& c) const {
    const Mat Y1 = c.X1 - yx(c, c.X1) + xt(c, c.tau);
    FiberPoint f{c.x, c.y, {c.X1, c.X2, Mat(D_.n, D_.p)}, {Y1, c.Y2, Mat(D_.n, D_.p)}};
    return mod(pairing(Y1, c.R1) + pairing(c.Y2, c.R2) + L_.h(f));
  }

  /// First display, with Y_1 substituted.
  int display1(const ChainPoint& c) const {
    const Mat X1 = c.X1, X2 = c.X2, Y2 = c.Y2, xp1 = yx(c, X1), xp2 = yx(c, X2);
    const Mat Y1 = X1 - xp1 + xt(c, c.tau);
    const Mat a1 = xa(c, 1), a2 = xa(c, 2), a3 = xa(c, 3);
    const long long h = inv(2), t = inv(3), s = inv(6);
    auto B = [](const Mat& a, const Mat& b) { return bracket(a, b); };
    long long v = pairing(Y1, c.R1) + pairing(Y2, c.R2) + pairing(a1, xp1 - X1 + Y1);
    v += pairing(a2, xp2 - X2 + Y2 + h * B(xp1, Y1) - h * B(xp1, X1) - h * B(Y1, X1));
    const Mat w = B(xp2, Y1) + B(X2, X1) - B(xp2, X1) - B(Y2, X1) - s * B(xp1, B(xp1, Y1)) - t * B(Y1, B(xp1, Y1)) +
                  h * B(X1, B(xp1, Y1)) + s * B(xp1, B(xp1, X1)) + s * B(xp1, B(Y1, X1)) + s * B(Y1, B(xp1, X1)) +
                  s * B(Y1, B(Y1, X1)) - t * B(X1, B(xp1, X1)) - t * B(X1, B(Y1, X1));
    v += pairing(a3, w);
    return mod(v);
  }

  /// Second display: the substitution written out term by term.
  int display2(const ChainPoint& c) const {
    const Mat X1 = c.X1, X2 = c.X2, Y2 = c.Y2, xp1 = yx(c, X1), xp2 = yx(c, X2), T = xt(c, c.tau);
    const Mat a1 = xa(c, 1), a2 = xa(c, 2), a3 = xa(c, 3);
    const long long h = inv(2), t = inv(3), s = inv(6);
    auto B = [](const Mat& a, const Mat& b) { return bracket(a, b); };
    long long v = pairing(X1 - xp1 + T, c.R1) + pairing(Y2, c.R2) + pairing(a1, T);
    v += pairing(a2, xp2 - X2 + Y2 + h * B(xp1, X1 + T) - h * B(xp1, X1) - h * B(-xp1 + T, X1));
    const Mat w = B(xp2, X1 - xp1 + T) + B(X2, X1) - B(xp2, X1) - B(Y2, X1) - s * B(xp1, B(xp1, X1 + T)) -
                  t * B(X1 - xp1 + T, B(xp1, X1 + T)) + h * B(X1, B(xp1, X1 + T)) + s * B(xp1, B(xp1, X1)) +
                  s * B(xp1, B(-xp1 + T, X1)) + s * B(X1 - xp1 + T, B(xp1, X1)) +
                  s * B(X1 - xp1 + T, B(-xp1 + T, X1)) - t * B(X1, B(xp1, X1)) - t * B(X1, B(-xp1 + T, X1));
    v += pairing(a3, w);
    return mod(v);
  }

  /// Third display, after the cancellations that use x y x^{-1} in T.
  int display3(const ChainPoint& c) const {
    const Mat X1 = c.X1, Y2 = c.Y2, xp1 = yx(c, X1), T = xt(c, c.tau);
    const Mat a1 = xa(c, 1), a2 = xa(c, 2), a3 = xa(c, 3);
    const long long h = inv(2), s = inv(6);
    auto B = [](const Mat& a, const Mat& b) { return bracket(a, b); };
    long long v = pairing(X1 - xp1 + T, c.R1) + pairing(Y2, c.R2) + pairing(a1, T) + pairing(a2, Y2 - h * B(-xp1, X1));
    v += pairing(a3, -B(Y2, X1) + s * B(xp1, B(xp1, T)) + s * B(X1, B(X1, T)) + s * B(X1, B(xp1, T)) +
                         s * B(xp1, B(xp1, X1)) + s * B(X1, B(xp1, X1)));
    return mod(v);
  }

  /// Final display with (1/6, 1/3) on ([X1,[X1,_xA3]], [X1,[_yX1,_xA3]]);
  /// `swapped` exchanges the two coefficients.
  int display4(const ChainPoint& c, bool swapped) const {
    const Mat X1 = c.X1, Y2 = c.Y2, xp1 = yx(c, X1), T = xt(c, c.tau);
    const Mat a1 = xa(c, 1), a2 = xa(c, 2), a3 = xa(c, 3);
    const long long h = inv(2), s = inv(6), ca = inv(swapped ? 3 : 6), cb = inv(swapped ? 6 : 3);
    auto B = [](const Mat& a, const Mat& b) { return bracket(a, b); };
    long long v = pairing(Y2, c.R2 + a2 - B(X1, a3));
    v += pairing(T, c.R1 + a1 + ca * B(X1, B(X1, a3)) + cb * B(X1, B(xp1, a3)));
    v += pairing(X1 - xp1, c.R1) + h * pairing(a2, B(xp1, X1)) + s * pairing(a3, B(xp1, B(xp1, X1)) + B(X1, B(xp1, X1)));
    return mod(v);
  }

 private:
  Mat yx(const ChainPoint& c, const Mat& X) const { return Ad(inverse(c.y), X, c.y); }
  Mat xt(const ChainPoint& c, const Mat& X) const { return Ad(inverse(c.x), X, c.x); }
  Mat xa(const ChainPoint& c, int j) const { return xt(c, D_.a(j)); }
  long long inv(int k) const { return fp_inv(k, D_.p); }
  int mod(long long v) const { return static_cast<int>(((v % D_.p) + D_.p) % D_.p); }

  const GroupCtx& G_;
  GenericDatum D_;
  LemmaCtx L_;
};

/// The chain at `samples` points; also decides which placement of 1/3 and
/// 1/6 in the final display agrees with the unsimplified h-bar.
struct ChainResult {
  CheckReport via_bch, d1, d2, d3, d4_sixth_first, d4_third_first;
  std::string resolved;  // "(1/6,1/3)", "(1/3,1/6)", or "neither"
};

inline ChainResult chain_r4(const GroupCtx& G, const GenericDatum& D, int samples, uint64_t seed) {
  ChainR4 ch(G, D);
  ChainResult r{{"bch=display1", 0, 0, ""}, {"display1", 0, 0, ""}, {"display2=display1", 0, 0, ""},
                {"display3=display1", 0, 0, ""}, {"display4(1/6,1/3)=display1", 0, 0, ""},
                {"display4(1/3,1/6)=display1", 0, 0, ""}, ""};
  SplitMix64 rng(seed);
  for (int k = 0; k < samples; ++k) {
    const ChainPoint c = ch.sample(rng);
    const int e1 = ch.display1(c);
    auto tally = [&](CheckReport& rep, int v) {
      ++rep.samples;
      if (v != e1) ++rep.failures;
    };
    tally(r.via_bch, ch.via_bch(c));
    tally(r.d1, e1);
    tally(r.d2, ch.display2(c));
    tally(r.d3, ch.display3(c));
    tally(r.d4_sixth_first, ch.display4(c, false));
    tally(r.d4_third_first, ch.display4(c, true));
  }
  r.resolved = r.d4_sixth_first.pass() == r.d4_third_first.pass()
                   ? "neither"
                   : (r.d4_sixth_first.pass() ? "(1/6,1/3)" : "(1/3,1/6)");
  return r;
}

/// h~ on the full fiber variety: sum <Y_j, R_j> + h.
inline int h_tilde(const LemmaCtx& L, const FiberPoint& f, const std::vector<Mat>& R, int p) {
  long long s = L.h(f);
  for (std::size_t j = 0; j < R.size(); ++j) s += pairing(f.Y[j], R[j]);
  return static_cast<int>(((s % p) + p) % p);
}

/// On the block X_{r-1}, Y_{r-1} the function h~ equals <Y_{r-1}, R_{r-1} + _xA_{r-1}> + const;
/// it is constant exactly when R_{r-1} = -_xA_{r-1}.
inline CheckReport check_elim_last(const GroupCtx& G, const GenericDatum& D, int samples, uint64_t seed) {
  CheckReport rep{"affine-linear in (X_{r-1},Y_{r-1}), constant iff R_{r-1}=-_xA_{r-1}", 0, 0, ""};
  const int r = G.r(), p = G.p();
  LemmaCtx L(G, D);
  SplitMix64 rng(seed);
  for (int k = 0; k < samples; ++k) {
    FiberPoint f = L.sample(spec_K(r), rng);
    std::vector<Mat> R;
    for (int j = 1; j < r; ++j) R.push_back(G.random_mat(rng));
    const bool on_locus = k % 2 == 0;
    const Mat xa = Ad(inverse(f.x), D.a(r - 1), f.x);
    if (on_locus) R.back() = -xa;
    auto F = [&](const Mat& X, const Mat& Y) {
      FiberPoint g = f;
      g.X.back() = X;
      g.Y.back() = Y;
      return h_tilde(L, g, R, p);
    };
    const int f0 = F(Mat(G.n(), p), Mat(G.n(), p));
    bool ok = true, constant = true;
    for (int t = 0; t < 8; ++t) {
      const Mat X = G.random_mat(rng), Y = G.random_mat(rng), X2 = G.random_mat(rng), Y2 = G.random_mat(rng);
      const int v = F(X, Y);
      ok = ok && v == ((f0 + pairing(Y, R.back() + xa)) % p + p) % p;
      ok = ok && ((F(X + X2, Y + Y2) - F(X, Y) - F(X2, Y2) + f0) % p + p) % p == 0;
      constant = constant && v == f0;
    }
    if (!on_locus && !(R.back() + xa).is_zero()) ok = ok && !constant;  // 8 random probes of a nonzero form
    if (on_locus) ok = ok && constant;
    ++rep.samples;
    if (!ok) ++rep.failures;
  }
  return rep;
}

/// The same at r = 2 over the whole block g x g: h~(X_1, Y_1) - h~(0, 0) =
/// <Y_1, R_1 + _xA_1> everywhere, and h~ is constant iff R_1 = -_xA_1.
inline CheckReport check_elim_last_exhaustive_r2(const GroupCtx& G, const GenericDatum& D, int points, uint64_t seed) {
  CheckReport rep{"h~ on g x g: <Y, R_1 + _xA_1> + const, constant iff R_1 = -_xA_1", 0, 0, ""};
  if (G.r() != 2) throw ConfigError("the exhaustive check is set up for r = 2");
  const int n = G.n(), p = G.p();
  LemmaCtx L(G, D);
  SplitMix64 rng(seed);
  const uint64_t side = GroupCtx::ipow_u(static_cast<uint64_t>(p), n * n);
  auto mat = [&](uint64_t w) {
    Mat m(n, p);
    for (int k = 0; k < n * n; ++k) {
      m.a[static_cast<std::size_t>(k)] = static_cast<int32_t>(w % static_cast<uint64_t>(p));
      w /= static_cast<uint64_t>(p);
    }
    return m;
  };
  for (int k = 0; k < points; ++k) {
    const FiberPoint f = L.sample(spec_K(2), rng);
    const Mat xa = Ad(inverse(f.x), D.a(1), f.x);
    const std::vector<Mat> R{k % 2 == 0 ? -xa : G.random_mat(rng)};
    const Mat form = R[0] + xa;
    FiberPoint g = f;
    g.X[0] = Mat(n, p);
    g.Y[0] = Mat(n, p);
    const int f0 = h_tilde(L, g, R, p);
    bool ok = true, constant = true;
    for (uint64_t a = 0; a < side && ok; ++a)
      for (uint64_t b = 0; b < side; ++b) {
        g.X[0] = mat(a);
        g.Y[0] = mat(b);
        const int v = h_tilde(L, g, R, p);
        ok = ok && v == ((f0 + pairing(g.Y[0], form)) % p + p) % p;
        constant = constant && v == f0;
      }
    ok = ok && constant == form.is_zero();
    ++rep.samples;
    if (!ok) ++rep.failures;
  }
  return rep;
}

/// h~ is affine-linear in the block X_m..X_{r-1}, Y_m..Y_{r-1}: second
/// differences vanish along random lines and F(a+b) - F(a) - F(b) + F(0) = 0.
inline CheckReport check_elim_block(const GroupCtx& G, const GenericDatum& D, int samples, uint64_t seed) {
  CheckReport rep{"affine-linear in (X_j,Y_j), j >= r-r'", 0, 0, ""};
  const int r = G.r(), p = G.p(), m = lower_block(r);
  LemmaCtx L(G, D);
  SplitMix64 rng(seed);
  for (int k = 0; k < samples; ++k) {
    const FiberPoint f = L.sample(spec_K(r), rng);
    std::vector<Mat> R;
    for (int j = 1; j < r; ++j) R.push_back(G.random_mat(rng));
    auto random_block = [&]() {
      std::vector<Mat> b;
      for (int j = m; j < r; ++j) b.push_back(G.random_mat(rng));
      for (int j = m; j < r; ++j) b.push_back(G.random_mat(rng));
      return b;
    };
    auto F = [&](const std::vector<Mat>& b, long long s1, const std::vector<Mat>* d, long long s2) {
      FiberPoint g = f;
      const std::size_t w = static_cast<std::size_t>(r - m);
      for (std::size_t j = 0; j < w; ++j) {
        Mat xv = s1 * b[j], yv = s1 * b[w + j];
        if (d) {
          xv += s2 * (*d)[j];
          yv += s2 * (*d)[w + j];
        }
        g.X[static_cast<std::size_t>(m - 1) + j] = xv;
        g.Y[static_cast<std::size_t>(m - 1) + j] = yv;
      }
      return static_cast<long long>(h_tilde(L, g, R, p));
    };
    bool ok = true;
    for (int line = 0; line < 10; ++line) {
      const auto a = random_block(), d = random_block();
      const long long d2 = F(a, 1, &d, 2) - 2 * F(a, 1, &d, 1) + F(a, 1, nullptr, 0);
      const long long add = F(a, 1, &d, 1) - F(a, 1, nullptr, 0) - F(d, 1, nullptr, 0) + F(a, 0, nullptr, 0);
      ok = ok && d2 % p == 0 && add % p == 0;
    }
    ++rep.samples;
    if (!ok) ++rep.failures;
  }
  return rep;
}

/// On Z_0 (r = 3), h~_0 = <X - _yX, R_1> + <_xA_2, [_yX, X]/2> equals <X^- - _y X^-, R_1>.
inline CheckReport check_descent_r3(const GroupCtx& G, const GenericDatum& D, int samples, uint64_t seed) {
  CheckReport rep{"h~_0 = h^ o zeta on Z_0", 0, 0, ""};
  if (G.r() != 3) throw ConfigError("descent check is set up for r = 3");
  const int p = G.p();
  SplitMix64 rng(seed);
  const long long half = fp_inv(2, p);
  for (int k = 0; k < samples; ++k) {
    const Mat x = G.random_gl(rng), xi = inverse(x);
    const Mat y = xi * G.random_torus(rng) * x, yi = inverse(y);
    const Mat X = G.random_mat(rng);
    const Mat a1 = Ad(xi, D.a(1), x), a2 = Ad(xi, D.a(2), x);
    const Mat R1 = -a1 - half * bracket(a2, X + Ad(yi, X, y)) + Ad(xi, G.random_strict_upper(rng), x);
    const long long lhs = pairing(X - Ad(yi, X, y), R1) + half * pairing(a2, bracket(Ad(yi, X, y), X));
    const Mat Xm = pm0_decompose_with(x, X).minus;
    const long long rhs = pairing(Xm - Ad(yi, Xm, y), R1);
    ++rep.samples;
    if ((lhs - rhs) % p != 0) ++rep.failures;
  }
  return rep;
}

/// h~_0 is constant along X_1 -> X_1 + _x tau on T_0 (r = 4).
inline CheckReport check_tau_invariance_r4(const GroupCtx& G, const GenericDatum& D, int samples, uint64_t seed,
                                           bool swapped) {
  CheckReport rep{"h~_0(X_1 + _x tau) = h~_0(X_1) on T_0", 0, 0, ""};
  const int p = G.p();
  SplitMix64 rng(seed);
  for (int k = 0; k < samples; ++k) {
    const Mat x = G.random_gl(rng), xi = inverse(x);
    const Mat y = xi * G.random_torus(rng) * x, yi = inverse(y);
    const Mat X1 = G.random_mat(rng);
    const Mat a1 = Ad(xi, D.a(1), x), a3 = Ad(xi, D.a(3), x);
    const long long ca = fp_inv(swapped ? 6 : 3, p), cb = fp_inv(swapped ? 3 : 6, p);
    const Mat R1 = -a1 - ca * bracket(X1, bracket(X1, a3)) - cb * bracket(X1, bracket(Ad(yi, X1, y), a3)) +
                   Ad(xi, G.random_strict_upper(rng) + transpose(G.random_strict_upper(rng)), x);
    const Mat tau = Ad(xi, G.random_diag(rng), x);
    bool ok = t0_condition_r4(D, x, y, X1, R1, swapped);
    ok = ok && h_tilde0_r4(D, x, y, X1 + tau, R1) == h_tilde0_r4(D, x, y, X1, R1);
    ++rep.samples;
    if (!ok) ++rep.failures;
  }
  return rep;
}

// ------------------------------------------------------------ support reports

struct SupportReport {
  int r = 0, n = 0, p = 0;
  std::vector<std::string> bases;
  uint64_t points = 0;
  uint64_t support_size = 0;        // points with nonzero transform
  uint64_t predicted_support = 0;   // points with nonzero prediction
  uint64_t off_support_violations = 0;
  uint64_t residuals = 0;           // support points where value != c * prediction
  std::optional<CycValue> c;
  int c_sign = 0;
  int c_power = -1;
  std::map<std::string, uint64_t> strata;
  std::vector<std::string> notes;

  SupportReport() = default;
  SupportReport(int r_, int n_, int p_) : r(r_), n(n_), p(p_) {}

  bool pass() const noexcept {
    return points > 0 && off_support_violations == 0 && residuals == 0 && c_power >= 0;
  }
};

namespace detail {

/// ±p^k as (sign, k), or nullopt.
inline std::optional<std::pair<int, int>> signed_prime_power(const CycValue& c, int p) {
  if (!c.is_integer()) return std::nullopt;
  int64_t v = c.constant_term();
  const int sign = v < 0 ? -1 : 1;
  v = v < 0 ? -v : v;
  if (v == 0) return std::nullopt;
  int k = 0;
  while (v % p == 0) {
    v /= p;
    ++k;
  }
  if (v != 1) return std::nullopt;
  return std::make_pair(sign, k);
}

/// Fold one (transform, prediction) pair into the report.
inline void tally(SupportReport& rep, const Scalars& S, const CycValue& val, const Prediction& pr) {
  ++rep.points;
  if (!val.is_zero()) ++rep.support_size;
  if (pr.zero) {
    if (!val.is_zero()) ++rep.off_support_violations;
    return;
  }
  ++rep.predicted_support;
  if (!rep.c) {
    auto q = (val * S.root(-pr.root_exp))
                 .divide_exact(static_cast<int64_t>(GroupCtx::ipow_u(static_cast<uint64_t>(S.p()), pr.qpow)));
    if (!q) {
      ++rep.residuals;
      return;
    }
    rep.c = *q;
    if (auto sp = signed_prime_power(*q, S.p())) {
      rep.c_sign = sp->first;
      rep.c_power = sp->second;
    } else {
      rep.notes.push_back("fitted constant " + q->str() + " is not of the form +-q^k");
    }
  }
  if (val != *rep.c * pr.value(S)) ++rep.residuals;
}

}  // namespace detail

inline std::string mat_label(const Mat& m) { return m.str(); }

/// r = 2: exact transform on every fiber above the given bases.
inline SupportReport support_report_r2(const CharCtx& C, const std::vector<Mat>& bases, int jobs = 1) {
  const GenericDatum& D = C.datum();
  const Scalars& S = C.scalars();
  SupportReport rep(2, D.n, D.p);
  const FiberCoords fc{D.n, D.p, 2};
  for (const Mat& y : bases) {
    rep.bases.push_back(mat_label(y));
    const FiberTable hat = dft_fiber(t_K_fiber(C, y, jobs), S);
    for (uint64_t code = 0; code < fc.size(); ++code) {
      const ZInfo z = z_predicate_r2(D, y, fc.decode(code));
      if (z.member) ++rep.strata[z.stratum];
      detail::tally(rep, S, hat.values[code], predict_r2(D, S, z));
    }
  }
  return rep;
}

/// Points of Z for r = 2 counted from the parametrization: R_1 = -_xA_1 over
/// T\G, y in the centralizer x^{-1} T x.
inline std::set<std::pair<ElementIndex, uint64_t>> parametrized_z_r2(const GroupCtx& G, const GenericDatum& D) {
  std::set<std::pair<ElementIndex, uint64_t>> pts;
  const FiberCoords fc{D.n, D.p, 2};
  for (const Mat& x : G.torus_coset_reps()) {
    const Mat xi = inverse(x);
    const Mat R1 = -Ad(xi, D.a(1), x);
    for (const Mat& t : G.torus_elements()) pts.insert({mat_index(xi * t * x), fc.encode({R1})});
  }
  return pts;
}

/// r = 3: exact transform on the fibers above the bases, compared with the
/// stratified prediction.
inline SupportReport support_report_r3(const CharCtx& C, const std::vector<Mat>& bases, Transport tr = Transport::Upper,
                                       int jobs = 1) {
  const GenericDatum& D = C.datum();
  const Scalars& S = C.scalars();
  SupportReport rep(3, D.n, D.p);
  const FiberCoords fc{D.n, D.p, 3};
  for (const Mat& y : bases) {
    rep.bases.push_back(mat_label(y));
    const FiberTable hat = dft_fiber(t_K_fiber(C, y, jobs), S);
    for (uint64_t code = 0; code < fc.size(); ++code) {
      const auto R = fc.decode(code);
      const ZInfo z = z_predicate_r3(D, y, R);
      if (z.member) ++rep.strata[z.stratum];
      detail::tally(rep, S, hat.values[code], predict_r3(D, S, z, R[0], tr));
    }
  }
  return rep;
}

/// r = 3, sampled through the exact closed-form fiber sum at each point,
/// for fields where the full fiber is out of reach. Points lie on Z (half of
/// them with Xi nonempty when possible) or are perturbed off it.
inline SupportReport support_report_r3_sampled(const CharCtx& C, int points, uint64_t seed,
                                               Transport tr = Transport::Upper) {
  const GroupCtx& G = C.group();
  const GenericDatum& D = C.datum();
  const Scalars& S = C.scalars();
  const FiberEngine e = C.engine();
  const int n = G.n(), p = G.p();
  SupportReport rep(3, n, p);
  rep.bases.push_back("sampled");
  SplitMix64 rng(seed);
  for (int k = 0; k < points; ++k) {
    const Mat x = G.random_gl(rng), xi = inverse(x);
    Mat t = G.random_torus(rng);
    if (k % 2 == 1) t(1, 1) = (p - t(0, 0)) % p;  // e^{a12}(t) = -1
    const Mat y = xi * t * x;
    Mat off = G.random_strict_upper(rng) + transpose(G.random_strict_upper(rng));
    if (k % 4 == 1) off(1, 0) = 0;  // keep some Xi points outside Z'
    std::vector<Mat> R{Ad(xi, off - D.a(1), x), -Ad(xi, D.a(2), x)};
    if (k % 5 == 4) R[0] += G.random_mat(rng);
    if (k % 7 == 6) R[1] += G.random_mat(rng);
    const ZInfo z = z_predicate_r3(D, y, R);
    if (z.member) ++rep.strata[z.stratum];
    detail::tally(rep, S, e.run_dual(y, R).value(S.cyc()), predict_r3(D, S, z, R[0], tr));
  }
  return rep;
}

/// r = 4 point of Z built from (x, t, X_1): R_3 = -_xA_3, R_2 = -_xA_2 + [X_1, _xA_3],
/// R_1 solving the T_0 condition for the given coefficient placement, plus a
/// random element of (_x t)^perp.
inline std::vector<Mat> z_point_r4(const GroupCtx& G, const GenericDatum& D, const Mat& x, const Mat& y, const Mat& X1,
                                   bool swapped, SplitMix64& rng) {
  const int p = G.p();
  const Mat xi = inverse(x), yi = inverse(y);
  const Mat a1 = Ad(xi, D.a(1), x), a2 = Ad(xi, D.a(2), x), a3 = Ad(xi, D.a(3), x);
  const long long ca = fp_inv(swapped ? 6 : 3, p), cb = fp_inv(swapped ? 3 : 6, p);
  const Mat R1 = -a1 - ca * bracket(X1, bracket(X1, a3)) - cb * bracket(X1, bracket(Ad(yi, X1, y), a3)) +
                 Ad(xi, G.random_strict_upper(rng) + transpose(G.random_strict_upper(rng)), x);
  return {R1, -a2 + bracket(X1, a3), -a3};
}

/// r = 4, sampled: the transform at each point is an exact closed-form
/// fiber sum; points come from Z (both coefficient placements) and from
/// perturbations off Z. Every variant of the R_1 condition is scored.
struct SupportReportR4 {
  std::vector<std::pair<R4Variant, SupportReport>> variants;
  std::string resolved;  // variant with zero residuals and violations, if unique
};

inline SupportReportR4 support_report_r4(const CharCtx& C, int points, uint64_t seed) {
  const GroupCtx& G = C.group();
  const GenericDatum& D = C.datum();
  const Scalars& S = C.scalars();
  const FiberEngine e = C.engine();
  SupportReportR4 out;
  for (const R4Variant& v : R4Variant::all()) out.variants.push_back({v, SupportReport(4, D.n, D.p)});
  SplitMix64 rng(seed);
  for (int k = 0; k < points; ++k) {
    const Mat x = G.random_gl(rng);
    // mostly regular torus parts; every fourth point has a scalar one
    Mat t = G.random_torus(rng);
    if (k % 4 == 3) t = t(0, 0) * Mat::identity(G.n(), G.p());
    const Mat y = inverse(x) * t * x;
    std::vector<Mat> R = z_point_r4(G, D, x, y, G.random_mat(rng), k % 2 == 1, rng);
    switch (k % 6) {
      case 4: R[0] += G.random_mat(rng); break;  // off the R_1 condition (usually)
      case 5: R[1] += G.random_mat(rng); break;  // off the R_2 condition (usually)
      default: break;
    }
    const CycValue val = e.run_dual(y, R).value(S.cyc());
    for (auto& [v, rep] : out.variants) {
      if (k == 0) rep.bases.push_back("sampled");
      detail::tally(rep, S, val, predict_r4(D, S, y, R, v));
    }
  }
  int winners = 0;
  for (const auto& [v, rep] : out.variants)
    if (rep.pass() && rep.predicted_support > 0) {
      ++winners;
      out.resolved = v.str();
    }
  if (winners != 1) out.resolved = winners == 0 ? "none" : "ambiguous";
  return out;
}

}  // namespace epschar
