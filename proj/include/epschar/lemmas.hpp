#pragma once
// Exponential sums over the small affine pieces that make each stratum of
// the ladder contribute zero. Every sum is evaluated by recomputing h from
// the universal polynomials at each transformed point.

#include <string>
#include <vector>

#include "epschar/charfun.hpp"

namespace epschar {

/// (Tx, y, X_1..X_{r-1}, Y_1..Y_{r-1}).
struct FiberPoint {
  Mat x, y;
  std::vector<Mat> X, Y;
};

enum class LemmaCase { L42, L43, L44, L45 };

inline std::string lemma_name(LemmaCase c) {
  switch (c) {
    case LemmaCase::L42: return "4.2";
    case LemmaCase::L43: return "4.3";
    case LemmaCase::L44: return "4.4";
    case LemmaCase::L45: return "4.5";
  }
  return "?";
}

inline LemmaCase parse_lemma(const std::string& s) {
  if (s == "4.2") return LemmaCase::L42;
  if (s == "4.3") return LemmaCase::L43;
  if (s == "4.4") return LemmaCase::L44;
  if (s == "4.5") return LemmaCase::L45;
  throw ConfigError("unknown lemma case '" + s + "'");
}

struct LemmaResult {
  CycValue sum;
  int terms = 0;
  bool closed_form_ok = true;  // 4.3 and 4.5 only
};

class LemmaCtx {
 public:
  LemmaCtx(const GroupCtx& G, GenericDatum D) : G_(G), D_(std::move(D)), S_(G.p()) {
    D_.validate();
    if (G.r() < 2) throw ConfigError("lemmas need r >= 2");
  }

  const Scalars& scalars() const noexcept { return S_; }

  /// u_1..u_{r-1} at a point; missing trailing X_k, Y_k count as zero.
  std::vector<Mat> u(const FiberPoint& f) const {
    bch::Compiled::Assignment as;
    as.fill(Mat(G_.n(), G_.p()));
    const Mat yi = inverse(f.y);
    for (int k = 1; k < G_.r() && k <= static_cast<int>(f.X.size()); ++k) {
      const Mat& X = f.X[static_cast<std::size_t>(k - 1)];
      as[bch::symbol(bch::Family::X, k)] = X;
      as[bch::symbol(bch::Family::Xp, k)] = Ad(yi, X, f.y);
      as[bch::symbol(bch::Family::Y, k)] = f.Y[static_cast<std::size_t>(k - 1)];
    }
    return G_.u_poly().eval(as, G_.n());
  }

  /// h = sum_j <_x A_j, u_j>.
  int h(const FiberPoint& f) const {
    const auto us = u(f);
    const Mat xi = inverse(f.x);
    long long s = 0;
    for (int j = 1; j < G_.r(); ++j) s += pairing(Ad(xi, D_.a(j), f.x), us[static_cast<std::size_t>(j - 1)]);
    return static_cast<int>(s % G_.p());
  }

  /// Stratum of each case: torus condition and conditions on u_j.
  FiberSpec stratum(LemmaCase c) const {
    const int r = G_.r(), m = lower_block(r);
    switch (c) {
      case LemmaCase::L42: return spec_piece_up(r, m);
      case LemmaCase::L44: return spec_piece_down(r, r - 1);
      case LemmaCase::L43:
        if (r != 4) throw ConfigError("case 4.3 is set up for r = 4");
        return spec_piece_up(4, 1);
      case LemmaCase::L45:
        if (r != 4) throw ConfigError("case 4.5 is set up for r = 4");
        return spec_piece_down(4, 2);
    }
    throw ConfigError("bad case");
  }

  /// Random point of a stratum: x, then x y x^{-1} of the right shape, then
  /// each Y_j solved so that ^x u_j is a random element of the required set.
  FiberPoint sample(const FiberSpec& s, SplitMix64& rng) const {
    const int n = G_.n(), p = G_.p(), r = G_.r();
    FiberPoint f{G_.random_gl(rng), {}, {}, {}};
    Mat c = G_.random_torus(rng);
    if (s.torus != TorusCond::T) {
      Mat nil;
      do {
        nil = G_.random_strict_upper(rng);
      } while (s.torus == TorusCond::BminusT && nil.is_zero());
      c += nil;
    }
    const Mat xi = inverse(f.x);
    f.y = xi * c * f.x;
    for (int j = 1; j < r; ++j) {
      f.X.push_back(G_.random_mat(rng));
      f.Y.push_back(Mat(n, p));
      const Mat base = u(f)[static_cast<std::size_t>(j - 1)];
      Mat w;
      const UCond cj = s.u[static_cast<std::size_t>(j - 1)];
      do {
        switch (cj) {
          case UCond::InT: w = G_.random_diag(rng); break;
          case UCond::InB:
          case UCond::InBNotT: w = G_.random_upper(rng); break;
          default: w = G_.random_mat(rng);
        }
      } while (!detail::holds(cj, w));
      f.Y.back() = Ad(xi, w, f.x) - base;
    }
    return f;
  }

  bool in_stratum(const FiberSpec& s, const FiberPoint& f) const {
    const Mat c = f.x * f.y * inverse(f.x);
    if (!detail::holds(s.torus, c.is_diagonal(), c.is_upper())) return false;
    const auto us = u(f);
    const Mat xi = inverse(f.x);
    for (int j = 1; j < G_.r(); ++j)
      if (!detail::holds(s.u[static_cast<std::size_t>(j - 1)], Ad(f.x, us[static_cast<std::size_t>(j - 1)], xi))) return false;
    return true;
  }

  /// The sum of psi(h) over the affine piece through f. Throws DomainError
  /// when f is outside the stratum or the piece's linear form vanishes.
  LemmaResult sum(LemmaCase c, const FiberPoint& f) const {
    const FiberSpec s = stratum(c);
    if (!in_stratum(s, f)) throw DomainError("lemma " + lemma_name(c) + ": point violates the stratum conditions");
    switch (c) {
      case LemmaCase::L42: return sum42(f);
      case LemmaCase::L43: return sum43(f);
      case LemmaCase::L44: return sum44(f);
      case LemmaCase::L45: return sum45(f, s);
    }
    throw ConfigError("bad case");
  }

 private:
  std::vector<Mat> all_matrices(bool nilpotent_only) const {
    const int n = G_.n(), p = G_.p();
    std::vector<Mat> out;
    if (nilpotent_only) {
      const auto entries = detail::entries_strict_upper(n);
      const uint64_t count = GroupCtx::ipow_u(static_cast<uint64_t>(p), static_cast<int>(entries.size()));
      for (uint64_t v = 0; v < count; ++v) {
        Mat m(n, p);
        uint64_t w = v;
        for (const auto& [a, b] : entries) {
          m(a, b) = static_cast<int32_t>(w % static_cast<uint64_t>(p));
          w /= static_cast<uint64_t>(p);
        }
        out.push_back(m);
      }
    } else {
      const uint64_t count = GroupCtx::ipow_u(static_cast<uint64_t>(p), n * n);
      for (uint64_t v = 0; v < count; ++v) {
        Mat m(n, p);
        uint64_t w = v;
        for (int k = 0; k < n * n; ++k) {
          m.a[static_cast<std::size_t>(k)] = static_cast<int32_t>(w % static_cast<uint64_t>(p));
          w /= static_cast<uint64_t>(p);
        }
        out.push_back(m);
      }
    }
    return out;
  }

  // X_{r-1} runs over g; the form <^{y x^{-1}} A_{r-1} - ^{x^{-1}} A_{r-1}, .> is nonzero off T.
  LemmaResult sum42(const FiberPoint& f) const {
    const int r = G_.r();
    const Mat xi = inverse(f.x);
    const Mat form = Ad(f.y * xi, D_.a(r - 1)) - Ad(xi, D_.a(r - 1), f.x);
    if (form.is_zero()) throw DomainError("case 4.2: linear form vanishes identically");
    RootSum acc = S_.accumulator();
    FiberPoint g = f;
    int terms = 0;
    for (const Mat& E : all_matrices(false)) {
      g.X.back() = E;
      acc.add(S_.psi_exponent(h(g)));
      ++terms;
    }
    return {acc.value(S_.cyc()), terms, true};
  }

  // X_2 += E, X_3 += [E, X_1] over E in g; h moves by <_y E, [xi, _x A_3]>.
  LemmaResult sum43(const FiberPoint& f) const {
    const Mat xi = inverse(f.x), yi = inverse(f.y);
    const Mat ksi = Ad(yi, f.X[0], f.y) - f.X[0] + f.Y[0];
    const Mat a3 = Ad(xi, D_.a(3), f.x);
    if (bracket(ksi, a3).is_zero()) throw DomainError("case 4.3: linear form vanishes identically");
    const int h0 = h(f);
    RootSum acc = S_.accumulator();
    bool ok = true;
    int terms = 0;
    for (const Mat& E : all_matrices(false)) {
      FiberPoint g = f;
      g.X[1] += E;
      g.X[2] += bracket(E, f.X[0]);
      const int hv = h(g);
      const int predicted = ((h0 + pairing(Ad(yi, E, f.y), bracket(ksi, a3))) % G_.p() + G_.p()) % G_.p();
      ok = ok && hv == predicted;
      acc.add(S_.psi_exponent(hv));
      ++terms;
    }
    return {acc.value(S_.cyc()), terms, ok};
  }

  // x -> v x for v in U(F_p).
  LemmaResult sum44(const FiberPoint& f) const {
    const int n = G_.n(), p = G_.p();
    RootSum acc = S_.accumulator();
    int terms = 0;
    const Mat c0 = f.x * f.y * inverse(f.x);
    for (const Mat& nil : all_matrices(true)) {
      const Mat v = Mat::identity(n, p) + nil;
      FiberPoint g = f;
      g.x = v * f.x;
      const Mat c = g.x * g.y * inverse(g.x);
      if (!c.is_upper() || diag_part(c) != diag_part(c0))
        throw DomainError("case 4.4: U-action left the stratum");
      acc.add(S_.psi_exponent(h(g)));
      ++terms;
    }
    return {acc.value(S_.cyc()), terms, true};
  }

  // Left multiplication by |_xE, _xE', _xE''|, E, E', E'' in n; sum over E.
  LemmaResult sum45(const FiberPoint& f, const FiberSpec& s) const {
    const int p = G_.p();
    const Mat xi = inverse(f.x);
    const Mat S = u(f)[1];
    const Mat a3 = Ad(xi, D_.a(3), f.x);
    const auto nil = all_matrices(true);
    SplitMix64 rng(static_cast<uint64_t>(h(f)) * 7919u + static_cast<uint64_t>(S.a[2]));
    const Mat Ep = Ad(xi, nil[static_cast<std::size_t>(rng.uniform(static_cast<int>(nil.size())))], f.x);
    const Mat Epp = Ad(xi, nil[static_cast<std::size_t>(rng.uniform(static_cast<int>(nil.size())))], f.x);
    const long long half = fp_inv(2, p), third = fp_inv(3, p), sixth = fp_inv(6, p);
    auto act = [&](const Mat& E) {
      FiberPoint g = f;
      const Mat& X1 = f.X[0];
      g.X[0] = X1 + E;
      g.X[1] = f.X[1] + Ep + half * bracket(E, X1);
      g.X[2] = f.X[2] + Epp + bracket(Ep, X1) - sixth * bracket(E, bracket(E, X1)) -
               third * bracket(X1, bracket(E, X1));
      return g;
    };
    const int c = h(act(Mat(G_.n(), p)));
    bool ok = true;
    RootSum acc = S_.accumulator();
    int terms = 0;
    bool nonconstant = false;
    for (const Mat& e : nil) {
      const Mat E = Ad(xi, e, f.x);
      const FiberPoint g = act(E);
      ok = ok && in_stratum(s, g);
      const int hv = h(g);
      const int predicted = ((c + pairing(S, bracket(a3, E))) % p + p) % p;
      ok = ok && hv == predicted;
      nonconstant = nonconstant || hv != c;
      acc.add(S_.psi_exponent(hv));
      ++terms;
    }
    if (!nonconstant && ok) throw DomainError("case 4.5: linear form vanishes identically");
    return {acc.value(S_.cyc()), terms, ok};
  }

  const GroupCtx& G_;
  GenericDatum D_;
  Scalars S_;
};

}  // namespace epschar
