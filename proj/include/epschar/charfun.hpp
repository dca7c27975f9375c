#pragma once
// Class functions on G_r(F_p): the lifted torus character, the induced
// character t_L, and exact fiber sums for t_K, the ladder t_{L_i} and the
// pieces between consecutive ladder varieties.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "epschar/bch.hpp"
#include "epschar/error.hpp"
#include "epschar/fp_linalg.hpp"
#include "epschar/grgroup.hpp"
#include "epschar/liealg.hpp"
#include "epschar/rng.hpp"
#include "epschar/scalars.hpp"

namespace epschar {

/// A_1..A_{r-1} (diagonal, A_{r-1} regular) and the exponents of lambda_0.
struct GenericDatum {
  int n = 2;
  int p = 3;
  int r = 2;
  std::vector<Mat> A;  // A[j-1] = A_j
  std::vector<int> lambda0;

  const Mat& a(int j) const { return A.at(static_cast<std::size_t>(j - 1)); }

  /// Throws ConfigError on a malformed datum; `require_regular` may be
  /// dropped for degenerate baselines.
  void validate(bool require_regular = true) const {
    if (static_cast<int>(lambda0.size()) != n) throw ConfigError("lambda0 must have n entries");
    if (static_cast<int>(A.size()) != std::max(r - 1, 0))
      throw ConfigError("expected " + std::to_string(r - 1) + " matrices A_j, got " + std::to_string(A.size()));
    for (std::size_t j = 0; j < A.size(); ++j) {
      if (A[j].n != n || A[j].p != p) throw ConfigError("A_" + std::to_string(j + 1) + " has the wrong shape");
      if (!A[j].is_diagonal()) throw ConfigError("A_" + std::to_string(j + 1) + " is not diagonal");
    }
    if (require_regular && r >= 2) {
      const Mat& top = A.back();
      for (int i = 0; i < n; ++i)
        for (int k = i + 1; k < n; ++k)
          if (top(i, i) == top(k, k))
            throw ConfigError("A_" + std::to_string(r - 1) + " not regular semisimple: entries " +
                              std::to_string(top(i, i)) + "," + std::to_string(top(k, k)) + " collide");
    }
  }
};

inline GenericDatum make_datum(int n, int p, int r, const std::vector<std::vector<int>>& diags,
                               std::vector<int> lambda0) {
  GenericDatum d{n, p, r, {}, std::move(lambda0)};
  for (const auto& v : diags) {
    if (static_cast<int>(v.size()) != n) throw ConfigError("diagonal of A_j must have n entries");
    d.A.push_back(Mat::diag(p, v));
  }
  return d;
}

/// Values indexed by group elements: the full group or an explicit sample.
struct ClassFunction {
  std::string name;
  bool full_domain = false;
  std::vector<ElementIndex> index;
  std::vector<CycValue> value;

  std::optional<CycValue> at(ElementIndex idx) const {
    auto it = std::lower_bound(index.begin(), index.end(), idx);
    if (it == index.end() || *it != idx) return std::nullopt;
    return value[static_cast<std::size_t>(it - index.begin())];
  }
};

/// Variety conditions. Torus: where x y x^{-1} lies. Per u_j: membership of
/// u_j in _x t or _x b, or its negation.
enum class TorusCond { T, B, BminusT };
enum class UCond { None, InT, InB, NotB, InBNotT };

struct FiberSpec {
  std::string name;
  TorusCond torus = TorusCond::T;
  std::vector<UCond> u;  // u[j-1]
};

inline int lower_block(int r) { return r - r / 2; }  // m = r - r'

/// The variety of K: xyx^{-1} in T, u_j in _x t for j <= r'-1, u_{r'} in _x b for odd r.
inline FiberSpec spec_K(int r) {
  FiberSpec s{"K", TorusCond::T, std::vector<UCond>(static_cast<std::size_t>(r - 1), UCond::None)};
  const int rp = r / 2;
  for (int j = 1; j <= rp - 1; ++j) s.u[static_cast<std::size_t>(j - 1)] = UCond::InT;
  if (r % 2 == 1 && rp >= 1) s.u[static_cast<std::size_t>(rp - 1)] = UCond::InB;
  return s;
}

/// Ladder variety X_i, r - 2r' <= i <= r.
inline FiberSpec spec_ladder(int r, int i) {
  const int rp = r / 2, m = lower_block(r);
  if (i < r - 2 * rp || i > r) throw DomainError("ladder index " + std::to_string(i) + " out of range");
  FiberSpec s{"L" + std::to_string(i), TorusCond::B, std::vector<UCond>(static_cast<std::size_t>(r - 1), UCond::None)};
  if (i >= m) {
    for (int j = 1; j <= i - 1; ++j) s.u[static_cast<std::size_t>(j - 1)] = UCond::InB;
  } else {
    s.torus = TorusCond::T;
    for (int j = 1; j <= m - i - 1; ++j) s.u[static_cast<std::size_t>(j - 1)] = UCond::InT;
    for (int j = m - i; j <= m - 1; ++j) s.u[static_cast<std::size_t>(j - 1)] = UCond::InB;
  }
  return s;
}

/// X_i - X_{i+1} for m <= i <= r-1.
inline FiberSpec spec_piece_down(int r, int i) {
  const int m = lower_block(r);
  if (i < m || i > r - 1) throw DomainError("piece X_i - X_{i+1}: i out of range");
  FiberSpec s = spec_ladder(r, i);
  s.name = "X" + std::to_string(i) + "-X" + std::to_string(i + 1);
  s.u[static_cast<std::size_t>(i - 1)] = UCond::NotB;
  return s;
}

/// X_i - X_{i-1} for r - 2r' + 1 <= i <= m.
inline FiberSpec spec_piece_up(int r, int i) {
  const int rp = r / 2, m = lower_block(r);
  if (i < r - 2 * rp + 1 || i > m) throw DomainError("piece X_i - X_{i-1}: i out of range");
  FiberSpec s = spec_ladder(r, i);
  s.name = "X" + std::to_string(i) + "-X" + std::to_string(i - 1);
  if (i == m) {
    s.torus = TorusCond::BminusT;
  } else {
    s.u[static_cast<std::size_t>(m - i - 1)] = UCond::InBNotT;
  }
  return s;
}

namespace detail {

/// sum_{v : M v = b} psi(h0 + l.v) as (exponent of p, value of h) or nullopt when zero.
struct AffineResult {
  int log_mult;
  int hval;
};

inline std::optional<AffineResult> affine_sum(int p, int cols, std::vector<std::vector<int>>& rows,
                                              const std::vector<int>& l, int h0) {
  // rows carry cols coefficients followed by the right-hand side
  const int nr = static_cast<int>(rows.size());
  std::vector<int> pivots;
  int row = 0;
  for (int col = 0; col < cols && row < nr; ++col) {
    int piv = -1;
    for (int i = row; i < nr; ++i)
      if (rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(col)] != 0) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    std::swap(rows[static_cast<std::size_t>(piv)], rows[static_cast<std::size_t>(row)]);
    auto& pr = rows[static_cast<std::size_t>(row)];
    const int inv = fp_inv(pr[static_cast<std::size_t>(col)], p);
    for (auto& v : pr) v = v * inv % p;
    for (int i = 0; i < nr; ++i) {
      if (i == row) continue;
      auto& ri = rows[static_cast<std::size_t>(i)];
      const int f = ri[static_cast<std::size_t>(col)];
      if (f == 0) continue;
      for (int k = 0; k <= cols; ++k)
        ri[static_cast<std::size_t>(k)] = ((ri[static_cast<std::size_t>(k)] - f * pr[static_cast<std::size_t>(k)]) % p + p) % p;
    }
    pivots.push_back(col);
    ++row;
  }
  for (int i = row; i < nr; ++i)
    if (rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(cols)] != 0) return std::nullopt;
  // l must vanish on the kernel: for each free column f, l_f - sum_i l_{piv_i} m_{i,f} = 0
  std::vector<char> is_piv(static_cast<std::size_t>(cols), 0);
  for (int c : pivots) is_piv[static_cast<std::size_t>(c)] = 1;
  for (int f = 0; f < cols; ++f) {
    if (is_piv[static_cast<std::size_t>(f)]) continue;
    long long s = l[static_cast<std::size_t>(f)];
    for (std::size_t i = 0; i < pivots.size(); ++i)
      s -= static_cast<long long>(l[static_cast<std::size_t>(pivots[i])]) * rows[i][static_cast<std::size_t>(f)];
    if (((s % p) + p) % p != 0) return std::nullopt;
  }
  long long h = h0;
  for (std::size_t i = 0; i < pivots.size(); ++i)
    h += static_cast<long long>(l[static_cast<std::size_t>(pivots[i])]) * rows[i][static_cast<std::size_t>(cols)];
  return AffineResult{cols - static_cast<int>(pivots.size()), static_cast<int>(((h % p) + p) % p)};
}

inline std::vector<std::pair<int, int>> entries_strict_lower(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) e.push_back({i, j});
  return e;
}
inline std::vector<std::pair<int, int>> entries_strict_upper(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.push_back({i, j});
  return e;
}

inline bool holds(UCond c, const Mat& w) {
  switch (c) {
    case UCond::None: return true;
    case UCond::InT: return w.is_diagonal();
    case UCond::InB: return w.is_upper();
    case UCond::NotB: return !w.is_upper();
    case UCond::InBNotT: return w.is_upper() && !w.is_diagonal();
  }
  return false;
}

inline bool holds(TorusCond c, bool in_t, bool in_b) {
  switch (c) {
    case TorusCond::T: return in_t;
    case TorusCond::B: return in_b;
    case TorusCond::BminusT: return in_b && !in_t;
  }
  return false;
}

}  // namespace detail

/// Exact fiber sums over the varieties above. For fixed (Tx, X_1..X_{m-1})
/// every u_j and h are affine in the top block X_m..X_{r-1}; that block is
/// summed in closed form (Mode::Eliminate) or enumerated (Mode::Brute).
class FiberEngine {
 public:
  enum class Mode { Eliminate, Brute };

  FiberEngine(const GroupCtx& G, const GenericDatum& D) : G_(G), D_(D), S_(G.p()) {
    if (D.n != G.n() || D.p != G.p() || D.r != G.r()) throw ConfigError("datum does not match the group");
    if (G.r() < 2) throw ConfigError("fiber sums need r >= 2");
  }

  const Scalars& scalars() const noexcept { return S_; }

  /// For each spec: sum over the fiber above g' of psi(h) * lambda_0(d(x y x^{-1})).
  std::vector<RootSum> run(const Factored& g, const std::vector<FiberSpec>& specs, Mode mode = Mode::Eliminate) const {
    return core(g.x, &g.X, nullptr, specs, mode);
  }

  /// Transform of t_K at y|R_1..R_{r-1}|: the Y_j become summation variables
  /// with the kernel psi(sum <Y_j, R_j>).
  RootSum run_dual(const Mat& y, const std::vector<Mat>& R, Mode mode = Mode::Eliminate) const {
    return core(y, nullptr, &R, {spec_K(G_.r())}, mode).front();
  }

 private:
  using Assignment = bch::Compiled::Assignment;

  std::vector<RootSum> core(const Mat& y, const std::vector<Mat>* Yfixed, const std::vector<Mat>* R,
                            const std::vector<FiberSpec>& specs, Mode mode) const {
    const int n = G_.n(), p = G_.p(), r = G_.r(), m = lower_block(r), nn = n * n;
    const bool dual = R != nullptr;
    const bch::Compiled& U = G_.u_poly();
    const Mat yi = inverse(y);
    std::vector<RootSum> out(specs.size(), S_.accumulator());

    // Top symbols: X_m..X_{r-1} (and Y_m..Y_{r-1} in dual mode).
    struct TopSym {
      bch::Symbol sym;
      int k;
      bool is_x;
    };
    std::vector<TopSym> top;
    uint32_t top_mask = 0;
    for (int k = m; k < r; ++k) {
      top.push_back({bch::symbol(bch::Family::X, k), k, true});
      top_mask |= 1u << bch::symbol(bch::Family::X, k);
      top_mask |= 1u << bch::symbol(bch::Family::Xp, k);
    }
    if (dual)
      for (int k = m; k < r; ++k) {
        top.push_back({bch::symbol(bch::Family::Y, k), k, false});
        top_mask |= 1u << bch::symbol(bch::Family::Y, k);
      }
    const int D = static_cast<int>(top.size()) * nn;

    const auto lower_entries = detail::entries_strict_lower(n);
    const auto upper_entries = detail::entries_strict_upper(n);

    Assignment as;
    as.fill(Mat(n, p));
    if (!dual)
      for (int k = 1; k < r; ++k) as[bch::symbol(bch::Family::Y, k)] = (*Yfixed)[static_cast<std::size_t>(k - 1)];

    std::vector<Mat> vals0, vals;
    std::vector<Mat> W0(static_cast<std::size_t>(r - 1)), W(static_cast<std::size_t>(r - 1));
    // dW[k][j]: change of W_j along top coordinate k
    std::vector<std::vector<Mat>> dW(static_cast<std::size_t>(D), std::vector<Mat>(static_cast<std::size_t>(r - 1)));
    std::vector<int> lin(static_cast<std::size_t>(D));

    for (const Mat& x : G_.torus_coset_reps()) {
      const Mat xi = inverse(x);
      const Mat c = x * y * xi;
      const bool in_t = c.is_diagonal(), in_b = c.is_upper();
      std::vector<char> alive(specs.size());
      bool any = false;
      for (std::size_t s = 0; s < specs.size(); ++s) {
        alive[s] = detail::holds(specs[s].torus, in_t, in_b);
        any = any || alive[s];
      }
      if (!any) continue;
      const int lam = S_.lambda0_exponent(D_.lambda0, diag_part(c).diagonal());

      // Lower parameters: X_1..X_{m-1}; in dual mode also S_j (j < m) in _x V_j.
      std::vector<std::vector<Mat>> s_basis;  // per lower j, basis of _x V_j (dual mode)
      if (dual) {
        const FiberSpec& k = specs.front();
        for (int j = 1; j < m; ++j) {
          Subspace v = Subspace::whole(n, p);
          const UCond cj = k.u[static_cast<std::size_t>(j - 1)];
          if (cj == UCond::InT) v = Subspace::torus(n, p);
          else if (cj == UCond::InB) v = Subspace::borel(n, p);
          else if (cj != UCond::None) throw DomainError("dual mode supports only membership conditions");
          std::vector<Mat> b;
          for (const auto& e : v.basis()) b.push_back(Ad(xi, e, x));
          s_basis.push_back(b);
        }
      }
      int lower_dim = (m - 1) * nn;
      for (const auto& b : s_basis) lower_dim += static_cast<int>(b.size());
      const uint64_t lower_count = GroupCtx::ipow_u(static_cast<uint64_t>(p), lower_dim);

      std::vector<int> digits(static_cast<std::size_t>(lower_dim), 0);
      for (uint64_t lc = 0; lc < lower_count; ++lc) {
        {
          uint64_t v = lc;
          for (auto& d : digits) {
            d = static_cast<int>(v % static_cast<uint64_t>(p));
            v /= static_cast<uint64_t>(p);
          }
        }
        std::size_t pos = 0;
        for (int k = 1; k < m; ++k) {
          Mat X(n, p);
          for (int e = 0; e < nn; ++e) X.a[static_cast<std::size_t>(e)] = digits[pos++];
          as[bch::symbol(bch::Family::X, k)] = X;
          as[bch::symbol(bch::Family::Xp, k)] = Ad(yi, X, y);
        }
        for (const auto& t : top) {
          as[t.sym] = Mat(n, p);
          if (t.is_x) as[bch::symbol(bch::Family::Xp, t.k)] = Mat(n, p);
        }
        long long hextra = 0;
        if (dual) {
          // Y_j = S_j - (u_j with Y_j = 0), solved in increasing j
          for (int j = 1; j < m; ++j) {
            Mat s(n, p);
            for (const auto& b : s_basis[static_cast<std::size_t>(j - 1)]) s += static_cast<long long>(digits[pos++]) * b;
            as[bch::symbol(bch::Family::Y, j)] = Mat(n, p);
            U.eval_nodes(as, vals0);
            const Mat base = U.combine(static_cast<std::size_t>(j - 1), vals0, n);
            const Mat yj = s - base;
            as[bch::symbol(bch::Family::Y, j)] = yj;
            hextra += pairing(yj, (*R)[static_cast<std::size_t>(j - 1)]);
          }
        }
        U.eval_nodes(as, vals0);
        long long h0 = hextra;
        for (int j = 1; j < r; ++j) {
          W0[static_cast<std::size_t>(j - 1)] = Ad(x, U.combine(static_cast<std::size_t>(j - 1), vals0, n), xi);
          h0 += pairing(D_.a(j), W0[static_cast<std::size_t>(j - 1)]);
        }
        // pointwise conditions for j < m
        bool any_spec = false;
        std::vector<char> ok(specs.size());
        for (std::size_t s = 0; s < specs.size(); ++s) {
          ok[s] = alive[s];
          for (int j = 1; j < m && ok[s]; ++j)
            if (!(dual && s == 0) && !detail::holds(specs[s].u[static_cast<std::size_t>(j - 1)], W0[static_cast<std::size_t>(j - 1)]))
              ok[s] = 0;
          any_spec = any_spec || ok[s];
        }
        if (!any_spec) continue;

        if (mode == Mode::Brute) {
          brute_top(as, top, top_mask, x, xi, y, yi, R, specs, ok, hextra, lam, out);
          continue;
        }

        // probe the top block along unit vectors
        vals = vals0;
        for (int k = 0; k < D; ++k) {
          const TopSym& t = top[static_cast<std::size_t>(k / nn)];
          const Mat e = Mat::unit(n, p, (k % nn) / n, (k % nn) % n);
          as[t.sym] = e;
          if (t.is_x) as[bch::symbol(bch::Family::Xp, t.k)] = Ad(yi, e, y);
          U.eval_nodes(as, vals, true, top_mask);
          long long l = 0;
          for (int j = m; j < r; ++j) {
            const Mat wj = Ad(x, U.combine(static_cast<std::size_t>(j - 1), vals, n), xi);
            dW[static_cast<std::size_t>(k)][static_cast<std::size_t>(j - 1)] = wj - W0[static_cast<std::size_t>(j - 1)];
            l += pairing(D_.a(j), dW[static_cast<std::size_t>(k)][static_cast<std::size_t>(j - 1)]);
          }
          if (dual && !t.is_x) l += pairing(e, (*R)[static_cast<std::size_t>(t.k - 1)]);
          lin[static_cast<std::size_t>(k)] = static_cast<int>(((l % p) + p) % p);
          as[t.sym] = Mat(n, p);
          if (t.is_x) as[bch::symbol(bch::Family::Xp, t.k)] = Mat(n, p);
        }
        const int h0n = static_cast<int>(((h0 % p) + p) % p);

        for (std::size_t s = 0; s < specs.size(); ++s) {
          if (!ok[s]) continue;
          // equations from membership conditions on W_j, j >= m
          std::vector<std::vector<int>> rows;
          auto add_row = [&](int j, int a, int b, int rhs) {
            std::vector<int> row(static_cast<std::size_t>(D) + 1);
            for (int k = 0; k < D; ++k) row[static_cast<std::size_t>(k)] = dW[static_cast<std::size_t>(k)][static_cast<std::size_t>(j - 1)](a, b);
            row[static_cast<std::size_t>(D)] = ((rhs - W0[static_cast<std::size_t>(j - 1)](a, b)) % p + p) % p;
            rows.push_back(std::move(row));
          };
          // at most one negated condition; it is stratified by the value of the quotient
          int strat_j = 0;
          const std::vector<std::pair<int, int>>* strat_entries = nullptr;
          for (int j = m; j < r; ++j) {
            const UCond cj = specs[s].u[static_cast<std::size_t>(j - 1)];
            if (cj == UCond::None) continue;
            for (const auto& [a, b] : lower_entries) add_row(j, a, b, 0);
            if (cj == UCond::InT)
              for (const auto& [a, b] : upper_entries) add_row(j, a, b, 0);
            if (cj == UCond::NotB) {
              rows.resize(rows.size() - lower_entries.size());
              if (strat_entries) throw DomainError("at most one negated condition per spec");
              strat_j = j;
              strat_entries = &lower_entries;
            }
            if (cj == UCond::InBNotT) {
              if (strat_entries) throw DomainError("at most one negated condition per spec");
              strat_j = j;
              strat_entries = &upper_entries;
            }
          }
          if (!strat_entries) {
            auto res = detail::affine_sum(p, D, rows, lin, h0n);
            if (res) out[s].add(S_.add_exp(lam, S_.psi_exponent(res->hval)), G_.ipow_u(static_cast<uint64_t>(p), res->log_mult));
            continue;
          }
          const int q = static_cast<int>(strat_entries->size());
          const uint64_t nvals = GroupCtx::ipow_u(static_cast<uint64_t>(p), q);
          for (uint64_t cv = 1; cv < nvals; ++cv) {
            auto sys = rows;
            uint64_t v = cv;
            for (const auto& [a, b] : *strat_entries) {
              std::vector<int> row(static_cast<std::size_t>(D) + 1);
              for (int k = 0; k < D; ++k) row[static_cast<std::size_t>(k)] = dW[static_cast<std::size_t>(k)][static_cast<std::size_t>(strat_j - 1)](a, b);
              const int target = static_cast<int>(v % static_cast<uint64_t>(p));
              v /= static_cast<uint64_t>(p);
              row[static_cast<std::size_t>(D)] = ((target - W0[static_cast<std::size_t>(strat_j - 1)](a, b)) % p + p) % p;
              sys.push_back(std::move(row));
            }
            auto res = detail::affine_sum(p, D, sys, lin, h0n);
            if (res) out[s].add(S_.add_exp(lam, S_.psi_exponent(res->hval)), G_.ipow_u(static_cast<uint64_t>(p), res->log_mult));
          }
        }
      }
    }
    return out;
  }

  template <class TopList>
  void brute_top(Assignment as, const TopList& top, uint32_t top_mask, const Mat& x, const Mat& xi, const Mat& y,
                 const Mat& yi, const std::vector<Mat>* R, const std::vector<FiberSpec>& specs,
                 const std::vector<char>& ok, long long hextra, int lam, std::vector<RootSum>& out) const {
    const int n = G_.n(), p = G_.p(), r = G_.r(), m = lower_block(r), nn = n * n;
    const bch::Compiled& U = G_.u_poly();
    const int D = static_cast<int>(top.size()) * nn;
    const uint64_t count = GroupCtx::ipow_u(static_cast<uint64_t>(p), D);
    std::vector<Mat> vals;
    U.eval_nodes(as, vals);
    for (uint64_t v = 0; v < count; ++v) {
      uint64_t w = v;
      long long h = hextra;
      for (const auto& t : top) {
        Mat e(n, p);
        for (int k = 0; k < nn; ++k) {
          e.a[static_cast<std::size_t>(k)] = static_cast<int32_t>(w % static_cast<uint64_t>(p));
          w /= static_cast<uint64_t>(p);
        }
        as[t.sym] = e;
        if (t.is_x) as[bch::symbol(bch::Family::Xp, t.k)] = Ad(yi, e, y);
        else h += pairing(e, (*R)[static_cast<std::size_t>(t.k - 1)]);
      }
      U.eval_nodes(as, vals, true, top_mask);
      std::vector<Mat> Wv;
      for (int j = 1; j < r; ++j) {
        Wv.push_back(Ad(x, U.combine(static_cast<std::size_t>(j - 1), vals, n), xi));
        h += pairing(D_.a(j), Wv.back());
      }
      for (std::size_t s = 0; s < specs.size(); ++s) {
        if (!ok[s]) continue;
        bool good = true;
        for (int j = m; j < r && good; ++j)
          good = detail::holds(specs[s].u[static_cast<std::size_t>(j - 1)], Wv[static_cast<std::size_t>(j - 1)]);
        if (good) out[s].add(S_.add_exp(lam, S_.psi_exponent(static_cast<int>(((h % p) + p) % p))));
      }
    }
  }

  const GroupCtx& G_;
  const GenericDatum& D_;
  Scalars S_;
};

/// The characters attached to a datum on one group G_r.
class CharCtx {
 public:
  CharCtx(const GroupCtx& G, GenericDatum D, bool require_regular = true)
      : G_(G), D_(std::move(D)), S_(G.p()) {
    D_.validate(require_regular);
    if (D_.n != G.n() || D_.p != G.p() || D_.r != G.r()) throw ConfigError("datum does not match the group");
  }

  const GroupCtx& group() const noexcept { return G_; }
  const GenericDatum& datum() const noexcept { return D_; }
  const Scalars& scalars() const noexcept { return S_; }

  /// Exponent of zeta_N for lambda-tilde(b), b in B_r:
  /// lambda_0(t) psi(sum_j <A_j, tau_j>) with d_r(b) = t|tau_1, ...|.
  int lambda_tilde_exp(const KrMatrix& b) const {
    const Factored f = to_factored(d_r(b));
    long long s = 0;
    for (int j = 1; j < G_.r(); ++j) s += pairing(D_.a(j), f.X[static_cast<std::size_t>(j - 1)]);
    return S_.add_exp(S_.lambda0_exponent(D_.lambda0, f.x.diagonal()), S_.psi_exponent(static_cast<int>(s % G_.p())));
  }
  CycValue lambda_tilde(const KrMatrix& b) const { return S_.root(lambda_tilde_exp(b)); }

  /// t_L(g') = sum over B_r\G_r representatives g with g g' g^{-1} in B_r of lambda-tilde(g g' g^{-1}).
  RootSum t_L_sum(const KrMatrix& gp) const {
    RootSum acc = S_.accumulator();
    for (const auto& [g, gi] : reps()) {
      const KrMatrix c = g * gp * gi;
      if (c.is_upper()) acc.add(lambda_tilde_exp(c));
    }
    return acc;
  }
  CycValue t_L(const KrMatrix& gp) const { return t_L_sum(gp).value(S_.cyc()); }

  /// t_L on every element of G_r by accumulating lambda-tilde(b) at g^{-1} b g
  /// over all pairs (g, b) in G_r x B_r, then dividing by |B_r|.
  ClassFunction t_L_table_pairs(uint64_t budget = kDefaultBudget, bool force = false) const {
    const auto all = G_.enumerate(GroupCtx::Subgroup::G, budget, force);
    const auto borel = G_.enumerate(GroupCtx::Subgroup::B, budget, force);
    G_.check_budget(static_cast<uint64_t>(all.size()) * borel.size(), budget * 64, force);
    std::unordered_map<ElementIndex, std::size_t> pos;
    ClassFunction f{"t_L", true, {}, {}};
    for (std::size_t k = 0; k < all.size(); ++k) {
      f.index.push_back(G_.index(all[k]));
      pos.emplace(f.index.back(), k);
    }
    std::vector<int> lam;
    for (const auto& b : borel) lam.push_back(lambda_tilde_exp(b));
    std::vector<RootSum> acc(all.size(), S_.accumulator());
    for (const auto& g : all) {
      const KrMatrix gi = inverse(g);
      for (std::size_t k = 0; k < borel.size(); ++k)
        acc[pos.at(G_.index(gi * borel[k] * g))].add(lam[k]);
    }
    const auto nb = static_cast<int64_t>(borel.size());
    for (auto& a : acc) {
      auto v = a.value(S_.cyc()).divide_exact(nb);
      if (!v) throw DomainError("t_L_table_pairs: accumulated value not divisible by |B_r|");
      f.value.push_back(*v);
    }
    return f;
  }

  /// t_L on every element of G_r, one coset scan per element.
  ClassFunction t_L_table(uint64_t budget = kDefaultBudget, bool force = false) const {
    ClassFunction f{"t_L", true, {}, {}};
    for (const auto& g : G_.enumerate(GroupCtx::Subgroup::G, budget, force)) {
      f.index.push_back(G_.index(g));
      f.value.push_back(t_L(g));
    }
    return f;
  }

  FiberEngine engine() const { return FiberEngine(G_, D_); }

  CycValue t_K(const Factored& gp) const { return engine().run(gp, {spec_K(G_.r())}).front().value(S_.cyc()); }
  CycValue t_L_i(const Factored& gp, int i) const {
    return engine().run(gp, {spec_ladder(G_.r(), i)}).front().value(S_.cyc());
  }

  ClassFunction t_K_table(uint64_t budget = kDefaultBudget, bool force = false) const {
    ClassFunction f{"t_K", true, {}, {}};
    const FiberEngine e = engine();
    const std::vector<FiberSpec> specs{spec_K(G_.r())};
    for (const auto& g : G_.enumerate(GroupCtx::Subgroup::G, budget, force)) {
      f.index.push_back(G_.index(g));
      f.value.push_back(e.run(to_factored(g), specs).front().value(S_.cyc()));
    }
    return f;
  }

 private:
  const std::vector<std::pair<KrMatrix, KrMatrix>>& reps() const {
    if (reps_.empty())
      for (const auto& g : G_.borel_r_coset_reps()) reps_.push_back({g, inverse(g)});
    return reps_;
  }

  const GroupCtx& G_;
  GenericDatum D_;
  Scalars S_;
  mutable std::vector<std::pair<KrMatrix, KrMatrix>> reps_;
};

/// <f, g> = |G_r|^{-1} sum f conj(g); throws when the sum is not divisible.
inline CycValue inner_product(const ClassFunction& f, const ClassFunction& g, uint64_t order) {
  if (!f.full_domain || !g.full_domain || f.index != g.index) throw DomainError("inner_product: domain mismatch");
  if (f.index.size() != order) throw DomainError("inner_product: table does not cover the group");
  CycValue s = CycValue::zero(f.value.front().ctx());
  for (std::size_t k = 0; k < f.value.size(); ++k) s += f.value[k] * g.value[k].conj();
  auto q = s.divide_exact(static_cast<int64_t>(order));
  if (!q) throw DomainError("inner_product: sum " + s.str() + " is not divisible by |G_r|");
  return *q;
}

/// Deterministic sample: identity, T(F_p) with zero eps-part, then random
/// elements, every other one conjugate into T mod eps.
inline std::vector<Factored> sample_elements(const GroupCtx& G, std::size_t count, uint64_t seed) {
  std::vector<Factored> out;
  const std::vector<Mat> zero(static_cast<std::size_t>(G.r() - 1), Mat(G.n(), G.p()));
  out.push_back({Mat::identity(G.n(), G.p()), zero});
  for (const auto& t : G.torus_elements())
    if (t != Mat::identity(G.n(), G.p())) out.push_back({t, zero});
  SplitMix64 rng(seed);
  bool conj = true;
  while (out.size() < count) {
    Factored f = G.random_factored(rng);
    if (conj) {
      const Mat g = G.random_gl(rng);
      f.x = inverse(g) * G.random_torus(rng) * g;
    }
    conj = !conj;
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace epschar
