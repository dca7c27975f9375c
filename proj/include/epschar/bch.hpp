#pragma once
// Universal graded BCH polynomials z_i, u_i, u'_i in a truncated free
// associative algebra over Q, their Lyndon-basis normal form, and a compiled
// evaluator into gl_n(F_p).

#include <boost/rational.hpp>

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "epschar/error.hpp"
#include "epschar/liealg.hpp"

namespace epschar::bch {

using Rational = boost::rational<int64_t>;

/// Symbol families: X_i, Y_i and X'_i, each of weight i.
enum class Family : uint8_t { X = 0, Y = 1, Xp = 2 };

inline constexpr int kMaxWeight = 5;
inline constexpr int kMaxR = kMaxWeight + 1;

using Symbol = uint8_t;
inline constexpr Symbol symbol(Family f, int index) {
  return static_cast<Symbol>(static_cast<int>(f) * 8 + index);
}
inline Family family_of(Symbol s) { return static_cast<Family>(s / 8); }
inline int index_of(Symbol s) { return s % 8; }
inline std::string symbol_name(Symbol s) {
  static const char* prefix[] = {"X", "Y", "X'"};
  return std::string(prefix[s / 8]) + std::to_string(s % 8);
}

using Word = std::vector<Symbol>;

inline int weight(const Word& w) {
  int s = 0;
  for (Symbol c : w) s += index_of(c);
  return s;
}

/// Element of the free associative algebra truncated above weight W.
class Series {
 public:
  explicit Series(int max_weight = kMaxWeight) : W_(max_weight) {}

  static Series one(int W) {
    Series s(W);
    s.terms_[Word{}] = 1;
    return s;
  }
  static Series sym(int W, Symbol c, Rational coef = 1) {
    Series s(W);
    if (index_of(c) <= W) s.terms_.emplace(Word(1, c), coef);  // the map is empty here
    return s;
  }

  int max_weight() const noexcept { return W_; }
  const std::map<Word, Rational>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  Rational coeff(const Word& w) const {
    auto it = terms_.find(w);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  void add(const Word& w, Rational c) {
    if (c.numerator() == 0 || weight(w) > W_) return;
    auto [it, inserted] = terms_.try_emplace(w, c);
    if (!inserted) {
      it->second += c;
      if (it->second.numerator() == 0) terms_.erase(it);
    }
  }

  Series& operator+=(const Series& o) {
    for (const auto& [w, c] : o.terms_) add(w, c);
    return *this;
  }
  Series& operator-=(const Series& o) {
    for (const auto& [w, c] : o.terms_) add(w, -c);
    return *this;
  }
  Series& operator*=(Rational c) {
    if (c.numerator() == 0) {
      terms_.clear();
      return *this;
    }
    for (auto& [w, v] : terms_) v *= c;
    return *this;
  }
  friend Series operator+(Series a, const Series& b) { return a += b; }
  friend Series operator-(Series a, const Series& b) { return a -= b; }
  friend Series operator*(Rational c, Series a) { return a *= c; }
  Series operator-() const { return Rational(-1) * *this; }

  friend Series operator*(const Series& a, const Series& b) {
    Series r(std::min(a.W_, b.W_));
    for (const auto& [wa, ca] : a.terms_) {
      const int ka = weight(wa);
      for (const auto& [wb, cb] : b.terms_) {
        if (ka + weight(wb) > r.W_) continue;
        Word w = wa;
        w.insert(w.end(), wb.begin(), wb.end());
        r.add(w, ca * cb);
      }
    }
    return r;
  }

  friend bool operator==(const Series& a, const Series& b) { return a.terms_ == b.terms_; }

  Rational constant() const { return coeff(Word{}); }

  /// Weight-k homogeneous component.
  Series component(int k) const {
    Series r(W_);
    for (const auto& [w, c] : terms_)
      if (weight(w) == k) r.terms_[w] = c;
    return r;
  }

  /// Largest index of a symbol appearing anywhere.
  int max_index() const {
    int m = 0;
    for (const auto& [w, c] : terms_)
      for (Symbol s : w) m = std::max(m, index_of(s));
    return m;
  }

  std::string str() const {
    std::string s;
    for (const auto& [w, c] : terms_) {
      if (!s.empty()) s += " + ";
      s += "(" + std::to_string(c.numerator()) + "/" + std::to_string(c.denominator()) + ")";
      for (Symbol x : w) s += symbol_name(x);
    }
    return s.empty() ? "0" : s;
  }

 private:
  int W_;
  std::map<Word, Rational> terms_;
};

/// exp(s) for s with zero constant term.
inline Series exp(const Series& s) {
  if (s.constant() != Rational(0)) throw DomainError("exp: nonzero constant term");
  const int W = s.max_weight();
  Series result = Series::one(W);
  Series power = Series::one(W);
  for (int k = 1; k <= W; ++k) {
    power = power * s;
    if (power.is_zero()) break;
    Rational inv_fact(1);
    for (int i = 2; i <= k; ++i) inv_fact /= i;
    result += inv_fact * power;
  }
  return result;
}

/// log(s) for s with constant term 1.
inline Series log(const Series& s) {
  if (s.constant() != Rational(1)) throw DomainError("log: constant term must be 1");
  const int W = s.max_weight();
  Series t = s - Series::one(W);
  Series result(W);
  Series power = Series::one(W);
  for (int k = 1; k <= W; ++k) {
    power = power * t;
    if (power.is_zero()) break;
    result += Rational(k % 2 == 1 ? 1 : -1, k) * power;
  }
  return result;
}

/// Product of exp(eps^i S_i) over i = 1..W in increasing order, with symbols of family f.
inline Series exp_chain(Family f, int W, bool inverse = false) {
  Series r = Series::one(W);
  if (!inverse) {
    for (int i = 1; i <= W; ++i) r = r * exp(Series::sym(W, symbol(f, i)));
  } else {
    for (int i = W; i >= 1; --i) r = r * exp(Series::sym(W, symbol(f, i), -1));
  }
  return r;
}

/// Peel P = e^{c_1} e^{c_2} ... (c_i of weight i), left to right.
inline std::vector<Series> peel(Series P) {
  const int W = P.max_weight();
  std::vector<Series> out;
  for (int i = 1; i <= W; ++i) {
    const Series c = log(P).component(i);
    out.push_back(c);
    P = exp(-c) * P;
  }
  return out;
}

// ---------------------------------------------------------------- Lie test

/// Friedrichs criterion: s is primitive under the shuffle coproduct.
inline bool is_lie(const Series& s) {
  if (s.constant() != Rational(0)) return false;
  std::map<std::pair<Word, Word>, Rational> delta;
  for (const auto& [w, c] : s.terms()) {
    const std::size_t len = w.size();
    for (uint32_t mask = 1; mask + 1 < (1u << len); ++mask) {
      Word a, b;
      for (std::size_t k = 0; k < len; ++k) ((mask >> k) & 1u ? a : b).push_back(w[k]);
      auto [it, ins] = delta.try_emplace({a, b}, c);
      if (!ins) {
        it->second += c;
        if (it->second.numerator() == 0) delta.erase(it);
      }
    }
  }
  return delta.empty();
}

// ---------------------------------------------------------- Lyndon basis

inline bool is_lyndon(const Word& w) {
  if (w.empty()) return false;
  for (std::size_t k = 1; k < w.size(); ++k) {
    Word suffix(w.begin() + static_cast<std::ptrdiff_t>(k), w.end());
    if (!(w < suffix)) return false;
  }
  return true;
}

/// Bracket tree: a leaf symbol or [left, right].
struct Bracket {
  Symbol leaf = 0;
  std::vector<Bracket> kids;  // empty or exactly two
  bool is_leaf() const noexcept { return kids.empty(); }

  static Bracket sym(Symbol s) { return Bracket{s, {}}; }
  static Bracket of(Bracket a, Bracket b) {
    Bracket r;
    r.kids.push_back(std::move(a));
    r.kids.push_back(std::move(b));
    return r;
  }
  std::string str() const {
    if (is_leaf()) return symbol_name(leaf);
    return "[" + kids[0].str() + "," + kids[1].str() + "]";
  }
};

/// Standard bracketing of a Lyndon word: w = uv with v the longest proper
/// Lyndon suffix.
inline Bracket standard_bracket(const Word& w) {
  if (w.size() == 1) return Bracket::sym(w[0]);
  for (std::size_t k = 1; k < w.size(); ++k) {
    Word v(w.begin() + static_cast<std::ptrdiff_t>(k), w.end());
    if (is_lyndon(v)) {
      Word u(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(k));
      return Bracket::of(standard_bracket(u), standard_bracket(v));
    }
  }
  throw DomainError("standard_bracket: not a Lyndon word");
}

inline Series expand(const Bracket& b, int W) {
  if (b.is_leaf()) return Series::sym(W, b.leaf);
  const Series l = expand(b.kids[0], W), r = expand(b.kids[1], W);
  return l * r - r * l;
}

/// A Lie polynomial as a rational combination of Lyndon basis elements.
struct LiePoly {
  std::vector<std::pair<Rational, Word>> terms;  // Lyndon words, increasing

  std::string str() const {
    std::string s;
    for (const auto& [c, w] : terms) {
      if (!s.empty()) s += " + ";
      s += "(" + std::to_string(c.numerator());
      if (c.denominator() != 1) s += "/" + std::to_string(c.denominator());
      s += ")" + standard_bracket(w).str();
    }
    return s.empty() ? "0" : s;
  }
  friend bool operator==(const LiePoly& a, const LiePoly& b) { return a.terms == b.terms; }
};

/// Lyndon-basis coordinates of a Lie element; throws when s is not Lie.
inline LiePoly lyndon_decompose(Series s) {
  LiePoly out;
  std::map<Word, Rational> coeffs;
  while (!s.is_zero()) {
    const auto& [w, c] = *s.terms().begin();
    if (!is_lyndon(w)) throw DomainError("lyndon_decompose: not a Lie element");
    const Word word = w;
    const Rational coef = c;
    coeffs[word] += coef;
    s -= coef * expand(standard_bracket(word), s.max_weight());
  }
  for (const auto& [w, c] : coeffs)
    if (c.numerator() != 0) out.terms.push_back({c, w});
  return out;
}

inline Series to_series(const LiePoly& l, int W) {
  Series s(W);
  for (const auto& [c, w] : l.terms) s += c * expand(standard_bracket(w), W);
  return s;
}

// ---------------------------------------------------------------- tables

/// z_i, u_i and u'_i for i = 1..r-1 (stored at index i-1).
struct Tables {
  int r = 0;
  std::vector<Series> z;
  std::vector<Series> u;
  std::vector<Series> uprime;
};

inline void check_r(int r) {
  if (r < 2 || r > kMaxR) throw ConfigError("bch: r must lie in [2, 6], got " + std::to_string(r));
}

/// (e^{eps X_1} e^{eps^2 X_2} ...)(e^{eps Y_1} ...) = e^{eps z_1} e^{eps^2 z_2} ...
inline std::vector<Series> bch_z(int r) {
  check_r(r);
  const int W = r - 1;
  return peel(exp_chain(Family::X, W) * exp_chain(Family::Y, W));
}

/// (e^{eps X'_1} ...)(e^{eps Y_1} ...)(e^{eps X_1} ...)^{-1} = e^{eps u_1} ...
inline std::vector<Series> bch_u(int r) {
  check_r(r);
  const int W = r - 1;
  return peel(exp_chain(Family::Xp, W) * exp_chain(Family::Y, W) * exp_chain(Family::X, W, true));
}

inline Tables tables(int r) {
  Tables t;
  t.r = r;
  t.z = bch_z(r);
  t.u = bch_u(r);
  const int W = r - 1;
  for (int i = 1; i <= W; ++i) {
    Series lin = Series::sym(W, symbol(Family::Xp, i)) - Series::sym(W, symbol(Family::X, i)) +
                 Series::sym(W, symbol(Family::Y, i));
    t.uprime.push_back(t.u[static_cast<std::size_t>(i - 1)] - lin);
  }
  return t;
}

// ------------------------------------------------------------- evaluator

/// A set of Lie polynomials compiled into a shared bracket DAG over F_p.
class Compiled {
 public:
  struct Node {
    int left = -1;   // -1 for a leaf
    int right = -1;
    Symbol sym = 0;
    uint32_t deps = 0;  // bitmask over symbol ids
  };
  struct Term {
    int coef;  // mod p
    int node;
  };

  Compiled(int p, const std::vector<LiePoly>& polys) : p_(p) {
    for (const auto& poly : polys) {
      std::vector<Term> terms;
      for (const auto& [c, w] : poly.terms) {
        const int64_t den = c.denominator() % p;
        if (den == 0) throw ConfigError("bch: coefficient denominator divisible by p (p < r?)");
        const int64_t num = ((c.numerator() % p) + p) % p;
        const int coef = static_cast<int>(num * fp_inv(static_cast<int>(den), p) % p);
        if (coef != 0) terms.push_back({coef, node_for(w)});
      }
      outputs_.push_back(std::move(terms));
    }
  }

  int p() const noexcept { return p_; }
  std::size_t size() const noexcept { return outputs_.size(); }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<std::vector<Term>>& outputs() const noexcept { return outputs_; }

  /// Symbol assignment: values[s] for symbol id s (size >= 32).
  using Assignment = std::array<Mat, 32>;

  /// Evaluate every node; only nodes whose dependency mask meets
  /// `recompute_mask` are recomputed when `partial` is true.
  void eval_nodes(const Assignment& a, std::vector<Mat>& vals, bool partial = false,
                  uint32_t recompute_mask = 0) const {
    vals.resize(nodes_.size());
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
      const Node& nd = nodes_[k];
      if (partial && (nd.deps & recompute_mask) == 0) continue;
      if (nd.left < 0) vals[k] = a[nd.sym];
      else vals[k] = bracket(vals[static_cast<std::size_t>(nd.left)], vals[static_cast<std::size_t>(nd.right)]);
    }
  }

  Mat combine(std::size_t out, const std::vector<Mat>& vals, int n) const {
    Mat r(n, p_);
    for (const auto& t : outputs_[out]) {
      const Mat& v = vals[static_cast<std::size_t>(t.node)];
      for (int k = 0; k < n * n; ++k)
        r.a[static_cast<std::size_t>(k)] = (r.a[static_cast<std::size_t>(k)] + t.coef * v.a[static_cast<std::size_t>(k)]) % p_;
    }
    return r;
  }

  std::vector<Mat> eval(const Assignment& a, int n) const {
    std::vector<Mat> vals;
    eval_nodes(a, vals);
    std::vector<Mat> out;
    for (std::size_t i = 0; i < outputs_.size(); ++i) out.push_back(combine(i, vals, n));
    return out;
  }

 private:
  int node_for(const Word& w) {
    auto it = memo_.find(w);
    if (it != memo_.end()) return it->second;
    Node nd;
    if (w.size() == 1) {
      nd.sym = w[0];
      nd.deps = 1u << w[0];
    } else {
      // standard factorization w = u v
      std::size_t k = 1;
      for (; k < w.size(); ++k)
        if (is_lyndon(Word(w.begin() + static_cast<std::ptrdiff_t>(k), w.end()))) break;
      nd.left = node_for(Word(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(k)));
      nd.right = node_for(Word(w.begin() + static_cast<std::ptrdiff_t>(k), w.end()));
      nd.deps = nodes_[static_cast<std::size_t>(nd.left)].deps | nodes_[static_cast<std::size_t>(nd.right)].deps;
    }
    nodes_.push_back(nd);
    const int id = static_cast<int>(nodes_.size()) - 1;
    memo_[w] = id;
    return id;
  }

  int p_;
  std::vector<Node> nodes_;
  std::vector<std::vector<Term>> outputs_;
  std::map<Word, int> memo_;
};

/// Lie polynomials u_1..u_{r-1} and z_1..z_{r-1} in Lyndon form, cached per r.
struct LieTables {
  int r = 0;
  std::vector<LiePoly> z;
  std::vector<LiePoly> u;
  std::vector<LiePoly> uprime;
};

inline const LieTables& lie_tables(int r) {
  check_r(r);
  static std::mutex mu;
  static std::map<int, LieTables> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(r);
  if (it != cache.end()) return it->second;
  const Tables t = tables(r);
  LieTables lt;
  lt.r = r;
  for (const auto& s : t.z) lt.z.push_back(lyndon_decompose(s));
  for (const auto& s : t.u) lt.u.push_back(lyndon_decompose(s));
  for (const auto& s : t.uprime) lt.uprime.push_back(lyndon_decompose(s));
  return cache.emplace(r, std::move(lt)).first->second;
}

}  // namespace epschar::bch
