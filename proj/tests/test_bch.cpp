#include <gtest/gtest.h>

#include "epschar/bch.hpp"
#include "epschar/grgroup.hpp"
#include "epschar/rng.hpp"

using namespace epschar;
using namespace epschar::bch;

namespace {

constexpr int W = 3;

Series X(int i) { return Series::sym(W, symbol(Family::X, i)); }
Series Y(int i) { return Series::sym(W, symbol(Family::Y, i)); }
Series Xp(int i) { return Series::sym(W, symbol(Family::Xp, i)); }
Series br(const Series& a, const Series& b) { return a * b - b * a; }
Rational q(int a, int b) { return Rational(a, b); }

}  // namespace

TEST(Bch, ZGoldenDisplays) {
  const auto z = bch_z(4);
  ASSERT_EQ(z.size(), 3u);
  EXPECT_EQ(z[0], X(1) + Y(1));
  EXPECT_EQ(z[1], X(2) + Y(2) + q(1, 2) * br(X(1), Y(1)));
  EXPECT_EQ(z[2], X(3) + Y(3) + br(X(2), Y(1)) - q(1, 6) * br(X(1), br(X(1), Y(1))) -
                      q(1, 3) * br(Y(1), br(X(1), Y(1))));
}

TEST(Bch, UGoldenDisplays) {
  const auto u = bch_u(4);
  ASSERT_EQ(u.size(), 3u);
  EXPECT_EQ(u[0], Xp(1) - X(1) + Y(1));
  EXPECT_EQ(u[1], Xp(2) - X(2) + Y(2) + q(1, 2) * br(Xp(1), Y(1)) - q(1, 2) * br(Xp(1), X(1)) -
                      q(1, 2) * br(Y(1), X(1)));
  const Series u3 = Xp(3) - X(3) + Y(3) + br(Xp(2), Y(1)) + br(X(2), X(1)) - br(Xp(2), X(1)) - br(Y(2), X(1)) -
                    q(1, 6) * br(Xp(1), br(Xp(1), Y(1))) - q(1, 3) * br(Y(1), br(Xp(1), Y(1))) +
                    q(1, 2) * br(X(1), br(Xp(1), Y(1))) + q(1, 6) * br(Xp(1), br(Xp(1), X(1))) +
                    q(1, 6) * br(Xp(1), br(Y(1), X(1))) + q(1, 6) * br(Y(1), br(Xp(1), X(1))) +
                    q(1, 6) * br(Y(1), br(Y(1), X(1))) - q(1, 3) * br(X(1), br(Xp(1), X(1))) -
                    q(1, 3) * br(X(1), br(Y(1), X(1)));
  EXPECT_EQ(u[2], u3);
  // the same comparison in Lyndon coordinates
  EXPECT_EQ(lyndon_decompose(u[2]), lyndon_decompose(u3));
}

TEST(Bch, UPrimeUsesOnlyLowerIndices) {
  for (int r = 2; r <= 6; ++r) {
    const Tables t = tables(r);
    for (int i = 1; i < r; ++i) {
      EXPECT_LT(t.uprime[static_cast<std::size_t>(i - 1)].max_index(), i) << "r=" << r << " i=" << i;
      EXPECT_TRUE(is_lie(t.uprime[static_cast<std::size_t>(i - 1)]));
    }
  }
}

TEST(Bch, AllPolynomialsAreLieAndHomogeneous) {
  for (int r = 2; r <= 6; ++r) {
    const Tables t = tables(r);
    for (int i = 1; i < r; ++i) {
      for (const Series* s : {&t.z[static_cast<std::size_t>(i - 1)], &t.u[static_cast<std::size_t>(i - 1)]}) {
        EXPECT_TRUE(is_lie(*s));
        EXPECT_EQ(s->component(i), *s);
        EXPECT_EQ(to_series(lyndon_decompose(*s), r - 1), *s);
      }
    }
  }
}

TEST(Bch, Reconstruction) {
  for (int r = 2; r <= 6; ++r) {
    const int w = r - 1;
    const auto z = bch_z(r);
    Series prod = Series::one(w);
    for (const auto& zi : z) prod = prod * exp(zi);
    EXPECT_EQ(prod, exp_chain(Family::X, w) * exp_chain(Family::Y, w)) << r;
    const auto u = bch_u(r);
    Series produ = Series::one(w);
    for (const auto& ui : u) produ = produ * exp(ui);
    EXPECT_EQ(produ, exp_chain(Family::Xp, w) * exp_chain(Family::Y, w) * exp_chain(Family::X, w, true)) << r;
  }
}

TEST(Bch, Symmetry) {
  for (int r = 2; r <= 5; ++r) {
    const auto& lt = lie_tables(r);
    const int w = r - 1;
    for (int i = 1; i < r; ++i) {
      // drop every word containing a Y symbol (resp. an X symbol)
      for (Family keep : {Family::X, Family::Y}) {
        Series s(w);
        const Series full = to_series(lt.z[static_cast<std::size_t>(i - 1)], w);
        for (const auto& [w2, c] : full.terms()) {
          bool ok = true;
          for (Symbol sym : w2) ok = ok && family_of(sym) == keep;
          if (ok) s.add(w2, c);
        }
        EXPECT_EQ(s, Series::sym(w, symbol(keep, i)));
      }
    }
  }
}

TEST(Bch, IsLie) {
  EXPECT_TRUE(is_lie(X(1)));
  EXPECT_FALSE(is_lie(X(1) * Y(1)));
  EXPECT_TRUE(is_lie(br(X(1), Y(1))));
  EXPECT_FALSE(is_lie(Series::one(W)));
}

TEST(Bch, LyndonWords) {
  const Word w{symbol(Family::X, 1), symbol(Family::Y, 1)};
  EXPECT_TRUE(is_lyndon(w));
  EXPECT_FALSE(is_lyndon(Word{symbol(Family::Y, 1), symbol(Family::X, 1)}));
  EXPECT_FALSE(is_lyndon(Word{symbol(Family::X, 1), symbol(Family::X, 1)}));
  EXPECT_THROW(lyndon_decompose(X(1) * Y(1)), DomainError);
}

TEST(Bch, RangeChecked) {
  EXPECT_THROW(bch_z(1), ConfigError);
  EXPECT_THROW(bch_u(7), ConfigError);
}

TEST(Bch, CompiledEvaluation) {
  const auto& lt = lie_tables(3);
  const Compiled z(5, lt.z);
  SplitMix64 rng(9);
  GroupCtx G(2, 5, 3);
  for (int k = 0; k < 1000; ++k) {
    const Mat a = G.random_mat(rng), b = G.random_mat(rng);
    Compiled::Assignment as;
    as.fill(Mat(2, 5));
    as[symbol(Family::X, 1)] = a;
    as[symbol(Family::Y, 1)] = b;
    const auto out = z.eval(as, 2);
    ASSERT_EQ(out[0], a + b);
    // oracle: factored coordinates of e^{eps A} e^{eps B} in G_3
    const Factored f = to_factored(exp_eps(1, a, 3) * exp_eps(1, b, 3));
    ASSERT_EQ(f.X[0], a + b);
    ASSERT_EQ(f.X[1], out[1]);
  }
  // commuting arguments: the bracket term vanishes
  Compiled::Assignment as;
  as.fill(Mat(2, 5));
  as[symbol(Family::X, 1)] = Mat::diag(5, {1, 2});
  as[symbol(Family::Y, 1)] = Mat::diag(5, {3, 3});
  as[symbol(Family::X, 2)] = Mat::unit(2, 5, 0, 1);
  as[symbol(Family::Y, 2)] = Mat::unit(2, 5, 1, 0);
  EXPECT_EQ(z.eval(as, 2)[1], Mat::unit(2, 5, 0, 1) + Mat::unit(2, 5, 1, 0));
}

TEST(Bch, CompiledRejectsSmallPrimes) {
  EXPECT_THROW(Compiled(3, lie_tables(5).z), ConfigError);
}
