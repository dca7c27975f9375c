#include <gtest/gtest.h>

#include <set>

#include "epschar/grgroup.hpp"
#include "epschar/rng.hpp"

using namespace epschar;

TEST(KrMatrix, Arithmetic) {
  GroupCtx G(2, 5, 4);
  SplitMix64 rng(1);
  const KrMatrix one = KrMatrix::identity(2, 5, 4);
  for (int k = 0; k < 1000; ++k) {
    const KrMatrix g = G.random_element(rng);
    ASSERT_EQ(one * g, g);
    ASSERT_EQ(g * inverse(g), one);
    ASSERT_EQ(inverse(g) * g, one);
  }
  KrMatrix bad(2, 5, 4);
  bad.c[1] = Mat::identity(2, 5);
  EXPECT_THROW(inverse(bad), DomainError);
}

TEST(ExpEps, Basics) {
  const int r = 4, p = 5;
  SplitMix64 rng(2);
  GroupCtx G(2, p, r);
  EXPECT_EQ(exp_eps(1, Mat(2, p), r), KrMatrix::identity(2, p, r));
  for (int k = 0; k < 100; ++k) {
    const Mat x = G.random_mat(rng);
    EXPECT_EQ(exp_eps(1, x, r) * exp_eps(1, -x, r), KrMatrix::identity(2, p, r));
    const KrMatrix e = exp_eps(1, x, r);
    EXPECT_EQ(e.c[1], x);
    EXPECT_EQ(e.c[2], 3 * (x * x));       // 1/2 = 3 mod 5
    EXPECT_EQ(e.c[3], 1 * (x * x * x));   // 1/6 = 1 mod 5
    const KrMatrix e2 = exp_eps(2, x, r);
    EXPECT_EQ(e2.c[2], x);
    EXPECT_TRUE(e2.c[1].is_zero() && e2.c[3].is_zero());
  }
  EXPECT_THROW(exp_eps(1, Mat(2, 3), 4), ConfigError);
}

TEST(Factored, RoundTripExhaustive) {
  GroupCtx G(2, 3, 2);
  const auto all = G.enumerate(GroupCtx::Subgroup::G);
  ASSERT_EQ(all.size(), 3888u);
  for (std::size_t k = 0; k < all.size(); ++k) {
    const Factored f = to_factored(all[k]);
    ASSERT_EQ(f.x, all[k].c[0]);
    ASSERT_EQ(G.from_factored(f), all[k]);
    ASSERT_EQ(to_factored(G.from_factored(f)), f);
    ASSERT_EQ(G.index(all[k]), static_cast<ElementIndex>(G.index(all[k])));
    ASSERT_EQ(G.from_index(G.index(all[k])), all[k]);
    if (k) {
      ASSERT_LT(G.index(all[k - 1]), G.index(all[k]));
    }
  }
  const Factored id = to_factored(KrMatrix::identity(2, 3, 2));
  EXPECT_EQ(id.x, Mat::identity(2, 3));
  EXPECT_TRUE(id.X[0].is_zero());
}

TEST(Factored, RoundTripRandomR4) {
  GroupCtx G(2, 5, 4);
  SplitMix64 rng(3);
  for (int k = 0; k < 500; ++k) {
    const Factored f = G.random_factored(rng);
    ASSERT_EQ(to_factored(G.from_factored(f)), f);
    // x|X| = |Ad(x)X| x
    Factored g{Mat::identity(2, 5), {}};
    for (const auto& m : f.X) g.X.push_back(Ad(f.x, m));
    ASSERT_EQ(G.from_factored(g) * KrMatrix::constant(f.x, 4), G.from_factored(f));
  }
}

namespace {

void check_group_law(int n, int p, int r, int samples, uint64_t seed) {
  GroupCtx G(n, p, r);
  SplitMix64 rng(seed);
  for (int k = 0; k < samples; ++k) {
    const Factored a = G.random_factored(rng), b = G.random_factored(rng);
    const KrMatrix ma = G.from_factored(a), mb = G.from_factored(b);
    ASSERT_EQ(G.from_factored(G.mul_bch(a, b)), ma * mb);
    ASSERT_EQ(G.from_factored(G.conj_bch(a, b)), ma * mb * inverse(ma));
  }
}

}  // namespace

TEST(GroupLaw, BchMatchesMatrixModel) {
  check_group_law(2, 5, 4, 1000, 4);
  check_group_law(3, 7, 3, 1000, 5);
  check_group_law(2, 7, 6, 100, 6);
}

TEST(GroupLaw, IdentityCases) {
  GroupCtx G(2, 5, 4);
  SplitMix64 rng(7);
  const Factored one{Mat::identity(2, 5), {Mat(2, 5), Mat(2, 5), Mat(2, 5)}};
  for (int k = 0; k < 50; ++k) {
    const Factored a = G.random_factored(rng);
    EXPECT_EQ(G.mul_bch(a, one), a);
    EXPECT_EQ(G.conj_bch(a, one), one);
  }
}

TEST(DR, Homomorphism) {
  GroupCtx G(2, 5, 3);
  SplitMix64 rng(8);
  auto random_b = [&] {
    KrMatrix b(2, 5, 3);
    b.c[0] = G.random_borel(rng);
    for (int k = 1; k < 3; ++k) b.c[static_cast<std::size_t>(k)] = G.random_upper(rng);
    return b;
  };
  for (int k = 0; k < 1000; ++k) {
    const KrMatrix b = random_b(), c = random_b();
    ASSERT_EQ(d_r(b * c), d_r(b) * d_r(c));
  }
  KrMatrix t(2, 5, 3);
  t.c[0] = Mat::diag(5, {2, 3});
  t.c[1] = Mat::diag(5, {1, 4});
  EXPECT_EQ(d_r(t), t);
  for (const auto& u : GroupCtx(2, 3, 2).enumerate(GroupCtx::Subgroup::U))
    EXPECT_EQ(d_r(u), KrMatrix::identity(2, 3, 2));
  KrMatrix lower = KrMatrix::identity(2, 5, 3);
  lower.c[1](1, 0) = 1;
  EXPECT_THROW(d_r(lower), DomainError);
}

TEST(Enumerate, Cardinalities) {
  GroupCtx G(2, 3, 2);
  EXPECT_EQ(enumerate_gl(2, 3).size(), 48u);
  EXPECT_EQ(G.order(), 3888u);
  const auto b = G.enumerate(GroupCtx::Subgroup::B);
  EXPECT_EQ(b.size(), 324u);
  EXPECT_EQ(G.borel_order(), 324u);
  const auto t = G.enumerate(GroupCtx::Subgroup::T);
  EXPECT_EQ(t.size(), 4u * 9u);
  const auto u = G.enumerate(GroupCtx::Subgroup::U);
  EXPECT_EQ(u.size(), 9u);
  for (const auto& x : b) EXPECT_TRUE(x.is_upper() && x.invertible());
  for (const auto& x : u) EXPECT_TRUE(x.is_unipotent_upper());
  std::set<ElementIndex> seen;
  for (const auto& x : b) seen.insert(G.index(x));
  EXPECT_EQ(seen.size(), b.size());

  GroupCtx G3(3, 3, 2);
  EXPECT_EQ(G3.torus_order(), 8u * 27u);
  EXPECT_EQ(G3.enumerate(GroupCtx::Subgroup::T).size(), 8u * 27u);
  EXPECT_EQ(enumerate_gl(3, 3).size(), G3.gl_order());
}

TEST(Enumerate, BudgetGuard) {
  GroupCtx G(2, 5, 4);
  try {
    G.enumerate(GroupCtx::Subgroup::G);
    FAIL() << "expected a budget refusal";
  } catch (const BudgetError& e) {
    EXPECT_EQ(e.required(), G.order());
  }
}

TEST(Enumerate, IndexOverflowIsReported) {
  GroupCtx G(3, 7, 3);
  SplitMix64 rng(9);
  EXPECT_THROW(G.index(G.random_element(rng)), DomainError);
}

TEST(DimH, FormulaAndCount) {
  EXPECT_EQ(dim_H(2, 4, 2), 4);
  EXPECT_EQ(dim_H(3, 4, 2), 7);
  EXPECT_EQ(dim_H(4, 4, 2), 10);
  GroupCtx G(2, 3, 2);
  int kernel = 0;
  for (const auto& b : G.enumerate(GroupCtx::Subgroup::B))
    if (b.c[0].diagonal() == std::vector<int>{1, 1}) ++kernel;
  EXPECT_EQ(kernel, 81);
}

TEST(Cosets, Representatives) {
  GroupCtx G(2, 3, 2);
  EXPECT_EQ(G.torus_coset_reps().size(), 12u);
  EXPECT_EQ(G.borel_coset_reps().size(), 4u);
  const auto reps = G.borel_r_coset_reps();
  EXPECT_EQ(reps.size(), 12u);
  // every element of G_2 lies in exactly one coset B_2 g
  const auto borel = G.enumerate(GroupCtx::Subgroup::B);
  std::vector<int> hits(6561, 0);
  for (const auto& g : reps)
    for (const auto& b : borel) ++hits[static_cast<std::size_t>(G.index(b * g))];
  for (const auto& g : G.enumerate(GroupCtx::Subgroup::G)) ASSERT_EQ(hits[static_cast<std::size_t>(G.index(g))], 1);

  GroupCtx G3(3, 5, 2);
  EXPECT_EQ(G3.borel_coset_reps().size(), 31u * 6u);
  EXPECT_EQ(G3.borel_r_coset_reps().size(), 31u * 6u * 125u);
}
