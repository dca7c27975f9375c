#include <gtest/gtest.h>

#include <vector>

#include "epschar/rng.hpp"
#include "epschar/scalars.hpp"

using namespace epschar;

TEST(PrimeField, GeneratorAndDlog) {
  PrimeField f3(3);
  EXPECT_EQ(f3.generator(), 2);
  EXPECT_EQ(f3.dlog(2), 1);
  PrimeField f5(5);
  EXPECT_EQ(f5.generator(), 2);
  EXPECT_EQ(f5.dlog(4), 2);
  PrimeField f7(7);
  EXPECT_EQ(f7.generator(), 3);
  for (int k = 0; k < 6; ++k) EXPECT_EQ(f7.dlog(f7.pow(3, k)), k);
}

TEST(PrimeField, RejectsBadModuli) {
  EXPECT_THROW(PrimeField(4), ConfigError);
  EXPECT_THROW(PrimeField(2), ConfigError);
  EXPECT_THROW(PrimeField(9), ConfigError);
}

TEST(Cyclotomic, PolynomialDegrees) {
  for (int N : {1, 2, 6, 12, 20, 42}) {
    Cyclotomic c(N);
    EXPECT_EQ(c.degree(), euler_phi(N)) << N;
  }
  EXPECT_EQ(Cyclotomic(6).phi(), (std::vector<int64_t>{1, -1, 1}));
}

TEST(Cyclotomic, ReductionModPhi6) {
  auto ctx = std::make_shared<const Cyclotomic>(6);
  // zeta^2 = zeta - 1
  EXPECT_EQ(CycValue::root(ctx, 2), CycValue::root(ctx, 1) - CycValue::one(ctx));
  EXPECT_EQ(CycValue::root(ctx, 3), -CycValue::one(ctx));
  EXPECT_EQ(CycValue::root(ctx, 1).conj() * CycValue::root(ctx, 1), CycValue::one(ctx));
}

TEST(Scalars, PsiIsANontrivialHomomorphism) {
  Scalars S(3);
  EXPECT_EQ(S.psi(0), S.integer(1));
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) EXPECT_EQ(S.psi(a) * S.psi(b), S.psi(a + b));
  EXPECT_TRUE((S.psi(0) + S.psi(1) + S.psi(2)).is_zero());
  EXPECT_NE(S.psi(1), S.integer(1));
}

TEST(Scalars, Lambda0) {
  Scalars S3(3);
  const std::vector<int> c1{1}, t2{2};
  EXPECT_EQ(S3.lambda0(c1, t2), S3.integer(-1));
  Scalars S7(7);
  const std::vector<int> c{2, 5};
  SplitMix64 rng(3);
  for (int k = 0; k < 200; ++k) {
    std::vector<int> t{1 + rng.uniform(6), 1 + rng.uniform(6)}, u{1 + rng.uniform(6), 1 + rng.uniform(6)};
    std::vector<int> tu{t[0] * u[0] % 7, t[1] * u[1] % 7};
    EXPECT_EQ(S7.lambda0(c, tu), S7.lambda0(c, t) * S7.lambda0(c, u));
  }
  const std::vector<int> zero{0, 0};
  EXPECT_EQ(S7.lambda0(zero, std::vector<int>{3, 4}), S7.integer(1));
  EXPECT_THROW(S7.lambda0(c, std::vector<int>{0, 1}), DomainError);
}

TEST(Scalars, RingLaws) {
  Scalars S(5);
  SplitMix64 rng(11);
  auto random_value = [&] {
    RootSum acc = S.accumulator();
    for (int k = 0; k < 4; ++k) acc.add(rng.uniform(S.N()), rng.uniform(7) - 3);
    return acc.value(S.cyc());
  };
  for (int k = 0; k < 10000; ++k) {
    const CycValue a = random_value(), b = random_value(), c = random_value();
    ASSERT_EQ((a * b) * c, a * (b * c));
    ASSERT_EQ(a * (b + c), a * b + a * c);
    ASSERT_EQ(a.conj().conj(), a);
    ASSERT_EQ((a * b).conj(), a.conj() * b.conj());
  }
  for (int k = 0; k < S.N(); ++k) EXPECT_EQ(S.root(k) * S.root(k).conj(), S.integer(1));
}

TEST(Scalars, ContextMismatchThrows) {
  Scalars S3(3), S5(5);
  EXPECT_THROW(S3.integer(1) + S5.integer(1), DomainError);
}

TEST(GaussSum, Examples) {
  Scalars S3(3), S5(5);
  EXPECT_TRUE(gauss_linear_sum(S3, {{1}, 0}).is_zero());
  EXPECT_EQ(gauss_linear_sum(S3, {{0, 0}, 1}), S3.psi(1) * 9);
  EXPECT_TRUE(gauss_linear_sum_brute(S5, {{1, 2, 0}, 3}).is_zero());
  EXPECT_TRUE(gauss_linear_sum(S5, {{1, 2, 0}, 3}).is_zero());
}

TEST(GaussSum, ClosedFormMatchesBruteForce) {
  Scalars S(3);
  SplitMix64 rng(5);
  for (int k = 0; k < 100; ++k) {
    AffineForm l;
    const int dim = 1 + rng.uniform(4);
    const bool constant = rng.uniform(3) == 0;
    for (int i = 0; i < dim; ++i) l.linear.push_back(constant ? 0 : rng.uniform(3));
    l.constant = rng.uniform(3);
    EXPECT_EQ(gauss_linear_sum(S, l), gauss_linear_sum_brute(S, l));
  }
}
