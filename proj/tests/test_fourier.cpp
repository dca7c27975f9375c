#include <gtest/gtest.h>

#include "epschar/fourier.hpp"

using namespace epschar;

namespace {

GenericDatum datum_r2() { return make_datum(2, 3, 2, {{1, 2}}, {0, 1}); }
GenericDatum datum_r3() { return make_datum(2, 3, 3, {{1, 0}, {1, 2}}, {1, 0}); }
GenericDatum datum_r3_p5() { return make_datum(2, 5, 3, {{1, 3}, {1, 2}}, {1, 0}); }
GenericDatum datum_r4() { return make_datum(2, 5, 4, {{1, 3}, {0, 2}, {4, 1}}, {1, 3}); }

// Direct double sum over the fiber.
FiberTable naive_dft(const FiberTable& t, const Scalars& S) {
  const FiberCoords fc{t.base.n, S.p(), t.r};
  FiberTable out{t.base, t.r, {}};
  for (uint64_t a = 0; a < fc.size(); ++a) {
    const auto R = fc.decode(a);
    RootSum acc = S.accumulator();
    CycValue v = CycValue::zero(S.cyc());
    for (uint64_t b = 0; b < fc.size(); ++b) {
      const auto Y = fc.decode(b);
      long long e = 0;
      for (std::size_t j = 0; j < Y.size(); ++j) e += pairing(Y[j], R[j]);
      v += t.values[b] * S.psi(static_cast<int>(e % S.p()));
    }
    out.values.push_back(v);
  }
  return out;
}

FiberTable random_table(const Scalars& S, int n, int r, uint64_t seed) {
  const FiberCoords fc{n, S.p(), r};
  SplitMix64 rng(seed);
  FiberTable t{Mat::identity(n, S.p()), r, {}};
  for (uint64_t k = 0; k < fc.size(); ++k)
    t.values.push_back(S.root(rng.uniform(S.N())) * static_cast<int64_t>(rng.uniform(5) - 2));
  return t;
}

}  // namespace

TEST(FiberCoords, RoundTrip) {
  const FiberCoords fc{2, 3, 3};
  EXPECT_EQ(fc.size(), 6561u);
  for (uint64_t code : {0ull, 1ull, 80ull, 81ull, 4000ull, 6560ull}) EXPECT_EQ(fc.encode(fc.decode(code)), code);
  const auto z = fc.decode(1 + 2 * 81);
  EXPECT_EQ(z[0](0, 0), 1);
  EXPECT_EQ(z[1](0, 0), 2);
  EXPECT_EQ(z[0](1, 1), 0);
}

TEST(Dft, DeltaAndConstant) {
  const Scalars S(3);
  const FiberCoords fc{2, 3, 2};
  FiberTable delta{Mat::identity(2, 3), 2, std::vector<CycValue>(fc.size(), S.integer(0))};
  delta.values[0] = S.integer(1);
  for (const auto& v : dft_fiber(delta, S).values) EXPECT_EQ(v, S.integer(1));
  FiberTable one{Mat::identity(2, 3), 2, std::vector<CycValue>(fc.size(), S.integer(1))};
  const FiberTable h = dft_fiber(one, S);
  EXPECT_EQ(h.values[0], S.integer(81));
  for (std::size_t k = 1; k < h.values.size(); ++k) EXPECT_TRUE(h.values[k].is_zero());
}

TEST(Dft, SeparableMatchesNaiveAndInverts) {
  const Scalars S(3);
  const FiberCoords fc{2, 3, 2};
  const FiberTable t = random_table(S, 2, 2, 5);
  const FiberTable a = dft_fiber(t, S), b = naive_dft(t, S);
  ASSERT_EQ(a.values.size(), b.values.size());
  for (std::size_t k = 0; k < a.values.size(); ++k) EXPECT_EQ(a.values[k], b.values[k]) << k;
  // twice forward: 81 t(-R); forward then inverse: 81 t
  const FiberTable twice = dft_fiber(a, S), back = dft_fiber(a, S, -1);
  for (uint64_t k = 0; k < fc.size(); ++k) {
    auto z = fc.decode(k);
    for (auto& m : z) m = -m;
    EXPECT_EQ(twice.values[k], t.values[fc.encode(z)] * 81);
    EXPECT_EQ(back.values[k], t.values[k] * 81);
  }
  FiberTable bad = t;
  bad.values.pop_back();
  EXPECT_THROW(dft_fiber(bad, S), DomainError);
}

TEST(FourierR2, SupportAndValues) {
  GroupCtx G(2, 3, 2);
  CharCtx C(G, datum_r2());
  const SupportReport rep = support_report_r2(C, enumerate_gl(2, 3));
  EXPECT_EQ(rep.points, 3888u);
  EXPECT_EQ(rep.support_size, 48u);
  EXPECT_EQ(rep.predicted_support, 48u);
  EXPECT_EQ(rep.off_support_violations, 0u);
  EXPECT_EQ(rep.residuals, 0u);
  EXPECT_EQ(rep.c_sign, 1);
  EXPECT_EQ(rep.c_power, 8);
  EXPECT_TRUE(rep.pass());

  // predicate over all of G_2 versus the parametrization by T\G and T
  const FiberCoords fc{2, 3, 2};
  std::set<std::pair<ElementIndex, uint64_t>> by_predicate;
  for (const Mat& y : enumerate_gl(2, 3))
    for (uint64_t code = 0; code < fc.size(); ++code)
      if (z_predicate_r2(C.datum(), y, fc.decode(code)).member) by_predicate.insert({mat_index(y), code});
  const auto by_param = parametrized_z_r2(G, C.datum());
  EXPECT_EQ(by_param.size(), 48u);
  EXPECT_EQ(by_predicate, by_param);

  EXPECT_TRUE(z_predicate_r2(C.datum(), Mat::identity(2, 3), {-C.datum().a(1)}).member);
}

TEST(FourierR2, DegenerateDatumIsFlagged) {
  GroupCtx G(2, 3, 2);
  CharCtx C(G, make_datum(2, 3, 2, {{0, 0}}, {0, 0}), false);
  const SupportReport rep = support_report_r2(C, {Mat::identity(2, 3), Mat::diag(3, {1, 2})});
  EXPECT_FALSE(rep.pass());
  EXPECT_GT(rep.off_support_violations, 0u);
}

TEST(FourierR3, TwoFibersExact) {
  GroupCtx G(2, 3, 3);
  CharCtx C(G, datum_r3());
  // identity has Xi empty, diag(1,2) has Xi = {a12}
  const SupportReport rep = support_report_r3(C, {Mat::identity(2, 3), Mat::diag(3, {1, 2})});
  EXPECT_TRUE(rep.pass());
  EXPECT_EQ(rep.c_power, 14);
  EXPECT_EQ(rep.c_sign, 1);
  EXPECT_GT(rep.strata.at("{}"), 0u);
  EXPECT_GT(rep.strata.at("{a12}"), 0u);
  EXPECT_GT(rep.strata.at("Z'"), 0u);
  EXPECT_EQ(rep.support_size, rep.predicted_support);
}

TEST(FourierR3, StalkModelMatchesEnumeration) {
  GroupCtx G(2, 3, 3);
  CharCtx C(G, datum_r3());
  const Scalars& S = C.scalars();
  const FiberCoords fc{2, 3, 3};
  std::map<int, int> cases;
  for (const Mat& y : {Mat::identity(2, 3), Mat::diag(3, {1, 2})})
    for (uint64_t code = 0; code < fc.size(); ++code) {
      const auto R = fc.decode(code);
      const StalkProfile sp = stalk_profile_r3(C.datum(), S, y, R);
      if (sp.kase == 0) continue;
      ++cases[sp.kase];
      EXPECT_EQ(sp.brute_count, sp.model_count);
      if (sp.kase == 3) {
        EXPECT_EQ(sp.brute_sum, sp.predicted.value(S));
      } else {
        EXPECT_TRUE(sp.brute_sum.is_zero());
      }
    }
  EXPECT_GT(cases[1], 0);
  EXPECT_GT(cases[2], 0);
  EXPECT_GT(cases[3], 0);
}

TEST(FourierR3, FFormsAndIdentity) {
  GroupCtx G(2, 5, 3);
  const GenericDatum D = datum_r3_p5();
  SplitMix64 rng(21);
  int checked = 0;
  while (checked < 200) {
    const Mat x = G.random_gl(rng), xi = inverse(x);
    const Mat t = G.random_torus(rng);
    if ((1 + root_value(t, 0, 1)) % 5 == 0) {
      const Mat y = xi * t * x;
      EXPECT_THROW(f_r3(D, y, {Ad(xi, -D.a(1), x), -Ad(xi, D.a(2), x)}), DomainError);
      continue;
    }
    const Mat y = xi * t * x;
    const Mat off = G.random_strict_upper(rng) + transpose(G.random_strict_upper(rng));
    const std::vector<Mat> R{Ad(xi, off - D.a(1), x), -Ad(xi, D.a(2), x)};
    EXPECT_EQ(f_r3(D, y, R), f_r3_all_roots(D, y, R));
    EXPECT_EQ(f_r3(D, y, {Ad(xi, -D.a(1), x), R[1]}), 0);
    ++checked;
  }
  EXPECT_THROW(f_r3(D, Mat::identity(2, 5), {Mat(2, 5), Mat(2, 5)}), DomainError);
  EXPECT_TRUE(check_f_identity_r3(G, D, 500, 3).pass());
  EXPECT_TRUE(check_x_invariance_r3(G, D, 500, 4).pass());
  // R_1 transported the other way is neither well defined nor equal to h^
  EXPECT_FALSE(check_f_identity_r3(G, D, 500, 3, Transport::Lower).pass());
  EXPECT_FALSE(check_x_invariance_r3(G, D, 500, 4, Transport::Lower).pass());
}

TEST(FourierR3, SampledAtP5) {
  GroupCtx G(2, 5, 3);
  CharCtx C(G, datum_r3_p5());
  const SupportReport rep = support_report_r3_sampled(C, 8, 9);
  EXPECT_TRUE(rep.pass());
  EXPECT_EQ(rep.c_power, 14);
}

TEST(FourierR3, DescentIdentity) {
  GroupCtx G(2, 5, 3);
  EXPECT_TRUE(check_descent_r3(G, datum_r3_p5(), 1000, 8).pass());
  GroupCtx G3(2, 3, 3);
  EXPECT_TRUE(check_descent_r3(G3, datum_r3(), 1000, 8).pass());
}

TEST(FourierR4, RewritingChain) {
  GroupCtx G(2, 5, 4);
  const ChainResult ch = chain_r4(G, datum_r4(), 2000, 3);
  EXPECT_TRUE(ch.via_bch.pass());
  EXPECT_TRUE(ch.d2.pass());
  EXPECT_TRUE(ch.d3.pass());
  EXPECT_FALSE(ch.d4_sixth_first.pass());
  EXPECT_TRUE(ch.d4_third_first.pass());
  EXPECT_EQ(ch.resolved, "(1/3,1/6)");
}

TEST(FourierR4, EliminationAndTau) {
  GroupCtx G(2, 5, 4);
  const GenericDatum D = datum_r4();
  EXPECT_TRUE(check_elim_last(G, D, 40, 5).pass());
  EXPECT_TRUE(check_elim_block(G, D, 20, 6).pass());
  EXPECT_TRUE(check_tau_invariance_r4(G, D, 1000, 4, false).pass());
  GroupCtx G2(2, 3, 2);
  EXPECT_TRUE(check_elim_last(G2, datum_r2(), 40, 5).pass());
}

TEST(FourierR4, HHatBasics) {
  GroupCtx G(2, 5, 4);
  const GenericDatum D = datum_r4();
  SplitMix64 rng(12);
  const R4Variant v{false, true};
  for (int k = 0; k < 50; ++k) {
    const Mat x = G.random_gl(rng), xi = inverse(x);
    const Mat y = xi * G.random_torus(rng) * x;
    // X_1 = 0 admissible
    const std::vector<Mat> R0{-Ad(xi, D.a(1), x), -Ad(xi, D.a(2), x), -Ad(xi, D.a(3), x)};
    ASSERT_TRUE(z_predicate_r4(D, y, R0, v).member);
    EXPECT_EQ(h_hat_r4(D, y, R0, v), 0);
    // x -> tx changes neither membership nor the value
    const std::vector<Mat> R = z_point_r4(G, D, x, y, G.random_mat(rng), false, rng);
    const ZInfo z = z_predicate_r4(D, y, R, v);
    ASSERT_TRUE(z.member);
    const Mat tx = G.random_torus(rng) * z.x;
    const auto X1 = x1_for_r4(D, tx, R);
    ASSERT_TRUE(X1.has_value());
    EXPECT_TRUE(t0_condition_r4(D, tx, y, *X1, R[0], false));
    EXPECT_EQ(h_tilde0_r4(D, tx, y, *X1, R[0]), h_hat_r4(D, y, R, v));
  }
  EXPECT_THROW(h_hat_r4(D, Mat::identity(2, 5), {Mat(2, 5), Mat(2, 5), Mat(2, 5)}, v), DomainError);
}

TEST(FourierR4, SampledSupportResolvesVariant) {
  GroupCtx G(2, 5, 4);
  CharCtx C(G, datum_r4());
  const SupportReportR4 out = support_report_r4(C, 6, 11);
  const R4Variant expected{false, true};
  EXPECT_EQ(out.resolved, expected.str());
  for (const auto& [v, rep] : out.variants) {
    if (v.str() == out.resolved) {
      EXPECT_EQ(rep.c_power, 20);
    }
  }
}
