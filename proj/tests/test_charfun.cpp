#include <gtest/gtest.h>

#include "epschar/charfun.hpp"

using namespace epschar;

namespace {

GenericDatum datum_r2() { return make_datum(2, 3, 2, {{1, 2}}, {0, 1}); }
GenericDatum datum_r3() { return make_datum(2, 3, 3, {{1, 0}, {1, 2}}, {1, 0}); }

// Direct definition with a sum over all of G_r, divided by |B_r|.
CycValue t_L_oracle(const CharCtx& C, const KrMatrix& gp) {
  const GroupCtx& G = C.group();
  RootSum acc = C.scalars().accumulator();
  for (const auto& g : G.enumerate(GroupCtx::Subgroup::G)) {
    const KrMatrix c = g * gp * inverse(g);
    if (c.is_upper()) acc.add(C.lambda_tilde_exp(c));
  }
  return *acc.value(C.scalars().cyc()).divide_exact(static_cast<int64_t>(G.borel_order()));
}

}  // namespace

TEST(Datum, Validation) {
  EXPECT_NO_THROW(datum_r2().validate());
  EXPECT_THROW(make_datum(2, 3, 2, {{1, 1}}, {0, 0}).validate(), ConfigError);
  EXPECT_NO_THROW(make_datum(2, 3, 2, {{1, 1}}, {0, 0}).validate(false));
  EXPECT_THROW(make_datum(2, 3, 3, {{1, 2}}, {0, 0}).validate(), ConfigError);
  GenericDatum d = datum_r2();
  d.A[0](0, 1) = 1;
  EXPECT_THROW(d.validate(), ConfigError);
  EXPECT_THROW(make_datum(2, 3, 2, {{1, 2, 0}}, {0, 0}), ConfigError);
}

TEST(LambdaTilde, TrivialOnUnipotentAndMultiplicative) {
  GroupCtx G(2, 3, 2);
  CharCtx C(G, datum_r2());
  for (const auto& u : G.enumerate(GroupCtx::Subgroup::U)) EXPECT_EQ(C.lambda_tilde_exp(u), 0);
  EXPECT_EQ(C.lambda_tilde_exp(KrMatrix::identity(2, 3, 2)), 0);
  GroupCtx G4(2, 5, 4);
  CharCtx C4(G4, make_datum(2, 5, 4, {{1, 3}, {0, 2}, {4, 1}}, {1, 3}));
  SplitMix64 rng(7);
  for (int k = 0; k < 1000; ++k) {
    const KrMatrix a = G4.random_borel_r(rng), b = G4.random_borel_r(rng);
    EXPECT_EQ(C4.lambda_tilde_exp(a * b), C4.scalars().add_exp(C4.lambda_tilde_exp(a), C4.lambda_tilde_exp(b)));
  }
  EXPECT_THROW(C.lambda_tilde_exp(G.random_element(rng) * KrMatrix::constant(Mat::from_rows(3, {{0, 1}, {1, 0}}), 2)),
               DomainError);
}

TEST(InducedTL, IdentityValueAndTableRoutesAgree) {
  GroupCtx G(2, 3, 2);
  CharCtx C(G, datum_r2());
  EXPECT_EQ(C.t_L(KrMatrix::identity(2, 3, 2)), C.scalars().integer(12));
  const ClassFunction a = C.t_L_table();
  const ClassFunction b = C.t_L_table_pairs();
  ASSERT_EQ(a.index.size(), 3888u);
  ASSERT_EQ(a.index, b.index);
  for (std::size_t k = 0; k < a.value.size(); ++k) ASSERT_EQ(a.value[k], b.value[k]) << k;
  SplitMix64 rng(3);
  for (int k = 0; k < 20; ++k) {
    const KrMatrix g = G.random_element(rng);
    EXPECT_EQ(C.t_L(g), t_L_oracle(C, g));
  }
}

TEST(InducedTL, ConjugationInvariance) {
  GroupCtx G(2, 3, 3);
  CharCtx C(G, datum_r3());
  SplitMix64 rng(11);
  for (int k = 0; k < 200; ++k) {
    const KrMatrix g = G.random_element(rng), h = G.random_element(rng);
    EXPECT_EQ(C.t_L(g), C.t_L(h * g * inverse(h)));
  }
}

TEST(InducedTL, NormGenericAndDegenerate) {
  GroupCtx G(2, 3, 2);
  const ClassFunction t = CharCtx(G, datum_r2()).t_L_table_pairs();
  EXPECT_EQ(inner_product(t, t, G.order()), CharCtx(G, datum_r2()).scalars().integer(1));
  CharCtx D(G, make_datum(2, 3, 2, {{0, 0}}, {0, 0}), false);
  const ClassFunction d = D.t_L_table_pairs();
  const CycValue nd = inner_product(d, d, G.order());
  EXPECT_TRUE(nd.is_integer());
  EXPECT_NE(nd, D.scalars().integer(1));
}

TEST(InducedTL, RankOneWeylStabilizer) {
  for (int p : {3, 5}) {
    GroupCtx G(2, p, 1);
    for (const auto& [lam, expected] : std::vector<std::pair<std::vector<int>, int>>{{{0, 1}, 1}, {{0, 0}, 2}, {{1, 1}, 2}}) {
      CharCtx C(G, make_datum(2, p, 1, {}, lam));
      const ClassFunction t = C.t_L_table();
      EXPECT_EQ(inner_product(t, t, G.order()), C.scalars().integer(expected)) << p;
    }
  }
}

TEST(InnerProduct, Errors) {
  GroupCtx G(2, 3, 1);
  CharCtx C(G, make_datum(2, 3, 1, {}, {0, 1}));
  ClassFunction t = C.t_L_table();
  ClassFunction s = t;
  s.index.pop_back();
  s.value.pop_back();
  EXPECT_THROW(inner_product(t, s, G.order()), DomainError);
  s.full_domain = false;
  EXPECT_THROW(inner_product(s, s, G.order()), DomainError);
}

TEST(Specs, Shapes) {
  const FiberSpec k3 = spec_K(3);
  EXPECT_EQ(k3.torus, TorusCond::T);
  EXPECT_EQ(k3.u, (std::vector<UCond>{UCond::InB, UCond::None}));
  const FiberSpec k4 = spec_K(4);
  EXPECT_EQ(k4.u, (std::vector<UCond>{UCond::InT, UCond::None, UCond::None}));
  // bottom of the ladder is the variety of K
  for (int r = 2; r <= 5; ++r) {
    EXPECT_EQ(spec_ladder(r, r % 2).u, spec_K(r).u) << r;
    EXPECT_EQ(spec_ladder(r, r % 2).torus, TorusCond::T) << r;
    EXPECT_EQ(spec_ladder(r, r).torus, TorusCond::B);
  }
  EXPECT_THROW(spec_ladder(3, 0), DomainError);
  EXPECT_THROW(spec_ladder(4, 5), DomainError);
  EXPECT_EQ(spec_piece_up(4, 2).torus, TorusCond::BminusT);
  EXPECT_EQ(spec_piece_up(4, 1).u, (std::vector<UCond>{UCond::InBNotT, UCond::None, UCond::None}));
  EXPECT_EQ(spec_piece_down(4, 3).u, (std::vector<UCond>{UCond::InB, UCond::InB, UCond::NotB}));
  EXPECT_THROW(spec_piece_down(4, 1), DomainError);
  EXPECT_THROW(spec_piece_up(3, 1), DomainError);
}

TEST(FiberEngine, IdentityCountAtR2) {
  GroupCtx G(2, 3, 2);
  CharCtx C(G, datum_r2());
  const Factored one{Mat::identity(2, 3), {Mat(2, 3)}};
  EXPECT_EQ(C.t_K(one), C.scalars().integer(12 * 81));
}

TEST(FiberEngine, EliminationMatchesBruteForce) {
  for (int r : {2, 3}) {
    GroupCtx G(2, 3, r);
    const GenericDatum d = r == 2 ? datum_r2() : datum_r3();
    CharCtx C(G, d);
    FiberEngine e = C.engine();
    std::vector<FiberSpec> specs{spec_K(r)};
    for (int i = r % 2; i <= r; ++i) specs.push_back(spec_ladder(r, i));
    for (int i = lower_block(r); i <= r - 1; ++i) specs.push_back(spec_piece_down(r, i));
    for (int i = r % 2 + 1; i <= lower_block(r); ++i) specs.push_back(spec_piece_up(r, i));
    const auto sample = sample_elements(G, r == 2 ? 24 : 12, 99 + static_cast<uint64_t>(r));
    for (const auto& g : sample) {
      const auto a = e.run(g, specs, FiberEngine::Mode::Eliminate);
      const auto b = e.run(g, specs, FiberEngine::Mode::Brute);
      for (std::size_t s = 0; s < specs.size(); ++s)
        EXPECT_EQ(a[s].value(C.scalars().cyc()), b[s].value(C.scalars().cyc())) << specs[s].name << " r=" << r;
    }
  }
}

TEST(FiberEngine, TopLadderIsScaledInducedCharacter) {
  GroupCtx G(2, 3, 3);
  CharCtx C(G, datum_r3());
  const auto q7 = C.scalars().integer(2187);
  for (const auto& g : sample_elements(G, 30, 5)) EXPECT_EQ(C.t_L_i(g, 3), q7 * C.t_L(from_factored(g, 3))) << g.x.str();
}

TEST(FiberEngine, PiecesAreDifferences) {
  GroupCtx G(2, 5, 4);
  CharCtx C(G, make_datum(2, 5, 4, {{1, 3}, {0, 2}, {4, 1}}, {1, 3}));
  FiberEngine e = C.engine();
  std::vector<FiberSpec> specs;
  for (int i = 0; i <= 4; ++i) specs.push_back(spec_ladder(4, i));
  for (int i = 2; i <= 3; ++i) specs.push_back(spec_piece_down(4, i));
  for (int i = 1; i <= 2; ++i) specs.push_back(spec_piece_up(4, i));
  const auto& cyc = C.scalars().cyc();
  for (const auto& g : sample_elements(G, 20, 8)) {
    const auto v = e.run(g, specs);
    auto L = [&](int i) { return v[static_cast<std::size_t>(i)].value(cyc); };
    EXPECT_EQ(L(2) - L(3), v[5].value(cyc));
    EXPECT_EQ(L(3) - L(4), v[6].value(cyc));
    EXPECT_EQ(L(1) - L(0), v[7].value(cyc));
    EXPECT_EQ(L(2) - L(1), v[8].value(cyc));
  }
}

TEST(FiberEngine, DualModeIsTransformOfTable) {
  for (int r : {2, 3}) {
    GroupCtx G(2, 3, r);
    CharCtx C(G, r == 2 ? datum_r2() : datum_r3());
    FiberEngine e = C.engine();
    const Scalars& S = C.scalars();
    SplitMix64 rng(41 + static_cast<uint64_t>(r));
    for (int trial = 0; trial < (r == 2 ? 6 : 2); ++trial) {
      const Mat y = trial == 0 ? Mat::identity(2, 3) : G.random_gl(rng);
      std::vector<Mat> R;
      for (int j = 1; j < r; ++j) R.push_back(G.random_mat(rng));
      // sum over Y of t_K(y|Y|) psi(<Y, R>)
      CycValue direct = CycValue::zero(S.cyc());
      const uint64_t count = GroupCtx::ipow_u(3, 4 * (r - 1));
      for (uint64_t v = 0; v < count; ++v) {
        Factored f{y, {}};
        uint64_t w = v;
        long long ph = 0;
        for (int j = 1; j < r; ++j) {
          Mat Y(2, 3);
          for (int k = 0; k < 4; ++k) {
            Y.a[static_cast<std::size_t>(k)] = static_cast<int32_t>(w % 3);
            w /= 3;
          }
          ph += pairing(Y, R[static_cast<std::size_t>(j - 1)]);
          f.X.push_back(Y);
        }
        direct += C.t_K(f) * S.psi(static_cast<int>(ph % 3));
      }
      EXPECT_EQ(e.run_dual(y, R).value(S.cyc()), direct) << "r=" << r;
      if (r == 2) {
        EXPECT_EQ(e.run_dual(y, R, FiberEngine::Mode::Brute).value(S.cyc()), direct);
      }
    }
  }
}

TEST(Sampling, DeterministicAndCovering) {
  GroupCtx G(2, 3, 3);
  const auto a = sample_elements(G, 50, 1), b = sample_elements(G, 50, 1);
  ASSERT_EQ(a.size(), 50u);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(from_factored(a[k], 3), from_factored(b[k], 3));
  EXPECT_EQ(a[0].x, Mat::identity(2, 3));
  EXPECT_EQ(a[3].x, G.torus_elements()[3]);
}
