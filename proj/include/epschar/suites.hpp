#pragma once
// Verification suites behind the command line tool and the acceptance
// harness. Each suite returns a Report and prints nothing.

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "epschar/bch_golden.hpp"
#include "epschar/cache.hpp"
#include "epschar/fourier.hpp"
#include "epschar/report.hpp"

namespace epschar {

struct RunOptions {
  int jobs = 1;
  std::string cache_dir;  // empty: EPSCHAR_CACHE or ./.epschar-cache
  std::string bases;      // fourier bases; empty picks a default per r
  std::string out;        // characters: where to write the t_L table
  std::function<void(const std::string&)> log;

  void say(const std::string& s) const {
    if (log) log(s);
  }
};

namespace detail {

inline json cyc_json(const CycValue& v) {
  if (v.is_integer()) return v.constant_term();
  return v.str();
}

inline std::string rational_str(const bch::Rational& c) {
  std::string s = std::to_string(c.numerator());
  if (c.denominator() != 1) s += "/" + std::to_string(c.denominator());
  return s;
}

inline json check_json(const CheckReport& c) {
  return json{{"samples", c.samples}, {"failures", c.failures}};
}

inline Report start(const std::string& suite, const Config& cfg) {
  Report r;
  r.suite = suite;
  r.config_hash = cfg.hash();
  return r;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, sep))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

}  // namespace detail

// ------------------------------------------------------------------- bch

/// z_i, u_i, u'_i as lists of (coefficient, Lyndon bracket) pairs.
inline json bch_tables_json(const bch::Tables& t) {
  auto lie = [](const bch::Series& s) {
    json a = json::array();
    for (const auto& [c, w] : bch::lyndon_decompose(s).terms)
      a.push_back({detail::rational_str(c), bch::standard_bracket(w).str()});
    return a;
  };
  json j{{"r", t.r}};
  for (const auto& [key, polys] : {std::pair{"z", &t.z}, std::pair{"u", &t.u}, std::pair{"uprime", &t.uprime}}) {
    json a = json::array();
    for (const auto& s : *polys) a.push_back(lie(s));
    j[key] = a;
  }
  return j;
}

inline Report run_bch(const Config& cfg, const RunOptions& opt) {
  Stopwatch sw;
  Report rep = detail::start("bch", cfg);
  const int r = std::max(cfg.r, 2);
  opt.say("bch: tables for r = " + std::to_string(r));
  const bch::Tables t = bch::tables(r);
  int total = 0;
  json bad = json::array();
  for (int i = 1; i < r; ++i)
    for (const auto& [name, polys] : {std::pair{"z", &t.z}, std::pair{"u", &t.u}, std::pair{"uprime", &t.uprime}}) {
      const bch::Series& s = (*polys)[static_cast<std::size_t>(i - 1)];
      ++total;
      if (!bch::is_lie(s) || s.component(i) != s) bad.push_back(std::string(name) + "_" + std::to_string(i));
    }
  rep.add("every z_i, u_i, u'_i is a homogeneous Lie element", bad.empty(), total, total - static_cast<int>(bad.size()),
          "Lie certification by Lyndon elimination", bad.empty() ? json(nullptr) : json{{"polynomials", bad}});

  const bch::Tables t4 = r == 4 ? t : bch::tables(4);
  const auto gz = bch::golden::z(), gu = bch::golden::u(), gup = bch::golden::uprime();
  for (const auto& [name, computed, golden] :
       {std::tuple{"z", &t4.z, &gz}, std::tuple{"u", &t4.u, &gu}, std::tuple{"uprime", &t4.uprime, &gup}}) {
    json exp = json::array(), got = json::array(), diff = json::array();
    for (int i = 1; i <= bch::golden::kW; ++i) {
      const auto a = bch::lyndon_decompose((*golden)[static_cast<std::size_t>(i - 1)]);
      const auto b = bch::lyndon_decompose((*computed)[static_cast<std::size_t>(i - 1)]);
      exp.push_back(a.str());
      got.push_back(b.str());
      if (!(a == b)) diff.push_back(i);
    }
    rep.add(std::string(name) + "_1.." + name + "_3 match the hand-written displays", diff.empty(), exp, got,
            "hand-expanded BCH displays in Lyndon coordinates", diff.empty() ? json(nullptr) : json{{"indices", diff}});
  }
  rep.data = bch_tables_json(t);
  rep.wall_seconds = sw.seconds();
  return rep;
}

// ----------------------------------------------------------------- group

inline Report run_group(const Config& cfg, const RunOptions& opt) {
  Stopwatch sw;
  Report rep = detail::start("group", cfg);
  const GroupCtx G(cfg.n, cfg.p, cfg.r);
  SplitMix64 rng(cfg.seed);
  constexpr int kPairs = 1000;
  opt.say("group: group law on " + std::to_string(kPairs) + " random pairs");
  int mul_fail = 0, conj_fail = 0;
  json mul_repro = nullptr, conj_repro = nullptr;
  for (int k = 0; k < kPairs; ++k) {
    const Factored a = G.random_factored(rng), b = G.random_factored(rng);
    const KrMatrix ma = G.from_factored(a), mb = G.from_factored(b);
    if (G.from_factored(G.mul_bch(a, b)) != ma * mb && mul_fail++ == 0)
      mul_repro = {{"seed", cfg.seed}, {"pair", k}, {"a", ma.str()}, {"b", mb.str()}};
    if (G.from_factored(G.conj_bch(a, b)) != ma * mb * inverse(ma) && conj_fail++ == 0)
      conj_repro = {{"seed", cfg.seed}, {"pair", k}, {"a", ma.str()}, {"b", mb.str()}};
  }
  rep.add("BCH product equals the matrix product", mul_fail == 0, 0, mul_fail,
          "matrix multiplication over k[eps]/eps^r, 1000 random pairs", mul_repro);
  rep.add("BCH conjugation equals the matrix conjugate", conj_fail == 0, 0, conj_fail,
          "matrix model g h g^-1 over k[eps]/eps^r, 1000 random pairs", conj_repro);

  // factored coordinates: exhaustive when G_r fits the budget
  const bool exhaustive = G.order() <= cfg.budget || cfg.force;
  int rt_fail = 0;
  uint64_t rt_count = 0;
  json rt_repro = nullptr;
  auto round_trip = [&](const KrMatrix& g) {
    ++rt_count;
    const Factored f = to_factored(g);
    if ((f.x != g.c[0] || G.from_factored(f) != g || to_factored(G.from_factored(f)) != f) && rt_fail++ == 0)
      rt_repro = {{"element", g.str()}};
  };
  if (exhaustive) {
    for (const auto& g : G.enumerate(GroupCtx::Subgroup::G, cfg.budget, cfg.force)) round_trip(g);
  } else {
    for (int k = 0; k < kPairs; ++k) round_trip(G.random_element(rng));
  }
  rep.add(std::string("factored coordinates round-trip (") + (exhaustive ? "exhaustive" : "sampled") + ")",
          rt_fail == 0, 0, rt_fail, "x|X_1..| -> matrix -> x|X_1..|", rt_repro);
  rep.data["round_trip"] = {{"mode", exhaustive ? "exhaustive" : "sampled"}, {"elements", rt_count}};

  // cardinalities against closed forms, exact in big integers
  using big = boost::multiprecision::cpp_int;
  const auto p = static_cast<uint64_t>(cfg.p);
  const int n = cfg.n, r = cfg.r;
  auto bpow = [](uint64_t b, int e) { return boost::multiprecision::pow(big(b), static_cast<unsigned>(e)); };
  big gl = 1;
  for (int i = 0; i < n; ++i) gl *= bpow(p, n) - bpow(p, i);
  const big pm1n = bpow(p - 1, n);
  const std::vector<std::tuple<std::string, big, uint64_t, GroupCtx::Subgroup>> orders{
      {"B_r", pm1n * bpow(p, n * (n - 1) / 2 + (r - 1) * n * (n + 1) / 2), G.borel_order(), GroupCtx::Subgroup::B},
      {"G_r", gl * bpow(p, (r - 1) * n * n), G.order(), GroupCtx::Subgroup::G},
      {"T_r", pm1n * bpow(p, (r - 1) * n), G.torus_order(), GroupCtx::Subgroup::T},
      {"U_r", bpow(p, r * n * (n - 1) / 2), G.unipotent_order(), GroupCtx::Subgroup::U}};
  json exp, got, counted = json::object();
  bool ok = true;
  for (const auto& [name, closed, value, sub] : orders) {
    exp[name] = closed.str();
    got[name] = value == UINT64_MAX ? std::string("saturated") : std::to_string(value);
    const bool fits = closed < big(UINT64_MAX);
    ok = ok && (fits ? big(value) == closed : value == UINT64_MAX);
    if (fits && static_cast<uint64_t>(closed) <= cfg.budget) {
      const auto size = static_cast<uint64_t>(G.enumerate(sub, cfg.budget).size());
      counted[name] = size;
      ok = ok && big(size) == closed;
    }
  }
  if (gl <= big(cfg.budget)) {
    const auto size = static_cast<uint64_t>(enumerate_gl(n, cfg.p).size());
    counted["GL_n"] = size;
    ok = ok && big(size) == gl && G.gl_order() == size;
  }
  rep.add("subgroup orders match closed forms and enumeration", ok, exp, json{{"order", got}, {"enumerated", counted}},
          "products of (p^n - p^i) and powers of p; enumeration within budget");

  // H-bundle dimension
  const int dh = G.dim_H();
  const int formula = r * (n * n + n) / 2 - n;
  json dh_got{{"dim_H", dh}};
  bool dh_ok = dh == formula;
  if (r == 2 && G.borel_order() <= cfg.budget) {
    uint64_t kernel = 0;
    const std::vector<int> ones(static_cast<std::size_t>(n), 1);
    for (const auto& b : G.enumerate(GroupCtx::Subgroup::B, cfg.budget))
      if (b.c[0].diagonal() == ones) ++kernel;
    dh_got["kernel_count"] = kernel;
    dh_ok = dh_ok && kernel == GroupCtx::ipow_u(p, dh);
  }
  rep.add("dim_H = r(Delta + delta)/2 - delta", dh_ok, json{{"dim_H", formula}}, dh_got,
          "closed form; at r = 2 also |ker B_r -> T(F_q)| = q^dim_H by enumeration");
  rep.wall_seconds = sw.seconds();
  return rep;
}

// ------------------------------------------------------------ characters

/// |Stab_W(lambda_0)|: permutations of the exponent vector fixing it mod p - 1.
inline uint64_t weyl_stabilizer(const std::vector<int>& lambda0, int p) {
  std::vector<int> perm(lambda0.size());
  std::iota(perm.begin(), perm.end(), 0);
  uint64_t count = 0;
  do {
    bool fixed = true;
    for (std::size_t i = 0; i < perm.size(); ++i)
      fixed = fixed && ((lambda0[i] - lambda0[static_cast<std::size_t>(perm[i])]) % (p - 1) == 0);
    if (fixed) ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return count;
}

/// t_L over all of G_r, read from the cache when present.
inline ClassFunction cached_t_L(const Config& cfg, const CharCtx& C, const RunOptions& opt,
                                CacheStatus* status = nullptr) {
  const Cache cache(resolve_cache_dir(opt.cache_dir));
  return cache.get_or_compute(
      cfg, "t_L", C.scalars(), [&] { return C.t_L_table(cfg.budget, cfg.force); }, status,
      [&](const std::string& w) { opt.say("warning: " + w); });
}

inline Report run_characters(const Config& cfg, const RunOptions& opt) {
  Stopwatch sw;
  Report rep = detail::start("characters", cfg);
  const GroupCtx G(cfg.n, cfg.p, cfg.r);
  // the full table is part of the suite up to r = 2; refuse before any work
  if (cfg.r <= 2) G.check_budget(G.order(), cfg.budget, cfg.force);
  const CharCtx C(G, cfg.datum(), cfg.regular);
  const Scalars& S = C.scalars();

  const uint64_t index = G.order() / G.borel_order();
  const CycValue one = C.t_L(KrMatrix::identity(cfg.n, cfg.p, cfg.r));
  rep.add("t_L(1) = |G_r| / |B_r|", one == S.integer(static_cast<int64_t>(index)), index, detail::cyc_json(one),
          "index of B_r in G_r from the closed-form orders");

  const int pairs = cfg.r <= 2 ? 1000 : cfg.samples;
  SplitMix64 rng(cfg.seed);
  int inv_fail = 0;
  json inv_repro = nullptr;
  opt.say("characters: conjugation invariance on " + std::to_string(pairs) + " pairs");
  for (int k = 0; k < pairs; ++k) {
    const KrMatrix g = G.random_element(rng), h = G.random_element(rng);
    if (C.t_L(g) != C.t_L(h * g * inverse(h)) && inv_fail++ == 0)
      inv_repro = {{"seed", cfg.seed}, {"pair", k}, {"g", g.str()}, {"h", h.str()}};
  }
  rep.add("t_L(h g h^-1) = t_L(g)", inv_fail == 0, 0, inv_fail, "random pairs (g, h)", inv_repro);

  if (cfg.r > 2 && G.order() > cfg.budget && !cfg.force) {
    rep.data["table"] = "skipped: |G_r| = " + std::to_string(G.order()) + " exceeds the budget";
    rep.wall_seconds = sw.seconds();
    return rep;
  }

  opt.say("characters: full t_L table on " + std::to_string(G.order()) + " elements");
  CacheStatus status = CacheStatus::Missing;
  const ClassFunction t = cached_t_L(cfg, C, opt, &status);
  rep.data["table"] = {{"entries", t.index.size()}, {"cache", cache_status_name(status)}};
  if (!opt.out.empty()) {
    std::ofstream out(opt.out, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + opt.out);
    const std::string b = encode_table(t, cfg.n, cfg.p, cfg.r);
    out.write(b.data(), static_cast<std::streamsize>(b.size()));
    rep.data["table"]["written"] = opt.out;
  }
  rep.add("table covers G_r", t.index.size() == G.order(), G.order(), t.index.size(), "closed-form |G_r|");

  if (cfg.r >= 2 && GroupCtx::sat_mul(G.order(), G.borel_order()) <= GroupCtx::sat_mul(cfg.budget, 64)) {
    const ClassFunction pairs_route = C.t_L_table_pairs(cfg.budget, cfg.force);
    std::size_t mism = 0;
    json first = nullptr;
    for (std::size_t k = 0; k < t.value.size(); ++k)
      if (pairs_route.index[k] != t.index[k] || pairs_route.value[k] != t.value[k])
        if (mism++ == 0) first = {{"index", t.index[k]}};
    rep.add("coset-scan route equals the (g, b)-pairs route", mism == 0, 0, mism,
            "t_L accumulated over G_r x B_r from the definition", first);
  }

  const CycValue norm = inner_product(t, t, G.order());
  if (cfg.r == 1) {
    const uint64_t stab = weyl_stabilizer(cfg.lambda0, cfg.p);
    rep.add("<t_L, t_L> = |Stab_W(lambda_0)|", norm == S.integer(static_cast<int64_t>(stab)), stab,
            detail::cyc_json(norm), "permutations of lambda_0 counted directly");
  } else if (cfg.regular) {
    rep.add("<t_L, t_L> = 1 for the generic datum", norm == S.integer(1), 1, detail::cyc_json(norm),
            "irreducibility of the induced character");
    // degenerate baseline: A = 0, lambda_0 trivial
    const std::vector<std::vector<int>> zero_a(static_cast<std::size_t>(cfg.r - 1),
                                               std::vector<int>(static_cast<std::size_t>(cfg.n), 0));
    const CharCtx Z(G, make_datum(cfg.n, cfg.p, cfg.r, zero_a, std::vector<int>(static_cast<std::size_t>(cfg.n), 0)),
                    false);
    const ClassFunction d = Z.t_L_table(cfg.budget, cfg.force);
    const CycValue dn = inner_product(d, d, G.order());
    rep.add("<t_L, t_L> != 1 for the degenerate datum", dn.is_integer() && dn != S.integer(1), "integer != 1",
            detail::cyc_json(dn), "baseline A = 0, lambda_0 trivial");
  } else {
    rep.data["norm"] = detail::cyc_json(norm);
  }
  rep.wall_seconds = sw.seconds();
  return rep;
}

// ---------------------------------------------------------------- ladder

inline Report run_ladder(const Config& cfg, const RunOptions& opt) {
  Stopwatch sw;
  Report rep = detail::start("ladder", cfg);
  if (cfg.r < 2 || cfg.r > 4) throw ConfigError("ladder needs r in [2, 4]");
  const GroupCtx G(cfg.n, cfg.p, cfg.r);
  const CharCtx C(G, cfg.datum(), cfg.regular);
  const FiberEngine e = C.engine();
  const auto& cyc = C.scalars().cyc();
  const int r = cfg.r, m = lower_block(r);
  const auto samples = sample_elements(G, static_cast<std::size_t>(cfg.samples), cfg.seed);
  opt.say("ladder: " + std::to_string(samples.size()) + " elements");

  std::vector<FiberSpec> specs;
  for (int i = r % 2; i <= r; ++i) specs.push_back(spec_ladder(r, i));
  const std::size_t nl = specs.size();
  if (r == 4) {
    for (int i = m; i <= r - 1; ++i) specs.push_back(spec_piece_down(r, i));
    for (int i = r % 2 + 1; i <= m; ++i) specs.push_back(spec_piece_up(r, i));
  }
  int eq_fail = 0, diff_fail = 0, compared = 0;
  json eq_repro = nullptr, diff_repro = nullptr;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto v = e.run(samples[s], specs);
    auto L = [&](int i) { return v[static_cast<std::size_t>(i - r % 2)].value(cyc); };
    if (r <= 3) {
      for (std::size_t k = 1; k < nl; ++k)
        if (v[k].value(cyc) != v[0].value(cyc) && eq_fail++ == 0)
          eq_repro = {{"sample", s}, {"seed", cfg.seed}, {"x", samples[s].x.str()}};
      ++compared;
      continue;
    }
    // pieces against differences of neighbouring ladder values
    std::size_t k = nl;
    bool ok = true;
    for (int i = m; i <= r - 1; ++i) ok = ok && L(i) - L(i + 1) == v[k++].value(cyc);
    for (int i = r % 2 + 1; i <= m; ++i) ok = ok && L(i) - L(i - 1) == v[k++].value(cyc);
    if (!ok && diff_fail++ == 0) diff_repro = {{"sample", s}, {"seed", cfg.seed}, {"x", samples[s].x.str()}};
    ++compared;
  }
  json admissible = json::array();
  for (int i = r % 2; i <= r; ++i) admissible.push_back(i);
  rep.data["admissible"] = admissible;
  rep.data["elements"] = compared;
  if (r <= 3)
    rep.add("t_{L_i} pairwise equal", eq_fail == 0, 0, eq_fail, "independent fiber sums for each i", eq_repro);
  else
    rep.add("ladder differences equal the summed pieces", diff_fail == 0, 0, diff_fail,
            "pieces summed over their strata, independently of the ladder values", diff_repro);
  rep.wall_seconds = sw.seconds();
  return rep;
}

// ---------------------------------------------------------------- lemmas

inline std::vector<LemmaCase> lemma_cases(int r) {
  if (r == 4) return {LemmaCase::L42, LemmaCase::L43, LemmaCase::L44, LemmaCase::L45};
  return {LemmaCase::L42, LemmaCase::L44};
}

inline Report run_lemmas(const Config& cfg, const RunOptions& opt) {
  Stopwatch sw;
  Report rep = detail::start("lemmas", cfg);
  if (cfg.r < 2 || cfg.r > 4) throw ConfigError("lemmas need r in [2, 4]");
  const GroupCtx G(cfg.n, cfg.p, cfg.r);
  const LemmaCtx L(G, cfg.datum());
  for (LemmaCase c : lemma_cases(cfg.r)) {
    const std::string name = lemma_name(c);
    opt.say("lemmas: case " + name + ", " + std::to_string(cfg.lemma_samples) + " points");
    const FiberSpec s = L.stratum(c);
    SplitMix64 rng(cfg.seed ^ (0x9e37u * static_cast<uint64_t>(static_cast<int>(c) + 1)));
    int nonzero = 0, closed = 0, degenerate = 0, outside = 0;
    json repro = nullptr;
    for (int k = 0; k < cfg.lemma_samples; ++k) {
      const FiberPoint f = L.sample(s, rng);
      bool ok = true;
      if (!L.in_stratum(s, f)) {
        ++outside;
        ok = false;
      } else {
        try {
          const LemmaResult res = L.sum(c, f);
          if (!res.sum.is_zero()) ++nonzero, ok = false;
          if (!res.closed_form_ok) ++closed, ok = false;
        } catch (const DomainError&) {
          ++degenerate;
          ok = false;
        }
      }
      if (!ok && repro.is_null()) repro = {{"case", name}, {"point", k}, {"x", f.x.str()}, {"y", f.y.str()}};
    }
    const bool pass = nonzero == 0 && closed == 0 && degenerate == 0 && outside == 0;
    const bool has_closed = c == LemmaCase::L43 || c == LemmaCase::L45;
    rep.add("case " + name + ": the sum vanishes" + (has_closed ? " and the closed form matches" : ""), pass,
            json{{"nonzero", 0}, {"closed_form_mismatch", 0}, {"degenerate", 0}},
            json{{"nonzero", nonzero}, {"closed_form_mismatch", closed}, {"degenerate", degenerate},
                 {"outside_stratum", outside}, {"points", cfg.lemma_samples}},
            "exact exponential sum over the affine piece", repro);
  }
  rep.wall_seconds = sw.seconds();
  return rep;
}

// --------------------------------------------------------------- fourier

/// "all", "T" and "sample:K" (K random y conjugate into T), comma separated.
inline std::vector<Mat> parse_bases(const std::string& spec, const GroupCtx& G, uint64_t seed) {
  std::vector<Mat> out;
  std::set<ElementIndex> seen;
  auto push = [&](const Mat& y) {
    if (seen.insert(mat_index(y)).second) out.push_back(y);
  };
  SplitMix64 rng(seed ^ 0xba5e5ULL);
  for (const std::string& tok : detail::split(spec, ',')) {
    if (tok == "all") {
      for (const Mat& y : enumerate_gl(G.n(), G.p())) push(y);
    } else if (tok == "T") {
      for (const Mat& y : G.torus_elements()) push(y);
    } else if (tok.rfind("sample:", 0) == 0) {
      int k = 0;
      try {
        k = std::stoi(tok.substr(7));
      } catch (const std::exception&) {
        throw ConfigError("bad bases token '" + tok + "'");
      }
      if (k < 0) throw ConfigError("bad bases token '" + tok + "'");
      for (int added = 0; added < k;) {
        const Mat g = G.random_gl(rng);
        const Mat y = inverse(g) * G.random_torus(rng) * g;
        if (seen.count(mat_index(y))) continue;
        push(y);
        ++added;
      }
    } else {
      throw ConfigError("bad bases token '" + tok + "' (expected all, T or sample:K)");
    }
  }
  if (out.empty()) throw ConfigError("no fourier bases selected");
  return out;
}

inline json support_json(const SupportReport& s, const Config& cfg) {
  json strata = json::object();
  for (const auto& [k, v] : s.strata) strata[k] = v;
  json j{{"r", s.r},
         {"n", s.n},
         {"p", s.p},
         {"datum_hash", cfg.datum_hash()},
         {"bases", s.bases},
         {"points", s.points},
         {"support_size", s.support_size},
         {"predicted_support", s.predicted_support},
         {"off_support_violations", s.off_support_violations},
         {"residuals", s.residuals},
         {"constant_c", s.c_power >= 0 ? json{{"sign", s.c_sign}, {"q_power", s.c_power}} : json(nullptr)},
         {"strata", strata},
         {"status", s.pass() ? "pass" : "fail"}};
  if (!s.notes.empty()) j["notes"] = s.notes;
  return j;
}

inline void add_support_check(Report& rep, const std::string& name, const SupportReport& s, const std::string& basis) {
  rep.add(name, s.pass(), json{{"off_support_violations", 0}, {"residuals", 0}, {"constant_c", "+-q^k"}},
          json{{"off_support_violations", s.off_support_violations},
               {"residuals", s.residuals},
               {"support_size", s.support_size},
               {"constant_c", s.c ? detail::cyc_json(*s.c) : json(nullptr)}},
          basis);
}

inline void add_check(Report& rep, const CheckReport& c, const std::string& basis, bool expect_pass = true) {
  rep.add(c.name, c.pass() == expect_pass, json{{"failures", expect_pass ? "0" : "> 0"}}, detail::check_json(c), basis);
}

inline Report run_fourier2(const Config& cfg, const RunOptions& opt) {
  Stopwatch sw;
  Report rep = detail::start("fourier2", cfg);
  if (cfg.r != 2) throw ConfigError("fourier2 needs r = 2");
  const GroupCtx G(cfg.n, cfg.p, 2);
  const CharCtx C(G, cfg.datum(), cfg.regular);
  const std::string spec = opt.bases.empty() ? "all" : opt.bases;
  const auto bases = parse_bases(spec, G, cfg.seed);
  opt.say("fourier2: " + std::to_string(bases.size()) + " fibers");
  const SupportReport s = support_report_r2(C, bases, opt.jobs);
  add_support_check(rep, "transform vanishes off Z and equals c lambda_0 on Z", s,
                    "exact fiberwise DFT of t_K against the support predicate");
  rep.data["report"] = support_json(s, cfg);

  // predicate against parametrization, over the selected bases
  const FiberCoords fc{cfg.n, cfg.p, 2};
  std::set<std::pair<ElementIndex, uint64_t>> by_predicate, by_param;
  std::set<ElementIndex> chosen;
  for (const Mat& y : bases) {
    chosen.insert(mat_index(y));
    for (uint64_t code = 0; code < fc.size(); ++code)
      if (z_predicate_r2(C.datum(), y, fc.decode(code)).member) by_predicate.insert({mat_index(y), code});
  }
  for (const auto& pt : parametrized_z_r2(G, C.datum()))
    if (chosen.count(pt.first)) by_param.insert(pt);
  rep.add("predicate set equals the parametrized set", by_predicate == by_param && s.support_size == by_param.size(),
          by_param.size(), json{{"predicate", by_predicate.size()}, {"support", s.support_size}},
          "R_1 = -_xA_1 over T\\G times T");

  // negative control
  const CharCtx Z(G, make_datum(cfg.n, cfg.p, 2, {std::vector<int>(static_cast<std::size_t>(cfg.n), 0)},
                                std::vector<int>(static_cast<std::size_t>(cfg.n), 0)),
                  false);
  const SupportReport neg = support_report_r2(Z, {Mat::identity(cfg.n, cfg.p)}, opt.jobs);
  rep.add("degenerate datum is flagged", !neg.pass(), "off-support violations > 0",
          json{{"off_support_violations", neg.off_support_violations}}, "negative control A = 0, lambda_0 trivial");
  rep.wall_seconds = sw.seconds();
  return rep;
}

inline Report run_fourier3(const Config& cfg, const RunOptions& opt) {
  Stopwatch sw;
  Report rep = detail::start("fourier3", cfg);
  if (cfg.r != 3) throw ConfigError("fourier3 needs r = 3");
  const GroupCtx G(cfg.n, cfg.p, 3);
  const CharCtx C(G, cfg.datum(), cfg.regular);
  const GenericDatum& D = C.datum();
  const Scalars& S = C.scalars();
  const FiberCoords fc{cfg.n, cfg.p, 3};
  constexpr uint64_t kFullFiber = 10000;
  const bool full = fc.size() <= kFullFiber;
  rep.data["mode"] = full ? "full fibers" : "sampled";

  if (full) {
    const std::string spec = opt.bases.empty() ? "T,sample:5" : opt.bases;
    const auto bases = parse_bases(spec, G, cfg.seed);
    opt.say("fourier3: " + std::to_string(bases.size()) + " full fibers");
    const SupportReport s = support_report_r3(C, bases, Transport::Upper, opt.jobs);
    add_support_check(rep, "transform vanishes off Z and on Z', matches c q^#Xi psi(kappa) lambda_0 elsewhere", s,
                      "exact fiberwise DFT of t_K against the stratified prediction");
    rep.data["report"] = support_json(s, cfg);

    // stalk model and f on Z^empty, exhaustively over the same fibers
    std::map<int, uint64_t> cases;
    uint64_t model_fail = 0, f_fail = 0, f_points = 0;
    json repro = nullptr;
    for (const Mat& y : bases)
      for (uint64_t code = 0; code < fc.size(); ++code) {
        const auto R = fc.decode(code);
        const StalkProfile sp = stalk_profile_r3(D, S, y, R);
        if (sp.kase == 0) continue;
        ++cases[sp.kase];
        const bool ok = sp.brute_count == sp.model_count &&
                        (sp.kase == 3 ? sp.brute_sum == sp.predicted.value(S) : sp.brute_sum.is_zero());
        if (!ok && model_fail++ == 0) repro = {{"y", y.str()}, {"code", code}};
        const ZInfo z = z_predicate_r3(D, y, R);
        if (z.member && z.xi.empty()) {
          ++f_points;
          if (f_r3(D, y, R) != kappa_r3(D, z, R[0])) ++f_fail;
        }
      }
    json case_counts;
    for (const auto& [k, v] : cases) case_counts[std::to_string(k)] = v;
    rep.add("fiber model agrees with enumeration of the stalk", model_fail == 0 && cases.size() == 3, 0,
            json{{"failures", model_fail}, {"cases", case_counts}},
            "affine fiber over g^- enumerated point by point", repro);
    rep.add("f equals the predicted phase on Z^empty", f_fail == 0 && f_points > 0, 0,
            json{{"failures", f_fail}, {"points", f_points}}, "f from the explicit solution X^{-alpha}");
  } else {
    opt.say("fourier3: " + std::to_string(cfg.fourier_points) + " sampled points");
    const SupportReport s = support_report_r3_sampled(C, cfg.fourier_points, cfg.seed);
    add_support_check(rep, "transform vanishes off Z and on Z', matches the prediction elsewhere (sampled)", s,
                      "exact closed-form fiber sums at sampled points");
    rep.data["report"] = support_json(s, cfg);
  }

  // identities behind f; the transport of R_1 is the Ad(x) one
  const int n_id = std::max(cfg.samples, 200);
  add_check(rep, check_f_identity_r3(G, D, n_id, cfg.seed), "f against h^ on the fiber");
  add_check(rep, check_x_invariance_r3(G, D, n_id, cfg.seed + 1), "f at x and at t x");
  const CheckReport lower_f = check_f_identity_r3(G, D, n_id, cfg.seed, Transport::Lower);
  const CheckReport lower_x = check_x_invariance_r3(G, D, n_id, cfg.seed + 1, Transport::Lower);
  rep.data["lower_transport"] = {{"f_identity", detail::check_json(lower_f)},
                                 {"x_invariance", detail::check_json(lower_x)}};
  add_check(rep, check_descent_r3(G, D, 1000, cfg.seed + 2), "descent to the torus quotient");
  rep.wall_seconds = sw.seconds();
  return rep;
}

inline Report run_fourier4(const Config& cfg, const RunOptions& opt) {
  Stopwatch sw;
  Report rep = detail::start("fourier4-sampled", cfg);
  if (cfg.r != 4) throw ConfigError("fourier4-sampled needs r = 4");
  const GroupCtx G(cfg.n, cfg.p, 4);
  const CharCtx C(G, cfg.datum(), cfg.regular);
  const GenericDatum& D = C.datum();

  opt.say("fourier4: rewriting chain at 10^4 points");
  const ChainResult ch = chain_r4(G, D, 10000, cfg.seed);
  add_check(rep, ch.via_bch, "h-bar from the universal BCH polynomials");
  add_check(rep, ch.d2, "second display against the first");
  add_check(rep, ch.d3, "third display against the first");
  rep.data["chain"] = {{"placement_(1/6,1/3)", detail::check_json(ch.d4_sixth_first)},
                       {"placement_(1/3,1/6)", detail::check_json(ch.d4_third_first)},
                       {"resolved", ch.resolved}};
  rep.add("final display resolved to one coefficient placement", ch.resolved != "neither",
          "exactly one placement agrees", ch.resolved,
          "both placements of (1/3, 1/6) on ([X1,[X1,_xA3]], [X1,[_yX1,_xA3]]) against the first display");

  // tau-invariance uses the placement the chain selects
  const bool tau_swapped = ch.resolved == "(1/6,1/3)";
  opt.say("fourier4: tau invariance and elimination");
  add_check(rep, check_tau_invariance_r4(G, D, 1000, cfg.seed + 1, tau_swapped), "h^ at (x, y) and at tau(x, y)");
  add_check(rep, check_elim_last(G, D, cfg.samples, cfg.seed + 2), "h~ along the top block");
  add_check(rep, check_elim_block(G, D, std::max(1, cfg.samples / 4), cfg.seed + 3), "h~ along the middle block");

  opt.say("fourier4: " + std::to_string(cfg.fourier_points) + " exact transform points");
  const SupportReportR4 s = support_report_r4(C, cfg.fourier_points, cfg.seed + 4);
  json variants = json::object();
  const SupportReport* winner = nullptr;
  for (const auto& [v, r] : s.variants) {
    variants[v.str()] = support_json(r, cfg);
    if (v.str() == s.resolved) winner = &r;
  }
  rep.data["variants"] = variants;
  rep.data["resolved"] = s.resolved;
  if (winner)
    add_support_check(rep, "transform matches the prediction for the resolved variant", *winner,
                      "exact closed-form fiber sums at sampled points");
  else
    rep.add("transform matches the prediction for exactly one variant", false, "one variant", s.resolved,
            "exact closed-form fiber sums at sampled points");
  rep.wall_seconds = sw.seconds();
  return rep;
}

// ------------------------------------------------------------ compare-lk

/// Points where `lhs != s q^k rhs`.
inline uint64_t count_mismatch(const std::vector<CycValue>& lhs, const std::vector<CycValue>& rhs, int s, int64_t qk) {
  uint64_t bad = 0;
  for (std::size_t i = 0; i < lhs.size(); ++i)
    if (lhs[i] != rhs[i] * (s * qk)) ++bad;
  return bad;
}

/// Sign fitted at the first point where the scaled rhs is nonzero; 0 if none fits.
inline int fit_sign(const std::vector<CycValue>& lhs, const std::vector<CycValue>& rhs, int64_t qk) {
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    if (rhs[i].is_zero()) continue;
    if (lhs[i] == rhs[i] * qk) return 1;
    if (lhs[i] == rhs[i] * -qk) return -1;
    return 0;
  }
  return 1;
}

inline Report run_compare_lk(const Config& cfg, const RunOptions& opt) {
  Stopwatch sw;
  Report rep = detail::start("compare-lk", cfg);
  if (cfg.r < 2 || cfg.r > 3) throw ConfigError("compare-lk needs r in [2, 3]");
  const GroupCtx G(cfg.n, cfg.p, cfg.r);
  const CharCtx C(G, cfg.datum(), cfg.regular);
  const int dh = G.dim_H();
  const auto qk = static_cast<int64_t>(GroupCtx::ipow_u(static_cast<uint64_t>(cfg.p), dh));
  std::vector<CycValue> tl, tk;
  std::string domain;
  if (G.order() <= cfg.budget && cfg.r == 2) {
    opt.say("compare-lk: full tables");
    const ClassFunction L = cached_t_L(cfg, C, opt);
    const ClassFunction K = C.t_K_table(cfg.budget, cfg.force);
    tl = L.value;
    tk = K.value;
    domain = "full table (" + std::to_string(tl.size()) + ")";
  } else {
    opt.say("compare-lk: " + std::to_string(cfg.samples) + " sampled elements");
    for (const auto& g : sample_elements(G, static_cast<std::size_t>(cfg.samples), cfg.seed)) {
      tl.push_back(C.t_L(G.from_factored(g)));
      tk.push_back(C.t_K(g));
    }
    domain = "sampled (" + std::to_string(tl.size()) + ")";
  }
  // t_K = s q^dim_H t_L, and the literal t_L = s q^dim_H t_K
  const int s = fit_sign(tk, tl, qk);
  const uint64_t pointwise = s == 0 ? tl.size() : count_mismatch(tk, tl, s, qk);
  const int s_lit = fit_sign(tl, tk, qk);
  const uint64_t literal = count_mismatch(tl, tk, s_lit == 0 ? 1 : s_lit, qk);
  rep.data = {{"domain", domain},
              {"orientation", "t_K = s q^dim_H t_L"},
              {"sign", s},
              {"q_power", dh},
              {"pointwise_failures", pointwise},
              {"literal_orientation", "t_L = s q^dim_H t_K"},
              {"literal_failures", literal}};
  rep.add("t_K = s q^dim_H t_L with one global sign", s != 0 && pointwise == 0,
          json{{"q_power", dh}, {"pointwise_failures", 0}}, json{{"sign", s}, {"pointwise_failures", pointwise}},
          "t_L by coset scan, t_K by fiber sums");
  rep.wall_seconds = sw.seconds();
  return rep;
}

// ------------------------------------------------------------------- all

/// Suites that make sense for the config's r.
inline std::vector<std::string> applicable_suites(const Config& cfg) {
  if (!cfg.suites.empty()) return cfg.suites;
  std::vector<std::string> v;
  if (cfg.r >= 2) v.push_back("bch");
  v.push_back("group");
  v.push_back("characters");
  if (cfg.r >= 2 && cfg.r <= 4) {
    v.push_back("ladder");
    v.push_back("lemmas");
  }
  if (cfg.r == 2) v.push_back("fourier2");
  if (cfg.r == 3) v.push_back("fourier3");
  if (cfg.r == 4) v.push_back("fourier4-sampled");
  if (cfg.r == 2 || cfg.r == 3) v.push_back("compare-lk");
  return v;
}

inline Report run_suite(const std::string& name, const Config& cfg, const RunOptions& opt) {
  if (name == "bch") return run_bch(cfg, opt);
  if (name == "group") return run_group(cfg, opt);
  if (name == "characters") return run_characters(cfg, opt);
  if (name == "ladder") return run_ladder(cfg, opt);
  if (name == "lemmas") return run_lemmas(cfg, opt);
  if (name == "fourier2") return run_fourier2(cfg, opt);
  if (name == "fourier3") return run_fourier3(cfg, opt);
  if (name == "fourier4-sampled") return run_fourier4(cfg, opt);
  if (name == "compare-lk") return run_compare_lk(cfg, opt);
  throw ConfigError("unknown suite '" + name + "'");
}

inline std::vector<Report> run_all(const Config& cfg, const RunOptions& opt) {
  std::vector<Report> out;
  for (const std::string& s : applicable_suites(cfg)) out.push_back(run_suite(s, cfg, opt));
  return out;
}

}  // namespace epschar
