#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "epschar/suites.hpp"

using namespace epschar;
namespace fs = std::filesystem;

namespace {

json base_config() { return json{{"n", 2}, {"p", 3}, {"r", 2}, {"A", {{1, 2}}}, {"lambda0", {0, 1}}}; }

std::string config_error(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("epschar-test-" + std::to_string(::getpid())) / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << s;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(EPSCHAR_BIN) + " " + args + " -q > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST(Config, ValidAndDefaults) {
  const Config c = parse_config(base_config());
  EXPECT_EQ(c.n, 2);
  EXPECT_EQ(c.seed, 1u);
  EXPECT_EQ(c.samples, 200);
  EXPECT_TRUE(c.suites.empty());
  EXPECT_EQ(c.datum().a(1), Mat::diag(3, {1, 2}));
}

TEST(Config, DistinctMessages) {
  json j = base_config();
  j["r"] = 4;
  j["A"] = {{0, 1}, {0, 2}, {1, 2}};
  EXPECT_NE(config_error(j).find("p >= r violated"), std::string::npos);

  j = base_config();
  j["A"] = {{1, 1}};
  EXPECT_NE(config_error(j).find("A_1 not regular semisimple: entries 1,1 collide"), std::string::npos);
  j["A"] = {{1, 4}};  // 4 = 1 mod 3
  EXPECT_NE(config_error(j).find("not regular semisimple"), std::string::npos);

  j = base_config();
  j["p"] = 9;
  EXPECT_NE(config_error(j).find("odd prime"), std::string::npos);
  j = base_config();
  j["n"] = 4;
  EXPECT_NE(config_error(j).find("n must be 2 or 3"), std::string::npos);
  j = base_config();
  j["A"] = {{1, 2}, {0, 1}};
  EXPECT_NE(config_error(j).find("r - 1 = 1 diagonals"), std::string::npos);
  j = base_config();
  j["lambda0"] = {1};
  EXPECT_NE(config_error(j).find("lambda0 must have n = 2"), std::string::npos);
  j = base_config();
  j["colour"] = 1;
  EXPECT_NE(config_error(j).find("unknown config key 'colour'"), std::string::npos);
  j = base_config();
  j.erase("p");
  EXPECT_NE(config_error(j).find("missing config key 'p'"), std::string::npos);
  j = base_config();
  j["suites"] = {"group", "bogus"};
  EXPECT_NE(config_error(j).find("unknown suite 'bogus'"), std::string::npos);
  j = base_config();
  j["n"] = "two";
  EXPECT_NE(config_error(j).find("malformed config"), std::string::npos);

  // degenerate data are admitted only when asked for
  j = base_config();
  j["A"] = {{0, 0}};
  EXPECT_FALSE(config_error(j).empty());
  j["regular"] = false;
  EXPECT_TRUE(config_error(j).empty());
}

TEST(Config, CanonicalFormAndHash) {
  const Config a = parse_config(base_config());
  const std::string canon = a.canonical();
  EXPECT_EQ(canon.find(' '), std::string::npos);
  EXPECT_EQ(canon.find('\n'), std::string::npos);
  EXPECT_LT(canon.find("\"A\""), canon.find("\"budget\""));
  // key order and unreduced entries in the input do not matter
  const Config b = parse_config(json::parse(R"({"lambda0":[0,1],"A":[[4,-1]],"r":2,"p":3,"n":2})"));
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 64u);
  Config c = a;
  c.seed = 2;
  EXPECT_NE(a.hash(), c.hash());
  EXPECT_EQ(a.datum_hash(), c.datum_hash());
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Config, ShippedConfigsLoad) {
  for (const char* name : {"n2p3r2", "n2p3r3", "n2p5r4", "n3p7r3"})
    EXPECT_NO_THROW(load_config(std::string(EPSCHAR_CONFIG_DIR) + "/" + name + ".json")) << name;
  EXPECT_THROW(load_config("/nonexistent/cfg.json"), ConfigError);
  const Config g = load_config(std::string(EPSCHAR_CONFIG_DIR) + "/n3p7r3.json");
  EXPECT_EQ(applicable_suites(g), (std::vector<std::string>{"bch", "group"}));
}

TEST(Cache, RoundTripAndDeterminism) {
  const Config cfg = parse_config(base_config());
  GroupCtx G(2, 3, 2);
  CharCtx C(G, cfg.datum());
  const ClassFunction t = C.t_L_table();
  const std::string a = encode_table(t, 2, 3, 2);
  EXPECT_EQ(a, encode_table(C.t_L_table(), 2, 3, 2));
  EXPECT_EQ(a.substr(0, 4), "EPSC");
  CacheStatus st = CacheStatus::Missing;
  const auto back = decode_table(a, C.scalars(), 2, 2, &st);
  ASSERT_TRUE(back.has_value());
  EXPECT_EQ(st, CacheStatus::Hit);
  EXPECT_EQ(back->index, t.index);
  EXPECT_EQ(back->value, t.value);
  EXPECT_EQ(back->name, t.name);

  const fs::path d1 = scratch("c1"), d2 = scratch("c2");
  Cache(d1).store(cfg, t);
  Cache(d2).store(cfg, t);
  EXPECT_EQ(read_file(Cache(d1).path_for(cfg, "t_L")), read_file(Cache(d2).path_for(cfg, "t_L")));
}

TEST(Cache, CorruptAndStaleAreRecomputed) {
  const Config cfg = parse_config(base_config());
  GroupCtx G(2, 3, 2);
  CharCtx C(G, cfg.datum());
  const fs::path dir = scratch("c3");
  const Cache cache(dir);
  int computed = 0;
  std::vector<std::string> warnings;
  auto compute = [&] {
    ++computed;
    return C.t_L_table();
  };
  auto warn = [&](const std::string& w) { warnings.push_back(w); };
  CacheStatus st = CacheStatus::Hit;
  const ClassFunction first = cache.get_or_compute(cfg, "t_L", C.scalars(), compute, &st, warn);
  EXPECT_EQ(st, CacheStatus::Missing);
  cache.get_or_compute(cfg, "t_L", C.scalars(), compute, &st, warn);
  EXPECT_EQ(st, CacheStatus::Hit);
  EXPECT_EQ(computed, 1);

  // flip one payload byte: checksum mismatch
  const fs::path path = cache.path_for(cfg, "t_L");
  std::string bytes = read_file(path);
  bytes[100] = static_cast<char>(bytes[100] ^ 1);
  write_file(path, bytes);
  const ClassFunction again = cache.get_or_compute(cfg, "t_L", C.scalars(), compute, &st, warn);
  EXPECT_EQ(st, CacheStatus::Corrupt);
  EXPECT_EQ(computed, 2);
  EXPECT_EQ(again.value, first.value);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("corrupt"), std::string::npos);

  // another version with a valid checksum: stale
  write_file(path, encode_table(first, 2, 3, 2, kCacheVersion + 1));
  cache.get_or_compute(cfg, "t_L", C.scalars(), compute, &st, warn);
  EXPECT_EQ(st, CacheStatus::Stale);
  EXPECT_EQ(computed, 3);

  // truncated file
  write_file(path, read_file(path).substr(0, 20));
  cache.get_or_compute(cfg, "t_L", C.scalars(), compute, &st, warn);
  EXPECT_EQ(st, CacheStatus::Corrupt);
  EXPECT_EQ(computed, 4);
  cache.get_or_compute(cfg, "t_L", C.scalars(), compute, &st, warn);
  EXPECT_EQ(st, CacheStatus::Hit);
}

TEST(Cache, DirectoryPrecedence) {
  ::setenv("EPSCHAR_CACHE", "/tmp/from-env", 1);
  EXPECT_EQ(resolve_cache_dir(""), fs::path("/tmp/from-env"));
  EXPECT_EQ(resolve_cache_dir("/tmp/flag"), fs::path("/tmp/flag"));
  ::unsetenv("EPSCHAR_CACHE");
  EXPECT_EQ(resolve_cache_dir(""), fs::path(".epschar-cache"));
}

TEST(Report, DeterministicModuloWallTime) {
  const Config cfg = parse_config(base_config());
  RunOptions opt;
  opt.cache_dir = scratch("c4").string();
  for (const char* suite : {"bch", "group", "characters", "fourier2", "compare-lk"}) {
    const Report a = run_suite(suite, cfg, opt);
    const Report b = run_suite(suite, cfg, opt);
    EXPECT_TRUE(a.pass()) << suite;
    // the characters report records whether the table came from the cache
    json ja = a.to_json(false), jb = b.to_json(false);
    if (std::string(suite) == "characters") {
      ja["data"]["table"].erase("cache");
      jb["data"]["table"].erase("cache");
    }
    EXPECT_EQ(ja.dump(), jb.dump()) << suite;
    EXPECT_TRUE(a.to_json().contains("wall_seconds"));
    EXPECT_FALSE(ja.contains("wall_seconds"));
  }
}

TEST(Report, FailuresCarryReproduction) {
  Report r;
  r.suite = "x";
  EXPECT_FALSE(r.pass());  // no checks is not a pass
  r.add("ok", true, 1, 1, "b");
  EXPECT_TRUE(r.pass());
  r.add("bad", false, 0, 3, "b", json{{"seed", 5}});
  EXPECT_FALSE(r.pass());
  const json j = r.to_json();
  EXPECT_EQ(j["status"], "fail");
  EXPECT_EQ(j["checks"][1]["repro"]["seed"], 5);
  EXPECT_FALSE(j["checks"][0].contains("repro"));
  EXPECT_EQ(combine_reports({r})["status"], "fail");
}

TEST(Suites, BasesParsing) {
  GroupCtx G(2, 3, 3);
  EXPECT_EQ(parse_bases("all", G, 1).size(), 48u);
  EXPECT_EQ(parse_bases("T", G, 1).size(), 4u);
  EXPECT_EQ(parse_bases("T,sample:5", G, 1).size(), 9u);
  EXPECT_EQ(parse_bases("T,sample:5", G, 1), parse_bases("T,sample:5", G, 1));
  EXPECT_THROW(parse_bases("sample:x", G, 1), ConfigError);
  EXPECT_THROW(parse_bases("B", G, 1), ConfigError);
  EXPECT_THROW(parse_bases("", G, 1), ConfigError);
}

TEST(Suites, WeylStabilizer) {
  EXPECT_EQ(weyl_stabilizer({0, 1}, 3), 1u);
  EXPECT_EQ(weyl_stabilizer({0, 0}, 3), 2u);
  EXPECT_EQ(weyl_stabilizer({0, 2}, 3), 2u);  // 2 = 0 mod p - 1
  EXPECT_EQ(weyl_stabilizer({1, 1, 2}, 7), 2u);
  EXPECT_EQ(weyl_stabilizer({0, 0, 0}, 5), 6u);
}

TEST(Cli, ExitCodesAndOutputs) {
  const std::string cfg = std::string(EPSCHAR_CONFIG_DIR) + "/n2p3r2.json";
  const fs::path dir = scratch("cli");
  EXPECT_EQ(run_cli("group selftest --n 2 --p 3 --r 2"), 0);
  EXPECT_EQ(run_cli("bch --r 4 --emit " + (dir / "t.json").string() + " --out " + (dir / "bch.json").string()), 0);
  const json emitted = json::parse(read_file(dir / "t.json"));
  EXPECT_EQ(emitted["r"], 4);
  EXPECT_EQ(emitted["z"][1][0][0], "1/2");
  EXPECT_EQ(json::parse(read_file(dir / "bch.json"))["status"], "pass");

  // bad config and bad arguments
  write_file(dir / "bad.json", R"({"n":2,"p":3,"r":4,"A":[[0,1],[0,2],[1,2]]})");
  EXPECT_EQ(run_cli("group --config " + (dir / "bad.json").string()), 2);
  EXPECT_EQ(run_cli("bch --r 9"), 2);
  EXPECT_EQ(run_cli("fourier --r 3 --config " + cfg), 2);
  EXPECT_EQ(run_cli("nosuch"), 2);

  // budget refusal, then --force
  write_file(dir / "small.json", R"({"n":2,"p":3,"r":2,"A":[[1,2]],"budget":100})");
  EXPECT_EQ(run_cli("induce --config " + (dir / "small.json").string() + " --cache-dir " + (dir / "c").string()), 3);

  // induce writes a decodable table; EPSCHAR_CACHE is honoured
  const std::string env = "EPSCHAR_CACHE=" + (dir / "envcache").string() + " ";
  const int st = std::system((env + EPSCHAR_BIN + " induce -q --config " + cfg + " --out " + (dir / "tL.bin").string() +
                              " > /dev/null 2>&1")
                                 .c_str());
  ASSERT_TRUE(WIFEXITED(st));
  EXPECT_EQ(WEXITSTATUS(st), 0);
  EXPECT_FALSE(fs::is_empty(dir / "envcache"));
  GroupCtx G(2, 3, 2);
  CharCtx C(G, load_config(cfg).datum());
  CacheStatus cs = CacheStatus::Missing;
  const auto t = decode_table(read_file(dir / "tL.bin"), C.scalars(), 2, 2, &cs);
  ASSERT_TRUE(t.has_value());
  EXPECT_EQ(t->index.size(), 3888u);
  EXPECT_EQ(t->value, C.t_L_table().value);

  // a failing check gives exit code 1: degenerate datum, norm is not 1
  write_file(dir / "degenerate.json", R"({"n":2,"p":3,"r":2,"A":[[0,0]],"regular":false})");
  EXPECT_EQ(run_cli("fourier --config " + (dir / "degenerate.json").string()), 1);
}
