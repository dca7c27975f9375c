#pragma once
// Run configuration: JSON in, validated, canonical JSON out for hashing.

#include <openssl/evp.h>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "epschar/charfun.hpp"
#include "epschar/error.hpp"
#include "epschar/scalars.hpp"

namespace epschar {

using json = nlohmann::json;

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[md[k] >> 4];
    out += hex[md[k] & 15];
  }
  return out;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> v{"bch",      "group",    "characters",       "ladder",    "lemmas",
                                          "fourier2", "fourier3", "fourier4-sampled", "compare-lk"};
  return v;
}

struct Config {
  std::string name;
  int n = 2;
  int p = 3;
  int r = 2;
  std::vector<std::vector<int>> A;  // A[j-1] = diagonal of A_j
  std::vector<int> lambda0;
  uint64_t seed = 1;
  uint64_t budget = kDefaultBudget;
  int samples = 200;       // sampled elements for character checks
  int lemma_samples = 1000;  // stratum points per lemma case
  int fourier_points = 12; // sampled transform points where fibers are too large
  bool regular = true;     // false admits degenerate data (baselines only)
  bool force = false;
  std::vector<std::string> suites;  // what "all" runs; empty means every applicable suite

  GenericDatum datum() const { return make_datum(n, p, r, A, lambda0); }

  /// Sorted keys, no whitespace.
  json to_json() const {
    json j;
    j["name"] = name;
    j["n"] = n;
    j["p"] = p;
    j["r"] = r;
    j["A"] = A;
    j["lambda0"] = lambda0;
    j["seed"] = seed;
    j["budget"] = budget;
    j["samples"] = samples;
    j["lemma_samples"] = lemma_samples;
    j["fourier_points"] = fourier_points;
    j["regular"] = regular;
    j["force"] = force;
    j["suites"] = suites;
    return j;
  }
  std::string canonical() const { return to_json().dump(); }
  std::string hash() const { return sha256_hex(canonical()); }
  /// Hash of the mathematical datum only (n, p, r, A, lambda0).
  std::string datum_hash() const {
    json j{{"n", n}, {"p", p}, {"r", r}, {"A", A}, {"lambda0", lambda0}};
    return sha256_hex(j.dump());
  }

  /// Each violated invariant has its own message.
  void validate() const {
    if (n != 2 && n != 3) throw ConfigError("n must be 2 or 3, got " + std::to_string(n));
    if (p == 2 || !is_prime(p)) throw ConfigError("p must be an odd prime, got " + std::to_string(p));
    if (r < 1 || r > 6) throw ConfigError("r must lie in [1, 6], got " + std::to_string(r));
    if (p < r) throw ConfigError("p >= r violated: p = " + std::to_string(p) + ", r = " + std::to_string(r));
    if (static_cast<int>(A.size()) != r - 1)
      throw ConfigError("A must list r - 1 = " + std::to_string(r - 1) + " diagonals, got " + std::to_string(A.size()));
    for (std::size_t j = 0; j < A.size(); ++j)
      if (static_cast<int>(A[j].size()) != n)
        throw ConfigError("A_" + std::to_string(j + 1) + " must have n = " + std::to_string(n) + " entries");
    if (static_cast<int>(lambda0.size()) != n)
      throw ConfigError("lambda0 must have n = " + std::to_string(n) + " entries");
    if (regular && r >= 2) {
      const auto& top = A.back();
      for (int i = 0; i < n; ++i)
        for (int k = i + 1; k < n; ++k)
          if (((top[static_cast<std::size_t>(i)] - top[static_cast<std::size_t>(k)]) % p + p) % p == 0)
            throw ConfigError("A_" + std::to_string(r - 1) + " not regular semisimple: entries " +
                              std::to_string(top[static_cast<std::size_t>(i)]) + "," +
                              std::to_string(top[static_cast<std::size_t>(k)]) + " collide");
    }
    if (samples < 1) throw ConfigError("samples must be positive");
    if (lemma_samples < 1) throw ConfigError("lemma_samples must be positive");
    if (fourier_points < 1) throw ConfigError("fourier_points must be positive");
    for (const auto& s : suites)
      if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end())
        throw ConfigError("unknown suite '" + s + "' in suites");
    if (budget == 0) throw ConfigError("budget must be positive");
  }
};

inline Config parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::vector<std::string> known{"name", "n", "p", "r", "A", "lambda0", "seed",
                                              "budget", "samples", "lemma_samples", "fourier_points", "regular", "force", "suites"};
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError("unknown config key '" + k + "'");
  for (const char* k : {"n", "p", "r"})
    if (!j.contains(k)) throw ConfigError(std::string("missing config key '") + k + "'");
  Config c;
  try {
    c.name = j.value("name", std::string());
    c.n = j.at("n").get<int>();
    c.p = j.at("p").get<int>();
    c.r = j.at("r").get<int>();
    c.A = j.value("A", std::vector<std::vector<int>>{});
    c.lambda0 = j.value("lambda0", std::vector<int>(static_cast<std::size_t>(c.n), 0));
    c.seed = j.value("seed", uint64_t{1});
    c.budget = j.value("budget", kDefaultBudget);
    c.samples = j.value("samples", 200);
    c.lemma_samples = j.value("lemma_samples", 1000);
    c.fourier_points = j.value("fourier_points", 12);
    c.regular = j.value("regular", true);
    c.force = j.value("force", false);
    c.suites = j.value("suites", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  for (auto& v : c.A)
    for (auto& a : v) a = ((a % c.p) + c.p) % c.p;
  c.validate();
  return c;
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

}  // namespace epschar
