#pragma once
// Machine-readable suite reports.

#include <chrono>
#include <string>
#include <vector>

#include "epschar/config.hpp"

namespace epschar {

struct CheckRecord {
  std::string name;
  bool pass = false;
  json expected;
  json computed;
  std::string basis;  // how the expected value is obtained
  json repro;         // seeds, indices or points that reproduce a failure
};

struct Report {
  std::string suite;
  std::string config_hash;
  std::vector<CheckRecord> checks;
  json data = json::object();
  double wall_seconds = 0;

  bool pass() const {
    if (checks.empty()) return false;
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  CheckRecord& add(std::string name, bool pass, json expected, json computed, std::string basis, json repro = nullptr) {
    checks.push_back({std::move(name), pass, std::move(expected), std::move(computed), std::move(basis), std::move(repro)});
    return checks.back();
  }

  /// Identical inputs give identical output apart from "wall_seconds".
  json to_json(bool with_time = true) const {
    json j;
    j["suite"] = suite;
    j["config_hash"] = config_hash;
    j["status"] = pass() ? "pass" : "fail";
    json cs = json::array();
    for (const auto& c : checks) {
      json e{{"name", c.name}, {"status", c.pass ? "pass" : "fail"}, {"expected", c.expected},
             {"computed", c.computed}, {"basis", c.basis}};
      if (!c.repro.is_null()) e["repro"] = c.repro;
      cs.push_back(e);
    }
    j["checks"] = cs;
    j["data"] = data;
    if (with_time) j["wall_seconds"] = wall_seconds;
    return j;
  }
};

/// Several suite reports under one status.
inline json combine_reports(const std::vector<Report>& reports, bool with_time = true) {
  json j;
  bool ok = !reports.empty();
  json arr = json::array();
  for (const auto& r : reports) {
    ok = ok && r.pass();
    arr.push_back(r.to_json(with_time));
  }
  j["status"] = ok ? "pass" : "fail";
  j["suites"] = arr;
  return j;
}

class Stopwatch {
 public:
  Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_;
};

}  // namespace epschar
