// epschar: run verification suites from a JSON config.
//
// Exit codes: 0 all checks pass, 1 some check failed, 2 bad config or
// arguments, 3 enumeration budget exceeded, 4 any other error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "epschar/suites.hpp"

using namespace epschar;

namespace {

enum Exit { kPass = 0, kFail = 1, kConfig = 2, kBudget = 3, kOther = 4 };

struct Common {
  std::string config;
  std::string out;
  std::string cache_dir;
  uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 1;
  bool force = false;
  bool quiet = false;
};

void add_common(CLI::App* app, Common& c, bool config_required) {
  auto* opt = app->add_option("--config", c.config, "config JSON")->check(CLI::ExistingFile);
  if (config_required) opt->required();
  app->add_option("--out", c.out, "output file");
  app->add_option("--cache-dir", c.cache_dir, "cache directory (default: $EPSCHAR_CACHE, then .epschar-cache)");
  app->add_option("--seed", c.seed, "override the config seed")->each([&c](const std::string&) { c.seed_set = true; });
  app->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  app->add_flag("--force", c.force, "allow enumerations above the budget");
  app->add_flag("-q,--quiet", c.quiet, "no progress messages");
}

Config load(const Common& c) {
  Config cfg = load_config(c.config);
  if (c.seed_set) cfg.seed = c.seed;
  if (c.force) cfg.force = true;
  return cfg;
}

/// A config for commands that only need (n, p, r): A_j = diag(0, 1, .., n-1).
Config plain_config(int n, int p, int r) {
  Config cfg;
  cfg.name = "plain";
  cfg.n = n;
  cfg.p = p;
  cfg.r = r;
  std::vector<int> d(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = i;
  cfg.A.assign(static_cast<std::size_t>(std::max(r - 1, 0)), d);
  cfg.lambda0.assign(static_cast<std::size_t>(n), 0);
  cfg.validate();
  return cfg;
}

RunOptions options(const Common& c) {
  RunOptions o;
  o.jobs = c.jobs;
  o.cache_dir = c.cache_dir;
  if (!c.quiet) o.log = [](const std::string& s) { std::cerr << s << '\n'; };
  return o;
}

void write_json(const json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << '\n';
}

int finish(const std::vector<Report>& reports, const std::string& out) {
  for (const Report& r : reports)
    for (const CheckRecord& c : r.checks)
      std::cerr << (c.pass ? "PASS " : "FAIL ") << r.suite << ": " << c.name << '\n';
  const json j = reports.size() == 1 ? reports.front().to_json() : combine_reports(reports);
  write_json(j, out);
  bool ok = !reports.empty();
  for (const Report& r : reports) ok = ok && r.pass();
  return ok ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact character and Fourier checks for GL_n over truncated polynomial rings"};
  app.require_subcommand(1);

  Common c;
  int r_arg = 0, n_arg = 2, p_arg = 5;
  std::string emit, bases;

  auto* bch = app.add_subcommand("bch", "BCH tables, Lie certification and golden comparison");
  add_common(bch, c, false);
  bch->add_option("--r", r_arg, "truncation order (2..6)");
  bch->add_option("--emit", emit, "write the z, u, u' tables as JSON");

  auto* group = app.add_subcommand("group", "group law, coordinates and cardinalities");
  add_common(group, c, false);
  auto* selftest = group->add_subcommand("selftest", "group suite for (n, p, r) without a config file");
  add_common(selftest, c, false);
  selftest->add_option("--n", n_arg)->required();
  selftest->add_option("--p", p_arg)->required();
  selftest->add_option("--r", r_arg)->required();

  auto* induce = app.add_subcommand("induce", "induced character t_L; --out writes the binary table");
  add_common(induce, c, true);
  auto* ladder = app.add_subcommand("ladder", "ladder equalities and piece additivity");
  add_common(ladder, c, true);
  auto* lemmas = app.add_subcommand("lemmas", "vanishing exponential sums");
  add_common(lemmas, c, true);
  auto* fourier = app.add_subcommand("fourier", "fiberwise Fourier transform: support, values and identities");
  add_common(fourier, c, true);
  fourier->add_option("--r", r_arg, "must match the config");
  fourier->add_option("--bases", bases, "all | T | sample:K, comma separated");
  auto* compare = app.add_subcommand("compare-lk", "t_L against t_K");
  add_common(compare, c, true);
  auto* all = app.add_subcommand("all", "every suite that applies to the config");
  add_common(all, c, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfig;
  }

  try {
    RunOptions opt = options(c);
    if (bch->parsed()) {
      Config cfg = c.config.empty() ? plain_config(2, 7, r_arg ? r_arg : 4) : load(c);
      if (r_arg && r_arg != cfg.r) {
        if (!c.config.empty()) throw ConfigError("--r disagrees with the config");
      }
      if (!emit.empty()) {
        std::ofstream out(emit, std::ios::trunc);
        if (!out) throw Error("cannot write " + emit);
        out << bch_tables_json(bch::tables(std::max(cfg.r, 2))).dump(2) << '\n';
      }
      return finish({run_bch(cfg, opt)}, c.out);
    }
    if (group->parsed()) {
      Config cfg;
      if (selftest->parsed())
        cfg = plain_config(n_arg, p_arg, r_arg);
      else if (!c.config.empty())
        cfg = load(c);
      else
        throw ConfigError("group needs --config or the selftest subcommand");
      if (c.seed_set) cfg.seed = c.seed;
      return finish({run_group(cfg, opt)}, c.out);
    }
    const Config cfg = load(c);
    if (induce->parsed()) {
      opt.out = c.out;
      return finish({run_characters(cfg, opt)}, "");
    }
    if (ladder->parsed()) return finish({run_ladder(cfg, opt)}, c.out);
    if (lemmas->parsed()) return finish({run_lemmas(cfg, opt)}, c.out);
    if (fourier->parsed()) {
      if (r_arg && r_arg != cfg.r)
        throw ConfigError("--r " + std::to_string(r_arg) + " disagrees with the config (r = " + std::to_string(cfg.r) +
                          ")");
      opt.bases = bases;
      const std::string suite = cfg.r == 2 ? "fourier2" : cfg.r == 3 ? "fourier3" : "fourier4-sampled";
      if (cfg.r < 2 || cfg.r > 4) throw ConfigError("fourier needs r in [2, 4]");
      return finish({run_suite(suite, cfg, opt)}, c.out);
    }
    if (compare->parsed()) return finish({run_compare_lk(cfg, opt)}, c.out);
    if (all->parsed()) return finish(run_all(cfg, opt), c.out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << " (required " << e.required() << "; pass --force)\n";
    return kBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
  return kOther;
}
