#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hfbdyn/bench/commands.hpp"
#include "hfbdyn/bench/selftest.hpp"

namespace bench = hfbdyn::bench;

namespace {

struct Flags {
  std::string config;
  std::string out;
  int workers = 1;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  std::string fault;
};

void add_common(CLI::App* cmd, Flags& f, bool needs_config) {
  auto* c = cmd->add_option("--config", f.config, "experiment config (JSON)");
  if (needs_config) c->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory (default: $HFBDYN_OUT/<command>-<hash>)");
  cmd->add_option("--workers", f.workers, "worker threads for sweeps")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "override every seed in the config");
  cmd->add_option("--override", f.overrides, "dot-path JSON override, key=value")->take_all();
}

int fail(const std::exception& e) {
  std::cout << bench::error_json(e).dump() << std::endl;
  return bench::exit_code(e);
}

int run_selftest(const Flags& f) {
  bench::SelftestOptions o;
  if (f.seed) o.seed = *f.seed;
  if (!f.fault.empty()) {
    if (f.fault != "jw-string") throw hfbdyn::ConfigError("unknown fault '" + f.fault + "' (expected jw-string)");
    o.drop_string = true;
  }
  const auto results = bench::run_selftest(o);
  nlohmann::json suites = nlohmann::json::array();
  for (const auto& r : results) {
    std::cerr << (r.passed ? "PASS " : "FAIL ") << r.name << "  worst=" << bench::format_double(r.worst) << "  "
              << r.detail << "\n";
    suites.push_back({{"name", r.name}, {"passed", r.passed}, {"worst", r.worst}, {"detail", r.detail}});
  }
  const bool ok = bench::all_passed(results);
  std::cout << nlohmann::json{{"command", "selftest"}, {"passed", ok}, {"suites", suites}}.dump() << std::endl;
  return ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-dependent HFB dynamics on a momentum torus, checked against exact Fock-space evolution"};
  app.require_subcommand(1);
  Flags f;
  auto* evolve = app.add_subcommand("evolve", "integrate the HFB flow and write the trajectory CSV");
  auto* compare = app.add_subcommand("compare", "error kernels of the HFB state against the exact evolution");
  auto* appendix = app.add_subcommand("appendix-a", "translation-invariant ground-state scan and pairing bounds");
  auto* selftest = app.add_subcommand("selftest", "run the built-in invariant suites");
  add_common(evolve, f, true);
  add_common(compare, f, true);
  add_common(appendix, f, true);
  selftest->add_option("--seed", f.seed, "seed for the random samples");
  selftest->add_option("--fault", f.fault, "inject a fault (jw-string)")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cout << nlohmann::json{{"error", "config"}, {"message", e.what()}, {"exit_code", 2}}.dump() << std::endl;
    return 2;
  }

  try {
    if (selftest->parsed()) return run_selftest(f);
    const auto config = bench::load_config(f.config, f.overrides, f.seed);
    const bench::RunOptions ro{f.out, f.workers};
    bench::CommandResult r;
    if (evolve->parsed()) r = bench::cmd_evolve(config, ro);
    else if (compare->parsed()) r = bench::cmd_compare(config, ro);
    else r = bench::cmd_appendix_a(config, ro);
    std::cout << r.summary << std::endl;
    return 0;
  } catch (const std::exception& e) {
    return fail(e);
  }
}
