#include "hfbdyn/bench/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

namespace hfbdyn::bench {

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& f) {
  const std::size_t w = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < w; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!first) first = std::current_exception();
          failed = true;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

GeneralizedDensityMatrix initial_state(const ExperimentConfig& config, const Lattice& lattice) {
  const auto& I = config.initial;
  switch (I.kind) {
    case InitialKind::ffg:
      return assemble(ffg_symbol(lattice), lattice);
    case InitialKind::fermi_sea:
      return assemble(fermi_sea_symbol(lattice), lattice);
    case InitialKind::lambda_state: {
      if (!I.profile.empty()) return lambda_state(lattice, I.profile).state;
      const auto& n = lattice.particle_counts();
      if (lattice.spins() != 2 || n[0] != n[1])
        throw ConfigError("lambda-state needs two spins with equal particle counts");
      return lambda_state(lattice, smooth_step_profile(lattice, n[0], I.width)).state;
    }
    case InitialKind::random_pure: {
      RandomMapOptions o;
      o.fills = lattice.particles();
      return state_of(random_bogoliubov(lattice.size(), I.seed, o));
    }
  }
  throw ConfigError("unknown initial state kind");
}

EvolveOptions evolve_options(const ExperimentConfig& config) {
  EvolveOptions o;
  o.variant = config.dynamics.variant;
  o.integrator = config.dynamics.integrator;
  o.stride = config.dynamics.snapshot_stride;
  return o;
}

CsvTable trajectory_table(const Trajectory& traj, const Lattice& lattice) {
  CsvTable t({"t", "trace_omega", "hfb_energy", "purity_residual", "alpha_hs_norm", "s1", "s2", "s3"});
  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    const auto r = semiclassical_report(traj.states[n], lattice, traj.times[n]);
    const auto& l = traj.log[n];
    t.add_row({traj.times[n], l.trace_omega, l.energy, l.purity_residual, l.alpha_hs, r.s1, r.s2, r.s3});
  }
  return t;
}

Lattice sweep_lattice(const ExperimentConfig& config, int n) {
  LatticeSpec spec = config.lattice;
  spec.particle_counts = split_particles(n, spec.spin_count);
  return Lattice(spec);
}

std::vector<KernelRow> compare_run(const ExperimentConfig& config, const Lattice& lattice) {
  if (!config.oracle.enabled) throw SchemaError("/oracle/enabled", "compare needs the oracle enabled");
  if (lattice.size() > config.oracle.l_guard)
    throw GuardError("L = " + std::to_string(lattice.size()) + " modes exceeds the oracle guard " +
                     std::to_string(config.oracle.l_guard) + "; reduce the cutoff K or the spin count S");
  std::vector<std::vector<Flavor>> sigs;
  for (const auto& s : config.oracle.signatures) sigs.push_back(parse_signature(s));

  const PotentialSpec V = config.make_potential(lattice);
  const auto g0 = initial_state(config, lattice);
  const auto traj = evolve(g0, V, lattice, config.dynamics.T, config.dynamics.dt, evolve_options(config));
  const FockSpace space = fock_space(lattice.size(), config.oracle.l_guard);
  FockVector psi = gaussian_prepare(bloch_messiah(g0), space);
  const auto prop = ExactPropagator::from_model(lattice, V.with_coupling(traj.coupling), space);
  const double root_n = std::sqrt(static_cast<double>(lattice.particles()));

  std::vector<KernelRow> rows;
  double t_prev = 0.0;
  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    const double t = traj.times[n];
    if (t > t_prev) psi = prop.evolve(psi, t - t_prev, lattice.epsilon());
    t_prev = t;
    for (const auto& sig : sigs) {
      const auto k = error_kernel(psi, traj.states[n], sig);
      rows.push_back({t, k.order / 2, to_string(sig), k.err_hs, k.wick_hs, k.ratio(), k.err_hs / root_n});
    }
  }
  return rows;
}

CsvTable kernel_table(const std::vector<KernelRow>& rows) {
  CsvTable t({"t", "j", "signature", "err_hs", "wick_hs", "relative", "ratio"});
  for (const auto& r : rows)
    t.add_row({r.t, static_cast<long long>(r.j), r.signature, r.err_hs, r.wick_hs, r.relative, r.ratio});
  return t;
}

AppendixResult appendix_a(const ExperimentConfig& config) {
  AppendixResult out;
  const Lattice lat = config.make_lattice();
  const PotentialSpec V = config.make_potential(lat);
  out.scan = ground_state_scan(lat, V, config.appendix.trials, config.appendix.seed);
  for (std::size_t i = 0; i < out.scan.gaps.size(); ++i)
    out.scan_table.add_row({static_cast<long long>(i), out.scan.ffg_energy + out.scan.gaps[i], out.scan.gaps[i]});

  PairingBoundOptions po;
  po.dimension = config.lattice.dimension;
  po.width = config.appendix.width;
  po.margin = config.appendix.margin;
  po.potential = config.potential;
  po.params = config.potential_params;
  if (!config.appendix.n_grid.empty()) out.bounds = pairing_bound_check(config.appendix.n_grid, po);
  for (const auto& r : out.bounds)
    out.bound_table.add_row({static_cast<long long>(r.particles), static_cast<long long>(r.cutoff), r.energy_gap,
                             r.alpha_hs_sq_ratio, r.grad_alpha_ratio, r.s1_ratio});

  for (int count : admissible_counts(lat)) {
    if (count == 0) continue;
    LatticeSpec spec = config.lattice;
    spec.particle_counts.assign(static_cast<std::size_t>(spec.spin_count), count);
    const Lattice l2(spec);
    const auto cp = chemical_potential(l2, count);
    const double e = hfb_energy_ti(ffg_symbol(l2), config.make_potential(l2), l2);
    out.ffg_table.add_row({static_cast<long long>(count), cp.k_fermi * cp.k_fermi, cp.mu, e});
  }

  auto& s = out.summary;
  s["command"] = "appendix-a";
  s["trials"] = out.scan.gaps.size();
  s["ffg_energy"] = out.scan.ffg_energy;
  s["min_gap"] = out.scan.min_gap;
  s["argmin"] = out.scan.argmin;
  s["zero_gap_non_ffg"] = out.scan.zero_gap_non_ffg;
  double ma = 0.0, mg = 0.0, ms = 0.0;
  std::vector<double> n, a, g, s1;
  for (const auto& r : out.bounds) {
    ma = std::max(ma, r.alpha_hs_sq_ratio);
    mg = std::max(mg, r.grad_alpha_ratio);
    ms = std::max(ms, r.s1_ratio);
    n.push_back(r.particles);
    a.push_back(r.alpha_hs_sq_ratio);
    g.push_back(r.grad_alpha_ratio);
    s1.push_back(r.s1_ratio);
  }
  s["max_alpha_hs_sq_ratio"] = ma;
  s["max_grad_alpha_ratio"] = mg;
  s["max_s1_ratio"] = ms;
  auto slope = [&](const std::vector<double>& v) -> nlohmann::json {
    if (v.size() < 2 || std::any_of(v.begin(), v.end(), [](double x) { return !(x > 0.0); })) return nullptr;
    return loglog_slope(n, v);
  };
  s["slopes"] = {{"alpha_hs_sq_ratio", slope(a)}, {"grad_alpha_ratio", slope(g)}, {"s1_ratio", slope(s1)}};
  if (!out.scan.note.empty()) s["note"] = out.scan.note;
  return out;
}

namespace {

RunDirectory open_run(const ExperimentConfig& config, const RunOptions& options, const std::string& command) {
  return RunDirectory(resolve_output_dir(options.out, config.outputs.directory, command, config_hash(config)));
}

CommandResult close_run(RunDirectory& dir, const ExperimentConfig& config, const std::string& command,
                        nlohmann::json summary) {
  dir.finish(config.resolved, command);
  CommandResult r;
  r.directory = dir.path();
  for (const auto& f : dir.files()) r.files.push_back(f.path);
  summary["directory"] = dir.path().string();
  r.summary = summary.dump();
  return r;
}

}  // namespace

CommandResult cmd_evolve(const ExperimentConfig& config, const RunOptions& options) {
  const Lattice lat = config.make_lattice();
  const PotentialSpec V = config.make_potential(lat);
  const auto g0 = initial_state(config, lat);
  const auto traj = evolve(g0, V, lat, config.dynamics.T, config.dynamics.dt, evolve_options(config));
  auto dir = open_run(config, options, "evolve");
  if (config.outputs.wants("csv")) dir.write("trajectory.csv", trajectory_table(traj, lat).str());
  if (config.outputs.wants("snapshots"))
    for (std::size_t n = 0; n < traj.states.size(); ++n) {
      auto doc = state_to_json(traj.states[n]);
      doc["t"] = traj.times[n];
      char name[48];
      std::snprintf(name, sizeof name, "snapshots/state_%06zu.json", n);
      dir.write(name, doc.dump() + "\n");
    }
  double trace_drift = 0.0, energy_drift = 0.0, purity = 0.0;
  for (const auto& l : traj.log) {
    trace_drift = std::max(trace_drift, std::abs(l.trace_omega - traj.log.front().trace_omega));
    energy_drift = std::max(energy_drift, std::abs(l.energy - traj.log.front().energy));
    purity = std::max(purity, l.purity_residual);
  }
  nlohmann::json s{{"command", "evolve"},
                   {"rows", traj.states.size()},
                   {"dt", traj.dt},
                   {"max_trace_drift", trace_drift},
                   {"max_energy_drift", energy_drift},
                   {"max_purity_residual", purity}};
  return close_run(dir, config, "evolve", std::move(s));
}

CommandResult cmd_compare(const ExperimentConfig& config, const RunOptions& options) {
  std::vector<int> ns = config.oracle.n_values;
  const bool sweep = !ns.empty();
  if (!sweep) ns.push_back(config.make_lattice().particles());
  std::vector<std::vector<KernelRow>> results(ns.size());
  // Validate every lattice before any work starts.
  for (int n : ns) sweep ? (void)sweep_lattice(config, n) : (void)config.make_lattice();
  parallel_for(ns.size(), options.workers, [&](std::size_t i) {
    const Lattice lat = sweep ? sweep_lattice(config, ns[i]) : config.make_lattice();
    results[i] = compare_run(config, lat);
  });
  auto dir = open_run(config, options, "compare");
  nlohmann::json per_n = nlohmann::json::object();
  double t0 = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const std::string name = sweep ? "kernels_N" + std::to_string(ns[i]) + ".csv" : "kernels.csv";
    dir.write(name, kernel_table(results[i]).str());
    double last_ratio = 0.0;
    for (const auto& r : results[i]) {
      if (r.t == 0.0) t0 = std::max(t0, r.err_hs);
      if (r.j == 1) last_ratio = r.ratio;
    }
    per_n[std::to_string(ns[i])] = last_ratio;
  }
  nlohmann::json s{{"command", "compare"}, {"max_err_at_t0", t0}, {"final_ratio_j1", per_n}};
  return close_run(dir, config, "compare", std::move(s));
}

CommandResult cmd_appendix_a(const ExperimentConfig& config, const RunOptions& options) {
  auto res = appendix_a(config);
  auto dir = open_run(config, options, "appendix-a");
  dir.write("scan.csv", res.scan_table.str());
  dir.write("pairing_bound.csv", res.bound_table.str());
  dir.write("ffg.csv", res.ffg_table.str());
  dir.write("summary.json", res.summary.dump(2) + "\n");
  return close_run(dir, config, "appendix-a", res.summary);
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const GuardError*>(&e)) return 4;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DimensionError*>(&e)) return 2;
  return 3;
}

nlohmann::json error_json(const std::exception& e) {
  nlohmann::json j;
  if (dynamic_cast<const GuardError*>(&e)) j["error"] = "guard";
  else if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DimensionError*>(&e)) j["error"] = "config";
  else j["error"] = "numerical";
  j["message"] = e.what();
  if (const auto* s = dynamic_cast<const SchemaError*>(&e)) j["pointer"] = s->pointer();
  if (const auto* n = dynamic_cast<const NumericalError*>(&e)) j["residual"] = n->residual();
  j["exit_code"] = exit_code(e);
  return j;
}

}  // namespace hfbdyn::bench
