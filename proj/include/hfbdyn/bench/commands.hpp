#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "hfbdyn/bench/config.hpp"
#include "hfbdyn/bench/output.hpp"
#include "hfbdyn/diagnostics.hpp"
#include "hfbdyn/ti_torus.hpp"

namespace hfbdyn::bench {

struct RunOptions {
  std::string out;  // empty: see resolve_output_dir
  int workers = 1;
};

struct CommandResult {
  std::filesystem::path directory;
  std::vector<std::string> files;
  std::string summary;  // one line, JSON
};

// Runs f(0..n-1) on at most `workers` threads; the first exception is rethrown after all workers stop.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& f);

GeneralizedDensityMatrix initial_state(const ExperimentConfig& config, const Lattice& lattice);
EvolveOptions evolve_options(const ExperimentConfig& config);

// evolve: one row per logged state.
CsvTable trajectory_table(const Trajectory& traj, const Lattice& lattice);

struct KernelRow {
  double t = 0.0;
  int j = 0;
  std::string signature;
  double err_hs = 0.0;
  double wick_hs = 0.0;
  double relative = 0.0;  // err / wick
  double ratio = 0.0;     // err / N^(1/2)
};

// HFB trajectory against the exact Fock evolution of the prepared initial state.
std::vector<KernelRow> compare_run(const ExperimentConfig& config, const Lattice& lattice);
CsvTable kernel_table(const std::vector<KernelRow>& rows);
// Lattice of the oracle sweep entry with total particle number n.
Lattice sweep_lattice(const ExperimentConfig& config, int n);

struct AppendixResult {
  ScanReport scan;
  std::vector<PairingBoundRow> bounds;
  CsvTable scan_table{{"trial", "energy", "gap"}};
  CsvTable bound_table{{"N", "cutoff", "energy_gap", "alpha_hs_sq_ratio", "grad_alpha_ratio", "s1_ratio"}};
  CsvTable ffg_table{{"count_per_spin", "k_fermi_sq", "mu", "ffg_energy"}};
  nlohmann::json summary;
};
AppendixResult appendix_a(const ExperimentConfig& config);

CommandResult cmd_evolve(const ExperimentConfig& config, const RunOptions& options);
CommandResult cmd_compare(const ExperimentConfig& config, const RunOptions& options);
CommandResult cmd_appendix_a(const ExperimentConfig& config, const RunOptions& options);

// Exit code for an exception: 2 config, 3 numerical (and anything else), 4 guard.
int exit_code(const std::exception& e);
// {"error": kind, "message": ..., ["pointer": ...], ["residual": ...]}
nlohmann::json error_json(const std::exception& e);

}  // namespace hfbdyn::bench
