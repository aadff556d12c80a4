#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hfbdyn/hfb.hpp"
#include "hfbdyn/lattice.hpp"
#include "hfbdyn/quasifree.hpp"

namespace hfbdyn {

// Translation-invariant quasi-free state. omega_hat is indexed by flattened mode, alpha_hat by momentum
// index m (= flat / S) and pairs (k, up) with (-k, down).
struct TISymbol {
  std::vector<double> omega_hat;
  std::vector<cxd> alpha_hat;
};

GeneralizedDensityMatrix assemble(const TISymbol& s, const Lattice& lattice);

struct ChemicalPotential {
  double mu = 0.0;       // eps^2 k_F^2
  double k_fermi = 0.0;  // k_F^2 halfway between the last filled and first empty |k|^2
};

// Closed-shell particle counts per spin that fit inside the cutoff box.
std::vector<int> admissible_counts(const Lattice& lattice);
ChemicalPotential chemical_potential(const Lattice& lattice, int count);

TISymbol ffg_symbol(const Lattice& lattice, const std::vector<int>& counts);
TISymbol ffg_symbol(const Lattice& lattice);
// Lowest |k|^2 first, ties in flattening order; equals the FFG on closed shells.
TISymbol fermi_sea_symbol(const Lattice& lattice);

// Profile over momentum indices. Must be even under k -> -k and sum to N/2.
struct LambdaState {
  TISymbol symbol;
  GeneralizedDensityMatrix state;
};
LambdaState lambda_state(const Lattice& lattice, const std::vector<double>& profile);

// Even profile that falls from 1 to 0 across ||k| - m| <= width (C^1 cubic), m tuned by bisection so that the
// profile sums to pairs. width = 0 gives the sharp Fermi indicator (requires a closed shell).
std::vector<double> smooth_step_profile(const Lattice& lattice, double pairs, double width);
std::vector<double> fermi_profile(const Lattice& lattice, int pairs);

double hfb_energy_ti(const TISymbol& s, const PotentialSpec& V, const Lattice& lattice);

struct ScanReport {
  double ffg_energy = 0.0;
  double min_energy = 0.0;
  double min_gap = 0.0;
  std::size_t argmin = 0;
  std::vector<double> gaps;  // trial 0 is the FFG symbol itself
  int zero_gap_non_ffg = 0;  // trials with |gap| <= 1e-9 whose symbol differs from FFG
  std::string note;
};

// Random TI pure symbols with the counts of lattice.particle_counts().
TISymbol random_ti_symbol(const Lattice& lattice, std::uint64_t seed);
ScanReport ground_state_scan(const Lattice& lattice, const PotentialSpec& V, int trials, std::uint64_t seed);

struct PairingBoundRow {
  int particles = 0;
  int cutoff = 0;
  double energy_gap = 0.0;  // lambda-state minus FFG energy
  double alpha_hs_sq_ratio = 0.0;
  double grad_alpha_ratio = 0.0;
  double s1_ratio = 0.0;
};

struct PairingBoundOptions {
  int dimension = 1;
  double width = 1.0;
  int margin = 2;
  PotentialKind potential = PotentialKind::attractive_gaussian;
  PotentialParams params{1.0, 1.5};
};

// One row per total particle number (closed shells, spin balanced).
std::vector<PairingBoundRow> pairing_bound_check(const std::vector<int>& particle_grid,
                                                 const PairingBoundOptions& options = {});
// Least-squares slope of log(value) against log(N).
double loglog_slope(const std::vector<double>& n, const std::vector<double>& value);

}  // namespace hfbdyn
