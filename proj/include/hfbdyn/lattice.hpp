#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hfbdyn/types.hpp"

namespace hfbdyn {

// Integer momentum or dual vector; components beyond the dimension are zero.
using IntVec = std::array<int, 3>;

inline int norm_sq(const IntVec& k) { return k[0] * k[0] + k[1] * k[1] + k[2] * k[2]; }

struct LatticeSpec {
  int dimension = 1;
  int cutoff = 1;
  int spin_count = 2;
  std::vector<int> particle_counts{1, 1};
  std::optional<double> epsilon;  // default N^(-1/d)
};

struct ModeIndex {
  IntVec k{0, 0, 0};
  int spin = 0;
  int flat = 0;
};

// Momentum modes k in {-K..K}^d times spin, flattened row-major over (k1..kd, spin).
class Lattice {
 public:
  explicit Lattice(LatticeSpec spec);

  const LatticeSpec& spec() const noexcept { return spec_; }
  int dimension() const noexcept { return spec_.dimension; }
  int cutoff() const noexcept { return spec_.cutoff; }
  int spins() const noexcept { return spec_.spin_count; }
  int side() const noexcept { return 2 * spec_.cutoff + 1; }
  int momentum_count() const noexcept { return momenta_; }
  int size() const noexcept { return momenta_ * spec_.spin_count; }
  int particles() const noexcept { return particles_; }
  const std::vector<int>& particle_counts() const noexcept { return spec_.particle_counts; }
  double epsilon() const noexcept { return epsilon_; }

  bool in_range(const IntVec& k) const noexcept;
  // -1 when k lies outside the window.
  int flatten(const IntVec& k, int spin) const noexcept;
  ModeIndex mode(int flat) const;
  const IntVec& momentum(int flat) const { return ks_[static_cast<std::size_t>(flat)]; }
  int spin(int flat) const noexcept { return flat % spec_.spin_count; }
  // Index of (k + p, spin), or -1 when truncated.
  int shifted(int flat, const IntVec& p) const noexcept;
  // Index of (-k, spin).
  int reflected(int flat) const noexcept;

  // Dual lattice {-2K..2K}^d.
  std::vector<IntVec> dual_vectors() const;
  // Momenta {-K..K}^d in flattening order.
  std::vector<IntVec> momenta() const;

 private:
  LatticeSpec spec_;
  int momenta_ = 0;
  int particles_ = 0;
  double epsilon_ = 1.0;
  std::vector<IntVec> ks_;
};

OneBodyOperator kinetic_symbol(const Lattice& lattice);
// Same symbol with an explicit epsilon (zero allowed).
OneBodyOperator kinetic_symbol(const Lattice& lattice, double epsilon);

struct ShiftOperator {
  MatC matrix;
  // Fraction of columns kept by the truncated shift.
  double fill_factor = 1.0;
};

ShiftOperator shift_operator(const Lattice& lattice, const IntVec& p);

// Projector onto the spin-sigma modes.
OneBodyOperator spin_projector(const Lattice& lattice, int spin);

enum class PotentialKind { gaussian, delta_like, attractive_gaussian };

PotentialKind parse_potential_kind(const std::string& name);
std::string to_string(PotentialKind kind);

struct PotentialParams {
  double strength = 1.0;  // v0
  double width = 1.0;     // sigma; infinity gives a flat table
};

// Real, even Fourier table over the dual lattice together with the 1/N coupling.
class PotentialSpec {
 public:
  PotentialSpec(const Lattice& lattice, std::vector<double> table, double coupling);

  double operator()(const IntVec& p) const;
  double coupling() const noexcept { return coupling_; }
  PotentialSpec with_coupling(double coupling) const;
  int dual_side() const noexcept { return dual_side_; }
  int dimension() const noexcept { return dimension_; }
  const std::vector<double>& table() const noexcept { return table_; }
  double max_abs() const;
  bool is_zero() const;
  // sum_p |V(p)| (1 + |p|^2)
  double weighted_sum() const;
  double evenness_defect() const;

 private:
  std::size_t offset(const IntVec& p) const;

  int dimension_;
  int reach_;  // 2K
  int dual_side_;
  std::vector<double> table_;
  double coupling_;
};

PotentialSpec named_potential(PotentialKind kind, const PotentialParams& params, const Lattice& lattice);
PotentialSpec zero_potential(const Lattice& lattice);

}  // namespace hfbdyn
