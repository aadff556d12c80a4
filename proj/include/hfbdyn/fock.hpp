#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "hfbdyn/krylov.hpp"
#include "hfbdyn/lattice.hpp"
#include "hfbdyn/quasifree.hpp"

namespace hfbdyn {

constexpr int kFockGuard = 16;
constexpr int kSectorGuard = 20;

using SpMat = Eigen::SparseMatrix<cxd>;
using Bits = std::uint32_t;

// Occupation-bitstring Fock space; bit b set means mode b occupied.
struct FockSpace {
  int modes = 0;
  // Test fixture only: drops the Jordan-Wigner string, which breaks the CAR.
  bool drop_string = false;

  std::size_t dim() const noexcept { return std::size_t{1} << modes; }
};

FockSpace fock_space(int modes, int guard = kFockGuard);

// +1 or -1: parity of occupied modes below b.
double string_sign(const FockSpace& space, Bits state, int b) noexcept;

struct FockVector {
  FockSpace space;
  VecC amplitudes;

  FockVector(FockSpace s, VecC amps);  // checks unit norm to 1e-10
  static FockVector vacuum(const FockSpace& s);
  static FockVector basis_state(const FockSpace& s, Bits occupied);
  static FockVector random(const FockSpace& s, std::uint64_t seed);
  double norm() const { return amplitudes.norm(); }
};

struct FockOperator {
  FockSpace space;
  SpMat matrix;

  VecC operator*(const VecC& v) const { return matrix * v; }
};

FockOperator annihilator(const FockSpace& space, int mode);
FockOperator creator(const FockSpace& space, int mode);
FockOperator number_operator(const FockSpace& space);
// sum_ij O(i;j) a*_i a_j
FockOperator second_quantize(const FockSpace& space, const MatC& O);
// sum_xy O(x;y) a_x a_y  and  sum_xy O(x;y) a*_x a*_y
FockOperator pair_annihilation(const FockSpace& space, const MatC& O);
FockOperator pair_creation(const FockSpace& space, const MatC& O);

// Matrix-free single operator actions.
VecC apply_annihilator(const FockSpace& space, int mode, const VecC& v);
VecC apply_creator(const FockSpace& space, int mode, const VecC& v);
VecC apply_symbol(const FockSpace& space, const OperatorSymbol& op, const VecC& v);
// ops[0] ops[1] ... ops[n-1] v
VecC apply_monomial(const FockSpace& space, std::span<const OperatorSymbol> ops, const VecC& v);
cxd expectation(const FockVector& psi, std::span<const OperatorSymbol> ops);

FockOperator build_hamiltonian(const Lattice& lattice, const PotentialSpec& V, const FockSpace& space);
FockOperator build_hamiltonian(const Lattice& lattice, const PotentialSpec& V);

// exp(-i H t / eps) restricted to number sectors when H conserves the particle number.
class ExactPropagator {
 public:
  explicit ExactPropagator(const FockOperator& H, KrylovOptions options = {});
  // Builds the sector blocks of the lattice Hamiltonian directly, without the full matrix.
  static ExactPropagator from_model(const Lattice& lattice, const PotentialSpec& V, const FockSpace& space,
                                    KrylovOptions options = {});

  FockVector evolve(const FockVector& psi, double t, double eps) const;
  VecC apply(const VecC& v) const;
  bool sectorized() const noexcept { return !sectors_.empty(); }

 private:
  ExactPropagator() = default;
  struct Sector {
    std::vector<Bits> states;
    SpMat block;
  };
  FockSpace space_;
  KrylovOptions options_;
  SpMat full_;
  std::vector<Sector> sectors_;
};

FockVector evolve_exact(const FockVector& psi, const FockOperator& H, double t, double eps);

// gamma(x;y) = <psi, a*_y a_x psi>,  pi(x;y) = <psi, a_y a_x psi>
MatC rdm1(const FockVector& psi);
MatC pairing1(const FockVector& psi);

// Applies the implementer R of a factored map (or R^* when adjoint is set).
VecC apply_implementer(const BogoliubovMap& b, const FockSpace& space, const VecC& v, bool adjoint = false);
FockVector gaussian_prepare(const BogoliubovMap& b, const FockSpace& space);
FockVector gaussian_prepare(const BogoliubovMap& b);

// <psi, (N + 1)^k psi>
double number_moment(const FockVector& psi, int k);

// {"modes": L, "amplitudes": {"<bitstring>": [re, im], ...}}, mode 0 is the rightmost character.
std::string fock_snapshot_json(const FockVector& psi, double cutoff = 1e-14);

}  // namespace hfbdyn
