#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "hfbdyn/types.hpp"

namespace hfbdyn {

// Pure quasi-free state: omega(x;y) = <a*_y a_x>, alpha(x;y) = <a_y a_x>.
struct GeneralizedDensityMatrix {
  MatC omega;
  MatC alpha;

  int size() const noexcept { return static_cast<int>(omega.rows()); }
};

// [[omega, alpha], [alpha^*, 1 - conj(omega)]]
MatC gamma_matrix(const GeneralizedDensityMatrix& g);
// Inverse of gamma_matrix (reads the upper blocks).
GeneralizedDensityMatrix from_gamma(const MatC& gamma);

void check_dimensions(const GeneralizedDensityMatrix& g);
// ||Gamma^2 - Gamma||_F
double purity_residual(const GeneralizedDensityMatrix& g);

struct StateDefects {
  double purity = 0.0;
  double antisymmetry = 0.0;   // ||alpha^T + alpha||_F
  double hermiticity = 0.0;    // ||omega - omega^*||_F
  double spectrum = 0.0;       // distance of eig(omega) from [0,1]
  double max() const;
};
StateDefects state_defects(const GeneralizedDensityMatrix& g);

// Elementary Fock unitaries. Applied to the vacuum in list order.
struct OneBodyRotation {
  MatC unitary;  // W; the Fock operator is exp(i dGamma(K)) with W = exp(iK)
};
struct PairRotation {
  int first = 0;
  int second = 1;
  double angle = 0.0;  // exp(angle (a*_first a*_second - a_second a_first))
};
struct ModeFill {
  int mode = 0;  // (a*_mode - a_mode) (-1)^Number
};
using Factor = std::variant<OneBodyRotation, PairRotation, ModeFill>;

// R^* a_x R = sum_y conj(u(y,x)) a_y + conj(v(y,x)) a*_y
struct BogoliubovMap {
  MatC u;
  MatC v;
  std::vector<Factor> factors;
  bool factored = false;

  int size() const noexcept { return static_cast<int>(u.rows()); }
};

// (u, v) of a product of factors; an empty list gives u = 1, v = 0.
BogoliubovMap compose_factors(int modes, std::vector<Factor> factors);
// Largest Frobenius residual of the four unitarity relations.
double bogoliubov_residual(const BogoliubovMap& b);
// omega = v^* v, alpha = v^* conj(u)
GeneralizedDensityMatrix state_of(const BogoliubovMap& b);

constexpr double kPurityTolerance = 1e-9;

// Canonical factorisation: fills, two-mode pair rotations, then one one-body rotation.
BogoliubovMap bloch_messiah(const GeneralizedDensityMatrix& g, double tolerance = kPurityTolerance);

struct RandomMapOptions {
  int pair_layers = 2;
  int fills = 0;  // odd count gives odd parity
};
BogoliubovMap random_bogoliubov(int modes, std::uint64_t seed, const RandomMapOptions& options = {});
MatC random_unitary(int n, std::uint64_t seed);

enum class Flavor : std::uint8_t { create, annihilate };

struct OperatorSymbol {
  Flavor flavor = Flavor::annihilate;
  int index = 0;
};
inline OperatorSymbol cre(int i) { return {Flavor::create, i}; }
inline OperatorSymbol ann(int i) { return {Flavor::annihilate, i}; }

// <a b>
cxd two_point(const GeneralizedDensityMatrix& g, const OperatorSymbol& a, const OperatorSymbol& b);
// <ops[0] ops[1] ... ops[2j-1]>
cxd wick_correlation(const GeneralizedDensityMatrix& g, std::span<const OperatorSymbol> ops);

// gamma^(k)(x_1..x_k; y_1..y_k) = (1/k!) <a*_{y_k}..a*_{y_1} a_{x_1}..a_{x_k}>
struct RdmTensor {
  int modes = 0;
  int order = 0;
  std::vector<cxd> values;  // row-major over (x_1..x_k, y_1..y_k)

  std::size_t offset(std::span<const int> x, std::span<const int> y) const;
  cxd operator()(std::span<const int> x, std::span<const int> y) const { return values[offset(x, y)]; }
};
RdmTensor kparticle_rdm(const GeneralizedDensityMatrix& g, int k);

}  // namespace hfbdyn
