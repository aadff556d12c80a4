#pragma once

#include <string>
#include <vector>

#include "hfbdyn/lattice.hpp"
#include "hfbdyn/quasifree.hpp"

namespace hfbdyn {

// HB keeps alpha evolving but drops exchange and pairing fields; HF forces alpha = 0.
enum class Variant { hfb, hf, hb };
enum class Integrator { midpoint, rk4 };

Variant parse_variant(const std::string& name);
std::string to_string(Variant v);
Integrator parse_integrator(const std::string& name);

struct MeanFieldTerms {
  MatC direct;       // rho * V in momentum form
  MatC exchange;     // X
  MatC pairing;      // Pi
  MatC hamiltonian;  // kinetic + direct - exchange
  MatC doubled;      // [[h, Pi], [Pi^*, -conj(h)]]
};

MeanFieldTerms mean_field_terms(const GeneralizedDensityMatrix& g, const PotentialSpec& V, const Lattice& lattice,
                                Variant variant = Variant::hfb);

struct StateDerivative {
  MatC omega;
  MatC alpha;
};

StateDerivative hfb_rhs(const GeneralizedDensityMatrix& g, const PotentialSpec& V, const Lattice& lattice,
                        Variant variant = Variant::hfb);
// Same quantity read off the blocks of (-i/eps)[H, Gamma].
StateDerivative hfb_rhs_block(const GeneralizedDensityMatrix& g, const PotentialSpec& V, const Lattice& lattice,
                              Variant variant = Variant::hfb);

struct StepOptions {
  Variant variant = Variant::hfb;
  double damping = 0.5;
  double tolerance = 1e-12;
  int max_iterations = 50;
};

struct StepInfo {
  int iterations = 0;
  double residual = 0.0;
};

GeneralizedDensityMatrix step_midpoint_unitary(const GeneralizedDensityMatrix& g, const PotentialSpec& V,
                                               const Lattice& lattice, double dt, const StepOptions& options = {},
                                               StepInfo* info = nullptr);
GeneralizedDensityMatrix step_rk4(const GeneralizedDensityMatrix& g, const PotentialSpec& V, const Lattice& lattice,
                                  double dt, Variant variant = Variant::hfb);

double hfb_energy(const GeneralizedDensityMatrix& g, const PotentialSpec& V, const Lattice& lattice);

struct ConservedLog {
  double trace_omega = 0.0;
  double energy = 0.0;
  double purity_residual = 0.0;
  double alpha_hs = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<GeneralizedDensityMatrix> states;
  std::vector<ConservedLog> log;
  double coupling = 1.0;  // frozen tr(omega_0)
  double dt = 0.0;
};

struct EvolveOptions {
  Variant variant = Variant::hfb;
  Integrator integrator = Integrator::midpoint;
  int stride = 1;  // keep every stride-th state
  int max_halvings = 4;
};

// dt <= 0 selects the default eps / 20. The step is shrunk so that T is hit exactly.
Trajectory evolve(const GeneralizedDensityMatrix& g0, const PotentialSpec& V, const Lattice& lattice, double T,
                  double dt, Variant variant = Variant::hfb);
Trajectory evolve(const GeneralizedDensityMatrix& g0, const PotentialSpec& V, const Lattice& lattice, double T,
                  double dt, const EvolveOptions& options);

}  // namespace hfbdyn
