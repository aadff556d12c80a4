#pragma once

#include <string>
#include <vector>

#include "hfbdyn/fock.hpp"
#include "hfbdyn/hfb.hpp"

namespace hfbdyn {

struct SemiclassicalReport {
  double t = 0.0;
  double s1 = 0.0;  // max_p (1+|p|)^-1 ||[omega, S_p]||_HS over the finite dual lattice
  double s2 = 0.0;  // ||[omega, eps grad]||_HS
  double s3 = 0.0;  // ||[alpha, eps grad]||_HS
  double alpha_hs = 0.0;
  IntVec s1_argmax{0, 0, 0};

  double max() const;
};

SemiclassicalReport semiclassical_report(const GeneralizedDensityMatrix& g, const Lattice& lattice, double t = 0.0);

// ||[omega, S_p]||_HS for one dual vector.
double shift_commutator_hs(const MatC& omega, const Lattice& lattice, const IntVec& p);

// max(s1, s2, s3)(t) <= C exp(c |t|) (N^a + |t| ||alpha_0||_HS), a = (d-1)/(2d).
struct EnvelopeFit {
  double C = 0.0;
  double c = 0.0;
  double exponent = 0.0;
  double violation = 0.0;  // max over points of value - envelope
  std::vector<SemiclassicalReport> reports;
};

EnvelopeFit growth_envelope_fit(const Trajectory& traj, const Lattice& lattice);
EnvelopeFit growth_envelope_fit(const std::vector<SemiclassicalReport>& reports, const Lattice& lattice,
                                double particles, double alpha0_hs);

// || v S u^* - (v [omega, S] u^* + conj(u) alpha^* S u^* - v S alpha v^T) ||_HS with S = S_{-p}.
double subtle_identity_residual(const BogoliubovMap& b, const GeneralizedDensityMatrix& g, const Lattice& lattice,
                                const IntVec& p);

struct ErrorKernelReport {
  int order = 0;
  std::vector<Flavor> signature;
  double err_hs = 0.0;
  double wick_hs = 0.0;
  double ratio() const { return wick_hs > 0.0 ? err_hs / wick_hs : 0.0; }
};

// "ca" -> {create, annihilate}
std::vector<Flavor> parse_signature(const std::string& s);
std::string to_string(const std::vector<Flavor>& signature);

constexpr double kKernelGuard = 6e7;

// Full 2j-index difference between Fock correlations of psi and the Wick values of g.
ErrorKernelReport error_kernel(const FockVector& psi, const GeneralizedDensityMatrix& g,
                               const std::vector<Flavor>& signature);

}  // namespace hfbdyn
