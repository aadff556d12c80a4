#include "hfbdyn/hfb.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace hfbdyn {

Variant parse_variant(const std::string& name) {
  if (name == "HFB" || name == "hfb") return Variant::hfb;
  if (name == "HF" || name == "hf") return Variant::hf;
  if (name == "HB" || name == "hb") return Variant::hb;
  throw ConfigError("unknown variant '" + name + "' (expected HFB, HF or HB)");
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::hfb: return "HFB";
    case Variant::hf: return "HF";
    case Variant::hb: return "HB";
  }
  return "?";
}

Integrator parse_integrator(const std::string& name) {
  if (name == "midpoint") return Integrator::midpoint;
  if (name == "rk4") return Integrator::rk4;
  throw ConfigError("unknown integrator '" + name + "' (expected midpoint or rk4)");
}

namespace {

void check_state(const GeneralizedDensityMatrix& g, const Lattice& lattice) {
  check_dimensions(g);
  if (g.size() != lattice.size()) throw DimensionError("state size does not match the lattice");
}

struct ShiftTable {
  std::vector<IntVec> duals;
  std::vector<double> v;
  std::vector<std::vector<int>> plus;   // index of (k + q, s)
  std::vector<std::vector<int>> minus;  // index of (k - q, s)
};

ShiftTable shift_table(const Lattice& lattice, const PotentialSpec& V) {
  ShiftTable t;
  const int L = lattice.size();
  for (const auto& q : lattice.dual_vectors()) {
    const double vq = V(q);
    if (vq == 0.0) continue;
    t.duals.push_back(q);
    t.v.push_back(vq);
    std::vector<int> p(static_cast<std::size_t>(L)), m(static_cast<std::size_t>(L));
    for (int i = 0; i < L; ++i) {
      p[static_cast<std::size_t>(i)] = lattice.shifted(i, q);
      m[static_cast<std::size_t>(i)] = lattice.shifted(i, {-q[0], -q[1], -q[2]});
    }
    t.plus.push_back(std::move(p));
    t.minus.push_back(std::move(m));
  }
  return t;
}

}  // namespace

MeanFieldTerms mean_field_terms(const GeneralizedDensityMatrix& g, const PotentialSpec& V, const Lattice& lattice,
                                Variant variant) {
  check_state(g, lattice);
  const int L = lattice.size();
  const double inv_n = 1.0 / V.coupling();
  MeanFieldTerms m;
  m.direct = MatC::Zero(L, L);
  m.exchange = MatC::Zero(L, L);
  m.pairing = MatC::Zero(L, L);

  if (!V.is_zero()) {
    const ShiftTable tab = shift_table(lattice, V);
    // rho(q) = sum_m omega((k_m + q, s); (k_m, s))
    for (std::size_t n = 0; n < tab.duals.size(); ++n) {
      const auto& up = tab.plus[n];
      cxd rho = 0.0;
      for (int i = 0; i < L; ++i)
        if (up[static_cast<std::size_t>(i)] >= 0) rho += g.omega(up[static_cast<std::size_t>(i)], i);
      const cxd w = inv_n * tab.v[n] * rho;
      for (int j = 0; j < L; ++j)
        if (up[static_cast<std::size_t>(j)] >= 0) m.direct(up[static_cast<std::size_t>(j)], j) += w;
    }
    const bool exchange = variant != Variant::hb;
    const bool pairing = variant == Variant::hfb;
    if (exchange || pairing) {
      for (std::size_t n = 0; n < tab.duals.size(); ++n) {
        const auto& up = tab.plus[n];
        const auto& dn = tab.minus[n];
        const double w = inv_n * tab.v[n];
        for (int j = 0; j < L; ++j) {
          const int jm = dn[static_cast<std::size_t>(j)];
          const int jp = up[static_cast<std::size_t>(j)];
          for (int i = 0; i < L; ++i) {
            const int im = dn[static_cast<std::size_t>(i)];
            if (im < 0) continue;
            if (exchange && jm >= 0) m.exchange(i, j) += w * g.omega(im, jm);
            if (pairing && jp >= 0) m.pairing(i, j) += w * g.alpha(im, jp);
          }
        }
      }
    }
  }
  m.hamiltonian = kinetic_symbol(lattice) + m.direct - m.exchange;
  MatC H(2 * L, 2 * L);
  H.topLeftCorner(L, L) = m.hamiltonian;
  H.topRightCorner(L, L) = m.pairing;
  H.bottomLeftCorner(L, L) = m.pairing.adjoint();
  H.bottomRightCorner(L, L) = -m.hamiltonian.conjugate();
  m.doubled = std::move(H);
  return m;
}

StateDerivative hfb_rhs(const GeneralizedDensityMatrix& g, const PotentialSpec& V, const Lattice& lattice,
                        Variant variant) {
  const MeanFieldTerms m = mean_field_terms(g, V, lattice, variant);
  const cxd f(0.0, -1.0 / lattice.epsilon());
  const MatC& h = m.hamiltonian;
  const MatC& P = m.pairing;
  const MatC& w = g.omega;
  const MatC& a = g.alpha;
  const int L = g.size();
  StateDerivative d;
  d.omega = f * (h * w - w * h + P * a.adjoint() - a * P.adjoint());
  d.alpha = f * (h * a + a * h.conjugate() + P * (MatC::Identity(L, L) - w.conjugate()) - w * P);
  if (variant == Variant::hf) d.alpha.setZero();
  return d;
}

StateDerivative hfb_rhs_block(const GeneralizedDensityMatrix& g, const PotentialSpec& V, const Lattice& lattice,
                              Variant variant) {
  const MeanFieldTerms m = mean_field_terms(g, V, lattice, variant);
  const MatC G = gamma_matrix(g);
  const MatC D = cxd(0.0, -1.0 / lattice.epsilon()) * (m.doubled * G - G * m.doubled);
  const int L = g.size();
  StateDerivative d{D.topLeftCorner(L, L), D.topRightCorner(L, L)};
  if (variant == Variant::hf) d.alpha.setZero();
  return d;
}

namespace {

MatC propagator(const MatC& H, double dt, double eps) {
  const MatC Hh = 0.5 * (H + H.adjoint());
  Eigen::SelfAdjointEigenSolver<MatC> es(Hh);
  VecC ph(es.eigenvalues().size());
  for (Eigen::Index k = 0; k < ph.size(); ++k) ph(k) = std::polar(1.0, -dt * es.eigenvalues()(k) / eps);
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

// tr(Sigma G) with Sigma = diag(1, -1)
double charge(const MatC& G) {
  const Eigen::Index L = G.rows() / 2;
  return (G.topLeftCorner(L, L).trace() - G.bottomRightCorner(L, L).trace()).real();
}

// Rotates G along exp(-i eta A), A = i[Sigma, G], until the charge matches target. Keeps G a projection.
MatC restore_charge(MatC G, double target) {
  const Eigen::Index L = G.rows() / 2;
  for (int it = 0; it < 6; ++it) {
    const double f = charge(G) - target;
    if (std::abs(f) <= 1e-15 * static_cast<double>(L)) break;
    MatC X = G;
    X.bottomLeftCorner(L, L) *= -2.0;
    X.topRightCorner(L, L) *= 2.0;
    X.topLeftCorner(L, L).setZero();
    X.bottomRightCorner(L, L).setZero();
    const double w = X.squaredNorm();
    if (w < 1e-300) break;
    const MatC A = cxd(0.0, 1.0) * X;
    const MatC U = propagator(A, -f / w, 1.0);
    G = U * G * U.adjoint();
  }
  return G;
}

GeneralizedDensityMatrix tidy(GeneralizedDensityMatrix g, Variant variant) {
  if (variant == Variant::hf) g.alpha.setZero();
  return g;
}

}  // namespace

GeneralizedDensityMatrix step_midpoint_unitary(const GeneralizedDensityMatrix& g, const PotentialSpec& V,
                                               const Lattice& lattice, double dt, const StepOptions& options,
                                               StepInfo* info) {
  check_state(g, lattice);
  if (!(dt > 0.0)) throw DimensionError("time step must be positive");
  const double eps = lattice.epsilon();
  const MatC G0 = gamma_matrix(g);
  // Half Euler step as the starting midpoint.
  const MatC H0 = mean_field_terms(g, V, lattice, options.variant).doubled;
  MatC mid = G0 + cxd(0.0, -0.5 * dt / eps) * (H0 * G0 - G0 * H0);
  MatC G1 = G0;
  double residual = 0.0;
  int it = 0;
  bool converged = false;
  for (; it < options.max_iterations; ++it) {
    const MatC H = mean_field_terms(tidy(from_gamma(mid), options.variant), V, lattice, options.variant).doubled;
    const MatC U = propagator(H, dt, eps);
    G1 = U * G0 * U.adjoint();
    const MatC next = 0.5 * (G0 + G1);
    residual = (next - mid).norm();
    mid += options.damping * (next - mid);
    if (residual <= options.tolerance) {
      converged = true;
      ++it;
      break;
    }
  }
  if (info) *info = {it, residual};
  if (!converged)
    throw NumericalError("midpoint fixed point did not converge (residual " + std::to_string(residual) + ")",
                         residual);
  if (options.variant == Variant::hfb) G1 = restore_charge(std::move(G1), charge(G0));
  return tidy(from_gamma(G1), options.variant);
}

GeneralizedDensityMatrix step_rk4(const GeneralizedDensityMatrix& g, const PotentialSpec& V, const Lattice& lattice,
                                  double dt, Variant variant) {
  check_state(g, lattice);
  auto add = [](const GeneralizedDensityMatrix& s, const StateDerivative& d, double h) {
    return GeneralizedDensityMatrix{s.omega + h * d.omega, s.alpha + h * d.alpha};
  };
  const StateDerivative k1 = hfb_rhs(g, V, lattice, variant);
  const StateDerivative k2 = hfb_rhs(add(g, k1, 0.5 * dt), V, lattice, variant);
  const StateDerivative k3 = hfb_rhs(add(g, k2, 0.5 * dt), V, lattice, variant);
  const StateDerivative k4 = hfb_rhs(add(g, k3, dt), V, lattice, variant);
  GeneralizedDensityMatrix out = g;
  out.omega += (dt / 6.0) * (k1.omega + 2.0 * k2.omega + 2.0 * k3.omega + k4.omega);
  out.alpha += (dt / 6.0) * (k1.alpha + 2.0 * k2.alpha + 2.0 * k3.alpha + k4.alpha);
  return tidy(std::move(out), variant);
}

double hfb_energy(const GeneralizedDensityMatrix& g, const PotentialSpec& V, const Lattice& lattice) {
  const MeanFieldTerms m = mean_field_terms(g, V, lattice, Variant::hfb);
  const MatC T = kinetic_symbol(lattice);
  const cxd e = (T * g.omega).trace() + 0.5 * (m.direct * g.omega).trace() - 0.5 * (m.exchange * g.omega).trace() +
                0.5 * (g.alpha.adjoint() * m.pairing).trace();
  return e.real();
}

Trajectory evolve(const GeneralizedDensityMatrix& g0, const PotentialSpec& V, const Lattice& lattice, double T,
                  double dt, Variant variant) {
  EvolveOptions o;
  o.variant = variant;
  return evolve(g0, V, lattice, T, dt, o);
}

namespace {

GeneralizedDensityMatrix guarded_step(const GeneralizedDensityMatrix& g, const PotentialSpec& V,
                                      const Lattice& lattice, double dt, const EvolveOptions& o, int depth) {
  if (o.integrator == Integrator::rk4) return step_rk4(g, V, lattice, dt, o.variant);
  StepOptions so;
  so.variant = o.variant;
  try {
    return step_midpoint_unitary(g, V, lattice, dt, so);
  } catch (const NumericalError&) {
    if (depth >= o.max_halvings) throw;
    const auto half = guarded_step(g, V, lattice, 0.5 * dt, o, depth + 1);
    return guarded_step(half, V, lattice, 0.5 * dt, o, depth + 1);
  }
}

}  // namespace

Trajectory evolve(const GeneralizedDensityMatrix& g0, const PotentialSpec& V, const Lattice& lattice, double T,
                  double dt, const EvolveOptions& options) {
  check_state(g0, lattice);
  if (!(T >= 0.0)) throw DimensionError("final time must be non-negative");
  if (options.stride < 1) throw DimensionError("stride must be positive");
  const double purity = purity_residual(g0);
  if (purity > kPurityTolerance)
    throw NumericalError("initial state is not pure quasi-free", purity);
  if (options.variant == Variant::hf && g0.alpha.norm() > 1e-12)
    throw ConfigError("HF variant requires alpha_0 = 0");
  const double n0 = g0.omega.trace().real();
  if (!(n0 > 0.0)) throw DimensionError("initial state has no particles");
  const PotentialSpec Vn = V.with_coupling(n0);
  if (dt <= 0.0) dt = lattice.epsilon() / 20.0;
  const long steps = T == 0.0 ? 0 : static_cast<long>(std::ceil(T / dt - 1e-9));
  const double h = steps ? T / static_cast<double>(steps) : 0.0;

  Trajectory tr;
  tr.coupling = n0;
  tr.dt = h;
  auto record = [&](double t, const GeneralizedDensityMatrix& g) {
    tr.times.push_back(t);
    tr.states.push_back(g);
    tr.log.push_back({g.omega.trace().real(), hfb_energy(g, Vn, lattice), purity_residual(g), g.alpha.norm()});
  };
  GeneralizedDensityMatrix g = tidy(g0, options.variant);
  record(0.0, g);
  for (long n = 1; n <= steps; ++n) {
    g = guarded_step(g, Vn, lattice, h, options, 0);
    if (n % options.stride == 0 || n == steps) record(static_cast<double>(n) * h, g);
  }
  return tr;
}

}  // namespace hfbdyn
