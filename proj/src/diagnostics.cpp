#include "hfbdyn/diagnostics.hpp"

#include <cmath>
#include <limits>

namespace hfbdyn {

double SemiclassicalReport::max() const { return std::max({s1, s2, s3}); }

double shift_commutator_hs(const MatC& omega, const Lattice& lattice, const IntVec& p) {
  const int L = lattice.size();
  if (omega.rows() != L || omega.cols() != L) throw DimensionError("omega does not match the lattice");
  const IntVec mp{-p[0], -p[1], -p[2]};
  std::vector<int> fwd(static_cast<std::size_t>(L)), back(static_cast<std::size_t>(L));
  for (int i = 0; i < L; ++i) {
    fwd[static_cast<std::size_t>(i)] = lattice.shifted(i, p);
    back[static_cast<std::size_t>(i)] = lattice.shifted(i, mp);
  }
  // (omega S)(i,j) = omega(i, j+p); (S omega)(i,j) = omega(i-p, j)
  double s = 0.0;
  for (int j = 0; j < L; ++j) {
    const int jp = fwd[static_cast<std::size_t>(j)];
    for (int i = 0; i < L; ++i) {
      const int im = back[static_cast<std::size_t>(i)];
      const cxd a = jp >= 0 ? omega(i, jp) : cxd(0.0);
      const cxd b = im >= 0 ? omega(im, j) : cxd(0.0);
      s += std::norm(a - b);
    }
  }
  return std::sqrt(s);
}

namespace {

double gradient_commutator(const MatC& m, const Lattice& lattice) {
  const int L = lattice.size();
  double s = 0.0;
  for (int j = 0; j < L; ++j)
    for (int i = 0; i < L; ++i) {
      const double w = std::norm(m(i, j));
      if (w == 0.0) continue;
      const IntVec& ki = lattice.momentum(i);
      const IntVec& kj = lattice.momentum(j);
      const int dx = ki[0] - kj[0], dy = ki[1] - kj[1], dz = ki[2] - kj[2];
      s += w * (dx * dx + dy * dy + dz * dz);
    }
  return lattice.epsilon() * std::sqrt(s);
}

}  // namespace

SemiclassicalReport semiclassical_report(const GeneralizedDensityMatrix& g, const Lattice& lattice, double t) {
  check_dimensions(g);
  if (g.size() != lattice.size()) throw DimensionError("state size does not match the lattice");
  SemiclassicalReport r;
  r.t = t;
  for (const auto& p : lattice.dual_vectors()) {
    const double v = shift_commutator_hs(g.omega, lattice, p) / (1.0 + std::sqrt(static_cast<double>(norm_sq(p))));
    if (v > r.s1) {
      r.s1 = v;
      r.s1_argmax = p;
    }
  }
  r.s2 = gradient_commutator(g.omega, lattice);
  r.s3 = gradient_commutator(g.alpha, lattice);
  r.alpha_hs = g.alpha.norm();
  return r;
}

EnvelopeFit growth_envelope_fit(const Trajectory& traj, const Lattice& lattice) {
  if (traj.states.empty()) throw DimensionError("empty trajectory");
  std::vector<SemiclassicalReport> reports;
  reports.reserve(traj.states.size());
  for (std::size_t n = 0; n < traj.states.size(); ++n)
    reports.push_back(semiclassical_report(traj.states[n], lattice, traj.times[n]));
  return growth_envelope_fit(reports, lattice, traj.coupling, traj.states.front().alpha.norm());
}

EnvelopeFit growth_envelope_fit(const std::vector<SemiclassicalReport>& reports, const Lattice& lattice,
                                double particles, double alpha0_hs) {
  if (reports.size() < 10) throw DimensionError("envelope fit needs at least 10 report points");
  EnvelopeFit fit;
  fit.reports = reports;
  const int d = lattice.dimension();
  fit.exponent = (d - 1.0) / (2.0 * d);
  const double base = std::pow(particles, fit.exponent);
  auto shape = [&](double t) { return base + std::abs(t) * alpha0_hs; };

  std::vector<double> ts, ys;
  for (const auto& r : reports) {
    const double m = r.max();
    if (m > 0.0) {
      ts.push_back(std::abs(r.t));
      ys.push_back(std::log(m / shape(r.t)));
    }
  }
  if (ts.empty()) throw NumericalError("degenerate trajectory: all semiclassical norms vanish");
  const double n = static_cast<double>(ts.size());
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sy += ys[i];
    stt += ts[i] * ts[i];
    sty += ts[i] * ys[i];
  }
  const double den = n * stt - st * st;
  double c = den > 1e-14 * n * stt ? (n * sty - st * sy) / den : 0.0;
  if (std::abs(c) < 1e-13) c = 0.0;
  double logC = (sy - c * st) / n;
  double lift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ts.size(); ++i) lift = std::max(lift, ys[i] - (logC + c * ts[i]));
  logC += lift;
  fit.C = std::exp(logC);
  fit.c = c;
  fit.violation = -std::numeric_limits<double>::infinity();
  for (const auto& r : reports)
    fit.violation = std::max(fit.violation, r.max() - fit.C * std::exp(c * std::abs(r.t)) * shape(r.t));
  return fit;
}

double subtle_identity_residual(const BogoliubovMap& b, const GeneralizedDensityMatrix& g, const Lattice& lattice,
                                const IntVec& p) {
  check_dimensions(g);
  if (b.size() != g.size() || g.size() != lattice.size())
    throw DimensionError("map, state and lattice sizes differ");
  const GeneralizedDensityMatrix ref = state_of(b);
  const double mismatch = std::max((ref.omega - g.omega).norm(), (ref.alpha - g.alpha).norm());
  if (mismatch > 1e-8) throw NumericalError("Bogoliubov map does not produce the given state", mismatch);
  const MatC S = shift_operator(lattice, {-p[0], -p[1], -p[2]}).matrix;
  const MatC us = b.u.adjoint();
  const MatC lhs = b.v * S * us;
  const MatC rhs = b.v * (g.omega * S - S * g.omega) * us + b.u.conjugate() * g.alpha.adjoint() * S * us -
                   b.v * S * g.alpha * b.v.transpose();
  return (lhs - rhs).norm();
}

std::vector<Flavor> parse_signature(const std::string& s) {
  std::vector<Flavor> out;
  for (char ch : s) {
    if (ch == 'c' || ch == '+') out.push_back(Flavor::create);
    else if (ch == 'a' || ch == '-') out.push_back(Flavor::annihilate);
    else throw ConfigError("signature characters must be 'c' or 'a'");
  }
  if (out.empty() || out.size() % 2 != 0) throw ConfigError("signature length must be even and positive");
  return out;
}

std::string to_string(const std::vector<Flavor>& signature) {
  std::string s;
  for (Flavor f : signature) s.push_back(f == Flavor::create ? 'c' : 'a');
  return s;
}

namespace {

Flavor dagger(Flavor f) { return f == Flavor::create ? Flavor::annihilate : Flavor::create; }

// All products over index tuples; step n applies ops[n] with every mode index to every vector of the previous level.
std::vector<VecC> expand(const FockSpace& space, const VecC& psi, const std::vector<Flavor>& ops) {
  std::vector<VecC> level{psi};
  for (Flavor f : ops) {
    std::vector<VecC> next;
    next.reserve(level.size() * static_cast<std::size_t>(space.modes));
    for (const auto& v : level)
      for (int x = 0; x < space.modes; ++x) next.push_back(apply_symbol(space, {f, x}, v));
    level = std::move(next);
  }
  return level;
}

}  // namespace

ErrorKernelReport error_kernel(const FockVector& psi, const GeneralizedDensityMatrix& g,
                               const std::vector<Flavor>& signature) {
  check_dimensions(g);
  const int L = psi.space.modes;
  if (g.size() != L) throw DimensionError("state and Fock space sizes differ");
  if (signature.empty() || signature.size() % 2 != 0) throw DimensionError("signature length must be even");
  const int j = static_cast<int>(signature.size()) / 2;
  if (j > 3) throw DimensionError("error kernels are limited to j <= 3");
  const double cols = std::pow(static_cast<double>(L), j);
  if (2.0 * cols * static_cast<double>(psi.space.dim()) > kKernelGuard || cols * cols > kKernelGuard)
    throw GuardError("error kernel of order " + std::to_string(2 * j) + " at L = " + std::to_string(L) +
                     " exceeds the oracle guard; reduce the cutoff or spin count");

  // <psi, A_1 .. A_2j psi> = <A_j^* .. A_1^* psi, A_{j+1} .. A_2j psi>
  std::vector<Flavor> left_ops, right_ops;
  for (int n = 0; n < j; ++n) left_ops.push_back(dagger(signature[static_cast<std::size_t>(n)]));
  for (int n = 2 * j - 1; n >= j; --n) right_ops.push_back(signature[static_cast<std::size_t>(n)]);
  const auto left = expand(psi.space, psi.amplitudes, left_ops);
  const auto right = expand(psi.space, psi.amplitudes, right_ops);
  const std::size_t n = left.size();
  MatC Lm(static_cast<Eigen::Index>(psi.space.dim()), static_cast<Eigen::Index>(n));
  MatC Rm(Lm.rows(), Lm.cols());
  for (std::size_t c = 0; c < n; ++c) {
    Lm.col(static_cast<Eigen::Index>(c)) = left[c];
    Rm.col(static_cast<Eigen::Index>(c)) = right[c];
  }
  const MatC exact = Lm.adjoint() * Rm;

  // Tuple index is row-major with the first applied operator most significant.
  auto decode = [&](std::size_t idx, std::vector<int>& xs) {
    for (int m = j - 1; m >= 0; --m) {
      xs[static_cast<std::size_t>(m)] = static_cast<int>(idx % static_cast<std::size_t>(L));
      idx /= static_cast<std::size_t>(L);
    }
  };
  ErrorKernelReport rep;
  rep.order = 2 * j;
  rep.signature = signature;
  double err = 0.0, ref = 0.0;
  std::vector<int> xl(static_cast<std::size_t>(j)), xr(static_cast<std::size_t>(j));
  std::vector<OperatorSymbol> ops(signature.size());
  for (std::size_t a = 0; a < n; ++a) {
    decode(a, xl);
    for (int m = 0; m < j; ++m) ops[static_cast<std::size_t>(m)] = {signature[static_cast<std::size_t>(m)], xl[static_cast<std::size_t>(m)]};
    for (std::size_t b = 0; b < n; ++b) {
      decode(b, xr);
      for (int m = 0; m < j; ++m)
        ops[static_cast<std::size_t>(2 * j - 1 - m)] = {signature[static_cast<std::size_t>(2 * j - 1 - m)], xr[static_cast<std::size_t>(m)]};
      const cxd w = wick_correlation(g, ops);
      err += std::norm(exact(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) - w);
      ref += std::norm(w);
    }
  }
  rep.err_hs = std::sqrt(err);
  rep.wick_hs = std::sqrt(ref);
  return rep;
}

}  // namespace hfbdyn
