#include "hfbdyn/quasifree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace hfbdyn {

MatC gamma_matrix(const GeneralizedDensityMatrix& g) {
  check_dimensions(g);
  const int L = g.size();
  MatC G(2 * L, 2 * L);
  G.topLeftCorner(L, L) = g.omega;
  G.topRightCorner(L, L) = g.alpha;
  G.bottomLeftCorner(L, L) = g.alpha.adjoint();
  G.bottomRightCorner(L, L) = MatC::Identity(L, L) - g.omega.conjugate();
  return G;
}

GeneralizedDensityMatrix from_gamma(const MatC& gamma) {
  if (gamma.rows() != gamma.cols() || gamma.rows() % 2 != 0)
    throw DimensionError("generalized density matrix must be square with even size");
  const Eigen::Index L = gamma.rows() / 2;
  return {gamma.topLeftCorner(L, L), gamma.topRightCorner(L, L)};
}

void check_dimensions(const GeneralizedDensityMatrix& g) {
  if (g.omega.rows() != g.omega.cols() || g.alpha.rows() != g.alpha.cols() ||
      g.omega.rows() != g.alpha.rows())
    throw DimensionError("omega and alpha must be square matrices of equal size");
}

double purity_residual(const GeneralizedDensityMatrix& g) {
  const MatC G = gamma_matrix(g);
  return (G * G - G).norm();
}

double StateDefects::max() const { return std::max({purity, antisymmetry, hermiticity, spectrum}); }

StateDefects state_defects(const GeneralizedDensityMatrix& g) {
  StateDefects d;
  d.purity = purity_residual(g);
  d.antisymmetry = (g.alpha.transpose() + g.alpha).norm();
  d.hermiticity = (g.omega - g.omega.adjoint()).norm();
  const MatC h = 0.5 * (g.omega + g.omega.adjoint());
  Eigen::SelfAdjointEigenSolver<MatC> es(h, Eigen::EigenvaluesOnly);
  if (h.rows() > 0) {
    d.spectrum = std::max({0.0, -es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff() - 1.0});
  }
  return d;
}

namespace {

struct Nu {
  MatC u;
  MatC v;
};

Nu factor_map(int L, const Factor& f) {
  Nu n{MatC::Identity(L, L), MatC::Zero(L, L)};
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, OneBodyRotation>) {
          if (x.unitary.rows() != L || x.unitary.cols() != L)
            throw DimensionError("one-body rotation has wrong size");
          n.u = x.unitary.adjoint();
        } else if constexpr (std::is_same_v<T, PairRotation>) {
          const int i = x.first, j = x.second;
          if (i < 0 || j < 0 || i >= L || j >= L || i == j)
            throw DimensionError("pair rotation needs two distinct modes in range");
          const double c = std::cos(x.angle), s = std::sin(x.angle);
          n.u(i, i) = c;
          n.u(j, j) = c;
          n.v(j, i) = s;
          n.v(i, j) = -s;
        } else {
          if (x.mode < 0 || x.mode >= L) throw DimensionError("fill mode out of range");
          n.u(x.mode, x.mode) = 0.0;
          n.v(x.mode, x.mode) = 1.0;
        }
      },
      f);
  return n;
}

}  // namespace

BogoliubovMap compose_factors(int modes, std::vector<Factor> factors) {
  if (modes < 1) throw DimensionError("need at least one mode");
  MatC u = MatC::Identity(modes, modes);
  MatC v = MatC::Zero(modes, modes);
  for (const auto& f : factors) {
    const Nu b = factor_map(modes, f);
    MatC nu = u * b.u + v.conjugate() * b.v;
    MatC nv = v * b.u + u.conjugate() * b.v;
    u = std::move(nu);
    v = std::move(nv);
  }
  return {std::move(u), std::move(v), std::move(factors), true};
}

double bogoliubov_residual(const BogoliubovMap& b) {
  const int L = b.size();
  const MatC I = MatC::Identity(L, L);
  const MatC& u = b.u;
  const MatC& v = b.v;
  return std::max({(u.adjoint() * u + v.adjoint() * v - I).norm(),
                   (u.adjoint() * v.conjugate() + v.adjoint() * u.conjugate()).norm(),
                   (u * u.adjoint() + v.conjugate() * v.transpose() - I).norm(),
                   (u * v.adjoint() + v.conjugate() * u.transpose()).norm()});
}

GeneralizedDensityMatrix state_of(const BogoliubovMap& b) {
  return {b.v.adjoint() * b.v, b.v.adjoint() * b.u.conjugate()};
}

namespace {

// Orthonormal basis of the column span of B, dropping directions with weight below 1/2.
MatC reorthonormalize(const MatC& B) {
  if (B.cols() == 0) return B;
  Eigen::JacobiSVD<MatC> svd(B, Eigen::ComputeThinU);
  int keep = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 0.5) ++keep;
  return svd.matrixU().leftCols(keep);
}

MatC project_out(const MatC& B, const std::vector<VecC>& chosen) {
  MatC out = B;
  for (const auto& c : chosen) out -= c * (c.adjoint() * out);
  return reorthonormalize(out);
}

}  // namespace

BogoliubovMap bloch_messiah(const GeneralizedDensityMatrix& g, double tolerance) {
  check_dimensions(g);
  const int L = g.size();
  const double residual = purity_residual(g);
  if (residual > tolerance)
    throw NumericalError("state is not pure quasi-free: ||Gamma^2 - Gamma||_F = " + std::to_string(residual),
                         residual);

  const MatC om = 0.5 * (g.omega + g.omega.adjoint());
  const MatC& al = g.alpha;
  Eigen::SelfAdjointEigenSolver<MatC> es(om);
  const VecR& lam = es.eigenvalues();
  std::vector<int> order(static_cast<std::size_t>(L));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return lam(a) > lam(b); });

  constexpr double cluster_gap = 1e-10;
  constexpr double pair_floor = 1e-12;
  std::vector<std::vector<int>> clusters;
  for (std::size_t n = 0; n < order.size(); ++n) {
    if (n == 0 || lam(order[n - 1]) - lam(order[n]) > cluster_gap) clusters.emplace_back();
    clusters.back().push_back(order[n]);
  }

  std::vector<VecC> chosen;
  std::vector<VecC> occupied, empty;
  struct Pair {
    VecC p, q;
    double theta;
  };
  std::vector<Pair> pairs;

  for (const auto& cl : clusters) {
    MatC B(L, static_cast<Eigen::Index>(cl.size()));
    for (std::size_t c = 0; c < cl.size(); ++c) B.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(cl[c]);
    B = project_out(B, chosen);
    while (B.cols() > 0) {
      // Lattice basis vector with the largest weight in the remaining space; lowest index on ties.
      int best = 0;
      double w_best = -1.0;
      for (int i = 0; i < L; ++i) {
        const double w = B.row(i).squaredNorm();
        if (w > w_best + 1e-12) {
          w_best = w;
          best = i;
        }
      }
      VecC p = B * B.row(best).adjoint();
      p /= p.norm();
      const VecC ap = al * p.conjugate();
      const double c = ap.norm();
      chosen.push_back(p);
      if (c <= pair_floor) {
        const double lp = std::real(p.dot(om * p));
        (lp > 0.5 ? occupied : empty).push_back(p);
      } else {
        VecC q = -ap / c;
        for (const auto& x : chosen) q -= x * x.dot(q);
        q /= q.norm();
        const cxd pc = p.dot(al * q.conjugate());
        if (std::abs(pc) > 0.0) q *= std::polar(1.0, std::arg(pc));
        const double cpair = std::abs(p.dot(al * q.conjugate()));
        const double lp = 0.5 * std::real(p.dot(om * p) + q.dot(om * q));
        pairs.push_back({p, q, 0.5 * std::atan2(2.0 * cpair, 1.0 - 2.0 * lp)});
        chosen.push_back(q);
      }
      B = project_out(B, {chosen.back()});
      if (c > pair_floor) B = project_out(B, {chosen[chosen.size() - 2]});
    }
  }

  MatC D(L, L);
  Eigen::Index col = 0;
  std::vector<Factor> factors;
  for (const auto& p : occupied) {
    factors.emplace_back(ModeFill{static_cast<int>(col)});
    D.col(col++) = p;
  }
  for (const auto& pr : pairs) {
    factors.emplace_back(PairRotation{static_cast<int>(col), static_cast<int>(col + 1), pr.theta});
    D.col(col++) = pr.p;
    D.col(col++) = pr.q;
  }
  for (const auto& p : empty) D.col(col++) = p;
  if (col != L) throw NumericalError("canonical basis construction lost modes", static_cast<double>(L - col));
  // Polar correction keeps D unitary to machine precision.
  Eigen::JacobiSVD<MatC> svd(D, Eigen::ComputeFullU | Eigen::ComputeFullV);
  D = svd.matrixU() * svd.matrixV().adjoint();
  factors.emplace_back(OneBodyRotation{D});

  BogoliubovMap out = compose_factors(L, std::move(factors));
  const GeneralizedDensityMatrix back = state_of(out);
  const double err = std::max((back.omega - g.omega).norm(), (back.alpha - g.alpha).norm());
  if (err > std::max(1e-8, 100.0 * tolerance))
    throw NumericalError("canonical form does not reproduce the state", err);
  return out;
}

MatC random_unitary(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  MatC Z(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) Z(i, j) = cxd(nd(rng), nd(rng));
  Eigen::HouseholderQR<MatC> qr(Z);
  MatC Q = qr.householderQ();
  const MatC R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    const double a = std::abs(R(j, j));
    if (a > 0.0) Q.col(j) *= R(j, j) / a;
  }
  return Q;
}

BogoliubovMap random_bogoliubov(int modes, std::uint64_t seed, const RandomMapOptions& options) {
  if (modes < 1) throw DimensionError("need at least one mode");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.05, 1.5);
  std::vector<Factor> factors;
  std::vector<int> perm(static_cast<std::size_t>(modes));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  for (int f = 0; f < std::min(options.fills, modes); ++f) factors.emplace_back(ModeFill{perm[f]});
  factors.emplace_back(OneBodyRotation{random_unitary(modes, rng())});
  for (int layer = 0; layer < options.pair_layers; ++layer) {
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int n = 0; n + 1 < modes; n += 2) factors.emplace_back(PairRotation{perm[n], perm[n + 1], angle(rng)});
    factors.emplace_back(OneBodyRotation{random_unitary(modes, rng())});
  }
  return compose_factors(modes, std::move(factors));
}

cxd two_point(const GeneralizedDensityMatrix& g, const OperatorSymbol& a, const OperatorSymbol& b) {
  const int L = g.size();
  if (a.index < 0 || a.index >= L || b.index < 0 || b.index >= L)
    throw DimensionError("operator index out of range");
  const bool ca = a.flavor == Flavor::create, cb = b.flavor == Flavor::create;
  if (ca && !cb) return g.omega(b.index, a.index);
  if (!ca && !cb) return g.alpha(b.index, a.index);
  if (!ca && cb) return (a.index == b.index ? 1.0 : 0.0) - g.omega(a.index, b.index);
  return std::conj(g.alpha(a.index, b.index));
}

namespace {

cxd wick_rec(const GeneralizedDensityMatrix& g, std::span<const OperatorSymbol> ops, std::vector<int>& rest) {
  if (rest.empty()) return 1.0;
  const int first = rest.front();
  cxd total = 0.0;
  for (std::size_t k = 1; k < rest.size(); ++k) {
    const int partner = rest[k];
    const cxd c = two_point(g, ops[static_cast<std::size_t>(first)], ops[static_cast<std::size_t>(partner)]);
    if (c == cxd(0.0)) continue;
    std::vector<int> sub;
    sub.reserve(rest.size() - 2);
    for (std::size_t m = 1; m < rest.size(); ++m)
      if (m != k) sub.push_back(rest[m]);
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    total += sign * c * wick_rec(g, ops, sub);
  }
  return total;
}

}  // namespace

cxd wick_correlation(const GeneralizedDensityMatrix& g, std::span<const OperatorSymbol> ops) {
  if (ops.size() % 2 != 0) throw DimensionError("Wick rule needs an even number of operators");
  std::vector<int> rest(ops.size());
  std::iota(rest.begin(), rest.end(), 0);
  return wick_rec(g, ops, rest);
}

std::size_t RdmTensor::offset(std::span<const int> x, std::span<const int> y) const {
  std::size_t idx = 0;
  for (int a : x) idx = idx * static_cast<std::size_t>(modes) + static_cast<std::size_t>(a);
  for (int b : y) idx = idx * static_cast<std::size_t>(modes) + static_cast<std::size_t>(b);
  return idx;
}

RdmTensor kparticle_rdm(const GeneralizedDensityMatrix& g, int k) {
  check_dimensions(g);
  if (k < 1 || k > 3) throw GuardError("kparticle_rdm supports 1 <= k <= 3");
  const int L = g.size();
  double entries = std::pow(static_cast<double>(L), 2 * k);
  if (entries > 5e7) throw GuardError("kparticle_rdm tensor too large");
  RdmTensor t{L, k, std::vector<cxd>(static_cast<std::size_t>(entries))};
  double kfact = 1.0;
  for (int i = 2; i <= k; ++i) kfact *= i;
  std::vector<int> idx(static_cast<std::size_t>(2 * k), 0);
  std::vector<OperatorSymbol> ops(static_cast<std::size_t>(2 * k));
  for (std::size_t n = 0; n < t.values.size(); ++n) {
    std::size_t r = n;
    for (int a = 2 * k - 1; a >= 0; --a) {
      idx[static_cast<std::size_t>(a)] = static_cast<int>(r % static_cast<std::size_t>(L));
      r /= static_cast<std::size_t>(L);
    }
    // idx = (x_1..x_k, y_1..y_k); operators a*_{y_k}..a*_{y_1} a_{x_1}..a_{x_k}
    for (int m = 0; m < k; ++m) {
      ops[static_cast<std::size_t>(m)] = cre(idx[static_cast<std::size_t>(2 * k - 1 - m)]);
      ops[static_cast<std::size_t>(k + m)] = ann(idx[static_cast<std::size_t>(m)]);
    }
    t.values[n] = wick_correlation(g, ops) / kfact;
  }
  return t;
}

}  // namespace hfbdyn
