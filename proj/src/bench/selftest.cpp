#include "hfbdyn/bench/selftest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include <Eigen/SVD>

#include "hfbdyn/diagnostics.hpp"
#include "hfbdyn/fock.hpp"
#include "hfbdyn/hfb.hpp"
#include "hfbdyn/ti_torus.hpp"

namespace hfbdyn::bench {

namespace {

FockSpace test_space(int modes, bool drop_string) {
  FockSpace s = fock_space(modes);
  s.drop_string = drop_string;
  return s;
}

MatC random_matrix(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> kind(0, 3);
  auto gauss = [&](int r, int c) {
    MatC m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = cxd(nd(rng), nd(rng));
    return m;
  };
  switch (kind(rng)) {
    case 0: return gauss(n, n);
    case 1: return gauss(n, 1) * gauss(1, n);  // rank one
    case 2: {
      MatC h = gauss(n, n);
      return h + h.adjoint();
    }
    default: {
      MatC a = gauss(n, n);
      return a - a.transpose();
    }
  }
}

// Random vector, either spread over all sectors or confined to one particle number.
VecC random_vector(const FockSpace& space, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> pick(-1, space.modes);
  const int sector = pick(rng);
  VecC v(static_cast<Eigen::Index>(space.dim()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const bool keep = sector < 0 || std::popcount(static_cast<Bits>(i)) == sector;
    v(i) = keep ? cxd(nd(rng), nd(rng)) : cxd(0.0);
  }
  return v / v.norm();
}

double number_weighted_norm(const VecC& v, double shift, double power) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    s += std::pow(std::popcount(static_cast<Bits>(i)) + shift, power) * std::norm(v(i));
  return std::sqrt(s);
}

}  // namespace

std::vector<InequalityReport> operator_bound_suite(int modes, int samples, std::uint64_t seed, double slack,
                                                   bool drop_string) {
  const FockSpace space = test_space(modes, drop_string);
  std::vector<InequalityReport> out{
      {"op: |dG(O)psi| <= |O|_op |N psi|"},
      {"op: |<psi,dG(O)psi>| <= |O|_op <psi,N psi>"},
      {"hs: |dG(O)psi| <= |O|_HS |N^1/2 psi|"},
      {"hs: |O.aa psi| <= |O|_HS |N^1/2 psi|"},
      {"hs: |O.a*a* psi| <= 2|O|_HS |(N+1)^1/2 psi|"},
      {"tr: |dG(O)psi| <= 2|O|_tr |psi|"},
      {"tr: |O.aa psi| <= 2|O|_tr |psi|"},
      {"tr: |O.a*a* psi| <= 2|O|_tr |psi|"},
  };
  std::mt19937_64 rng(seed);
  auto record = [&](InequalityReport& r, double lhs, double rhs) {
    ++r.samples;
    if (lhs > rhs + slack) ++r.violations;
    r.worst_gap = r.samples == 1 ? lhs - rhs : std::max(r.worst_gap, lhs - rhs);
    if (rhs > 0.0) r.tightest = std::max(r.tightest, lhs / rhs);
  };
  for (int s = 0; s < samples; ++s) {
    const MatC O = random_matrix(modes, rng);
    const VecC psi = random_vector(space, rng);
    const VecR sv = Eigen::JacobiSVD<MatC>(O).singularValues();
    const double op = sv.maxCoeff(), hs = O.norm(), tr = sv.sum();
    const double n1 = number_weighted_norm(psi, 0.0, 2.0);
    const double nh = number_weighted_norm(psi, 0.0, 1.0);
    const double nh1 = number_weighted_norm(psi, 1.0, 1.0);
    const double n_exp = nh * nh;
    const VecC dg = second_quantize(space, O) * psi;
    const VecC aa = pair_annihilation(space, O) * psi;
    const VecC cc = pair_creation(space, O) * psi;
    record(out[0], dg.norm(), op * n1);
    record(out[1], std::abs(psi.dot(dg)), op * n_exp);
    record(out[2], dg.norm(), hs * nh);
    record(out[3], aa.norm(), hs * nh);
    record(out[4], cc.norm(), 2.0 * hs * nh1);
    record(out[5], dg.norm(), 2.0 * tr);
    record(out[6], aa.norm(), 2.0 * tr);
    record(out[7], cc.norm(), 2.0 * tr);
  }
  return out;
}

namespace {

SuiteResult car_suite(const SelftestOptions& o) {
  const int L = 6;
  const FockSpace space = test_space(L, o.drop_string);
  std::vector<SpMat> a;
  for (int i = 0; i < L; ++i) a.push_back(annihilator(space, i).matrix);
  SpMat id(static_cast<Eigen::Index>(space.dim()), static_cast<Eigen::Index>(space.dim()));
  id.setIdentity();
  double worst = 0.0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      const SpMat ad = SpMat(a[static_cast<std::size_t>(j)].adjoint());
      SpMat ac = a[static_cast<std::size_t>(i)] * ad + ad * a[static_cast<std::size_t>(i)];
      if (i == j) ac -= id;
      const SpMat aa = a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(j)] +
                       a[static_cast<std::size_t>(j)] * a[static_cast<std::size_t>(i)];
      worst = std::max({worst, ac.norm(), aa.norm()});
    }
  return {"car", worst <= 1e-12, worst, "anticommutators at L = 6"};
}

SuiteResult bound_suite(const SelftestOptions& o) {
  const auto reports = operator_bound_suite(6, 60, o.seed, 1e-12, o.drop_string);
  int violations = 0;
  double worst = -1e300;
  std::ostringstream os;
  for (const auto& r : reports) {
    violations += r.violations;
    worst = std::max(worst, r.worst_gap);
    if (r.violations) os << r.name << " (" << r.violations << " violations) ";
  }
  if (!violations) os << reports.size() << " inequalities x 60 samples at L = 6";
  return {"operator-bounds", violations == 0, std::max(worst, 0.0), os.str()};
}

SuiteResult wick_suite(const SelftestOptions& o) {
  const int L = 6;
  const FockSpace space = test_space(L, o.drop_string);
  std::mt19937_64 rng(o.seed ^ 0x5bd1e995u);
  std::uniform_int_distribution<int> mode(0, L - 1), flavor(0, 1), order(1, 3);
  double worst = 0.0;
  int count = 0;
  for (int fills = 0; fills < 3; ++fills) {
    const auto b = random_bogoliubov(L, o.seed + static_cast<std::uint64_t>(fills), {2, fills});
    const auto g = state_of(b);
    const auto psi = gaussian_prepare(b, space);
    for (int m = 0; m < 40; ++m, ++count) {
      std::vector<OperatorSymbol> ops(static_cast<std::size_t>(2 * order(rng)));
      for (auto& op : ops) op = {flavor(rng) ? Flavor::create : Flavor::annihilate, mode(rng)};
      worst = std::max(worst, std::abs(expectation(psi, ops) - wick_correlation(g, ops)));
    }
  }
  return {"wick-vs-oracle", worst <= 1e-10, worst, std::to_string(count) + " monomials of order 2, 4, 6 at L = 6"};
}

SuiteResult purity_suite(const SelftestOptions& o) {
  const Lattice lat(LatticeSpec{1, 2, 2, {2, 2}, std::nullopt});
  const auto V = named_potential(PotentialKind::gaussian, {1.0, 1.5}, lat);
  double worst = 0.0;
  bool ok = true;
  for (std::uint64_t k = 0; k < 2; ++k) {
    const auto g0 = state_of(random_bogoliubov(lat.size(), o.seed + 17 * k, {2, 2}));
    const auto tr = evolve(g0, V, lat, 0.5, 0.0);
    const double n0 = tr.log.front().trace_omega;
    for (std::size_t n = 0; n < tr.states.size(); ++n) {
      const auto d = state_defects(tr.states[n]);
      const double drift = std::abs(tr.log[n].trace_omega - n0);
      worst = std::max({worst, d.purity, drift, d.antisymmetry});
      ok = ok && d.purity <= 1e-9 && drift <= 1e-9 && d.antisymmetry <= 1e-10;
    }
  }
  return {"purity-transport", ok, worst, "HFB runs to T = 0.5 at L = 10"};
}

SuiteResult identity_suite(const SelftestOptions& o) {
  const Lattice lat(LatticeSpec{1, 2, 2, {2, 2}, std::nullopt});
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 5; ++k) {
    const auto b = random_bogoliubov(lat.size(), o.seed * 31 + k, {2, static_cast<int>(k % 3)});
    const auto g = state_of(b);
    for (const auto& p : lat.dual_vectors()) worst = std::max(worst, subtle_identity_residual(b, g, lat, p));
  }
  return {"shift-identity", worst <= 1e-10, worst, "5 maps, all dual vectors at L = 10"};
}

}  // namespace

std::vector<SuiteResult> run_selftest(const SelftestOptions& options) {
  std::vector<SuiteResult> out;
  using Suite = std::function<SuiteResult(const SelftestOptions&)>;
  const std::vector<std::pair<std::string, Suite>> suites{{"car", car_suite},
                                                          {"operator-bounds", bound_suite},
                                                          {"wick-vs-oracle", wick_suite},
                                                          {"purity-transport", purity_suite},
                                                          {"shift-identity", identity_suite}};
  for (const auto& [name, run] : suites) {
    try {
      out.push_back(run(options));
    } catch (const std::exception& e) {
      out.push_back({name, false, 0.0, std::string("threw: ") + e.what()});
    }
  }
  return out;
}

bool all_passed(const std::vector<SuiteResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const SuiteResult& r) { return r.passed; });
}

}  // namespace hfbdyn::bench
