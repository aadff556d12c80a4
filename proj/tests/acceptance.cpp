// Acceptance run: one PASS/FAIL line per criterion.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hfbdyn/bench/commands.hpp"
#include "hfbdyn/bench/selftest.hpp"
#include "hfbdyn/diagnostics.hpp"
#include "hfbdyn/fock.hpp"
#include "hfbdyn/hfb.hpp"
#include "hfbdyn/ti_torus.hpp"

using namespace hfbdyn;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Trace drift of every trajectory produced below.
double g_trace_drift = 0.0;
int g_trajectories = 0;

void track(const Trajectory& tr) {
  ++g_trajectories;
  for (const auto& l : tr.log) g_trace_drift = std::max(g_trace_drift, std::abs(l.trace_omega - tr.log.front().trace_omega));
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

Lattice lattice(int d, int K, int S, std::vector<int> n, std::optional<double> eps = std::nullopt) {
  return Lattice(LatticeSpec{d, K, S, std::move(n), eps});
}

Outcome quasifree_identity() {
  double worst = 0.0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const auto g = state_of(random_bogoliubov(8, s, {2, static_cast<int>(s % 3)}));
    const auto psi = gaussian_prepare(bloch_messiah(g));
    worst = std::max({worst, (rdm1(psi) - g.omega).cwiseAbs().maxCoeff(), (pairing1(psi) - g.alpha).cwiseAbs().maxCoeff()});
  }
  return {worst <= 1e-10, "20 states at L = 8, max entry error " + sci(worst)};
}

Outcome wick_equivalence() {
  std::vector<GeneralizedDensityMatrix> gs;
  std::vector<FockVector> psis;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const auto b = random_bogoliubov(8, 100 + s, {2, static_cast<int>(s % 2)});
    gs.push_back(state_of(b));
    psis.push_back(gaussian_prepare(b));
  }
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> mode(0, 7), flavor(0, 1), which(0, 4);
  double worst = 0.0;
  for (int m = 0; m < 100; ++m) {
    const int order = 2 * (1 + m % 3);
    std::vector<OperatorSymbol> ops(static_cast<std::size_t>(order));
    for (auto& op : ops) op = {flavor(rng) ? Flavor::create : Flavor::annihilate, mode(rng)};
    const int k = which(rng);
    worst = std::max(worst, std::abs(expectation(psis[static_cast<std::size_t>(k)], ops) -
                                     wick_correlation(gs[static_cast<std::size_t>(k)], ops)));
  }
  return {worst <= 1e-10, "100 monomials of order 2/4/6 at L = 8, max error " + sci(worst)};
}

Outcome structure_preservation() {
  const auto lat = lattice(1, 3, 2, {2, 2});
  const auto V = named_potential(PotentialKind::attractive_gaussian, {1.0, 1.5}, lat);
  const auto ls = lambda_state(lat, smooth_step_profile(lat, 2.0, 1.0));
  const auto tr = evolve(ls.state, V, lat, 1.0, lat.epsilon() / 20.0);
  track(tr);
  double purity = 0.0, trace = 0.0, anti = 0.0;
  for (const auto& g : tr.states) {
    const auto d = state_defects(g);
    purity = std::max(purity, d.purity);
    anti = std::max(anti, d.antisymmetry);
    trace = std::max(trace, std::abs(g.omega.trace().real() - 4.0));
  }
  const bool ok = purity <= 1e-9 && trace <= 1e-9 && anti <= 1e-10 && ls.state.alpha.norm() > 0.1;
  return {ok, std::to_string(tr.states.size()) + " steps: purity " + sci(purity) + ", |tr - N| " + sci(trace) +
                  ", antisymmetry " + sci(anti)};
}

Outcome integrator_order() {
  const auto lat = lattice(1, 2, 2, {2, 2});
  const auto V = named_potential(PotentialKind::gaussian, {1.0, 1.5}, lat);
  const auto g0 = state_of(random_bogoliubov(lat.size(), 11, {2, 4}));
  const double T = 1.0, dt0 = lat.epsilon() / 5.0;
  auto final_omega = [&](double dt) {
    const auto tr = evolve(g0, V, lat, T, dt);
    track(tr);
    return tr.states.back().omega;
  };
  const MatC ref = final_omega(dt0 / 128.0);
  std::vector<double> err;
  for (int h = 0; h < 4; ++h) err.push_back((final_omega(dt0 / std::pow(2.0, h)) - ref).norm());
  bool ok = true;
  std::string ratios;
  for (int h = 0; h < 3; ++h) {
    const double r = err[static_cast<std::size_t>(h)] / err[static_cast<std::size_t>(h + 1)];
    ok = ok && std::abs(r - 4.0) <= 0.8;
    ratios += (h ? ", " : "") + sci(r);
  }
  return {ok, "midpoint error ratios per halving " + ratios + " (target 4 +- 20%)"};
}

Outcome free_field() {
  double worst = 0.0;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    const auto lat = lattice(1, 2, 2, {2, 2});
    const auto V0 = zero_potential(lat);
    const auto b = random_bogoliubov(lat.size(), 40 + s, {2, static_cast<int>(s)});
    const auto tr = evolve(state_of(b), V0, lat, 1.0, 0.0);
    track(tr);
    const FockSpace space = fock_space(lat.size());
    const auto prop = ExactPropagator::from_model(lat, V0.with_coupling(tr.coupling), space);
    const auto psi = prop.evolve(gaussian_prepare(b, space), 1.0, lat.epsilon());
    worst = std::max({worst, (rdm1(psi) - tr.states.back().omega).norm(),
                      (pairing1(psi) - tr.states.back().alpha).norm()});
  }
  return {worst <= 1e-9, "3 random states at L = 10, T = 1: max HS deviation " + sci(worst)};
}

Outcome theorem_trend() {
  const auto cfg = bench::config_from_text(R"({
    "schema_version": 1,
    "lattice": {"dimension": 1, "cutoff": 3, "spin_count": 2, "particle_counts": [1, 1]},
    "potential": {"kind": "gaussian", "strength": 1.0, "width": 1.5},
    "initial_state": {"kind": "fermi-sea"},
    "dynamics": {"T": 0.5, "snapshot_stride": 1000},
    "oracle": {"enabled": true, "n_values": [2, 3, 4], "signatures": ["ca"]}
  })");
  std::vector<double> ratio;
  double t0 = 0.0;
  for (int n : cfg.oracle.n_values) {
    const auto lat = bench::sweep_lattice(cfg, n);
    const auto rows = bench::compare_run(cfg, lat);
    for (const auto& r : rows) {
      if (r.t == 0.0) t0 = std::max(t0, r.err_hs);
      if (std::abs(r.t - 0.5) < 1e-12) ratio.push_back(r.ratio);
    }
  }
  bool ok = ratio.size() == 3 && t0 <= 1e-10;
  for (std::size_t i = 1; ok && i < ratio.size(); ++i) ok = ratio[i] <= ratio[i - 1];
  std::string v;
  for (std::size_t i = 0; i < ratio.size(); ++i) v += (i ? ", " : "") + sci(ratio[i]);
  return {ok, "||g1 - omega||/N^1/2 at t = 0.5 for N = 2,3,4: " + v + "; ||E2|| at t = 0: " + sci(t0)};
}

Outcome trace_law() {
  // C_hat is fitted on the first two N of the sweep and checked on the rest.
  const std::vector<int> ns{2, 6, 10, 14};
  const std::size_t fit_count = 2;
  double worst_excess = -1e300;
  std::string detail;
  for (auto kind : {PotentialKind::attractive_gaussian, PotentialKind::gaussian}) {
    double C_hat = 0.0;
    std::string rates;
    for (std::size_t k = 0; k < ns.size(); ++k) {
      const int pairs = ns[k] / 2;
      const auto probe = lattice(1, pairs + 1, 2, {pairs, pairs});
      const int K = static_cast<int>(std::ceil(chemical_potential(probe, pairs).k_fermi + 1.0)) + 1;
      const auto lat = lattice(1, K, 2, {pairs, pairs});
      const auto V = named_potential(kind, {1.0, 1.5}, lat);
      const auto ls = lambda_state(lat, smooth_step_profile(lat, pairs, 1.0));
      EvolveOptions o;
      o.stride = 5;
      const auto tr = evolve(ls.state, V, lat, 1.0, 0.0, o);
      track(tr);
      const double a0 = tr.log.front().alpha_hs;
      const double scale = ns[k] * lat.epsilon();
      double rate = 0.0;
      for (std::size_t n = 1; n < tr.states.size(); ++n)
        rate = std::max(rate, scale / tr.times[n] * std::log(tr.log[n].alpha_hs / a0));
      rates += (k ? "/" : "") + sci(rate);
      if (k < fit_count) {
        C_hat = std::max(C_hat, rate);
        continue;
      }
      for (std::size_t n = 0; n < tr.states.size(); ++n)
        worst_excess = std::max(worst_excess, tr.log[n].alpha_hs - std::exp(C_hat * tr.times[n] / scale) * a0);
    }
    detail += to_string(kind) + ": C_hat " + sci(C_hat) + ", rates " + rates + "; ";
  }
  const bool ok = g_trace_drift <= 1e-9 && worst_excess <= 1e-12;
  return {ok, "max tr drift " + sci(g_trace_drift) + " over " + std::to_string(g_trajectories) + " trajectories; " +
                  detail + "held-out N = 10,14 worst excess " + sci(worst_excess)};
}

Outcome ffg_minimality() {
  const auto lat = lattice(1, 3, 2, {3, 1});
  const auto V = named_potential(PotentialKind::attractive_gaussian, {0.5, 1.5}, lat);
  const auto scan = ground_state_scan(lat, V, 1000, 1);
  const bool ok = scan.min_gap >= -1e-9 && scan.zero_gap_non_ffg == 0;
  std::size_t runner = 1;
  for (std::size_t i = 1; i < scan.gaps.size(); ++i)
    if (scan.gaps[i] < scan.gaps[runner]) runner = i;
  return {ok, "1000 TI states (N = 3+1, attractive v0 = 0.5): min gap " + sci(scan.min_gap) + ", smallest non-FFG gap " +
                  sci(scan.gaps[runner]) + ", zero gaps off FFG " + std::to_string(scan.zero_gap_non_ffg)};
}

Outcome ratio_tables() {
  const std::vector<int> grid{2, 6, 10, 14, 18};
  const PairingBoundOptions o;
  const auto rows = pairing_bound_check(grid, o);
  auto slopes = [&](std::size_t from) {
    std::vector<double> n, a, g, s;
    for (std::size_t i = from; i < rows.size(); ++i) {
      n.push_back(rows[i].particles);
      a.push_back(rows[i].alpha_hs_sq_ratio);
      g.push_back(rows[i].grad_alpha_ratio);
      s.push_back(rows[i].s1_ratio);
    }
    return std::array<double, 3>{loglog_slope(n, a), loglog_slope(n, g), loglog_slope(n, s)};
  };
  // Tail: k_F >= 2 C with C the interpolation width.
  std::size_t tail = 0;
  auto k_fermi = [](int pairs) { return chemical_potential(lattice(1, pairs + 1, 2, {pairs, pairs}), pairs).k_fermi; };
  while (tail < rows.size() && k_fermi(rows[tail].particles / 2) < 2.0 * o.width) ++tail;
  const auto full = slopes(0);
  const auto late = slopes(tail);
  double maxr = 0.0;
  for (const auto& r : rows) maxr = std::max({maxr, r.alpha_hs_sq_ratio, r.grad_alpha_ratio, r.s1_ratio});
  const bool ok = std::all_of(full.begin(), full.end(), [](double x) { return std::abs(x) <= 0.15; });
  return {ok, "max ratio " + sci(maxr) + "; slopes over N = 2..18: " + sci(full[0]) + ", " + sci(full[1]) + ", " +
                  sci(full[2]) + "; over N >= " + std::to_string(rows[tail].particles) + " (k_F >= 2C): " +
                  sci(late[0]) + ", " + sci(late[1]) + ", " + sci(late[2])};
}

Outcome shift_identity() {
  const auto lat = lattice(1, 3, 2, {3, 3});
  double worst = 0.0;
  int checks = 0;
  for (std::uint64_t s = 1; s <= 50; ++s) {
    const auto b = random_bogoliubov(lat.size(), 500 + s, {2, static_cast<int>(s % 4)});
    const auto g = state_of(b);
    for (const auto& p : lat.dual_vectors()) {
      if (std::abs(p[0]) > 2 * lat.cutoff() - 1) continue;
      worst = std::max(worst, subtle_identity_residual(b, g, lat, p));
      ++checks;
    }
  }
  return {worst <= 1e-10, "50 states at L = 14, " + std::to_string(checks) + " (state, p) pairs: max residual " + sci(worst)};
}

Outcome operator_bounds() {
  const auto reports = bench::operator_bound_suite(8, 500, 7, 1e-12);
  int violations = 0;
  double tight = 0.0;
  for (const auto& r : reports) {
    violations += r.violations;
    tight = std::max(tight, r.tightest);
  }
  return {violations == 0, std::to_string(reports.size()) + " inequalities x 500 samples at L = 8: " +
                               std::to_string(violations) + " violations, largest lhs/rhs " + sci(tight)};
}

struct Criterion {
  int id;
  std::string title;
  std::function<Outcome()> run;
  std::string documented;  // non-empty: known failure, see the notes
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "quasi-free oracle identity", quasifree_identity, ""},
      {2, "Wick rule equivalence", wick_equivalence, ""},
      {3, "structure preservation", structure_preservation, ""},
      {4, "integrator order", integrator_order, ""},
      {5, "free-field exactness", free_field, ""},
      {6, "mean-field trend in N", theorem_trend, ""},
      {7, "trace conservation and pairing growth", trace_law, ""},
      {8, "FFG minimality scan", ffg_minimality, ""},
      {9, "pairing ratio tables", ratio_tables,
       "full-grid slope is dominated by N <= 6; even the exact FFG s1 ratio 4n/(n+1) fits slope 0.27 on this grid"},
      {10, "shift identity", shift_identity, ""},
      {11, "operator estimates", operator_bounds, ""},
  };
  int unexpected = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string tag = o.pass ? "PASS" : "FAIL";
    if (!o.pass && !c.documented.empty()) tag += " (documented: " + c.documented + ")";
    else if (!o.pass) ++unexpected;
    std::printf("[%2d] %-40s %s | %s | %.1fs\n", c.id, c.title.c_str(), tag.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return unexpected == 0 ? 0 : 1;
}
