#include <cmath>
#include <numeric>

#include "doctest.h"
#include "hfbdyn/diagnostics.hpp"
#include "hfbdyn/ti_torus.hpp"

using namespace hfbdyn;

namespace {

Lattice lattice(int d, int K, int S, std::vector<int> n, std::optional<double> eps = std::nullopt) {
  return Lattice(LatticeSpec{d, K, S, std::move(n), eps});
}

}  // namespace

TEST_SUITE("ti_torus") {
  TEST_CASE("free Fermi gas") {
    const auto a = lattice(1, 2, 2, {3, 3});
    const auto s = ffg_symbol(a);
    for (int i = 0; i < a.size(); ++i)
      CHECK(s.omega_hat[static_cast<std::size_t>(i)] == (std::abs(a.momentum(i)[0]) <= 1 ? 1.0 : 0.0));
    const auto g = assemble(s, a);
    CHECK(purity_residual(g) == 0.0);
    CHECK(g.omega.trace().real() == 6.0);
    CHECK(admissible_counts(a) == std::vector<int>{0, 1, 3, 5});
    try {
      ffg_symbol(a, {2, 2});
      FAIL("open shell accepted");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("0, 1, 3, 5") != std::string::npos);
    }
    const auto c = lattice(3, 1, 1, {7});
    int filled = 0;
    for (double x : ffg_symbol(c).omega_hat) filled += x == 1.0;
    CHECK(filled == 7);
    CHECK(admissible_counts(c) == std::vector<int>{0, 1, 7, 19, 27});
    const auto cp = chemical_potential(a, 3);
    CHECK(cp.k_fermi * cp.k_fermi == doctest::Approx(2.5));
    CHECK(cp.mu == doctest::Approx(2.5 / 36.0));
    CHECK(fermi_sea_symbol(a).omega_hat == s.omega_hat);
    const auto open = lattice(1, 2, 2, {2, 1});
    const auto fs = fermi_sea_symbol(open);
    CHECK(fs.omega_hat[static_cast<std::size_t>(open.flatten({0, 0, 0}, 0))] == 1.0);
    CHECK(fs.omega_hat[static_cast<std::size_t>(open.flatten({-1, 0, 0}, 0))] == 1.0);
    CHECK(fs.omega_hat[static_cast<std::size_t>(open.flatten({1, 0, 0}, 0))] == 0.0);
    CHECK(fs.omega_hat[static_cast<std::size_t>(open.flatten({0, 0, 0}, 1))] == 1.0);
    CHECK(assemble(fs, open).omega.trace().real() == 3.0);
    CHECK(chemical_potential(c, 7).k_fermi * chemical_potential(c, 7).k_fermi == doctest::Approx(1.5));
  }

  TEST_CASE("lambda states") {
    const auto a = lattice(1, 2, 2, {3, 3});
    const auto f = lambda_state(a, fermi_profile(a, 3));
    CHECK(f.state.alpha.norm() == 0.0);
    CHECK(f.symbol.omega_hat == ffg_symbol(a).omega_hat);

    const auto b = lattice(1, 2, 2, {1, 1});
    const auto h = lambda_state(b, {0.0, 0.5, 0.0, 0.5, 0.0});
    CHECK(h.symbol.alpha_hat[1] == cxd(0.5));
    CHECK(h.symbol.alpha_hat[3] == cxd(0.5));
    CHECK(purity_residual(h.state) <= 1e-12);
    CHECK(h.state.omega.trace().real() == doctest::Approx(2.0));
    CHECK(state_defects(h.state).max() <= 1e-12);
    CHECK_THROWS_AS(lambda_state(b, {0.0, 0.7, 0.0, 0.3, 0.0}), DimensionError);
    CHECK_THROWS_AS(lambda_state(b, {0.0, 0.6, 0.0, 0.6, 0.0}), DimensionError);

    for (double width : {0.5, 1.0, 2.5}) {
      const auto c = lattice(1, 6, 2, {5, 5});
      const auto p = smooth_step_profile(c, 5.0, width);
      CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(5.0).epsilon(1e-13));
      for (std::size_t m = 0; m < p.size(); ++m) {
        CHECK(p[m] >= 0.0);
        CHECK(p[m] <= 1.0);
        CHECK(p[m] == p[p.size() - 1 - m]);
      }
      const auto ls = lambda_state(c, p);
      CHECK(purity_residual(ls.state) <= 1e-12);
      CHECK(semiclassical_report(ls.state, c).s2 == 0.0);
      double sum = 0.0;
      for (double l : p) sum += 2.0 * l * (1.0 - l);
      CHECK(ls.state.alpha.squaredNorm() == doctest::Approx(sum).epsilon(1e-12));
    }
    const auto d3 = lattice(3, 2, 2, {7, 7});
    const auto ls3 = lambda_state(d3, smooth_step_profile(d3, 7.0, 1.0));
    CHECK(purity_residual(ls3.state) <= 1e-12);
  }

  TEST_CASE("momentum-space energy matches the matrix functional") {
    for (const auto& lat : {lattice(1, 3, 2, {3, 3}), lattice(2, 2, 2, {5, 5}, 0.4), lattice(1, 3, 2, {3, 1})}) {
      for (auto kind : {PotentialKind::gaussian, PotentialKind::attractive_gaussian}) {
        const auto V = named_potential(kind, {0.8, 1.5}, lat);
        const auto ffg = ffg_symbol(lat);
        CHECK(hfb_energy_ti(ffg, V, lat) == doctest::Approx(hfb_energy(assemble(ffg, lat), V, lat)).epsilon(1e-12));
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
          const auto s = random_ti_symbol(lat, seed);
          const auto g = assemble(s, lat);
          CHECK(purity_residual(g) <= 1e-12);
          for (int sp = 0; sp < 2; ++sp) {
            double n = 0.0;
            for (int i = sp; i < lat.size(); i += 2) n += s.omega_hat[static_cast<std::size_t>(i)];
            CHECK(n == doctest::Approx(lat.particle_counts()[static_cast<std::size_t>(sp)]).epsilon(1e-12));
          }
          CHECK(std::abs(hfb_energy_ti(s, V, lat) - hfb_energy(g, V, lat)) <= 1e-10);
          CHECK(semiclassical_report(g, lat).s2 == 0.0);
        }
      }
    }
    const auto lat = lattice(1, 2, 2, {3, 3}, 0.5);
    double kin = 0.0;
    for (int i = 0; i < lat.size(); ++i)
      if (std::abs(lat.momentum(i)[0]) <= 1) kin += 0.25 * norm_sq(lat.momentum(i));
    CHECK(hfb_energy_ti(ffg_symbol(lat), zero_potential(lat), lat) == doctest::Approx(kin));
    // Equal counts give equal direct terms.
    const auto V = named_potential(PotentialKind::gaussian, {1.0, 1.0}, lat);
    const auto d1 = mean_field_terms(assemble(ffg_symbol(lat), lat), V, lat).direct;
    const auto d2 = mean_field_terms(assemble(random_ti_symbol(lat, 3), lat), V, lat).direct;
    CHECK((d1 - d2).norm() <= 1e-12);
  }

  TEST_CASE("ground-state scan") {
    const auto lat = lattice(1, 3, 2, {3, 1});
    const auto V = named_potential(PotentialKind::attractive_gaussian, {0.5, 1.5}, lat);
    const auto one = ground_state_scan(lat, V, 1, 7);
    CHECK(one.min_gap == 0.0);
    CHECK(one.gaps.size() == 1);
    const auto scan = ground_state_scan(lat, V, 200, 7);
    CHECK(scan.min_gap >= -1e-9);
    CHECK(scan.zero_gap_non_ffg == 0);
    CHECK(ground_state_scan(lat, V, 200, 7).gaps == scan.gaps);

    // Moving the k = 1 up particle to k = 2 costs kinetic energy that the weak exchange cannot repay.
    auto moved = ffg_symbol(lat);
    moved.omega_hat[static_cast<std::size_t>(lat.flatten({1, 0, 0}, 0))] = 0.0;
    moved.omega_hat[static_cast<std::size_t>(lat.flatten({2, 0, 0}, 0))] = 1.0;
    CHECK(hfb_energy_ti(moved, V, lat) > scan.ffg_energy);
    CHECK_THROWS_AS(ground_state_scan(lattice(1, 3, 2, {2, 2}), V, 10, 1), ConfigError);
  }

  TEST_CASE("pairing bound table") {
    PairingBoundOptions o;
    o.width = 0.0;
    for (const auto& r : pairing_bound_check({2, 6, 10}, o)) {
      CHECK(r.alpha_hs_sq_ratio == 0.0);
      CHECK(r.grad_alpha_ratio == 0.0);
      CHECK(r.energy_gap == doctest::Approx(0.0));
    }
    o.width = 1.0;
    const auto rows = pairing_bound_check({2, 6, 10, 14, 18}, o);
    for (const auto& r : rows) {
      CHECK(r.alpha_hs_sq_ratio > 0.0);
      CHECK(r.alpha_hs_sq_ratio < 2.0);
      CHECK(r.s1_ratio < 4.0);
    }
    CHECK(loglog_slope({1.0, 2.0, 4.0}, {3.0, 6.0, 12.0}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(pairing_bound_check({3}, o), ConfigError);
  }
}
