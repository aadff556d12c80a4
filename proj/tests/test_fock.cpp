#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "hfbdyn/fock.hpp"
#include "hfbdyn/hfb.hpp"
#include "oracles.hpp"

using namespace hfbdyn;

namespace {

MatC dense(const FockOperator& op) { return MatC(op.matrix); }

MatC random_matrix(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  MatC m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cxd(nd(rng), nd(rng));
  return m;
}

Lattice lattice(int d, int K, int S, std::vector<int> n, std::optional<double> eps = std::nullopt) {
  return Lattice(LatticeSpec{d, K, S, std::move(n), eps});
}

}  // namespace

TEST_SUITE("fock") {
  TEST_CASE("Jordan-Wigner operators") {
    const auto sp = fock_space(4);
    const auto vac = FockVector::vacuum(sp);
    CHECK(apply_annihilator(sp, 0, vac.amplitudes).norm() == 0.0);
    CHECK((annihilator(sp, 0) * vac.amplitudes).norm() == 0.0);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const MatC ai = dense(annihilator(sp, i));
        const MatC aj = dense(annihilator(sp, j));
        const MatC cj = dense(creator(sp, j));
        const MatC ac = ai * cj + cj * ai;
        CHECK((ac - (i == j ? 1.0 : 0.0) * MatC::Identity(16, 16)).norm() == 0.0);
        CHECK((ai * aj + aj * ai).norm() == 0.0);
        CHECK((cj - aj.adjoint()).norm() == 0.0);
      }
    const auto ref = oracle::annihilators(5);
    const auto sp5 = fock_space(5);
    for (int b = 0; b < 5; ++b) CHECK((dense(annihilator(sp5, b)) - ref[b]).norm() == 0.0);

    // a*(1) a*(0) Omega = -|011>, a*(0) a*(1) Omega = +|011>
    const auto sp3 = fock_space(3);
    const VecC v10 = apply_monomial(sp3, std::vector<OperatorSymbol>{cre(1), cre(0)}, FockVector::vacuum(sp3).amplitudes);
    const VecC v01 = apply_monomial(sp3, std::vector<OperatorSymbol>{cre(0), cre(1)}, FockVector::vacuum(sp3).amplitudes);
    CHECK(v10(3) == cxd(-1.0));
    CHECK(v01(3) == cxd(1.0));
    CHECK_THROWS_AS(fock_space(17), GuardError);
    CHECK_THROWS_AS(annihilator(sp, 4), DimensionError);
  }

  TEST_CASE("CAR sampled at L = 8 with matrix-free actions") {
    const auto sp = fock_space(8);
    const auto psi = FockVector::random(sp, 1);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) {
        const VecC ac = apply_annihilator(sp, i, apply_creator(sp, j, psi.amplitudes)) +
                        apply_creator(sp, j, apply_annihilator(sp, i, psi.amplitudes));
        CHECK((ac - (i == j ? 1.0 : 0.0) * psi.amplitudes).norm() <= 1e-15);
        const VecC aa = apply_annihilator(sp, i, apply_annihilator(sp, j, psi.amplitudes)) +
                        apply_annihilator(sp, j, apply_annihilator(sp, i, psi.amplitudes));
        CHECK(aa.norm() <= 1e-15);
      }
  }

  TEST_CASE("second quantisation") {
    const auto sp = fock_space(5);
    const FockOperator N = second_quantize(sp, MatC::Identity(5, 5));
    CHECK((N.matrix - number_operator(sp).matrix).norm() == 0.0);
    for (Bits s = 0; s < 32; ++s) CHECK(N.matrix.coeff(s, s).real() == __builtin_popcount(s));
    std::mt19937_64 rng(2);
    const MatC O = random_matrix(5, rng);
    const MatC H = O + O.adjoint();
    const MatC dH = dense(second_quantize(sp, H));
    CHECK((dH - dH.adjoint()).norm() <= 1e-13);
    const MatC dO = dense(second_quantize(sp, O));
    CHECK((dO - dO.adjoint()).norm() > 1e-3);
    const auto psi = FockVector::random(sp, 3);
    const MatC g = rdm1(psi);
    CHECK(std::abs(psi.amplitudes.dot(dO * psi.amplitudes) - (O * g).trace()) <= 1e-12);
    const auto a = oracle::annihilators(5);
    MatC ref = MatC::Zero(32, 32);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) ref += O(i, j) * a[i].adjoint() * a[j];
    CHECK((dO - ref).norm() <= 1e-12);
    MatC pa = MatC::Zero(32, 32), pc = MatC::Zero(32, 32);
    for (int x = 0; x < 5; ++x)
      for (int y = 0; y < 5; ++y) {
        pa += O(x, y) * a[x] * a[y];
        pc += O(x, y) * a[x].adjoint() * a[y].adjoint();
      }
    CHECK((dense(pair_annihilation(sp, O)) - pa).norm() <= 1e-12);
    CHECK((dense(pair_creation(sp, O)) - pc).norm() <= 1e-12);
    CHECK_THROWS_AS(second_quantize(sp, MatC::Identity(4, 4)), DimensionError);
  }

  TEST_CASE("lattice Hamiltonian against the literal operator sum") {
    for (const auto& lat : {lattice(1, 1, 2, {1, 1}), lattice(1, 2, 1, {2}, 0.7)}) {
      const auto V = named_potential(PotentialKind::gaussian, {0.8, 1.3}, lat);
      const FockOperator H = build_hamiltonian(lat, V);
      const MatC ref = oracle::dense_hamiltonian(lat, V, oracle::annihilators(lat.size()));
      CHECK((dense(H) - ref).norm() <= 1e-12);
      const MatC Hd = dense(H);
      CHECK((Hd - Hd.adjoint()).norm() <= 1e-13);
      const MatC N = dense(number_operator(H.space));
      CHECK((Hd * N - N * Hd).norm() <= 1e-12);
      MatC K = MatC::Zero(lat.size(), lat.size());
      for (int i = 0; i < lat.size(); ++i) K(i, i) = lat.momentum(i)[0];
      const MatC P = dense(second_quantize(H.space, K));
      CHECK((Hd * P - P * Hd).norm() <= 1e-12);
    }
    const auto lat = lattice(1, 1, 2, {1, 1}, 0.5);
    const FockOperator H0 = build_hamiltonian(lat, zero_potential(lat));
    for (Bits s = 0; s < 64; ++s) {
      double e = 0.0;
      for (int m = 0; m < 6; ++m)
        if (s & (1u << m)) e += 0.25 * norm_sq(lat.momentum(m));
      CHECK(H0.matrix.coeff(s, s).real() == doctest::Approx(e));
    }
    CHECK(SpMat(H0.matrix - SpMat(MatC(dense(H0).diagonal().asDiagonal()).sparseView())).norm() == 0.0);
  }

  TEST_CASE("Krylov exponential against dense diagonalisation") {
    std::mt19937_64 rng(5);
    const MatC A0 = random_matrix(60, rng);
    const MatC A = A0 + A0.adjoint();
    VecC v = random_matrix(60, rng).col(0);
    v.normalize();
    Eigen::SelfAdjointEigenSolver<MatC> es(A);
    for (double tau : {0.1, 1.0, 7.5, -2.0}) {
      VecC ph(60);
      for (int k = 0; k < 60; ++k) ph(k) = std::polar(1.0, -tau * es.eigenvalues()(k));
      const VecC ref = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint() * v;
      KrylovStats st;
      const VecC got = expm_krylov([&](const VecC& in, VecC& out) { out = A * in; }, v, tau, {30, 1e-12}, &st);
      CHECK((got - ref).norm() <= 1e-10);
      CHECK(st.substeps >= 1);
    }
  }

  TEST_CASE("exact evolution") {
    const auto lat = lattice(1, 1, 2, {1, 1}, 0.5);
    const auto V = named_potential(PotentialKind::gaussian, {1.0, 1.5}, lat);
    const FockOperator H = build_hamiltonian(lat, V);
    const auto psi = FockVector::random(H.space, 9);
    CHECK((evolve_exact(psi, H, 0.0, 0.5).amplitudes - psi.amplitudes).norm() == 0.0);
    const auto psit = evolve_exact(psi, H, 0.8, 0.5);
    CHECK(std::abs(psit.norm() - 1.0) <= 1e-10);
    const VecC Hpsi = H * psi.amplitudes, Hpsit = H * psit.amplitudes;
    CHECK(std::abs(psi.amplitudes.dot(Hpsi) - psit.amplitudes.dot(Hpsit)) <= 1e-9);
    Eigen::SelfAdjointEigenSolver<MatC> es(dense(H));
    VecC ph(64);
    for (int k = 0; k < 64; ++k) ph(k) = std::polar(1.0, -0.8 / 0.5 * es.eigenvalues()(k));
    const VecC ref = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint() * psi.amplitudes;
    CHECK((psit.amplitudes - ref).norm() <= 1e-10);
    // Global phase commutes with the evolution.
    FockVector rot(psi.space, psi.amplitudes * std::polar(1.0, 0.4));
    CHECK((evolve_exact(rot, H, 0.8, 0.5).amplitudes - psit.amplitudes * std::polar(1.0, 0.4)).norm() <= 1e-12);
    // The model-built propagator agrees with the one split from the full matrix.
    const auto prop = ExactPropagator::from_model(lat, V, H.space);
    CHECK(prop.sectorized());
    CHECK((prop.evolve(psi, 0.8, 0.5).amplitudes - psit.amplitudes).norm() <= 1e-11);

    const FockOperator H0 = build_hamiltonian(lat, zero_potential(lat));
    const Bits occ = 0b100101;
    const auto b = evolve_exact(FockVector::basis_state(H0.space, occ), H0, 1.3, 0.5);
    double e = 0.0;
    for (int m = 0; m < 6; ++m)
      if (occ & (1u << m)) e += 0.25 * norm_sq(lat.momentum(m));
    CHECK(std::abs(b.amplitudes(occ) - std::polar(1.0, -e * 1.3 / 0.5)) <= 1e-12);

    // Pairing terms break number conservation; the full-space path is used.
    std::mt19937_64 rng(4);
    MatC O = random_matrix(6, rng);
    O = O - O.transpose().eval();
    FockOperator Q{H.space, SpMat(H.matrix + pair_creation(H.space, O).matrix + pair_annihilation(H.space, MatC(O.adjoint())).matrix)};
    const MatC Qd = dense(Q);
    CHECK((Qd - Qd.adjoint()).norm() <= 1e-12);
    CHECK(!ExactPropagator(Q).sectorized());
    Eigen::SelfAdjointEigenSolver<MatC> eq(Qd);
    for (int k = 0; k < 64; ++k) ph(k) = std::polar(1.0, -0.3 * eq.eigenvalues()(k));
    const VecC refq = eq.eigenvectors() * ph.asDiagonal() * eq.eigenvectors().adjoint() * psi.amplitudes;
    CHECK((evolve_exact(psi, Q, 0.3, 1.0).amplitudes - refq).norm() <= 1e-10);

    FockOperator bad{H.space, SpMat(H.matrix + pair_creation(H.space, O).matrix)};
    CHECK_THROWS_AS(evolve_exact(psi, bad, 0.1, 1.0), NumericalError);
  }

  TEST_CASE("reduced densities") {
    const auto sp = fock_space(6);
    const auto slater = FockVector::basis_state(sp, 0b010110);
    const MatC g = rdm1(slater);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) CHECK(g(i, j) == cxd(i == j && ((0b010110 >> i) & 1) ? 1.0 : 0.0));
    CHECK(pairing1(slater).norm() == 0.0);
    // Fixed-particle superposition: no pairing.
    VecC v = VecC::Zero(64);
    v(0b000111) = 0.6;
    v(0b101001) = cxd(0.0, 0.8);
    const FockVector fixed(sp, v);
    CHECK(pairing1(fixed).norm() == 0.0);
    const auto psi = FockVector::random(sp, 8);
    const MatC gr = rdm1(psi), pr = pairing1(psi);
    CHECK((gr - gr.adjoint()).norm() <= 1e-14);
    CHECK((pr + pr.transpose()).norm() <= 1e-14);
    Eigen::SelfAdjointEigenSolver<MatC> es(gr);
    CHECK(es.eigenvalues().minCoeff() >= -1e-14);
    CHECK(es.eigenvalues().maxCoeff() <= 1.0 + 1e-14);
    CHECK(pr.operatorNorm() <= 1.0 + 1e-14);
  }

  TEST_CASE("Gaussian state preparation") {
    const auto sp = fock_space(6);
    const auto vac = gaussian_prepare(compose_factors(6, {}), sp);
    CHECK(std::abs(vac.amplitudes(0) - 1.0) <= 1e-15);
    const auto pr = gaussian_prepare(compose_factors(6, {PairRotation{0, 1, M_PI / 2}}), sp);
    CHECK(std::abs(pr.amplitudes(0b11) - 1.0) <= 1e-15);
    CHECK(std::abs(pr.amplitudes(0)) <= 1e-15);
    const auto fill = gaussian_prepare(compose_factors(6, {ModeFill{2}, ModeFill{4}}), sp);
    CHECK(std::abs(std::abs(fill.amplitudes(0b10100)) - 1.0) <= 1e-15);

    const auto a = oracle::annihilators(6);
    for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
      const auto b = random_bogoliubov(6, seed, {2, static_cast<int>(seed % 2)});
      const auto psi = gaussian_prepare(b, sp);
      const VecC ref = oracle::quasiparticle_vacuum(b, a);
      CHECK(std::abs(std::abs(ref.dot(psi.amplitudes)) - 1.0) <= 1e-10);
      const auto g = state_of(b);
      CHECK((rdm1(psi) - g.omega).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK((pairing1(psi) - g.alpha).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK(number_moment(psi, 1) == doctest::Approx(g.omega.trace().real() + 1.0).epsilon(1e-12));
      CHECK(psi.amplitudes.dot(number_operator(sp) * psi.amplitudes).real() ==
            doctest::Approx((b.v.adjoint() * b.v).trace().real()));

      // R^* a_x R = sum_y conj(u(y,x)) a_y + conj(v(y,x)) a*_y on a random vector.
      const auto phi = FockVector::random(sp, 100 + seed);
      for (int x = 0; x < 6; ++x) {
        const VecC Rphi = apply_implementer(b, sp, phi.amplitudes);
        const VecC lhs = apply_implementer(b, sp, apply_annihilator(sp, x, Rphi), true);
        VecC rhs = VecC::Zero(64);
        for (int y = 0; y < 6; ++y)
          rhs += std::conj(b.u(y, x)) * apply_annihilator(sp, y, phi.amplitudes) +
                 std::conj(b.v(y, x)) * apply_creator(sp, y, phi.amplitudes);
        CHECK((lhs - rhs).norm() <= 1e-10);
      }
    }
    BogoliubovMap bare{MatC::Identity(6, 6), MatC::Zero(6, 6), {}, false};
    CHECK_THROWS_AS(gaussian_prepare(bare, sp), DimensionError);
  }

  TEST_CASE("number moments and snapshots") {
    const auto sp = fock_space(4);
    CHECK(number_moment(FockVector::vacuum(sp), 3) == 1.0);
    CHECK(number_moment(FockVector::basis_state(sp, 0b1011), 2) == 16.0);
    const auto psi = FockVector::random(sp, 1);
    double prev = 0.0;
    for (int k = 0; k < 5; ++k) {
      const double m = number_moment(psi, k);
      CHECK(m >= prev);
      prev = m;
    }
    const std::string js = fock_snapshot_json(FockVector::basis_state(sp, 0b0011));
    CHECK(js == R"({"modes":4,"amplitudes":{"0011":[1.0,0.0]}})");
  }
}
