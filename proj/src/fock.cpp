#include "hfbdyn/fock.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include "json.hpp"

namespace hfbdyn {

namespace {

inline int popcount(Bits b) { return std::popcount(b); }
inline Bits bit(int b) { return Bits{1} << b; }

void check_mode(const FockSpace& space, int mode) {
  if (mode < 0 || mode >= space.modes) throw DimensionError("mode index out of range");
}

struct Entry {
  Bits row;
  cxd value;
};

// Builds a column-major sparse matrix from per-column entry lists (rows already mapped).
SpMat assemble_columns(std::size_t dim, std::vector<std::vector<std::pair<int, cxd>>>& cols) {
  SpMat m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  std::size_t nnz = 0;
  for (auto& c : cols) {
    std::sort(c.begin(), c.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t w = 0;
    for (std::size_t r = 0; r < c.size(); ++r) {
      if (w > 0 && c[w - 1].first == c[r].first) {
        c[w - 1].second += c[r].second;
      } else {
        c[w++] = c[r];
      }
    }
    c.resize(w);
    c.erase(std::remove_if(c.begin(), c.end(), [](const auto& e) { return e.second == cxd(0.0); }), c.end());
    nnz += c.size();
  }
  m.reserve(static_cast<Eigen::Index>(nnz));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    m.startVec(static_cast<Eigen::Index>(j));
    for (const auto& e : cols[j]) m.insertBack(e.first, static_cast<Eigen::Index>(j)) = e.second;
    std::vector<std::pair<int, cxd>>().swap(cols[j]);
  }
  m.finalize();
  return m;
}

template <class ColumnFn>
FockOperator build_full(const FockSpace& space, ColumnFn&& column) {
  std::vector<std::vector<std::pair<int, cxd>>> cols(space.dim());
  std::vector<Entry> buf;
  for (std::size_t c = 0; c < space.dim(); ++c) {
    buf.clear();
    column(static_cast<Bits>(c), buf);
    cols[c].reserve(buf.size());
    for (const auto& e : buf) cols[c].emplace_back(static_cast<int>(e.row), e.value);
  }
  return {space, assemble_columns(space.dim(), cols)};
}

// Sign and target of a_b |s>; returns false when the result vanishes.
inline bool lower(const FockSpace& sp, Bits& s, int b, double& sign) {
  if (!(s & bit(b))) return false;
  sign *= string_sign(sp, s, b);
  s ^= bit(b);
  return true;
}

inline bool raise(const FockSpace& sp, Bits& s, int b, double& sign) {
  if (s & bit(b)) return false;
  sign *= string_sign(sp, s, b);
  s ^= bit(b);
  return true;
}

}  // namespace

FockSpace fock_space(int modes, int guard) {
  if (modes < 1) throw DimensionError("Fock space needs at least one mode");
  if (modes > guard || modes > kSectorGuard)
    throw GuardError("mode count " + std::to_string(modes) + " exceeds the Fock-space guard " +
                     std::to_string(std::min(guard, kSectorGuard)) + "; reduce the cutoff or spin count");
  return FockSpace{modes, false};
}

double string_sign(const FockSpace& space, Bits state, int b) noexcept {
  if (space.drop_string) return 1.0;
  return (popcount(state & (bit(b) - 1)) % 2) ? -1.0 : 1.0;
}

FockVector::FockVector(FockSpace s, VecC amps) : space(s), amplitudes(std::move(amps)) {
  if (static_cast<std::size_t>(amplitudes.size()) != space.dim())
    throw DimensionError("amplitude vector length must be 2^L");
  if (std::abs(amplitudes.norm() - 1.0) > 1e-10) throw NumericalError("Fock vector is not normalised");
}

FockVector FockVector::vacuum(const FockSpace& s) { return basis_state(s, 0); }

FockVector FockVector::basis_state(const FockSpace& s, Bits occupied) {
  if (occupied >= s.dim()) throw DimensionError("bitstring out of range");
  VecC a = VecC::Zero(static_cast<Eigen::Index>(s.dim()));
  a(static_cast<Eigen::Index>(occupied)) = 1.0;
  return {s, std::move(a)};
}

FockVector FockVector::random(const FockSpace& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  VecC a(static_cast<Eigen::Index>(s.dim()));
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = cxd(nd(rng), nd(rng));
  a.normalize();
  return {s, std::move(a)};
}

FockOperator annihilator(const FockSpace& space, int mode) {
  check_mode(space, mode);
  return build_full(space, [&](Bits c, std::vector<Entry>& out) {
    Bits s = c;
    double sg = 1.0;
    if (lower(space, s, mode, sg)) out.push_back({s, sg});
  });
}

FockOperator creator(const FockSpace& space, int mode) {
  check_mode(space, mode);
  return build_full(space, [&](Bits c, std::vector<Entry>& out) {
    Bits s = c;
    double sg = 1.0;
    if (raise(space, s, mode, sg)) out.push_back({s, sg});
  });
}

FockOperator number_operator(const FockSpace& space) {
  return build_full(space, [&](Bits c, std::vector<Entry>& out) {
    if (c) out.push_back({c, static_cast<double>(popcount(c))});
  });
}

FockOperator second_quantize(const FockSpace& space, const MatC& O) {
  if (O.rows() != space.modes || O.cols() != space.modes) throw DimensionError("one-body operator has wrong size");
  const int L = space.modes;
  return build_full(space, [&](Bits c, std::vector<Entry>& out) {
    for (int j = 0; j < L; ++j) {
      Bits s1 = c;
      double sg1 = 1.0;
      if (!lower(space, s1, j, sg1)) continue;
      for (int i = 0; i < L; ++i) {
        if (O(i, j) == cxd(0.0)) continue;
        Bits s2 = s1;
        double sg2 = sg1;
        if (raise(space, s2, i, sg2)) out.push_back({s2, sg2 * O(i, j)});
      }
    }
  });
}

FockOperator pair_annihilation(const FockSpace& space, const MatC& O) {
  if (O.rows() != space.modes || O.cols() != space.modes) throw DimensionError("kernel has wrong size");
  const int L = space.modes;
  return build_full(space, [&](Bits c, std::vector<Entry>& out) {
    for (int y = 0; y < L; ++y) {
      Bits s1 = c;
      double sg1 = 1.0;
      if (!lower(space, s1, y, sg1)) continue;
      for (int x = 0; x < L; ++x) {
        Bits s2 = s1;
        double sg2 = sg1;
        if (O(x, y) != cxd(0.0) && lower(space, s2, x, sg2)) out.push_back({s2, sg2 * O(x, y)});
      }
    }
  });
}

FockOperator pair_creation(const FockSpace& space, const MatC& O) {
  if (O.rows() != space.modes || O.cols() != space.modes) throw DimensionError("kernel has wrong size");
  const int L = space.modes;
  return build_full(space, [&](Bits c, std::vector<Entry>& out) {
    for (int y = 0; y < L; ++y) {
      Bits s1 = c;
      double sg1 = 1.0;
      if (!raise(space, s1, y, sg1)) continue;
      for (int x = 0; x < L; ++x) {
        Bits s2 = s1;
        double sg2 = sg1;
        if (O(x, y) != cxd(0.0) && raise(space, s2, x, sg2)) out.push_back({s2, sg2 * O(x, y)});
      }
    }
  });
}

VecC apply_annihilator(const FockSpace& space, int mode, const VecC& v) {
  check_mode(space, mode);
  VecC out = VecC::Zero(v.size());
  const Bits b = bit(mode);
  for (Bits s = 0; s < space.dim(); ++s)
    if (s & b) out(s ^ b) = string_sign(space, s, mode) * v(s);
  return out;
}

VecC apply_creator(const FockSpace& space, int mode, const VecC& v) {
  check_mode(space, mode);
  VecC out = VecC::Zero(v.size());
  const Bits b = bit(mode);
  for (Bits s = 0; s < space.dim(); ++s)
    if (!(s & b)) out(s | b) = string_sign(space, s, mode) * v(s);
  return out;
}

VecC apply_symbol(const FockSpace& space, const OperatorSymbol& op, const VecC& v) {
  return op.flavor == Flavor::create ? apply_creator(space, op.index, v) : apply_annihilator(space, op.index, v);
}

VecC apply_monomial(const FockSpace& space, std::span<const OperatorSymbol> ops, const VecC& v) {
  VecC w = v;
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) w = apply_symbol(space, *it, w);
  return w;
}

cxd expectation(const FockVector& psi, std::span<const OperatorSymbol> ops) {
  return psi.amplitudes.dot(apply_monomial(psi.space, ops, psi.amplitudes));
}

namespace {

// Columns of the lattice Hamiltonian for the given basis states; rows mapped through pos.
SpMat hamiltonian_block(const Lattice& lattice, const PotentialSpec& V, const FockSpace& space,
                        const std::vector<Bits>& states, const std::vector<int>& pos) {
  const int L = lattice.size();
  if (space.modes != L) throw DimensionError("Fock space does not match the lattice");
  const double e2 = lattice.epsilon() * lattice.epsilon();
  const double g = 0.5 / V.coupling();
  const auto duals = lattice.dual_vectors();
  std::vector<double> kin(static_cast<std::size_t>(L));
  for (int i = 0; i < L; ++i) kin[static_cast<std::size_t>(i)] = e2 * norm_sq(lattice.momentum(i));
  // For each ordered pair (m1, m2): transfers p with both targets in range.
  struct Move {
    int i, j;
    double w;
  };
  std::vector<std::vector<Move>> moves(static_cast<std::size_t>(L * L));
  if (!V.is_zero()) {
    for (int m1 = 0; m1 < L; ++m1)
      for (int m2 = 0; m2 < L; ++m2) {
        if (m1 == m2) continue;
        auto& mv = moves[static_cast<std::size_t>(m1 * L + m2)];
        for (const auto& p : duals) {
          const double vp = V(p);
          if (vp == 0.0) continue;
          const int i = lattice.shifted(m1, p);
          const int j = lattice.shifted(m2, {-p[0], -p[1], -p[2]});
          if (i < 0 || j < 0 || i == j) continue;
          mv.push_back({i, j, g * vp});
        }
      }
  }
  std::vector<std::vector<std::pair<int, cxd>>> cols(states.size());
  std::vector<int> occ;
  for (std::size_t c = 0; c < states.size(); ++c) {
    const Bits s0 = states[c];
    auto& col = cols[c];
    occ.clear();
    double diag = 0.0;
    for (int m = 0; m < L; ++m)
      if (s0 & bit(m)) {
        occ.push_back(m);
        diag += kin[static_cast<std::size_t>(m)];
      }
    if (diag != 0.0) col.emplace_back(pos[s0], diag);
    for (int m1 : occ)
      for (int m2 : occ) {
        if (m1 == m2) continue;
        const auto& mv = moves[static_cast<std::size_t>(m1 * L + m2)];
        if (mv.empty()) continue;
        // a_{m2} a_{m1}
        Bits s = s0;
        double sg = 1.0;
        lower(space, s, m1, sg);
        lower(space, s, m2, sg);
        for (const auto& x : mv) {
          Bits t = s;
          double st = sg;
          if (!raise(space, t, x.j, st)) continue;
          if (!raise(space, t, x.i, st)) continue;
          col.emplace_back(pos[t], st * x.w);
        }
      }
  }
  return assemble_columns(states.size(), cols);
}

}  // namespace

FockOperator build_hamiltonian(const Lattice& lattice, const PotentialSpec& V, const FockSpace& space) {
  if (space.modes > kFockGuard) throw GuardError("full Hamiltonian needs L <= 16");
  std::vector<Bits> states(space.dim());
  std::vector<int> pos(space.dim());
  for (std::size_t s = 0; s < space.dim(); ++s) {
    states[s] = static_cast<Bits>(s);
    pos[s] = static_cast<int>(s);
  }
  return {space, hamiltonian_block(lattice, V, space, states, pos)};
}

FockOperator build_hamiltonian(const Lattice& lattice, const PotentialSpec& V) {
  return build_hamiltonian(lattice, V, fock_space(lattice.size()));
}

ExactPropagator::ExactPropagator(const FockOperator& H, KrylovOptions options)
    : space_(H.space), options_(options) {
  const SpMat& M = H.matrix;
  if (static_cast<std::size_t>(M.rows()) != space_.dim() || M.rows() != M.cols())
    throw DimensionError("operator does not match its Fock space");
  const SpMat A = SpMat(M.adjoint());
  const double defect = SpMat(M - A).norm();
  if (defect > 1e-12 * std::max(1.0, M.norm())) throw NumericalError("Hamiltonian is not Hermitian", defect);
  bool conserving = true;
  for (Eigen::Index c = 0; c < M.outerSize() && conserving; ++c)
    for (SpMat::InnerIterator it(M, c); it; ++it)
      if (popcount(static_cast<Bits>(it.row())) != popcount(static_cast<Bits>(c))) {
        conserving = false;
        break;
      }
  if (!conserving) {
    full_ = M;
    return;
  }
  std::vector<int> pos(space_.dim());
  sectors_.resize(static_cast<std::size_t>(space_.modes + 1));
  for (Bits s = 0; s < space_.dim(); ++s) {
    auto& sec = sectors_[static_cast<std::size_t>(popcount(s))];
    pos[s] = static_cast<int>(sec.states.size());
    sec.states.push_back(s);
  }
  for (auto& sec : sectors_) {
    std::vector<std::vector<std::pair<int, cxd>>> cols(sec.states.size());
    for (std::size_t c = 0; c < sec.states.size(); ++c)
      for (SpMat::InnerIterator it(M, sec.states[c]); it; ++it)
        cols[c].emplace_back(pos[static_cast<std::size_t>(it.row())], it.value());
    sec.block = assemble_columns(sec.states.size(), cols);
  }
}

ExactPropagator ExactPropagator::from_model(const Lattice& lattice, const PotentialSpec& V, const FockSpace& space,
                                            KrylovOptions options) {
  ExactPropagator p;
  p.space_ = space;
  p.options_ = options;
  std::vector<int> pos(space.dim());
  p.sectors_.resize(static_cast<std::size_t>(space.modes + 1));
  for (Bits s = 0; s < space.dim(); ++s) {
    auto& sec = p.sectors_[static_cast<std::size_t>(popcount(s))];
    pos[s] = static_cast<int>(sec.states.size());
    sec.states.push_back(s);
  }
  for (auto& sec : p.sectors_) sec.block = hamiltonian_block(lattice, V, space, sec.states, pos);
  return p;
}

VecC ExactPropagator::apply(const VecC& v) const {
  if (sectors_.empty()) return full_ * v;
  VecC out = VecC::Zero(v.size());
  for (const auto& sec : sectors_) {
    VecC sub(static_cast<Eigen::Index>(sec.states.size()));
    for (std::size_t i = 0; i < sec.states.size(); ++i) sub(static_cast<Eigen::Index>(i)) = v(sec.states[i]);
    const VecC r = sec.block * sub;
    for (std::size_t i = 0; i < sec.states.size(); ++i) out(sec.states[i]) = r(static_cast<Eigen::Index>(i));
  }
  return out;
}

FockVector ExactPropagator::evolve(const FockVector& psi, double t, double eps) const {
  if (psi.space.modes != space_.modes) throw DimensionError("state and Hamiltonian live on different spaces");
  if (!(eps > 0.0)) throw DimensionError("epsilon must be positive");
  if (t == 0.0) return psi;
  const double tau = t / eps;
  VecC out;
  if (sectors_.empty()) {
    out = expm_krylov([&](const VecC& in, VecC& o) { o = full_ * in; }, psi.amplitudes, tau, options_);
  } else {
    out = VecC::Zero(psi.amplitudes.size());
    for (const auto& sec : sectors_) {
      VecC sub(static_cast<Eigen::Index>(sec.states.size()));
      for (std::size_t i = 0; i < sec.states.size(); ++i)
        sub(static_cast<Eigen::Index>(i)) = psi.amplitudes(sec.states[i]);
      if (sub.norm() == 0.0) continue;
      const SpMat& B = sec.block;
      const VecC r = expm_krylov([&](const VecC& in, VecC& o) { o = B * in; }, sub, tau, options_);
      for (std::size_t i = 0; i < sec.states.size(); ++i) out(sec.states[i]) = r(static_cast<Eigen::Index>(i));
    }
  }
  const double drift = std::abs(out.norm() - 1.0);
  if (drift > 1e-10) throw NumericalError("exact evolution lost normalisation", drift);
  return {psi.space, std::move(out)};
}

FockVector evolve_exact(const FockVector& psi, const FockOperator& H, double t, double eps) {
  return ExactPropagator(H).evolve(psi, t, eps);
}

namespace {

MatC annihilated_columns(const FockVector& psi) {
  const int L = psi.space.modes;
  MatC Phi(psi.amplitudes.size(), L);
  for (int x = 0; x < L; ++x) Phi.col(x) = apply_annihilator(psi.space, x, psi.amplitudes);
  return Phi;
}

}  // namespace

MatC rdm1(const FockVector& psi) {
  const MatC Phi = annihilated_columns(psi);
  return (Phi.adjoint() * Phi).transpose();
}

MatC pairing1(const FockVector& psi) {
  const int L = psi.space.modes;
  const MatC Phi = annihilated_columns(psi);
  MatC C(psi.amplitudes.size(), L);
  for (int y = 0; y < L; ++y) C.col(y) = apply_creator(psi.space, y, psi.amplitudes);
  return (C.adjoint() * Phi).transpose();
}

namespace {

void apply_pair(const FockSpace& sp, int i, int j, double theta, VecC& v) {
  const double c = std::cos(theta), s = std::sin(theta);
  const Bits bi = bit(i), bj = bit(j);
  for (Bits st = 0; st < sp.dim(); ++st) {
    if (st & (bi | bj)) continue;
    Bits t = st;
    double sg = 1.0;
    raise(sp, t, j, sg);
    raise(sp, t, i, sg);
    const cxd x = v(st), y = v(t);
    v(st) = c * x - sg * s * y;
    v(t) = sg * s * x + c * y;
  }
}

void apply_parity(const FockSpace& sp, VecC& v) {
  for (Bits s = 0; s < sp.dim(); ++s)
    if (popcount(s) % 2) v(s) = -v(s);
}

void apply_one_body(const FockSpace& sp, const MatC& W, VecC& v) {
  if (W.rows() != sp.modes) throw DimensionError("one-body rotation has wrong size");
  Eigen::ComplexSchur<MatC> schur(W);
  const MatC& T = schur.matrixT();
  const MatC& Z = schur.matrixU();
  VecC phase(T.rows());
  for (Eigen::Index k = 0; k < T.rows(); ++k) phase(k) = std::arg(T(k, k));
  const MatC K = Z * phase.asDiagonal() * Z.adjoint();
  if (K.cwiseAbs().maxCoeff() == 0.0) return;
  const FockOperator dG = second_quantize(sp, K);
  // exp(i dGamma(K)) = exp(-i * 1 * (-dGamma(K)))
  v = expm_krylov([&](const VecC& in, VecC& out) { out = -(dG.matrix * in); }, v, 1.0, {40, 1e-14});
}

}  // namespace

VecC apply_implementer(const BogoliubovMap& b, const FockSpace& space, const VecC& v, bool adjoint) {
  if (!b.factored) throw DimensionError("Bogoliubov map has no factored form");
  if (b.size() != space.modes) throw DimensionError("map and Fock space sizes differ");
  VecC w = v;
  auto one = [&](const Factor& f, bool inv) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, OneBodyRotation>) {
            apply_one_body(space, inv ? MatC(x.unitary.adjoint()) : x.unitary, w);
          } else if constexpr (std::is_same_v<T, PairRotation>) {
            check_mode(space, x.first);
            check_mode(space, x.second);
            apply_pair(space, x.first, x.second, inv ? -x.angle : x.angle, w);
          } else {
            check_mode(space, x.mode);
            if (!inv) {
              apply_parity(space, w);
              w = apply_creator(space, x.mode, w) - apply_annihilator(space, x.mode, w);
            } else {
              w = apply_annihilator(space, x.mode, w) - apply_creator(space, x.mode, w);
              apply_parity(space, w);
            }
          }
        },
        f);
  };
  if (!adjoint) {
    for (const auto& f : b.factors) one(f, false);
  } else {
    for (auto it = b.factors.rbegin(); it != b.factors.rend(); ++it) one(*it, true);
  }
  return w;
}

FockVector gaussian_prepare(const BogoliubovMap& b, const FockSpace& space) {
  VecC v = apply_implementer(b, space, FockVector::vacuum(space).amplitudes);
  v.normalize();
  return {space, std::move(v)};
}

FockVector gaussian_prepare(const BogoliubovMap& b) { return gaussian_prepare(b, fock_space(b.size())); }

double number_moment(const FockVector& psi, int k) {
  if (k < 0) throw DimensionError("moment order must be non-negative");
  double m = 0.0;
  for (Bits s = 0; s < psi.space.dim(); ++s)
    m += std::norm(psi.amplitudes(s)) * std::pow(popcount(s) + 1.0, k);
  return m;
}

std::string fock_snapshot_json(const FockVector& psi, double cutoff) {
  nlohmann::ordered_json j;
  j["modes"] = psi.space.modes;
  nlohmann::ordered_json amps = nlohmann::ordered_json::object();
  for (Bits s = 0; s < psi.space.dim(); ++s) {
    const cxd a = psi.amplitudes(s);
    if (std::abs(a) < cutoff) continue;
    std::string key(static_cast<std::size_t>(psi.space.modes), '0');
    for (int b = 0; b < psi.space.modes; ++b)
      if (s & bit(b)) key[static_cast<std::size_t>(psi.space.modes - 1 - b)] = '1';
    amps[key] = {a.real(), a.imag()};
  }
  j["amplitudes"] = std::move(amps);
  return j.dump();
}

}  // namespace hfbdyn
