#include "hfbdyn/lattice.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace hfbdyn {

namespace {

int ipow(int b, int e) {
  int r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

Lattice::Lattice(LatticeSpec spec) : spec_(std::move(spec)) {
  if (spec_.dimension < 1 || spec_.dimension > 3)
    throw DimensionError("lattice dimension must be 1, 2 or 3");
  if (spec_.cutoff < 0) throw DimensionError("lattice cutoff must be non-negative");
  if (spec_.spin_count < 1 || spec_.spin_count > 2)
    throw DimensionError("spin_count must be 1 or 2");
  if (static_cast<int>(spec_.particle_counts.size()) != spec_.spin_count)
    throw DimensionError("particle_counts needs one entry per spin");
  momenta_ = ipow(side(), spec_.dimension);
  for (int n : spec_.particle_counts) {
    if (n < 0) throw DimensionError("particle counts must be non-negative");
    if (n > momenta_) throw DimensionError("particle count exceeds modes per spin");
  }
  particles_ = std::accumulate(spec_.particle_counts.begin(), spec_.particle_counts.end(), 0);
  if (particles_ <= 0) throw DimensionError("total particle number must be positive");
  if (spec_.epsilon) {
    if (!(*spec_.epsilon > 0.0)) throw DimensionError("epsilon must be positive");
    epsilon_ = *spec_.epsilon;
  } else {
    epsilon_ = std::pow(static_cast<double>(particles_), -1.0 / spec_.dimension);
  }
  ks_.reserve(static_cast<std::size_t>(size()));
  for (const auto& k : momenta())
    for (int s = 0; s < spec_.spin_count; ++s) ks_.push_back(k);
}

bool Lattice::in_range(const IntVec& k) const noexcept {
  const int K = spec_.cutoff;
  for (int a = 0; a < 3; ++a) {
    if (a < spec_.dimension) {
      if (k[a] < -K || k[a] > K) return false;
    } else if (k[a] != 0) {
      return false;
    }
  }
  return true;
}

int Lattice::flatten(const IntVec& k, int spin) const noexcept {
  if (!in_range(k) || spin < 0 || spin >= spec_.spin_count) return -1;
  int idx = 0;
  for (int a = 0; a < spec_.dimension; ++a) idx = idx * side() + (k[a] + spec_.cutoff);
  return idx * spec_.spin_count + spin;
}

ModeIndex Lattice::mode(int flat) const {
  if (flat < 0 || flat >= size()) throw DimensionError("mode index out of range");
  return ModeIndex{ks_[static_cast<std::size_t>(flat)], flat % spec_.spin_count, flat};
}

int Lattice::shifted(int flat, const IntVec& p) const noexcept {
  const IntVec& k = ks_[static_cast<std::size_t>(flat)];
  return flatten({k[0] + p[0], k[1] + p[1], k[2] + p[2]}, flat % spec_.spin_count);
}

int Lattice::reflected(int flat) const noexcept {
  const IntVec& k = ks_[static_cast<std::size_t>(flat)];
  return flatten({-k[0], -k[1], -k[2]}, flat % spec_.spin_count);
}

namespace {

std::vector<IntVec> box(int dim, int reach) {
  std::vector<IntVec> out;
  const int w = 2 * reach + 1;
  const int count = ipow(w, dim);
  out.reserve(static_cast<std::size_t>(count));
  for (int n = 0; n < count; ++n) {
    IntVec v{0, 0, 0};
    int r = n;
    for (int a = dim - 1; a >= 0; --a) {
      v[a] = r % w - reach;
      r /= w;
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

std::vector<IntVec> Lattice::dual_vectors() const { return box(spec_.dimension, 2 * spec_.cutoff); }
std::vector<IntVec> Lattice::momenta() const { return box(spec_.dimension, spec_.cutoff); }

OneBodyOperator kinetic_symbol(const Lattice& lattice) { return kinetic_symbol(lattice, lattice.epsilon()); }

OneBodyOperator kinetic_symbol(const Lattice& lattice, double epsilon) {
  if (!(epsilon >= 0.0)) throw DimensionError("epsilon must be non-negative");
  const int L = lattice.size();
  const double e2 = epsilon * epsilon;
  OneBodyOperator t = OneBodyOperator::Zero(L, L);
  for (int i = 0; i < L; ++i) t(i, i) = e2 * norm_sq(lattice.momentum(i));
  return t;
}

ShiftOperator shift_operator(const Lattice& lattice, const IntVec& p) {
  const int L = lattice.size();
  ShiftOperator s{MatC::Zero(L, L), 0.0};
  int kept = 0;
  for (int i = 0; i < L; ++i) {
    const int j = lattice.shifted(i, p);
    if (j >= 0) {
      s.matrix(j, i) = 1.0;
      ++kept;
    }
  }
  s.fill_factor = static_cast<double>(kept) / L;
  return s;
}

OneBodyOperator spin_projector(const Lattice& lattice, int spin) {
  const int L = lattice.size();
  OneBodyOperator p = OneBodyOperator::Zero(L, L);
  for (int i = 0; i < L; ++i)
    if (lattice.spin(i) == spin) p(i, i) = 1.0;
  return p;
}

PotentialKind parse_potential_kind(const std::string& name) {
  if (name == "gaussian") return PotentialKind::gaussian;
  if (name == "delta-like") return PotentialKind::delta_like;
  if (name == "attractive-gaussian") return PotentialKind::attractive_gaussian;
  throw ConfigError("unknown potential kind '" + name + "'");
}

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::gaussian: return "gaussian";
    case PotentialKind::delta_like: return "delta-like";
    case PotentialKind::attractive_gaussian: return "attractive-gaussian";
  }
  return "?";
}

PotentialSpec::PotentialSpec(const Lattice& lattice, std::vector<double> table, double coupling)
    : dimension_(lattice.dimension()),
      reach_(2 * lattice.cutoff()),
      dual_side_(4 * lattice.cutoff() + 1),
      table_(std::move(table)),
      coupling_(coupling) {
  if (table_.size() != static_cast<std::size_t>(ipow(dual_side_, dimension_)))
    throw DimensionError("potential table does not cover the dual lattice");
  if (!(coupling_ > 0.0)) throw DimensionError("potential coupling must be positive");
  for (double v : table_)
    if (!std::isfinite(v)) throw DimensionError("potential table has non-finite entries");
  if (evenness_defect() != 0.0) throw DimensionError("potential table is not even");
}

std::size_t PotentialSpec::offset(const IntVec& p) const {
  std::size_t idx = 0;
  for (int a = 0; a < dimension_; ++a) {
    if (p[a] < -reach_ || p[a] > reach_) throw DimensionError("dual vector out of range");
    idx = idx * static_cast<std::size_t>(dual_side_) + static_cast<std::size_t>(p[a] + reach_);
  }
  return idx;
}

double PotentialSpec::operator()(const IntVec& p) const { return table_[offset(p)]; }

PotentialSpec PotentialSpec::with_coupling(double coupling) const {
  PotentialSpec out = *this;
  if (!(coupling > 0.0)) throw DimensionError("potential coupling must be positive");
  out.coupling_ = coupling;
  return out;
}

double PotentialSpec::max_abs() const {
  double m = 0.0;
  for (double v : table_) m = std::max(m, std::abs(v));
  return m;
}

bool PotentialSpec::is_zero() const { return max_abs() == 0.0; }

double PotentialSpec::weighted_sum() const {
  double s = 0.0;
  for (const auto& p : box(dimension_, reach_)) s += std::abs((*this)(p)) * (1.0 + norm_sq(p));
  return s;
}

double PotentialSpec::evenness_defect() const {
  double d = 0.0;
  for (const auto& p : box(dimension_, reach_))
    d = std::max(d, std::abs((*this)(p) - (*this)({-p[0], -p[1], -p[2]})));
  return d;
}

PotentialSpec named_potential(PotentialKind kind, const PotentialParams& params, const Lattice& lattice) {
  if (!std::isfinite(params.strength)) throw ConfigError("potential strength must be finite");
  if (!(params.width > 0.0)) throw ConfigError("potential width must be positive");
  double v0 = params.strength;
  if (kind == PotentialKind::attractive_gaussian) v0 = -std::abs(v0);
  std::vector<double> table;
  for (const auto& p : box(lattice.dimension(), 2 * lattice.cutoff())) {
    double v = v0;
    if (kind != PotentialKind::delta_like && std::isfinite(params.width))
      v = v0 * std::exp(-static_cast<double>(norm_sq(p)) / (params.width * params.width));
    table.push_back(v);
  }
  return PotentialSpec(lattice, std::move(table), lattice.particles());
}

PotentialSpec zero_potential(const Lattice& lattice) {
  return named_potential(PotentialKind::delta_like, {0.0, 1.0}, lattice);
}

}  // namespace hfbdyn
