#include "hfbdyn/ti_torus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "hfbdyn/diagnostics.hpp"

namespace hfbdyn {

namespace {

int momentum_index(const Lattice& lattice, const IntVec& k) {
  const int f = lattice.flatten(k, 0);
  return f < 0 ? -1 : f / lattice.spins();
}

IntVec negate(const IntVec& k) { return {-k[0], -k[1], -k[2]}; }

// Sorted distinct |k|^2 over Z^d that are reachable inside radius^2 < limit.
std::vector<int> shell_values(int dim, int limit) {
  std::set<int> vals;
  int r = 0;
  while (r * r < limit) ++r;
  std::vector<int> k(3, 0);
  const int w = 2 * r + 1;
  int total = 1;
  for (int a = 0; a < dim; ++a) total *= w;
  for (int n = 0; n < total; ++n) {
    int m = n, s = 0;
    for (int a = 0; a < dim; ++a) {
      const int c = m % w - r;
      m /= w;
      s += c * c;
    }
    if (s < limit) vals.insert(s);
  }
  return {vals.begin(), vals.end()};
}

int ball_count(const Lattice& lattice, int radius_sq) {
  int c = 0;
  for (const auto& k : lattice.momenta())
    if (norm_sq(k) <= radius_sq) ++c;
  return c;
}

// |k|^2 radius of the closed shell holding count momenta, or -1.
int shell_radius(const Lattice& lattice, int count) {
  if (count == 0) return -1;
  const int K = lattice.cutoff();
  for (int v : shell_values(lattice.dimension(), (K + 1) * (K + 1)))
    if (ball_count(lattice, v) == count) return v;
  return -2;
}

std::string list(const std::vector<int>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + std::to_string(xs[i]);
  return s;
}

}  // namespace

GeneralizedDensityMatrix assemble(const TISymbol& s, const Lattice& lattice) {
  const int L = lattice.size();
  const int M = lattice.momentum_count();
  if (static_cast<int>(s.omega_hat.size()) != L) throw DimensionError("omega_hat size does not match the lattice");
  if (!s.alpha_hat.empty() && static_cast<int>(s.alpha_hat.size()) != M)
    throw DimensionError("alpha_hat size does not match the momentum count");
  GeneralizedDensityMatrix g{MatC::Zero(L, L), MatC::Zero(L, L)};
  for (int i = 0; i < L; ++i) g.omega(i, i) = s.omega_hat[static_cast<std::size_t>(i)];
  for (int m = 0; m < static_cast<int>(s.alpha_hat.size()); ++m) {
    const cxd a = s.alpha_hat[static_cast<std::size_t>(m)];
    if (a == cxd(0.0)) continue;
    if (lattice.spins() != 2) throw DimensionError("singlet pairing needs spin_count = 2");
    const IntVec& k = lattice.momentum(m * 2);
    const int i = lattice.flatten(k, 0);
    const int j = lattice.flatten(negate(k), 1);
    g.alpha(i, j) = a;
    g.alpha(j, i) = -a;
  }
  return g;
}

std::vector<int> admissible_counts(const Lattice& lattice) {
  const int K = lattice.cutoff();
  std::vector<int> out{0};
  for (int v : shell_values(lattice.dimension(), (K + 1) * (K + 1))) out.push_back(ball_count(lattice, v));
  return out;
}

ChemicalPotential chemical_potential(const Lattice& lattice, int count) {
  const double e2 = lattice.epsilon() * lattice.epsilon();
  const int r = shell_radius(lattice, count);
  if (r == -2)
    throw ConfigError("particle count " + std::to_string(count) + " is not a closed shell; admissible counts: " +
                      list(admissible_counts(lattice)));
  if (r == -1) return {-0.5 * e2, 0.0};
  const int K = lattice.cutoff();
  const auto vals = shell_values(lattice.dimension(), (K + 3) * (K + 3));
  const int next = *std::upper_bound(vals.begin(), vals.end(), r);
  const double kf2 = 0.5 * (r + next);
  return {e2 * kf2, std::sqrt(kf2)};
}

TISymbol ffg_symbol(const Lattice& lattice, const std::vector<int>& counts) {
  if (static_cast<int>(counts.size()) != lattice.spins()) throw DimensionError("one count per spin required");
  std::vector<int> radius;
  for (int c : counts) {
    const int r = shell_radius(lattice, c);
    if (r == -2)
      throw ConfigError("particle count " + std::to_string(c) +
                        " is not a closed Fermi shell; admissible counts: " + list(admissible_counts(lattice)));
    radius.push_back(r);
  }
  TISymbol s;
  s.omega_hat.assign(static_cast<std::size_t>(lattice.size()), 0.0);
  for (int i = 0; i < lattice.size(); ++i)
    if (norm_sq(lattice.momentum(i)) <= radius[static_cast<std::size_t>(lattice.spin(i))])
      s.omega_hat[static_cast<std::size_t>(i)] = 1.0;
  s.alpha_hat.assign(static_cast<std::size_t>(lattice.momentum_count()), 0.0);
  return s;
}

TISymbol ffg_symbol(const Lattice& lattice) { return ffg_symbol(lattice, lattice.particle_counts()); }

TISymbol fermi_sea_symbol(const Lattice& lattice) {
  std::vector<int> order(static_cast<std::size_t>(lattice.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return norm_sq(lattice.momentum(a)) < norm_sq(lattice.momentum(b)); });
  std::vector<int> left = lattice.particle_counts();
  TISymbol s;
  s.omega_hat.assign(static_cast<std::size_t>(lattice.size()), 0.0);
  for (int i : order) {
    int& n = left[static_cast<std::size_t>(lattice.spin(i))];
    if (n > 0) {
      --n;
      s.omega_hat[static_cast<std::size_t>(i)] = 1.0;
    }
  }
  s.alpha_hat.assign(static_cast<std::size_t>(lattice.momentum_count()), 0.0);
  return s;
}

LambdaState lambda_state(const Lattice& lattice, const std::vector<double>& profile) {
  if (lattice.spins() != 2) throw DimensionError("lambda states need spin_count = 2");
  const int M = lattice.momentum_count();
  if (static_cast<int>(profile.size()) != M) throw DimensionError("profile size does not match the momentum count");
  double sum = 0.0;
  for (int m = 0; m < M; ++m) {
    const double l = profile[static_cast<std::size_t>(m)];
    if (!(l >= -1e-14 && l <= 1.0 + 1e-14)) throw DimensionError("profile values must lie in [0, 1]");
    const int mm = momentum_index(lattice, negate(lattice.momentum(2 * m)));
    if (std::abs(l - profile[static_cast<std::size_t>(mm)]) > 1e-12)
      throw DimensionError("profile is not even under k -> -k");
    sum += l;
  }
  if (std::abs(sum - 0.5 * lattice.particles()) > 1e-9)
    throw DimensionError("profile sums to " + std::to_string(sum) + ", expected N/2 = " +
                         std::to_string(0.5 * lattice.particles()));
  LambdaState out;
  auto& s = out.symbol;
  s.omega_hat.resize(static_cast<std::size_t>(lattice.size()));
  s.alpha_hat.resize(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) {
    const double l = std::clamp(profile[static_cast<std::size_t>(m)], 0.0, 1.0);
    s.omega_hat[static_cast<std::size_t>(2 * m)] = l;
    s.omega_hat[static_cast<std::size_t>(2 * m + 1)] = l;
    s.alpha_hat[static_cast<std::size_t>(m)] = std::sqrt(l * (1.0 - l));
  }
  out.state = assemble(s, lattice);
  return out;
}

std::vector<double> fermi_profile(const Lattice& lattice, int pairs) {
  const int r = shell_radius(lattice, pairs);
  if (r == -2)
    throw ConfigError("pair count " + std::to_string(pairs) + " is not a closed shell; admissible counts: " +
                      list(admissible_counts(lattice)));
  std::vector<double> out;
  for (const auto& k : lattice.momenta()) out.push_back(norm_sq(k) <= r ? 1.0 : 0.0);
  return out;
}

std::vector<double> smooth_step_profile(const Lattice& lattice, double pairs, double width) {
  if (width <= 0.0) {
    const int p = static_cast<int>(std::lround(pairs));
    if (std::abs(p - pairs) > 1e-12) throw ConfigError("sharp profile needs an integer pair count");
    return fermi_profile(lattice, p);
  }
  const auto ks = lattice.momenta();
  if (!(pairs > 0.0 && pairs < static_cast<double>(ks.size())))
    throw ConfigError("pair count must lie strictly between 0 and the momentum count");
  std::vector<double> radius;
  for (const auto& k : ks) radius.push_back(std::sqrt(static_cast<double>(norm_sq(k))));
  auto profile = [&](double m) {
    std::vector<double> out;
    for (double r : radius) {
      const double x = (r - m) / width;
      out.push_back(x <= -1.0 ? 1.0 : x >= 1.0 ? 0.0 : 0.5 - 0.75 * x + 0.25 * x * x * x);
    }
    return out;
  };
  auto total = [&](double m) {
    const auto p = profile(m);
    return std::accumulate(p.begin(), p.end(), 0.0);
  };
  double lo = -width, hi = *std::max_element(radius.begin(), radius.end()) + width;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (total(mid) < pairs ? lo : hi) = mid;
  }
  auto p = profile(0.5 * (lo + hi));
  // Absorb the last bisection round-off into the shell so that the sum is exact.
  const double err = std::accumulate(p.begin(), p.end(), 0.0) - pairs;
  double shell = 0.0;
  for (double v : p) shell += v * (1.0 - v);
  if (shell > 0.0)
    for (double& v : p) v -= err * v * (1.0 - v) / shell;
  return p;
}

double hfb_energy_ti(const TISymbol& s, const PotentialSpec& V, const Lattice& lattice) {
  const int L = lattice.size();
  const int S = lattice.spins();
  if (static_cast<int>(s.omega_hat.size()) != L) throw DimensionError("omega_hat size does not match the lattice");
  const double e2 = lattice.epsilon() * lattice.epsilon();
  const double inv = 1.0 / V.coupling();
  double kin = 0.0, n = 0.0;
  for (int i = 0; i < L; ++i) {
    kin += e2 * norm_sq(lattice.momentum(i)) * s.omega_hat[static_cast<std::size_t>(i)];
    n += s.omega_hat[static_cast<std::size_t>(i)];
  }
  const double direct = 0.5 * inv * V({0, 0, 0}) * n * n;
  double exch = 0.0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      if (lattice.spin(i) != lattice.spin(j)) continue;
      const IntVec& ki = lattice.momentum(i);
      const IntVec& kj = lattice.momentum(j);
      exch += V({ki[0] - kj[0], ki[1] - kj[1], ki[2] - kj[2]}) * s.omega_hat[static_cast<std::size_t>(i)] *
              s.omega_hat[static_cast<std::size_t>(j)];
    }
  exch *= 0.5 * inv;
  cxd pair = 0.0;
  const int M = static_cast<int>(s.alpha_hat.size());
  for (int a = 0; a < M; ++a) {
    if (s.alpha_hat[static_cast<std::size_t>(a)] == cxd(0.0)) continue;
    const IntVec& ka = lattice.momentum(a * S);
    for (int b = 0; b < M; ++b) {
      const IntVec& kb = lattice.momentum(b * S);
      pair += V({ka[0] - kb[0], ka[1] - kb[1], ka[2] - kb[2]}) * std::conj(s.alpha_hat[static_cast<std::size_t>(a)]) *
              s.alpha_hat[static_cast<std::size_t>(b)];
    }
  }
  return kin + direct - exch + inv * pair.real();
}

namespace {

// Caps weights at 1 and scales the rest so that the sum equals target.
std::vector<double> water_fill(const std::vector<double>& w, double target) {
  const std::size_t n = w.size();
  std::vector<double> out(n, 0.0);
  if (n == 0 || target <= 0.0) return out;
  if (target >= static_cast<double>(n) - 1e-15) return std::vector<double>(n, 1.0);
  auto total = [&](double s) {
    double t = 0.0;
    for (double x : w) t += std::min(1.0, s * x);
    return t;
  };
  double lo = 0.0, hi = 1.0;
  while (total(hi) < target) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (total(mid) < target ? lo : hi) = mid;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = std::min(1.0, hi * w[i]);
  return out;
}

}  // namespace

TISymbol random_ti_symbol(const Lattice& lattice, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int M = lattice.momentum_count();
  const auto& counts = lattice.particle_counts();
  TISymbol s;
  s.omega_hat.assign(static_cast<std::size_t>(lattice.size()), 0.0);
  s.alpha_hat.assign(static_cast<std::size_t>(M), 0.0);
  std::vector<int> perm(static_cast<std::size_t>(M));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  if (lattice.spins() == 1) {
    for (int n = 0; n < counts[0]; ++n) s.omega_hat[static_cast<std::size_t>(perm[static_cast<std::size_t>(n)])] = 1.0;
    return s;
  }
  const int up = counts[0], dn = counts[1];
  const int delta = up - dn;
  const int lo = std::max(0, -delta), hi = std::min(dn, M - up);
  const int singles_dn = std::uniform_int_distribution<int>(lo, hi)(rng);
  const int singles_up = singles_dn + delta;
  const double pair_sum = dn - singles_dn;

  std::vector<int> role(static_cast<std::size_t>(M), 0);  // 1 single up, 2 single down, 0 paired
  for (int n = 0; n < singles_up; ++n) role[static_cast<std::size_t>(perm[static_cast<std::size_t>(n)])] = 1;
  for (int n = 0; n < singles_dn; ++n) role[static_cast<std::size_t>(perm[static_cast<std::size_t>(singles_up + n)])] = 2;

  const double shapes[] = {0.3, 1.0, 3.0};
  std::gamma_distribution<double> gd(shapes[std::uniform_int_distribution<int>(0, 2)(rng)], 1.0);
  std::vector<double> w(static_cast<std::size_t>(M), 0.0);
  for (int m = 0; m < M; ++m)
    if (role[static_cast<std::size_t>(m)] == 0) w[static_cast<std::size_t>(m)] = gd(rng) + 1e-12;
  // Symmetrize under k -> -k where both slots are paired.
  for (int m = 0; m < M; ++m) {
    const int mm = momentum_index(lattice, negate(lattice.momentum(2 * m)));
    if (mm > m && role[static_cast<std::size_t>(m)] == 0 && role[static_cast<std::size_t>(mm)] == 0) {
      const double avg = 0.5 * (w[static_cast<std::size_t>(m)] + w[static_cast<std::size_t>(mm)]);
      w[static_cast<std::size_t>(m)] = w[static_cast<std::size_t>(mm)] = avg;
    }
  }
  std::vector<int> paired;
  std::vector<double> pw;
  for (int m = 0; m < M; ++m)
    if (role[static_cast<std::size_t>(m)] == 0) {
      paired.push_back(m);
      pw.push_back(w[static_cast<std::size_t>(m)]);
    }
  const auto lam = water_fill(pw, pair_sum);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  for (int m = 0; m < M; ++m) {
    const IntVec& k = lattice.momentum(2 * m);
    const int iu = lattice.flatten(k, 0);
    const int jd = lattice.flatten(negate(k), 1);
    if (role[static_cast<std::size_t>(m)] == 1) s.omega_hat[static_cast<std::size_t>(iu)] = 1.0;
    if (role[static_cast<std::size_t>(m)] == 2) s.omega_hat[static_cast<std::size_t>(jd)] = 1.0;
  }
  for (std::size_t n = 0; n < paired.size(); ++n) {
    const int m = paired[n];
    const IntVec& k = lattice.momentum(2 * m);
    const double l = lam[n];
    s.omega_hat[static_cast<std::size_t>(lattice.flatten(k, 0))] = l;
    s.omega_hat[static_cast<std::size_t>(lattice.flatten(negate(k), 1))] = l;
    s.alpha_hat[static_cast<std::size_t>(m)] = std::polar(std::sqrt(std::max(0.0, l * (1.0 - l))), phase(rng));
  }
  return s;
}

ScanReport ground_state_scan(const Lattice& lattice, const PotentialSpec& V, int trials, std::uint64_t seed) {
  if (trials < 1) throw ConfigError("trials must be positive");
  const TISymbol ffg = ffg_symbol(lattice);
  ScanReport r;
  r.ffg_energy = hfb_energy_ti(ffg, V, lattice);
  r.min_energy = r.ffg_energy;
  r.gaps.push_back(0.0);
  for (int t = 1; t < trials; ++t) {
    std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(t)};
    std::uint32_t parts[2];
    sq.generate(parts, parts + 2);
    const TISymbol s = random_ti_symbol(lattice, (static_cast<std::uint64_t>(parts[0]) << 32) | parts[1]);
    const double e = hfb_energy_ti(s, V, lattice);
    const double gap = e - r.ffg_energy;
    r.gaps.push_back(gap);
    if (e < r.min_energy) {
      r.min_energy = e;
      r.argmin = static_cast<std::size_t>(t);
    }
    if (std::abs(gap) <= 1e-9) {
      double dist = 0.0;
      for (std::size_t i = 0; i < s.omega_hat.size(); ++i) dist += std::abs(s.omega_hat[i] - ffg.omega_hat[i]);
      for (const cxd& a : s.alpha_hat) dist += std::abs(a);
      if (dist > 1e-6) ++r.zero_gap_non_ffg;
    }
  }
  r.min_gap = *std::min_element(r.gaps.begin(), r.gaps.end());
  r.note = "FFG minimality is asserted only for N large enough; the threshold is estimated from the scan";
  return r;
}

double loglog_slope(const std::vector<double>& n, const std::vector<double>& value) {
  if (n.size() != value.size() || n.size() < 2) throw DimensionError("slope needs at least two points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double m = static_cast<double>(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(n[i] > 0.0 && value[i] > 0.0)) throw NumericalError("log-log slope needs positive data");
    const double x = std::log(n[i]), y = std::log(value[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

std::vector<PairingBoundRow> pairing_bound_check(const std::vector<int>& particle_grid,
                                                 const PairingBoundOptions& options) {
  std::vector<PairingBoundRow> rows;
  const int d = options.dimension;
  for (int N : particle_grid) {
    if (N <= 0 || N % 2) throw ConfigError("particle grid entries must be positive and even");
    const int pairs = N / 2;
    // Fermi radius from a box large enough to hold the ball.
    int Kb = 1;
    while (std::pow(2 * Kb + 1, d) < 4.0 * pairs) ++Kb;
    const Lattice probe(LatticeSpec{d, Kb + 1, 2, {pairs, pairs}, std::nullopt});
    const ChemicalPotential cp = chemical_potential(probe, pairs);
    const int K = static_cast<int>(std::ceil(cp.k_fermi + options.width)) + options.margin;
    const Lattice lat(LatticeSpec{d, K, 2, {pairs, pairs}, std::nullopt});
    const PotentialSpec V = named_potential(options.potential, options.params, lat);
    const LambdaState ls = lambda_state(lat, smooth_step_profile(lat, pairs, options.width));
    const SemiclassicalReport rep = semiclassical_report(ls.state, lat);
    double s1sq = 0.0;
    for (const auto& p : lat.dual_vectors()) {
      const double c = shift_commutator_hs(ls.state.omega, lat, p);
      s1sq = std::max(s1sq, c * c / (1.0 + std::sqrt(static_cast<double>(norm_sq(p)))));
    }
    const double scale = std::pow(static_cast<double>(N), (d - 1.0) / d);
    PairingBoundRow row;
    row.particles = N;
    row.cutoff = K;
    row.energy_gap = hfb_energy_ti(ls.symbol, V, lat) - hfb_energy_ti(ffg_symbol(lat), V, lat);
    row.alpha_hs_sq_ratio = ls.state.alpha.squaredNorm() / scale;
    row.grad_alpha_ratio = rep.s3 * rep.s3 / scale;
    row.s1_ratio = s1sq / (N * lat.epsilon());
    rows.push_back(row);
  }
  return rows;
}

}  // namespace hfbdyn
