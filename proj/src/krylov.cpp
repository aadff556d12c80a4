#include "hfbdyn/krylov.hpp"

#include <cmath>
#include <vector>

namespace hfbdyn {

VecC expm_krylov(const MatVec& apply, const VecC& v, double tau, const KrylovOptions& options,
                 KrylovStats* stats) {
  KrylovStats local;
  KrylovStats& st = stats ? *stats : local;
  VecC w = v;
  if (tau == 0.0 || w.size() == 0) return w;
  const double total = std::abs(tau);
  const double dir = tau > 0 ? 1.0 : -1.0;
  double done = 0.0;
  double step = total;
  const int mmax = std::max(2, std::min<int>(options.max_dim, static_cast<int>(w.size())));

  std::vector<VecC> basis;
  VecC work(w.size());
  while (done < total) {
    const double beta0 = w.norm();
    if (beta0 == 0.0) return w;
    basis.clear();
    basis.push_back(w / beta0);
    std::vector<double> a, b;
    bool breakdown = false;
    double beta_last = 0.0;
    for (int j = 0; j < mmax; ++j) {
      apply(basis[static_cast<std::size_t>(j)], work);
      ++st.matvecs;
      const double aj = std::real(basis[static_cast<std::size_t>(j)].dot(work));
      a.push_back(aj);
      // Full reorthogonalisation, twice.
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : basis) work -= q * q.dot(work);
      const double bj = work.norm();
      if (bj < 1e-13 * (std::abs(aj) + 1.0)) {
        breakdown = true;
        break;
      }
      if (j + 1 == mmax) {
        beta_last = bj;
        break;
      }
      b.push_back(bj);
      basis.push_back(work / bj);
    }
    const int m = static_cast<int>(a.size());
    MatR T = MatR::Zero(m, m);
    for (int i = 0; i < m; ++i) T(i, i) = a[static_cast<std::size_t>(i)];
    for (int i = 0; i + 1 < m; ++i) T(i, i + 1) = T(i + 1, i) = b[static_cast<std::size_t>(i)];
    Eigen::SelfAdjointEigenSolver<MatR> es(T);
    const MatR& Z = es.eigenvectors();
    const VecR& ev = es.eigenvalues();

    double remaining = total - done;
    double h = breakdown ? remaining : std::min(step, remaining);
    VecC coef(m);
    double err = 0.0;
    for (int attempt = 0; attempt < 60; ++attempt) {
      for (int i = 0; i < m; ++i) {
        cxd s = 0.0;
        for (int k = 0; k < m; ++k) s += Z(i, k) * std::exp(cxd(0.0, -dir * h * ev(k))) * Z(0, k);
        coef(i) = s;
      }
      err = breakdown ? 0.0 : beta0 * beta_last * std::abs(coef(m - 1));
      if (err <= options.tolerance * h / total) break;
      h *= 0.5;
    }
    w.setZero();
    for (int i = 0; i < m; ++i) w += (beta0 * coef(i)) * basis[static_cast<std::size_t>(i)];
    st.error_estimate += err;
    ++st.substeps;
    if (h >= remaining) break;
    done += h;
    step = 2.0 * h;
  }
  return w;
}

}  // namespace hfbdyn
