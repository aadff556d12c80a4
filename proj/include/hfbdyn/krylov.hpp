#pragma once

#include <functional>

#include "hfbdyn/types.hpp"

namespace hfbdyn {

struct KrylovOptions {
  int max_dim = 40;
  double tolerance = 1e-12;  // absolute error budget over the whole interval
};

struct KrylovStats {
  int substeps = 0;
  int matvecs = 0;
  double error_estimate = 0.0;
};

using MatVec = std::function<void(const VecC& in, VecC& out)>;

// exp(-i tau A) v for Hermitian A, adaptive Lanczos substeps.
VecC expm_krylov(const MatVec& apply, const VecC& v, double tau, const KrylovOptions& options = {},
                 KrylovStats* stats = nullptr);

}  // namespace hfbdyn
