#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hfbdyn::bench {

struct SuiteResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;  // largest residual (or violation) seen
  std::string detail;
};

struct SelftestOptions {
  std::uint64_t seed = 1;
  // Test fixture: run every Fock-space check without the Jordan-Wigner string.
  bool drop_string = false;
};

std::vector<SuiteResult> run_selftest(const SelftestOptions& options = {});
bool all_passed(const std::vector<SuiteResult>& results);

// Fock-space operator estimates on random (O, psi):
//   ||dG(O) psi|| <= ||O||_op ||N psi||          |<psi, dG(O) psi>| <= ||O||_op <psi, N psi>
//   ||dG(O) psi|| <= ||O||_HS ||N^1/2 psi||      ||sum O a a psi|| <= ||O||_HS ||N^1/2 psi||
//   ||sum O a* a* psi|| <= 2 ||O||_HS ||(N+1)^1/2 psi||
//   ||dG(O) psi||, ||sum O a a psi||, ||sum O a* a* psi|| <= 2 ||O||_tr ||psi||
struct InequalityReport {
  std::string name;
  int samples = 0;
  int violations = 0;     // lhs > rhs + slack
  double worst_gap = 0.0; // max(lhs - rhs)
  double tightest = 0.0;  // max(lhs / rhs)
};

std::vector<InequalityReport> operator_bound_suite(int modes, int samples, std::uint64_t seed, double slack = 1e-12,
                                                   bool drop_string = false);

}  // namespace hfbdyn::bench
