#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wbary/optimizer_core.hpp"

namespace wbary {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct DiagnosticsOptions {
  std::uint64_t seed = 7;
  /// Replaces the theta recursion in every suite that uses one.
  ThetaSchedule::Recursion theta_recursion = theta_next;
};

/// Bounds 1/(k-1+2m) <= theta_k <= 2/(k-1+2m) and the identity
/// (1 - theta_{k+1}) / theta_{k+1}^2 = 1 / theta_k^2 for k <= k_max.
SuiteResult theta_suite(const ThetaSchedule::Recursion& recursion, const std::vector<int>& ms = {1, 2, 10, 500},
                        std::int64_t k_max = 100000);

/// ASBCDS and PASBCDS on a shared noisy quadratic oracle and shared stale
/// reads must produce the same eta_k.
SuiteResult equivalence_suite(std::uint64_t seed, const ThetaSchedule::Recursion& recursion = theta_next);

/// Exact dual gradient against central differences, plus unbiasedness of
/// single-sample stochastic gradients.
SuiteResult gradient_suite(std::uint64_t seed);

/// Empirical E||sqrt(W) (g_hat - g)||^2 against 1.2 lambda_max(W) / M on K5.
SuiteResult variance_suite(std::uint64_t seed, int trials = 10000);

/// Primal distance and consensus bounds in terms of the dual gap on random
/// quadratic problems.
SuiteResult dual_primal_suite(std::uint64_t seed);

std::vector<SuiteResult> run_diagnostics(const DiagnosticsOptions& options);

}  // namespace wbary
