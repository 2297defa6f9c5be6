#pragma once

// Log-determinant estimators for SPD matrices.
//
//   log det M = log det P + tr log(M P^{-1})
//
// The trace term is estimated with Hutchinson probes. For the rational
// estimators (R1, R3, R5) log is replaced by the partial-fraction form
// r(x) = b + sum_j c_j / (x - a_j); each probe v needs the shifted solves
// (M P^{-1} - a_j I)^{-1} v, which all come from one Lanczos factorization
// started at v. SLQ uses the same factorizations with Gauss quadrature
// instead of the rational function.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "rstar/lanczos.hpp"
#include "rstar/linalg.hpp"
#include "rstar/precond.hpp"
#include "rstar/probes.hpp"

namespace rstar {

enum class Algorithm { R1, R3, R5, SLQ, CholeskyExact };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view s);
/// Rational order used by R1/R3/R5; throws for the other algorithms.
int rational_order(Algorithm a);

struct EstimatorConfig {
  Algorithm algorithm = Algorithm::R3;
  std::size_t probes = 35;
  std::size_t lanczos_iters = 20;
  ProbeKind probe_kind = ProbeKind::Rademacher;
  PreconditionerConfig precond{};
  LanczosMetric lanczos_metric = LanczosMetric::Preconditioned;
  std::uint64_t seed = 0;

  void validate(std::size_t n) const;
};

struct LogDetEstimate {
  double value = 0.0;
  double logdet_precond = 0.0;
  double trace_term = 0.0;
  /// v_i^T f(M P^{-1}) v_i for each probe, in probe order.
  std::vector<double> per_probe;
  std::chrono::duration<double> wall_time{};
  /// SLQ only: Ritz values at or below zero that were clamped before log.
  std::size_t clamped_ritz_values = 0;

  /// Unbiased sample variance of per_probe (0 with fewer than two probes).
  double per_probe_variance() const;
};

/// Preconditioner randomness comes from Rng(seed).child(1) and probes from
/// Rng(seed).child(2), so every algorithm run with the same seed sees the same
/// P and the same probe vectors. Lanczos steps are capped at n.
LogDetEstimate rstar_logdet(const DenseSymMatrix& m, const EstimatorConfig& cfg);
LogDetEstimate slq_logdet(const DenseSymMatrix& m, const EstimatorConfig& cfg);
LogDetEstimate exact_logdet(const DenseSymMatrix& m);

/// Dispatches on cfg.algorithm.
LogDetEstimate estimate_logdet(const DenseSymMatrix& m, const EstimatorConfig& cfg);

}  // namespace rstar
