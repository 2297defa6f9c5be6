#include "rstar/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rstar/errors.hpp"
#include "rstar/lanczos.hpp"
#include "rstar/rational.hpp"

namespace rstar {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kRitzFloor = 1e-300;

struct Krylov {
  Preconditioner precond;
  ProbeBatch probes;
  std::vector<LanczosFactorization> factorizations;
};

Krylov factorize(const DenseSymMatrix& m, const EstimatorConfig& cfg) {
  cfg.validate(m.dim());
  const Rng root(cfg.seed);
  Rng precond_rng = root.child(1);
  Rng probe_rng = root.child(2);
  Preconditioner p = build_preconditioner(m, cfg.precond, precond_rng);
  ProbeBatch probes = make_probes(cfg.probe_kind, cfg.probes, m.dim(), probe_rng);
  auto facts = lanczos_batch(m, p, probes.vectors, std::min(cfg.lanczos_iters, m.dim()), cfg.lanczos_metric);
  return {std::move(p), std::move(probes), std::move(facts)};
}

void finish(LogDetEstimate& est, double logdet_p, Clock::time_point start) {
  est.logdet_precond = logdet_p;
  double sum = 0.0;
  for (double v : est.per_probe) sum += v;
  est.trace_term = sum / static_cast<double>(est.per_probe.size());
  est.value = est.logdet_precond + est.trace_term;
  est.wall_time = Clock::now() - start;
}

}  // namespace

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::R1: return "r1";
    case Algorithm::R3: return "r3";
    case Algorithm::R5: return "r5";
    case Algorithm::SLQ: return "slq";
    case Algorithm::CholeskyExact: return "exact";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view s) {
  for (Algorithm a : {Algorithm::R1, Algorithm::R3, Algorithm::R5, Algorithm::SLQ, Algorithm::CholeskyExact})
    if (to_string(a) == s) return a;
  throw InvalidArgument("unknown algorithm '" + std::string(s) + "'");
}

int rational_order(Algorithm a) {
  switch (a) {
    case Algorithm::R1: return 1;
    case Algorithm::R3: return 3;
    case Algorithm::R5: return 5;
    default: throw InvalidArgument("algorithm '" + std::string(to_string(a)) + "' is not rational");
  }
}

void EstimatorConfig::validate(std::size_t n) const {
  if (probes < 1) throw InvalidArgument("estimator: probe count must be >= 1");
  if (lanczos_iters < 1) throw InvalidArgument("estimator: lanczos_iters must be >= 1");
  precond.validate(n);
}

double LogDetEstimate::per_probe_variance() const {
  const std::size_t s = per_probe.size();
  if (s < 2) return 0.0;
  double mean = 0.0;
  for (double v : per_probe) mean += v;
  mean /= static_cast<double>(s);
  double ss = 0.0;
  for (double v : per_probe) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(s - 1);
}

LogDetEstimate rstar_logdet(const DenseSymMatrix& m, const EstimatorConfig& cfg) {
  const auto start = Clock::now();
  const RationalPartialFraction pf = partial_fraction(rational_order(cfg.algorithm));
  std::vector<double> shifts(pf.poles.size());
  std::transform(pf.poles.begin(), pf.poles.end(), shifts.begin(), [](double a) { return -a; });

  const Krylov k = factorize(m, cfg);
  const std::size_t s = k.factorizations.size();
  LogDetEstimate est;
  est.per_probe.assign(s, 0.0);

  bool singular = false;
  std::string singular_what;
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < s; ++i) {
    const auto v = k.probes.vectors.row(i);
    const LanczosFactorization& f = k.factorizations[i];
    try {
      const auto ws = multishift_solve(f, shifts);
      double acc = pf.offset * dot(v, v);
      for (std::size_t j = 0; j < ws.size(); ++j) acc += pf.residues[j] * dot(v, lift(f, ws[j]));
      est.per_probe[i] = acc;
    } catch (const SingularShiftedSystem& e) {
#pragma omp critical(rstar_singular)
      {
        singular = true;
        singular_what = e.what();
      }
    }
  }
  if (singular) throw SingularShiftedSystem("rstar_logdet: " + singular_what);
  finish(est, k.precond.log_det(), start);
  return est;
}

LogDetEstimate slq_logdet(const DenseSymMatrix& m, const EstimatorConfig& cfg) {
  const auto start = Clock::now();
  const Krylov k = factorize(m, cfg);
  const std::size_t s = k.factorizations.size();
  LogDetEstimate est;
  est.per_probe.assign(s, 0.0);
  std::vector<std::size_t> clamped(s, 0);

#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < s; ++i) {
    const LanczosFactorization& f = k.factorizations[i];
    const SymEigen eig = tridiag_eig(f.tridiag);
    // v^T log(M P^{-1}) v ~= (Q v)^T Y log(Theta) Y^T (start_norm e_1). In the
    // Euclidean metric Q v = |v| e_1 and this is the Gauss quadrature rule
    // |v|^2 sum_q Y[q][0]^2 log(theta_q).
    const bool euclidean = cfg.lanczos_metric == LanczosMetric::Euclidean;
    std::vector<double> qv(f.steps());
    if (!euclidean)
      for (std::size_t r = 0; r < qv.size(); ++r) qv[r] = dot(f.basis.row(r), k.probes.vectors.row(i));
    double acc = 0.0;
    for (std::size_t q = 0; q < eig.values.size(); ++q) {
      double theta = eig.values[q];
      if (!(theta > kRitzFloor)) {
        theta = kRitzFloor;
        ++clamped[i];
      }
      const auto y = eig.vectors.row(q);
      const double left = euclidean ? f.start_norm * y[0] : dot(qv, y);
      acc += left * y[0] * std::log(theta);
    }
    est.per_probe[i] = f.start_norm * acc;
  }
  for (std::size_t c : clamped) est.clamped_ritz_values += c;
  finish(est, k.precond.log_det(), start);
  return est;
}

LogDetEstimate exact_logdet(const DenseSymMatrix& m) {
  const auto start = Clock::now();
  LogDetEstimate est;
  est.value = cholesky_logdet(m);
  est.logdet_precond = 0.0;
  est.trace_term = est.value;
  est.wall_time = Clock::now() - start;
  return est;
}

LogDetEstimate estimate_logdet(const DenseSymMatrix& m, const EstimatorConfig& cfg) {
  switch (cfg.algorithm) {
    case Algorithm::R1:
    case Algorithm::R3:
    case Algorithm::R5:
      return rstar_logdet(m, cfg);
    case Algorithm::SLQ:
      return slq_logdet(m, cfg);
    case Algorithm::CholeskyExact:
      return exact_logdet(m);
  }
  throw InvalidArgument("estimate_logdet: unhandled algorithm");
}

}  // namespace rstar
