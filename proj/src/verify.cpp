#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "rstar/bench.hpp"
#include "rstar/errors.hpp"
#include "rstar/lanczos.hpp"

namespace rstar::bench {

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// Q diag(eigs) Q^T with a random orthogonal Q.
DenseSymMatrix random_spd(std::size_t n, double min_eig, double max_eig, Rng& rng) {
  RowMatrix g(n, n);
  for (std::size_t i = 0; i < n * n; ++i) g.data()[i] = rng.normal();
  const RowMatrix q = orthonormalize(std::move(g));
  std::vector<double> eigs(n);
  for (double& e : eigs) e = min_eig * std::pow(max_eig / min_eig, rng.uniform());
  return DenseSymMatrix::from_function(n, [&](std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += q(k, i) * eigs[k] * q(k, j);
    return s;
  });
}

}  // namespace

bool VerifyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

CheckResult check_partial_fraction_table(const std::vector<RationalPartialFraction>& tables, double tolerance) {
  double worst = 0.0;
  bool shape_ok = true;
  for (const RationalPartialFraction& table : tables) {
    const RationalPartialFraction derived = derive_partial_fraction(closed_form(table.order));
    if (derived.poles.size() != table.poles.size() || derived.residues.size() != table.residues.size()) {
      shape_ok = false;
      continue;
    }
    worst = std::max(worst, std::abs(derived.offset - table.offset));
    for (std::size_t j = 0; j < table.poles.size(); ++j) {
      worst = std::max(worst, std::abs(derived.poles[j] - table.poles[j]));
      worst = std::max(worst, std::abs(derived.residues[j] - table.residues[j]));
    }
  }
  const bool ok = shape_ok && worst <= tolerance;
  return {"partial-fraction-table", ok,
          "max |derived - tabulated| = " + sci(worst) + " (tolerance " + sci(tolerance) + ")"};
}

CheckResult check_antisymmetry() {
  Rng rng(0x5eed0001);
  double worst_rel = 0.0;
  double worst_at_one = 0.0;
  for (int k = 1; k <= 6; ++k) {
    const RationalClosedForm r = closed_form(k);
    worst_at_one = std::max(worst_at_one, std::abs(eval_closed(r, 1.0)));
    for (int i = 0; i < 1000; ++i) {
      const double z = 100.0 * rng.uniform();
      const double a = eval_closed(r, z);
      const double b = eval_closed(r, 1.0 / z);
      worst_rel = std::max(worst_rel, std::abs(a + b) / std::max(std::abs(a), std::abs(b)));
    }
  }
  const bool ok = worst_rel <= 1e-12 && worst_at_one <= 1e-14;
  return {"antisymmetry", ok,
          "max |r(z) + r(1/z)| / |r(z)| = " + sci(worst_rel) + ", max |r(1)| = " + sci(worst_at_one)};
}

CheckResult check_partial_vs_closed() {
  double worst = 0.0;
  for (int order : {1, 3, 5}) {
    const RationalClosedForm closed = closed_form(order);
    const RationalPartialFraction pf = partial_fraction(order);
    for (int i = 0; i < 1000; ++i) {
      const double z = std::pow(10.0, -2.0 + 4.0 * i / 999.0);
      const double c = eval_closed(closed, z);
      const double p = eval_partial(pf, z);
      worst = std::max(worst, std::abs(p - c) / std::abs(c));
    }
  }
  return {"partial-vs-closed", worst < 1e-11, "max relative difference = " + sci(worst)};
}

CheckResult check_multishift_exactness() {
  constexpr std::size_t n = 20;
  Rng rng(0x5eed0002);
  const RationalPartialFraction pf = partial_fraction(3);
  std::vector<double> shifts;
  for (double a : pf.poles) shifts.push_back(-a);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const DenseSymMatrix m = random_spd(n, 1.0, 1e3, rng);
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    const LanczosFactorization f = lanczos(DenseOperator(m), v, n);
    const auto ws = multishift_solve(f, shifts);
    for (std::size_t j = 0; j < shifts.size(); ++j) {
      DenseSymMatrix shifted = m;
      shifted.add_to_diagonal(shifts[j]);
      const auto reference = cholesky_solve(cholesky(shifted), v);
      const auto x = lift(f, ws[j]);
      double diff = 0.0;
      for (std::size_t i = 0; i < n; ++i) diff += (x[i] - reference[i]) * (x[i] - reference[i]);
      worst = std::max(worst, std::sqrt(diff) / norm2(v));
    }
  }
  return {"multishift-exactness", worst <= 1e-8, "max |Q^T w - (M - aI)^{-1} v| / |v| = " + sci(worst)};
}

namespace {

template <typename Fn>
double over_all_preconditioners(Fn&& fn) {
  constexpr std::size_t n = 120;
  Rng rng(0x5eed0003);
  Rng point_rng = rng.child(0);
  const KernelSpec spec{KernelFamily::Matern52, 1.0, 1.0, 1e-4};
  const DenseSymMatrix m = build_covariance(spec, sample_index_points(n, 3, point_rng));
  double worst = 0.0;
  std::uint64_t stream = 1;
  for (PreconditionerKind kind : kAllPreconditionerKinds) {
    PreconditionerConfig cfg;
    cfg.kind = kind;
    cfg.rank = 10;
    cfg.scaling = 1e-2;
    Rng build_rng = rng.child(stream++);
    const Preconditioner p = build_preconditioner(m, cfg, build_rng);
    worst = std::max(worst, fn(p, build_rng));
  }
  return worst;
}

}  // namespace

CheckResult check_woodbury() {
  const double worst = over_all_preconditioners([](const Preconditioner& p, Rng& rng) {
    std::vector<double> v(p.dim());
    for (double& x : v) x = rng.normal();
    const auto back = p.apply(p.apply_inverse(v));
    double diff = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) diff += (back[i] - v[i]) * (back[i] - v[i]);
    return std::sqrt(diff) / norm2(v);
  });
  return {"woodbury-inverse", worst <= 1e-8, "max |P P^{-1} v - v| / |v| over nine kinds = " + sci(worst)};
}

CheckResult check_determinant_lemma() {
  const double worst = over_all_preconditioners([](const Preconditioner& p, Rng&) {
    const double dense = cholesky_logdet(p.materialize());
    return std::abs(p.log_det() - dense) / std::max(std::abs(dense), 1.0);
  });
  return {"determinant-lemma", worst <= 1e-8, "max relative |log det P - dense| over nine kinds = " + sci(worst)};
}

VerifyReport verify(double table_tolerance) {
  VerifyReport report;
  auto guarded = [&](const char* name, auto&& fn) {
    try {
      report.checks.push_back(fn());
    } catch (const std::exception& e) {
      report.checks.push_back({name, false, std::string("threw: ") + e.what()});
    }
  };
  guarded("partial-fraction-table", [&] {
    return check_partial_fraction_table({partial_fraction(1), partial_fraction(3), partial_fraction(5)},
                                        table_tolerance);
  });
  guarded("antisymmetry", check_antisymmetry);
  guarded("partial-vs-closed", check_partial_vs_closed);
  guarded("multishift-exactness", check_multishift_exactness);
  guarded("woodbury-inverse", check_woodbury);
  guarded("determinant-lemma", check_determinant_lemma);
  return report;
}

}  // namespace rstar::bench
