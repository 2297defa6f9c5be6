#include "rstar/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rstar/errors.hpp"

namespace rstar {

namespace {

constexpr double kBreakdownTolerance = 1e-12;

struct Recurrence {
  RowMatrix basis;
  std::vector<double> alpha;
  std::vector<double> beta;
  double start_norm = 0.0;
  double reference = 0.0;  // |Op q_1|
  bool active = true;
};

}  // namespace

std::string_view to_string(LanczosMetric m) {
  switch (m) {
    case LanczosMetric::Euclidean: return "euclidean";
    case LanczosMetric::Preconditioned: return "preconditioned";
  }
  return "?";
}

LanczosMetric parse_lanczos_metric(std::string_view s) {
  if (s == "euclidean") return LanczosMetric::Euclidean;
  if (s == "preconditioned") return LanczosMetric::Preconditioned;
  throw InvalidArgument("unknown Lanczos metric '" + std::string(s) + "'");
}

std::vector<double> LinearOperator::apply(std::span<const double> v) const {
  RowMatrix x(1, v.size());
  std::copy(v.begin(), v.end(), x.data());
  const RowMatrix y = apply(x);
  return {y.data(), y.data() + y.cols()};
}

PreconditionedOperator::PreconditionedOperator(const DenseSymMatrix& m, const Preconditioner& p)
    : m_(m), p_(p) {
  if (m.dim() != p.dim()) throw DimensionMismatch("PreconditionedOperator: M and P differ in size");
}

RowMatrix FunctionOperator::apply(const RowMatrix& x) const {
  if (x.cols() != n_) throw DimensionMismatch("FunctionOperator: block width mismatch");
  RowMatrix y(x.rows(), n_);
  for (std::size_t p = 0; p < x.rows(); ++p) fn_(x.row(p), y.row(p));
  return y;
}

namespace {

// Three-term recurrence with full reorthogonalization in the inner product
// <x, y> = x^T G y. Each recurrence keeps its basis Q and, when G != I, the
// images Z = G Q. `apply` maps the current (Q rows, Z rows) block to Op Q;
// `metric` maps a block W to G W and is null for the Euclidean product.
template <class ApplyFn, class MetricFn>
std::vector<LanczosFactorization> run_recurrences(std::size_t n, const RowMatrix& starts, std::size_t t,
                                                  ApplyFn&& apply, MetricFn* metric) {
  const std::size_t s = starts.rows();
  if (starts.cols() != n) throw DimensionMismatch("lanczos: start vector length != operator dimension");
  if (t < 1) throw InvalidArgument("lanczos: t must be >= 1");
  if (t > n) throw InvalidArgument("lanczos: t = " + std::to_string(t) + " exceeds n = " + std::to_string(n));
  const bool weighted = metric != nullptr;

  std::vector<Recurrence> recs(s);
  std::vector<RowMatrix> images(weighted ? s : 0);
  const RowMatrix g_starts = weighted ? (*metric)(starts) : RowMatrix();
  for (std::size_t p = 0; p < s; ++p) {
    Recurrence& r = recs[p];
    const double sq = weighted ? dot(starts.row(p), g_starts.row(p)) : dot(starts.row(p), starts.row(p));
    r.start_norm = std::sqrt(sq);
    if (!(r.start_norm > 0.0)) throw InvalidArgument("lanczos: start vector is zero");
    r.basis = RowMatrix(t, n);
    auto q0 = r.basis.row(0);
    std::copy(starts.row(p).begin(), starts.row(p).end(), q0.begin());
    scale(1.0 / r.start_norm, q0);
    if (weighted) {
      images[p] = RowMatrix(t, n);
      auto z0 = images[p].row(0);
      std::copy(g_starts.row(p).begin(), g_starts.row(p).end(), z0.begin());
      scale(1.0 / r.start_norm, z0);
    }
  }

  std::vector<std::size_t> active(s);
  for (std::size_t p = 0; p < s; ++p) active[p] = p;

  for (std::size_t j = 0; j < t && !active.empty(); ++j) {
    RowMatrix x(active.size(), n);
    RowMatrix xz(weighted ? active.size() : 0, weighted ? n : 0);
    for (std::size_t a = 0; a < active.size(); ++a) {
      const auto qj = recs[active[a]].basis.row(j);
      std::copy(qj.begin(), qj.end(), x.row(a).begin());
      if (weighted) {
        const auto zj = images[active[a]].row(j);
        std::copy(zj.begin(), zj.end(), xz.row(a).begin());
      }
    }
    RowMatrix w = apply(x, xz);
    RowMatrix gw = weighted ? (*metric)(w) : RowMatrix();

#pragma omp parallel for schedule(static)
    for (std::size_t a = 0; a < active.size(); ++a) {
      Recurrence& r = recs[active[a]];
      auto wa = w.row(a);
      // For the Euclidean product G W is W itself; the updates below then
      // touch the same storage once.
      auto ga = weighted ? gw.row(a) : wa;
      const RowMatrix& zs = weighted ? images[active[a]] : r.basis;
      const auto update = [&](double c, std::size_t i) {
        axpy(-c, r.basis.row(i), wa);
        if (weighted) axpy(-c, zs.row(i), ga);
      };
      if (j == 0) r.reference = std::sqrt(std::max(dot(wa, ga), 0.0));
      const double alpha = dot(zs.row(j), wa);
      update(alpha, j);
      if (j > 0) update(r.beta[j - 1], j - 1);
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i <= j; ++i) update(dot(zs.row(i), wa), i);
      }
      r.alpha.push_back(alpha);
      if (j + 1 == t) {
        r.active = false;
        continue;
      }
      const double beta = std::sqrt(std::max(dot(wa, ga), 0.0));
      if (!(beta > kBreakdownTolerance * r.reference)) {
        r.active = false;  // invariant subspace found
        continue;
      }
      r.beta.push_back(beta);
      auto next = r.basis.row(j + 1);
      for (std::size_t i = 0; i < n; ++i) next[i] = wa[i] / beta;
      if (weighted) {
        auto znext = images[active[a]].row(j + 1);
        for (std::size_t i = 0; i < n; ++i) znext[i] = ga[i] / beta;
      }
    }
    std::erase_if(active, [&](std::size_t p) { return !recs[p].active; });
  }

  std::vector<LanczosFactorization> out;
  out.reserve(s);
  for (Recurrence& r : recs) {
    const std::size_t steps = r.alpha.size();
    r.basis.truncate_rows(steps);
    r.beta.resize(steps - 1);
    out.push_back({std::move(r.basis), TridiagMatrix{std::move(r.alpha), std::move(r.beta)}, r.start_norm});
  }
  return out;
}

using BlockFn = RowMatrix(const RowMatrix&);

}  // namespace

std::vector<LanczosFactorization> lanczos_batch(const LinearOperator& op, const RowMatrix& starts,
                                                std::size_t t) {
  return run_recurrences(
      op.dim(), starts, t, [&](const RowMatrix& q, const RowMatrix&) { return op.apply(q); },
      static_cast<std::function<BlockFn>*>(nullptr));
}

std::vector<LanczosFactorization> preconditioned_lanczos_batch(const DenseSymMatrix& m, const Preconditioner& p,
                                                               const RowMatrix& starts, std::size_t t) {
  if (m.dim() != p.dim()) throw DimensionMismatch("lanczos: M and P differ in size");
  std::function<BlockFn> metric = [&](const RowMatrix& x) { return p.apply_inverse(x); };
  // Op q = M P^{-1} q = M z, with z = P^{-1} q already tracked.
  return run_recurrences(
      m.dim(), starts, t, [&](const RowMatrix&, const RowMatrix& z) { return matmat(m, z); }, &metric);
}

std::vector<LanczosFactorization> lanczos_batch(const DenseSymMatrix& m, const Preconditioner& p,
                                                const RowMatrix& starts, std::size_t t, LanczosMetric metric) {
  if (metric == LanczosMetric::Preconditioned) return preconditioned_lanczos_batch(m, p, starts, t);
  const PreconditionedOperator op(m, p);
  return lanczos_batch(op, starts, t);
}

LanczosFactorization lanczos(const LinearOperator& op, std::span<const double> v, std::size_t t) {
  RowMatrix start(1, v.size());
  std::copy(v.begin(), v.end(), start.data());
  return std::move(lanczos_batch(op, start, t).front());
}

std::vector<std::vector<double>> multishift_solve(const LanczosFactorization& f,
                                                  std::span<const double> shifts) {
  std::vector<double> rhs(f.steps(), 0.0);
  if (!rhs.empty()) rhs[0] = f.start_norm;
  std::vector<std::vector<double>> out;
  out.reserve(shifts.size());
  for (double sigma : shifts) out.push_back(thomas_solve(f.tridiag, sigma, rhs));
  return out;
}

std::vector<double> lift(const LanczosFactorization& f, std::span<const double> w) {
  if (w.size() != f.steps()) throw DimensionMismatch("lift: coefficient vector length != Lanczos steps");
  std::vector<double> x(f.basis.cols(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) axpy(w[i], f.basis.row(i), x);
  return x;
}

}  // namespace rstar
