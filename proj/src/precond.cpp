#include "rstar/precond.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rstar/errors.hpp"

namespace rstar {

namespace {

constexpr int kPowerIterations = 100;
constexpr double kPowerTolerance = 1e-10;
constexpr int kRefinementSteps = 2;

std::vector<double> residual_diagonal(const DenseSymMatrix& m, const RowMatrix& factor, double floor) {
  std::vector<double> d(m.dim());
  for (std::size_t i = 0; i < d.size(); ++i) {
    double s = m(i, i);
    for (std::size_t r = 0; r < factor.rows(); ++r) s -= factor(r, i) * factor(r, i);
    d[i] = std::max(s, floor);
  }
  return d;
}

RowMatrix scaled_eigenvectors(const std::vector<double>& values, const RowMatrix& vectors, std::size_t k) {
  RowMatrix f(k, vectors.cols());
  for (std::size_t r = 0; r < k; ++r) {
    const double w = std::sqrt(std::max(values[r], 0.0));
    for (std::size_t i = 0; i < vectors.cols(); ++i) f(r, i) = w * vectors(r, i);
  }
  return f;
}

RowMatrix gaussian_block(std::size_t rows, std::size_t cols, Rng& rng) {
  RowMatrix b(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i) b.data()[i] = rng.normal();
  return b;
}

LowRankEigen randomized_range_attempt(const DenseSymMatrix& m, std::size_t k, std::size_t num_iters,
                                      Rng& rng) {
  const std::size_t n = m.dim();
  RowMatrix q = gaussian_block(k, n, rng);
  for (std::size_t it = 0; it < num_iters; ++it) q = orthonormalize(matmat(m, q));

  const RowMatrix mq = matmat(m, q);
  DenseSymMatrix projected(k);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = r; c < k; ++c)
      projected.set(r, c, 0.5 * (dot(q.row(r), mq.row(c)) + dot(q.row(c), mq.row(r))));

  const SymEigen eig = sym_eig(projected);
  LowRankEigen out{std::vector<double>(k), RowMatrix(k, n)};
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t src = k - 1 - r;  // ascending -> descending
    out.values[r] = eig.values[src];
    auto dst = out.vectors.row(r);
    for (std::size_t c = 0; c < k; ++c) axpy(eig.vectors(src, c), q.row(c), dst);
  }
  return out;
}

}  // namespace

std::string_view to_string(PreconditionerKind k) {
  switch (k) {
    case PreconditionerKind::Identity: return "identity";
    case PreconditionerKind::Diagonal: return "diagonal";
    case PreconditionerKind::RankOne: return "rank-one";
    case PreconditionerKind::PartialCholesky: return "partial-cholesky";
    case PreconditionerKind::PartialCholeskyScaled: return "partial-cholesky-scaled";
    case PreconditionerKind::TruncSVD: return "trunc-svd";
    case PreconditionerKind::TruncSVDScaled: return "trunc-svd-scaled";
    case PreconditionerKind::RandSVD: return "rand-svd";
    case PreconditionerKind::RandSVDScaled: return "rand-svd-scaled";
  }
  return "?";
}

PreconditionerKind parse_preconditioner_kind(std::string_view s) {
  for (PreconditionerKind k : kAllPreconditionerKinds)
    if (to_string(k) == s) return k;
  throw InvalidArgument("unknown preconditioner kind '" + std::string(s) + "'");
}

void PreconditionerConfig::validate(std::size_t n) const {
  if (rank > n) {
    throw InvalidArgument("preconditioner rank " + std::to_string(rank) + " exceeds dimension " +
                          std::to_string(n));
  }
  if (num_iters < 1) throw InvalidArgument("preconditioner num_iters must be >= 1");
  if (!(scaling > 0.0)) throw InvalidArgument("preconditioner scaling must be > 0");
  if (!(diag_floor > 0.0)) throw InvalidArgument("preconditioner diag_floor must be > 0");
}

Preconditioner::Preconditioner(PreconditionerKind kind, std::vector<double> base, RowMatrix factor)
    : kind_(kind), base_(std::move(base)), factor_(std::move(factor)) {
  const std::size_t n = base_.size();
  const std::size_t k = factor_.rows();
  if (k > 0 && factor_.cols() != n) throw DimensionMismatch("Preconditioner: factor width != n");
  double log_base = 0.0;
  for (double b : base_) {
    if (!(b > 0.0)) throw InvalidArgument("Preconditioner: base entries must be > 0");
    log_base += std::log(b);
  }
  log_det_ = log_base;
  if (k == 0) return;

  // I_k + A^T B^{-1} A
  RowMatrix scaled(k, n);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t i = 0; i < n; ++i) scaled(r, i) = factor_(r, i) / base_[i];
  DenseSymMatrix inner(k);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = r; c < k; ++c)
      inner.set(r, c, dot(factor_.row(r), scaled.row(c)) + (r == c ? 1.0 : 0.0));
  try {
    inner_lower_ = cholesky(inner);
  } catch (const NotPositiveDefinite& e) {
    throw Error(std::string("Preconditioner: capacitance matrix not SPD (internal invariant): ") + e.what());
  }
  log_det_ += cholesky_logdet_from_factor(inner_lower_);
}

std::vector<double> Preconditioner::apply(std::span<const double> v) const {
  if (v.size() != dim()) throw DimensionMismatch("Preconditioner::apply: length mismatch");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = base_[i] * v[i];
  for (std::size_t r = 0; r < rank(); ++r) axpy(dot(factor_.row(r), v), factor_.row(r), out);
  return out;
}

void Preconditioner::apply_inverse_into(std::span<const double> v, std::span<double> out) const {
  woodbury_solve(v, out);
  if (rank() == 0) return;
  // Woodbury alone loses accuracy when base entries are tiny (floored
  // residual diagonals); refinement restores a small residual.
  const std::size_t n = dim();
  std::vector<double> residual(n), correction(n);
  for (int step = 0; step < kRefinementSteps; ++step) {
    const std::vector<double> pv = apply(out);
    for (std::size_t i = 0; i < n; ++i) residual[i] = v[i] - pv[i];
    woodbury_solve(residual, correction);
    for (std::size_t i = 0; i < n; ++i) out[i] += correction[i];
  }
}

void Preconditioner::woodbury_solve(std::span<const double> v, std::span<double> out) const {
  const std::size_t n = dim();
  for (std::size_t i = 0; i < n; ++i) out[i] = v[i] / base_[i];
  const std::size_t k = rank();
  if (k == 0) return;
  std::vector<double> z(k);
  for (std::size_t r = 0; r < k; ++r) z[r] = dot(factor_.row(r), out);
  const std::vector<double> y = cholesky_solve(inner_lower_, z);
  std::vector<double> correction(n, 0.0);
  for (std::size_t r = 0; r < k; ++r) axpy(y[r], factor_.row(r), correction);
  for (std::size_t i = 0; i < n; ++i) out[i] -= correction[i] / base_[i];
}

std::vector<double> Preconditioner::apply_inverse(std::span<const double> v) const {
  if (v.size() != dim()) throw DimensionMismatch("Preconditioner::apply_inverse: length mismatch");
  std::vector<double> out(v.size());
  apply_inverse_into(v, out);
  return out;
}

RowMatrix Preconditioner::apply_inverse(const RowMatrix& block) const {
  if (block.cols() != dim()) throw DimensionMismatch("Preconditioner::apply_inverse: block width mismatch");
  RowMatrix out(block.rows(), block.cols());
#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < block.rows(); ++p) apply_inverse_into(block.row(p), out.row(p));
  return out;
}

DenseSymMatrix Preconditioner::materialize() const {
  const std::size_t n = dim();
  return DenseSymMatrix::from_function(n, [&](std::size_t i, std::size_t j) {
    double s = i == j ? base_[i] : 0.0;
    for (std::size_t r = 0; r < rank(); ++r) s += factor_(r, i) * factor_(r, j);
    return s;
  });
}

LowRankEigen randomized_range_svd(const DenseSymMatrix& m, std::size_t k, std::size_t num_iters, Rng& rng) {
  if (k < 1 || k > m.dim()) throw InvalidArgument("randomized_range_svd: need 1 <= k <= n");
  if (num_iters < 1) throw InvalidArgument("randomized_range_svd: num_iters must be >= 1");
  try {
    return randomized_range_attempt(m, k, num_iters, rng);
  } catch (const RankDeficient&) {
    // One retry with a fresh test block.
    return randomized_range_attempt(m, k, num_iters, rng);
  }
}

std::pair<double, std::vector<double>> dominant_eigenpair(const DenseSymMatrix& m, Rng& rng) {
  const std::size_t n = m.dim();
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  scale(1.0 / norm2(v), v);
  double lambda = 0.0;
  for (int it = 0; it < kPowerIterations; ++it) {
    std::vector<double> w = matvec(m, v);
    const double next = dot(v, w);
    const double nrm = norm2(w);
    if (nrm == 0.0) return {0.0, v};
    scale(1.0 / nrm, w);
    v = std::move(w);
    const bool converged = it > 0 && std::abs(next - lambda) <= kPowerTolerance * std::abs(next);
    lambda = next;
    if (converged) break;
  }
  // Rayleigh quotient of the final iterate.
  lambda = dot(v, matvec(m, v));
  return {lambda, v};
}

RowMatrix pivoted_partial_cholesky(const DenseSymMatrix& m, std::size_t k) {
  const std::size_t n = m.dim();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = m(i, i);
  RowMatrix c(k, n);
  std::size_t achieved = 0;
  for (; achieved < k; ++achieved) {
    const auto pivot = static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin());
    if (!(d[pivot] > 0.0)) break;
    const double root = std::sqrt(d[pivot]);
    auto row = c.row(achieved);
    for (std::size_t i = 0; i < n; ++i) {
      double s = m(pivot, i);
      for (std::size_t q = 0; q < achieved; ++q) s -= c(q, pivot) * c(q, i);
      row[i] = s / root;
    }
    for (std::size_t i = 0; i < n; ++i) d[i] -= row[i] * row[i];
    d[pivot] = 0.0;
  }
  c.truncate_rows(achieved);
  return c;
}

Preconditioner build_preconditioner(const DenseSymMatrix& m, const PreconditionerConfig& cfg, Rng& rng) {
  const std::size_t n = m.dim();
  cfg.validate(n);
  const std::vector<double> scalar_base(n, cfg.scaling);
  switch (cfg.kind) {
    case PreconditionerKind::Identity:
      return {cfg.kind, std::vector<double>(n, 1.0), RowMatrix()};
    case PreconditionerKind::Diagonal: {
      std::vector<double> d(n);
      for (std::size_t i = 0; i < n; ++i) d[i] = m(i, i);
      return {cfg.kind, std::move(d), RowMatrix()};
    }
    case PreconditionerKind::RankOne: {
      auto [lambda, v] = dominant_eigenpair(m, rng);
      RowMatrix f(1, n);
      const double w = std::sqrt(std::max(lambda, 0.0));
      for (std::size_t i = 0; i < n; ++i) f(0, i) = w * v[i];
      auto d = residual_diagonal(m, f, cfg.diag_floor);
      return {cfg.kind, std::move(d), std::move(f)};
    }
    case PreconditionerKind::PartialCholesky:
    case PreconditionerKind::PartialCholeskyScaled: {
      RowMatrix c = pivoted_partial_cholesky(m, cfg.rank);
      auto base = cfg.kind == PreconditionerKind::PartialCholesky ? residual_diagonal(m, c, cfg.diag_floor)
                                                                  : scalar_base;
      return {cfg.kind, std::move(base), std::move(c)};
    }
    case PreconditionerKind::TruncSVD:
    case PreconditionerKind::TruncSVDScaled: {
      const SymEigen eig = sym_eig(m);
      std::vector<double> values(cfg.rank);
      RowMatrix vectors(cfg.rank, n);
      for (std::size_t r = 0; r < cfg.rank; ++r) {
        const std::size_t src = n - 1 - r;
        values[r] = eig.values[src];
        std::copy(eig.vectors.row(src).begin(), eig.vectors.row(src).end(), vectors.row(r).begin());
      }
      RowMatrix f = scaled_eigenvectors(values, vectors, cfg.rank);
      auto base = cfg.kind == PreconditionerKind::TruncSVD ? residual_diagonal(m, f, cfg.diag_floor)
                                                           : scalar_base;
      return {cfg.kind, std::move(base), std::move(f)};
    }
    case PreconditionerKind::RandSVD:
    case PreconditionerKind::RandSVDScaled: {
      RowMatrix f;
      if (cfg.rank > 0) {
        const LowRankEigen eig = randomized_range_svd(m, cfg.rank, cfg.num_iters, rng);
        f = scaled_eigenvectors(eig.values, eig.vectors, cfg.rank);
      }
      auto base = cfg.kind == PreconditionerKind::RandSVD ? residual_diagonal(m, f, cfg.diag_floor)
                                                          : scalar_base;
      return {cfg.kind, std::move(base), std::move(f)};
    }
  }
  throw InvalidArgument("build_preconditioner: unhandled kind");
}

}  // namespace rstar
