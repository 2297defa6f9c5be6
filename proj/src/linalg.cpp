#include "rstar/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

#include "rstar/errors.hpp"

namespace rstar {

namespace {

constexpr std::size_t kColumnChunk = 256;
constexpr double kTinyPivot = 1e-300;

void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionMismatch(what);
}

// Four independent partial sums; the grouping is fixed so the result does not
// depend on threading.
double dot4(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

}  // namespace

void RowMatrix::truncate_rows(std::size_t rows) {
  if (rows >= rows_) return;
  rows_ = rows;
  data_.resize(rows_ * cols_);
}

DenseSymMatrix::DenseSymMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {
  if (n == 0) throw InvalidArgument("DenseSymMatrix: n must be >= 1");
}

DenseSymMatrix::DenseSymMatrix(std::size_t n, std::vector<double> entries)
    : n_(n), data_(std::move(entries)) {
  if (n == 0) throw InvalidArgument("DenseSymMatrix: n must be >= 1");
  if (data_.size() != n * n) throw DimensionMismatch("DenseSymMatrix: expected n*n entries");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (data_[i * n + j] != data_[j * n + i])
        throw InvalidArgument("DenseSymMatrix: entries are not symmetric");
}

DenseSymMatrix DenseSymMatrix::identity(std::size_t n) {
  DenseSymMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m.data_[i * n + i] = 1.0;
  return m;
}

DenseSymMatrix DenseSymMatrix::diagonal(std::span<const double> d) {
  DenseSymMatrix m(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m.data_[i * d.size() + i] = d[i];
  return m;
}

void DenseSymMatrix::add_to_diagonal(double v) {
  for (std::size_t i = 0; i < n_; ++i) data_[i * n_ + i] += v;
}

double DenseSymMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double x : data_) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: length mismatch");
  return dot4(a.data(), b.data(), a.size());
}

double norm2(std::span<const double> a) { return std::sqrt(dot4(a.data(), a.data(), a.size())); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require(x.size() == y.size(), "axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(double alpha, std::span<double> x) {
  for (double& v : x) v *= alpha;
}

RowMatrix matmat(const DenseSymMatrix& m, const RowMatrix& x) {
  const std::size_t n = m.dim();
  require(x.cols() == n, "matmat: block width " + std::to_string(x.cols()) +
                             " does not match matrix dimension " + std::to_string(n));
  const std::size_t s = x.rows();
  RowMatrix y(s, n);
  const std::size_t chunks = (n + kColumnChunk - 1) / kColumnChunk;
  // Each thread owns a column strip of the output and sweeps all rows of M
  // in ascending order: y[p][i] = sum_j x[p][j] * M[j][i].
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t i0 = c * kColumnChunk;
    const std::size_t len = std::min(kColumnChunk, n - i0);
    for (std::size_t j = 0; j < n; ++j) {
      const double* mj = m.data() + j * n + i0;
      for (std::size_t p = 0; p < s; ++p) {
        const double xpj = x(p, j);
        double* yp = y.data() + p * n + i0;
        for (std::size_t i = 0; i < len; ++i) yp[i] += xpj * mj[i];
      }
    }
  }
  return y;
}

void matvec(const DenseSymMatrix& m, std::span<const double> v, std::span<double> out) {
  const std::size_t n = m.dim();
  require(v.size() == n && out.size() == n, "matvec: vector length does not match matrix dimension");
  RowMatrix x(1, n);
  std::copy(v.begin(), v.end(), x.data());
  const RowMatrix y = matmat(m, x);
  std::copy(y.data(), y.data() + n, out.begin());
}

std::vector<double> matvec(const DenseSymMatrix& m, std::span<const double> v) {
  std::vector<double> out(m.dim());
  matvec(m, v, out);
  return out;
}

RowMatrix cholesky(const DenseSymMatrix& m) {
  const std::size_t n = m.dim();
  RowMatrix l(n, n);
  bool failed = false;
  std::size_t failed_at = 0;
  double failed_pivot = 0.0;
  // Left-looking, row oriented: column k of L needs only rows of L that are
  // complete up to column k-1, each entry is a contiguous dot product.
#pragma omp parallel
  {
    for (std::size_t k = 0; k < n; ++k) {
#pragma omp single
      {
        const double* lk = l.data() + k * n;
        const double d = m(k, k) - dot4(lk, lk, k);
        if (!(d > 0.0) || !std::isfinite(d)) {
          failed = true;
          failed_at = k;
          failed_pivot = d;
        } else {
          l(k, k) = std::sqrt(d);
        }
      }
      if (failed) break;
      const double* lk = l.data() + k * n;
      const double inv = 1.0 / lk[k];
#pragma omp for schedule(static)
      for (std::size_t i = k + 1; i < n; ++i) {
        const double* li = l.data() + i * n;
        l(i, k) = (m(i, k) - dot4(li, lk, k)) * inv;
      }
    }
  }
  if (failed) throw NotPositiveDefinite(failed_at, failed_pivot);
  return l;
}

double cholesky_logdet_from_factor(const RowMatrix& lower) {
  double s = 0.0;
  for (std::size_t i = 0; i < lower.rows(); ++i) s += std::log(lower(i, i));
  return 2.0 * s;
}

double cholesky_logdet(const DenseSymMatrix& m) { return cholesky_logdet_from_factor(cholesky(m)); }

std::vector<double> cholesky_solve(const RowMatrix& lower, std::span<const double> b) {
  const std::size_t n = lower.rows();
  require(b.size() == n, "cholesky_solve: rhs length mismatch");
  std::vector<double> y(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = (y[i] - dot4(lower.data() + i * n, y.data(), i)) / lower(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= lower(j, ii) * y[j];
    y[ii] = s / lower(ii, ii);
  }
  return y;
}

std::vector<double> thomas_solve(const TridiagMatrix& t, double shift, std::span<const double> b) {
  const std::size_t n = t.size();
  require(b.size() == n, "thomas_solve: rhs length mismatch");
  require(n == 0 || t.offdiag.size() == n - 1, "thomas_solve: offdiag must have length t-1");
  std::vector<double> c(n), x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double sub = i > 0 ? t.offdiag[i - 1] : 0.0;
    const double pivot = t.diag[i] + shift - (i > 0 ? sub * c[i - 1] : 0.0);
    if (!(std::abs(pivot) >= kTinyPivot) || !std::isfinite(pivot)) {
      throw SingularShiftedSystem("thomas_solve: pivot " + std::to_string(i) + " is " +
                                  std::to_string(pivot) + " (shift " + std::to_string(shift) + ")");
    }
    c[i] = i + 1 < n ? t.offdiag[i] / pivot : 0.0;
    x[i] = (b[i] - (i > 0 ? sub * x[i - 1] : 0.0)) / pivot;
  }
  for (std::size_t i = n - 1; n > 0 && i-- > 0;) x[i] -= c[i] * x[i + 1];
  return x;
}

RowMatrix orthonormalize(RowMatrix v) {
  const std::size_t k = v.rows();
  for (std::size_t i = 0; i < k; ++i) {
    auto vi = v.row(i);
    const double original = norm2(vi);
    if (original == 0.0) throw RankDeficient("orthonormalize: row " + std::to_string(i) + " is zero");
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < i; ++j) {
        const auto qj = v.row(j);
        axpy(-dot(qj, vi), qj, vi);
      }
    }
    const double remaining = norm2(vi);
    if (remaining < 1e-12 * original) {
      throw RankDeficient("orthonormalize: row " + std::to_string(i) +
                          " is linearly dependent on the previous rows");
    }
    scale(1.0 / remaining, vi);
  }
  return v;
}

namespace {

SymEigen from_eigen(const Eigen::VectorXd& values, const Eigen::MatrixXd& vectors) {
  const auto n = static_cast<std::size_t>(values.size());
  SymEigen out{std::vector<double>(values.data(), values.data() + n), RowMatrix(n, n)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out.vectors(i, j) = vectors(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
  return out;
}

}  // namespace

SymEigen sym_eig(const DenseSymMatrix& m) {
  const auto n = static_cast<Eigen::Index>(m.dim());
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> a(
      m.data(), n, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success) throw Error("sym_eig: eigensolver did not converge");
  return from_eigen(solver.eigenvalues(), solver.eigenvectors());
}

SymEigen tridiag_eig(const TridiagMatrix& t) {
  const auto n = static_cast<Eigen::Index>(t.size());
  if (n == 0) return {};
  Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(t.diag.data(), n);
  Eigen::VectorXd sub(std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index i = 0; i + 1 < n; ++i) sub[i] = t.offdiag[static_cast<std::size_t>(i)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw Error("tridiag_eig: eigensolver did not converge");
  return from_eigen(solver.eigenvalues(), solver.eigenvectors());
}

}  // namespace rstar
