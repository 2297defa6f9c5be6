#pragma once

// Dense 64-bit linear algebra used by every estimator in the library.
//
// The functions in namespace rstar are the production kernels: cache-blocked
// and OpenMP-parallel. Namespace rstar::serial holds textbook single-threaded
// versions that exist so tests and the benchmark can check the parallel ones.
//
// Every parallel kernel splits work so that each output element is produced by
// exactly one thread with a fixed summation order. Results are therefore
// bit-identical for any OMP_NUM_THREADS.

#include <cstddef>
#include <span>
#include <vector>

namespace rstar {

/// Row-major dense matrix with arbitrary shape. Used for factors (Cholesky L,
/// low-rank preconditioner factors) and for row sets of vectors (Lanczos
/// bases, probe batches).
class RowMatrix {
 public:
  RowMatrix() = default;
  RowMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  /// Keeps the first `rows` rows.
  void truncate_rows(std::size_t rows);

  friend bool operator==(const RowMatrix&, const RowMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Dense symmetric n x n matrix, stored in full so rows are contiguous.
/// Symmetry is exact: every mutator writes both (i, j) and (j, i).
class DenseSymMatrix {
 public:
  explicit DenseSymMatrix(std::size_t n);
  /// Takes a full row-major array; throws InvalidArgument unless it is exactly
  /// symmetric.
  DenseSymMatrix(std::size_t n, std::vector<double> entries);

  static DenseSymMatrix identity(std::size_t n);
  static DenseSymMatrix diagonal(std::span<const double> d);

  /// Fills the upper triangle with f(i, j) for i <= j and mirrors it.
  template <typename F>
  static DenseSymMatrix from_function(std::size_t n, F&& f) {
    DenseSymMatrix m(n);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        const double v = f(i, j);
        m.data_[i * n + j] = v;
        m.data_[j * n + i] = v;
      }
    }
    return m;
  }

  std::size_t dim() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    data_[i * n_ + j] = v;
    data_[j * n_ + i] = v;
  }
  void add_to_diagonal(double v);

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }
  const double* data() const noexcept { return data_.data(); }

  double frobenius_norm() const;

  friend bool operator==(const DenseSymMatrix&, const DenseSymMatrix&) = default;

 private:
  std::size_t n_;
  std::vector<double> data_;
};

/// Symmetric tridiagonal matrix; sub- and super-diagonal share `offdiag`.
struct TridiagMatrix {
  std::vector<double> diag;
  std::vector<double> offdiag;  // length diag.size() - 1 (or 0 when empty)

  std::size_t size() const noexcept { return diag.size(); }
};

/// Eigendecomposition of a symmetric matrix. Eigenvalues ascend;
/// vectors.row(i) is the unit eigenvector for values[i].
struct SymEigen {
  std::vector<double> values;
  RowMatrix vectors;
};

// ---- vector helpers ---------------------------------------------------------

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> x);

// ---- kernels ----------------------------------------------------------------

/// y = M v. Throws DimensionMismatch.
std::vector<double> matvec(const DenseSymMatrix& m, std::span<const double> v);
void matvec(const DenseSymMatrix& m, std::span<const double> v, std::span<double> out);

/// Applies M to every row of X: out.row(p) = M X.row(p). One pass over M
/// serves the whole block.
RowMatrix matmat(const DenseSymMatrix& m, const RowMatrix& x);

/// Lower-triangular L (row-major, n x n) with L L^T = M.
/// Throws NotPositiveDefinite when a pivot is not strictly positive.
RowMatrix cholesky(const DenseSymMatrix& m);

/// 2 * sum(log L_ii).
double cholesky_logdet(const DenseSymMatrix& m);
double cholesky_logdet_from_factor(const RowMatrix& lower);

/// Solves L L^T x = b given the lower factor.
std::vector<double> cholesky_solve(const RowMatrix& lower, std::span<const double> b);

/// Solves (T + shift I) x = b by Thomas elimination without pivoting.
/// Throws SingularShiftedSystem if a pivot magnitude drops below 1e-300.
std::vector<double> thomas_solve(const TridiagMatrix& t, double shift, std::span<const double> b);

/// Modified Gram-Schmidt with one full reorthogonalization pass. Rows of the
/// result are orthonormal and span the rows of `v`. Throws RankDeficient when
/// a row retains less than 1e-12 of its norm after projection.
RowMatrix orthonormalize(RowMatrix v);

SymEigen sym_eig(const DenseSymMatrix& m);
SymEigen tridiag_eig(const TridiagMatrix& t);

namespace serial {

// Reference kernels: plain loops, no OpenMP, no blocking.

std::vector<double> matvec(const DenseSymMatrix& m, std::span<const double> v);
RowMatrix matmat(const DenseSymMatrix& m, const RowMatrix& x);
RowMatrix cholesky(const DenseSymMatrix& m);
double cholesky_logdet(const DenseSymMatrix& m);

}  // namespace serial

}  // namespace rstar
