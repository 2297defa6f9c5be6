#include <cmath>

#include "rstar/errors.hpp"
#include "rstar/linalg.hpp"

namespace rstar::serial {

std::vector<double> matvec(const DenseSymMatrix& m, std::span<const double> v) {
  const std::size_t n = m.dim();
  if (v.size() != n) throw DimensionMismatch("serial::matvec: vector length mismatch");
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += m(i, j) * v[j];
    y[i] = s;
  }
  return y;
}

RowMatrix matmat(const DenseSymMatrix& m, const RowMatrix& x) {
  if (x.cols() != m.dim()) throw DimensionMismatch("serial::matmat: block width mismatch");
  RowMatrix y(x.rows(), m.dim());
  for (std::size_t p = 0; p < x.rows(); ++p) {
    const auto yp = serial::matvec(m, x.row(p));
    for (std::size_t i = 0; i < yp.size(); ++i) y(p, i) = yp[i];
  }
  return y;
}

// Cholesky-Banachiewicz.
RowMatrix cholesky(const DenseSymMatrix& m) {
  const std::size_t n = m.dim();
  RowMatrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      if (i == j) {
        if (!(s > 0.0)) throw NotPositiveDefinite(i, s);
        l(i, i) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  return l;
}

double cholesky_logdet(const DenseSymMatrix& m) {
  const RowMatrix l = serial::cholesky(m);
  double s = 0.0;
  for (std::size_t i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
  return 2.0 * s;
}

}  // namespace rstar::serial
