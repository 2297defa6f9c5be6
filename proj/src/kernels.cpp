#include "rstar/kernels.hpp"

#include <cmath>
#include <string>

#include "rstar/errors.hpp"

namespace rstar {

namespace {

double kernel_of_distance(const KernelSpec& spec, double r) {
  const double a2 = spec.amplitude * spec.amplitude;
  const double u = r / spec.length_scale;
  switch (spec.family) {
    case KernelFamily::RBF:
      return a2 * std::exp(-0.5 * u * u);
    case KernelFamily::Matern52: {
      const double su = std::sqrt(5.0) * u;
      return a2 * (1.0 + su + su * su / 3.0) * std::exp(-su);
    }
  }
  return 0.0;
}

double distance(const double* x, const double* y, std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double diff = x[k] - y[k];
    s += diff * diff;
  }
  return std::sqrt(s);
}

}  // namespace

std::string_view to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::RBF:
      return "rbf";
    case KernelFamily::Matern52:
      return "matern52";
  }
  return "?";
}

KernelFamily parse_kernel_family(std::string_view s) {
  if (s == "rbf") return KernelFamily::RBF;
  if (s == "matern52") return KernelFamily::Matern52;
  throw InvalidArgument("unknown kernel family '" + std::string(s) + "'");
}

void KernelSpec::validate() const {
  if (!(amplitude > 0.0)) throw InvalidArgument("kernel amplitude must be > 0");
  if (!(length_scale > 0.0)) throw InvalidArgument("kernel length_scale must be > 0");
  if (!(jitter >= 0.0)) throw InvalidArgument("kernel jitter must be >= 0");
}

IndexPoints sample_index_points(std::size_t n, std::size_t d, Rng& rng) {
  if (n == 0 || d == 0) throw InvalidArgument("sample_index_points: n and d must be >= 1");
  IndexPoints pts{RowMatrix(n, d)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) pts.points(i, k) = rng.normal();
  return pts;
}

double kernel_value(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionMismatch("kernel_value: points differ in dimension");
  return kernel_of_distance(spec, distance(x.data(), y.data(), x.size()));
}

DenseSymMatrix build_covariance(const KernelSpec& spec, const IndexPoints& pts) {
  spec.validate();
  const std::size_t d = pts.dim();
  const RowMatrix& p = pts.points;
  return DenseSymMatrix::from_function(pts.count(), [&](std::size_t i, std::size_t j) {
    const double k = kernel_of_distance(spec, distance(p.data() + i * d, p.data() + j * d, d));
    return i == j ? k + spec.jitter : k;
  });
}

}  // namespace rstar
