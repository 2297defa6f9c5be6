#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "rstar/linalg.hpp"
#include "rstar/rng.hpp"

namespace rstar {

enum class KernelFamily { RBF, Matern52 };

std::string_view to_string(KernelFamily f);
KernelFamily parse_kernel_family(std::string_view s);

/// Stationary Gaussian-process covariance. Jitter is added to the diagonal by
/// build_covariance only; kernel_value never includes it.
struct KernelSpec {
  KernelFamily family = KernelFamily::RBF;
  double amplitude = 1.0;
  double length_scale = 1.0;
  double jitter = 1e-6;

  void validate() const;
};

/// n points in R^d, row-major.
struct IndexPoints {
  RowMatrix points;

  std::size_t count() const noexcept { return points.rows(); }
  std::size_t dim() const noexcept { return points.cols(); }
};

/// n*d independent standard normal draws, consumed row by row.
IndexPoints sample_index_points(std::size_t n, std::size_t d, Rng& rng);

double kernel_value(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

DenseSymMatrix build_covariance(const KernelSpec& spec, const IndexPoints& pts);

}  // namespace rstar
