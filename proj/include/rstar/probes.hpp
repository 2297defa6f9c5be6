#pragma once

#include <cstddef>
#include <string_view>

#include "rstar/linalg.hpp"
#include "rstar/rng.hpp"

namespace rstar {

enum class ProbeKind { Rademacher, Gaussian, NormalOrthogonal };

std::string_view to_string(ProbeKind k);
ProbeKind parse_probe_kind(std::string_view s);

/// s probe vectors of length n, one per row. Every entry has mean 0 and
/// variance 1.
struct ProbeBatch {
  ProbeKind kind = ProbeKind::Rademacher;
  RowMatrix vectors;

  std::size_t count() const noexcept { return vectors.rows(); }
  std::size_t dim() const noexcept { return vectors.cols(); }
};

/// Rademacher: independent +-1 signs. Gaussian: independent standard normals.
/// NormalOrthogonal: blocks of at most n rows, each block an orthonormalized
/// Gaussian set with every row rescaled by an independent chi(n) radius, so
/// rows within a block are exactly orthogonal and each is marginally N(0, I).
ProbeBatch make_probes(ProbeKind kind, std::size_t s, std::size_t n, Rng& rng);

/// Draw from the chi distribution with `dof` degrees of freedom.
double sample_chi(std::size_t dof, Rng& rng);

}  // namespace rstar
