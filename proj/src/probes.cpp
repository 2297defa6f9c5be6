#include "rstar/probes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rstar/errors.hpp"

namespace rstar {

std::string_view to_string(ProbeKind k) {
  switch (k) {
    case ProbeKind::Rademacher: return "rademacher";
    case ProbeKind::Gaussian: return "gaussian";
    case ProbeKind::NormalOrthogonal: return "normal-orthogonal";
  }
  return "?";
}

ProbeKind parse_probe_kind(std::string_view s) {
  if (s == "rademacher") return ProbeKind::Rademacher;
  if (s == "gaussian") return ProbeKind::Gaussian;
  if (s == "normal-orthogonal") return ProbeKind::NormalOrthogonal;
  throw InvalidArgument("unknown probe kind '" + std::string(s) + "'");
}

double sample_chi(std::size_t dof, Rng& rng) {
  double s = 0.0;
  for (std::size_t i = 0; i < dof; ++i) {
    const double g = rng.normal();
    s += g * g;
  }
  return std::sqrt(s);
}

ProbeBatch make_probes(ProbeKind kind, std::size_t s, std::size_t n, Rng& rng) {
  if (s == 0 || n == 0) throw InvalidArgument("make_probes: s and n must be >= 1");
  ProbeBatch batch{kind, RowMatrix(s, n)};
  double* out = batch.vectors.data();
  switch (kind) {
    case ProbeKind::Rademacher:
      for (std::size_t i = 0; i < s * n; ++i) out[i] = rng.rademacher();
      break;
    case ProbeKind::Gaussian:
      for (std::size_t i = 0; i < s * n; ++i) out[i] = rng.normal();
      break;
    case ProbeKind::NormalOrthogonal:
      for (std::size_t start = 0; start < s; start += n) {
        const std::size_t rows = std::min(n, s - start);
        RowMatrix block(rows, n);
        for (std::size_t i = 0; i < rows * n; ++i) block.data()[i] = rng.normal();
        // A Gaussian block is full rank with probability one; redraw on the
        // measure-zero failure.
        for (;;) {
          try {
            block = orthonormalize(std::move(block));
            break;
          } catch (const RankDeficient&) {
            block = RowMatrix(rows, n);
            for (std::size_t i = 0; i < rows * n; ++i) block.data()[i] = rng.normal();
          }
        }
        for (std::size_t r = 0; r < rows; ++r) {
          const double radius = sample_chi(n, rng);
          auto dst = batch.vectors.row(start + r);
          const auto src = block.row(r);
          for (std::size_t i = 0; i < n; ++i) dst[i] = radius * src[i];
        }
      }
      break;
  }
  return batch;
}

}  // namespace rstar
