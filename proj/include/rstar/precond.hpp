#pragma once

// Preconditioners of the form P = B + A A^T with B diagonal (or a multiple of
// the identity) and A an n x k low-rank factor. P^{-1} goes through the
// Woodbury identity followed by two steps of iterative refinement, and
// log det P through the matrix determinant lemma; both cost O(nk + k^3).

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "rstar/linalg.hpp"
#include "rstar/rng.hpp"

namespace rstar {

enum class PreconditionerKind {
  Identity,
  Diagonal,
  RankOne,
  PartialCholesky,
  PartialCholeskyScaled,
  TruncSVD,
  TruncSVDScaled,
  RandSVD,
  RandSVDScaled,
};

inline constexpr PreconditionerKind kAllPreconditionerKinds[] = {
    PreconditionerKind::Identity,        PreconditionerKind::Diagonal,
    PreconditionerKind::RankOne,         PreconditionerKind::PartialCholesky,
    PreconditionerKind::PartialCholeskyScaled, PreconditionerKind::TruncSVD,
    PreconditionerKind::TruncSVDScaled,  PreconditionerKind::RandSVD,
    PreconditionerKind::RandSVDScaled,
};

std::string_view to_string(PreconditionerKind k);
PreconditionerKind parse_preconditioner_kind(std::string_view s);

struct PreconditionerConfig {
  PreconditionerKind kind = PreconditionerKind::RandSVD;
  std::size_t rank = 25;
  std::size_t num_iters = 5;
  /// Base a for the "scaled" kinds (P = aI + AA^T).
  double scaling = 1e-6;
  /// Lower bound applied to diag(M - AA^T) for the diagonal-base kinds.
  double diag_floor = 1e-12;

  void validate(std::size_t n) const;
};

class Preconditioner {
 public:
  /// P = diag(base) + factor^T factor, where factor is k x n (row r is the
  /// r-th column of A). Every base entry must be > 0.
  Preconditioner(PreconditionerKind kind, std::vector<double> base, RowMatrix factor);

  PreconditionerKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return base_.size(); }
  std::size_t rank() const noexcept { return factor_.rows(); }
  const std::vector<double>& base() const noexcept { return base_; }
  const RowMatrix& factor() const noexcept { return factor_; }

  /// Cached at construction.
  double log_det() const noexcept { return log_det_; }

  std::vector<double> apply(std::span<const double> v) const;
  std::vector<double> apply_inverse(std::span<const double> v) const;
  /// Row-wise apply_inverse over a block of vectors.
  RowMatrix apply_inverse(const RowMatrix& block) const;

  /// Dense P, for tests and small problems.
  DenseSymMatrix materialize() const;

 private:
  void apply_inverse_into(std::span<const double> v, std::span<double> out) const;
  void woodbury_solve(std::span<const double> v, std::span<double> out) const;

  PreconditionerKind kind_;
  std::vector<double> base_;
  RowMatrix factor_;
  RowMatrix inner_lower_;  // Cholesky factor of I_k + A^T B^{-1} A
  double log_det_ = 0.0;
};

/// Approximate top-k eigenpairs of M by randomized subspace iteration.
struct LowRankEigen {
  std::vector<double> values;  // descending
  RowMatrix vectors;           // k x n, row r pairs with values[r]
};

/// Draws a Gaussian k x n test block, applies M num_iters times with an
/// orthonormalization after every product, then solves the k x k projected
/// eigenproblem Q M Q^T and lifts the eigenvectors through Q.
LowRankEigen randomized_range_svd(const DenseSymMatrix& m, std::size_t k, std::size_t num_iters, Rng& rng);

/// Dominant eigenpair by power iteration: stops after 100 iterations or when
/// the Rayleigh quotient changes by less than 1e-10 relative.
std::pair<double, std::vector<double>> dominant_eigenpair(const DenseSymMatrix& m, Rng& rng);

/// Greedy largest-diagonal pivoted Cholesky of rank <= k. Returns the k x n
/// factor C^T (fewer rows if the residual diagonal is exhausted).
RowMatrix pivoted_partial_cholesky(const DenseSymMatrix& m, std::size_t k);

Preconditioner build_preconditioner(const DenseSymMatrix& m, const PreconditionerConfig& cfg, Rng& rng);

}  // namespace rstar
