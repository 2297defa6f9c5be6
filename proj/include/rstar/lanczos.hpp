#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "rstar/linalg.hpp"
#include "rstar/precond.hpp"

namespace rstar {

/// Anything that can multiply a block of vectors. Rows are independent:
/// row p of the result must depend only on row p of the input.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual std::size_t dim() const = 0;
  virtual RowMatrix apply(const RowMatrix& x) const = 0;

  std::vector<double> apply(std::span<const double> v) const;
};

class DenseOperator final : public LinearOperator {
 public:
  explicit DenseOperator(const DenseSymMatrix& m) : m_(m) {}
  std::size_t dim() const override { return m_.dim(); }
  RowMatrix apply(const RowMatrix& x) const override { return matmat(m_, x); }
  using LinearOperator::apply;

 private:
  const DenseSymMatrix& m_;
};

/// x -> M P^{-1} x
class PreconditionedOperator final : public LinearOperator {
 public:
  PreconditionedOperator(const DenseSymMatrix& m, const Preconditioner& p);
  std::size_t dim() const override { return m_.dim(); }
  RowMatrix apply(const RowMatrix& x) const override { return matmat(m_, p_.apply_inverse(x)); }
  using LinearOperator::apply;

 private:
  const DenseSymMatrix& m_;
  const Preconditioner& p_;
};

/// Wraps a per-vector callable; handy for tests and shifted operators.
class FunctionOperator final : public LinearOperator {
 public:
  using Fn = std::function<void(std::span<const double>, std::span<double>)>;
  FunctionOperator(std::size_t n, Fn fn) : n_(n), fn_(std::move(fn)) {}
  std::size_t dim() const override { return n_; }
  RowMatrix apply(const RowMatrix& x) const override;
  using LinearOperator::apply;

 private:
  std::size_t n_;
  Fn fn_;
};

/// Q (t x n, orthonormal rows) and T (t x t) with Q Op Q^T ~= T, started from
/// v: Q.row(0) = v / |v|.
struct LanczosFactorization {
  RowMatrix basis;
  TridiagMatrix tridiag;
  double start_norm = 0.0;

  std::size_t steps() const noexcept { return tridiag.size(); }
};

/// t steps of the three-term recurrence with full reorthogonalization.
/// Stops early (and truncates) when the next off-diagonal falls below
/// 1e-12 times |Op q_1|. Throws InvalidArgument for a zero start vector.
LanczosFactorization lanczos(const LinearOperator& op, std::span<const double> v, std::size_t t);

/// One independent recurrence per row of `starts`, advanced in lockstep so a
/// single block product serves every recurrence per step. Result i is
/// bit-identical to lanczos(op, starts.row(i), t).
std::vector<LanczosFactorization> lanczos_batch(const LinearOperator& op, const RowMatrix& starts,
                                                std::size_t t);

/// Inner product for Lanczos on M P^{-1}. Euclidean runs the plain symmetric
/// recurrence on the non-symmetric M P^{-1}; Preconditioned uses
/// <x, y> = x^T P^{-1} y, in which M P^{-1} is self-adjoint, so T is the exact
/// projection of an operator similar to P^{-1/2} M P^{-1/2}. The two coincide
/// for P = I.
enum class LanczosMetric { Euclidean, Preconditioned };

std::string_view to_string(LanczosMetric m);
LanczosMetric parse_lanczos_metric(std::string_view s);

/// Lanczos on M P^{-1} in the P^{-1} inner product. Basis rows are
/// P^{-1}-orthonormal (Q P^{-1} Q^T = I), Q.row(0) = v / |v|_{P^{-1}} and
/// start_norm = |v|_{P^{-1}}, so f(M P^{-1}) v ~= Q^T f(T) (start_norm e_1).
/// One block product with M and one block P^{-1} solve per step. Result i is
/// bit-identical to running row i alone.
std::vector<LanczosFactorization> preconditioned_lanczos_batch(const DenseSymMatrix& m, const Preconditioner& p,
                                                               const RowMatrix& starts, std::size_t t);

/// Dispatches on the metric.
std::vector<LanczosFactorization> lanczos_batch(const DenseSymMatrix& m, const Preconditioner& p,
                                                const RowMatrix& starts, std::size_t t, LanczosMetric metric);

/// w_j = (T + shifts[j] I)^{-1} (|v| e_1) for every shift.
std::vector<std::vector<double>> multishift_solve(const LanczosFactorization& f,
                                                  std::span<const double> shifts);

/// Q^T w: the full-space vector represented by w in the Krylov basis.
std::vector<double> lift(const LanczosFactorization& f, std::span<const double> w);

}  // namespace rstar
