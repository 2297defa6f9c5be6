#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "rstar/errors.hpp"
#include "rstar/kernels.hpp"
#include "rstar/lanczos.hpp"
#include "rstar/rational.hpp"
#include "test_support.hpp"

namespace rstar {
namespace {

using testing::random_spd;
using testing::random_vector;
using testing::to_eigen;

Eigen::MatrixXd tridiag_dense(const TridiagMatrix& t) {
  const auto k = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    out(i, i) = t.diag[static_cast<std::size_t>(i)];
    if (i + 1 < k) out(i, i + 1) = out(i + 1, i) = t.offdiag[static_cast<std::size_t>(i)];
  }
  return out;
}

std::vector<double> r3_shifts() {
  std::vector<double> shifts;
  for (double a : partial_fraction(3).poles) shifts.push_back(-a);
  return shifts;
}

TEST(Lanczos, IdentityOneStep) {
  const DenseSymMatrix eye = DenseSymMatrix::identity(4);
  const DenseOperator op(eye);
  const std::vector<double> v{3.0, 0.0, 4.0, 0.0};
  const auto f = lanczos(op, v, 1);
  ASSERT_EQ(f.steps(), 1u);
  EXPECT_DOUBLE_EQ(f.tridiag.diag[0], 1.0);
  EXPECT_DOUBLE_EQ(f.start_norm, 5.0);
  EXPECT_DOUBLE_EQ(f.basis(0, 0), 0.6);
  EXPECT_DOUBLE_EQ(f.basis(0, 2), 0.8);
}

TEST(Lanczos, InvariantSubspaceStopsEarly) {
  const DenseSymMatrix eye = DenseSymMatrix::identity(6);
  const DenseOperator op(eye);
  const auto f = lanczos(op, std::vector<double>(6, 1.0), 4);
  EXPECT_EQ(f.steps(), 1u);
  EXPECT_EQ(f.basis.rows(), 1u);
  EXPECT_TRUE(f.tridiag.offdiag.empty());
}

TEST(Lanczos, DiagonalFullKrylovSpaceRecoversSpectrum) {
  const std::vector<double> d{1, 2, 3, 4};
  const DenseSymMatrix m = DenseSymMatrix::diagonal(d);
  const DenseOperator op(m);
  const auto f = lanczos(op, std::vector<double>(4, 1.0), 4);
  ASSERT_EQ(f.steps(), 4u);
  const SymEigen e = tridiag_eig(f.tridiag);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(e.values[i], d[i], 1e-10);
}

TEST(Lanczos, FullRunReconstructsSymmetricOperator) {
  Rng rng(21);
  const DenseSymMatrix m = random_spd(30, 1.0, 100.0, rng);
  const DenseOperator op(m);
  const auto f = lanczos(op, random_vector(30, rng), 30);
  ASSERT_EQ(f.steps(), 30u);
  const Eigen::MatrixXd q = to_eigen(f.basis);
  const Eigen::MatrixXd a = to_eigen(m);
  EXPECT_LE((q.transpose() * tridiag_dense(f.tridiag) * q - a).norm() / a.norm(), 1e-8);
}

TEST(Lanczos, BasisStaysOrthonormal) {
  Rng rng(22);
  const DenseSymMatrix m = random_spd(500, 1e-3, 1e3, rng);
  const DenseOperator op(m);
  const auto f = lanczos(op, random_vector(500, rng), 80);
  const Eigen::MatrixXd q = to_eigen(f.basis);
  const Eigen::MatrixXd g = q * q.transpose() - Eigen::MatrixXd::Identity(q.rows(), q.rows());
  EXPECT_LE(g.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Lanczos, BatchRowsMatchSingleRunsBitwise) {
  Rng rng(23);
  const DenseSymMatrix m = random_spd(60, 0.1, 10.0, rng);
  const DenseOperator op(m);
  RowMatrix starts(5, 60);
  for (std::size_t i = 0; i < 5 * 60; ++i) starts.data()[i] = rng.normal();
  // Row 2 hits an invariant subspace immediately and drops out of the batch.
  for (std::size_t i = 0; i < 60; ++i) starts(2, i) = 0.0;
  starts(2, 7) = 1.0;
  const auto batch = lanczos_batch(op, starts, 15);
  for (std::size_t p = 0; p < 5; ++p) {
    const auto single = lanczos(op, starts.row(p), 15);
    EXPECT_EQ(batch[p].basis, single.basis) << "row " << p;
    EXPECT_EQ(batch[p].tridiag.diag, single.tridiag.diag);
    EXPECT_EQ(batch[p].tridiag.offdiag, single.tridiag.offdiag);
  }
}

TEST(Lanczos, InvalidArguments) {
  const DenseSymMatrix m = DenseSymMatrix::identity(3);
  const DenseOperator op(m);
  EXPECT_THROW(lanczos(op, std::vector<double>(3, 0.0), 2), InvalidArgument);
  EXPECT_THROW(lanczos(op, std::vector<double>(3, 1.0), 4), InvalidArgument);
  EXPECT_THROW(lanczos(op, std::vector<double>(3, 1.0), 0), InvalidArgument);
  EXPECT_THROW(lanczos(op, std::vector<double>(2, 1.0), 1), DimensionMismatch);
  EXPECT_THROW(parse_lanczos_metric("cosine"), InvalidArgument);
  EXPECT_EQ(parse_lanczos_metric(to_string(LanczosMetric::Preconditioned)), LanczosMetric::Preconditioned);
}

TEST(Multishift, IdentityTridiagonal) {
  LanczosFactorization f;
  f.tridiag = TridiagMatrix{{1, 1, 1}, {0, 0}};
  f.start_norm = 2.0;
  f.basis = RowMatrix(3, 3);
  const std::vector<double> shifts{1.0};
  const auto w = multishift_solve(f, shifts);
  EXPECT_EQ(w.front(), (std::vector<double>{1, 0, 0}));
}

// With t = n the Krylov space is everything, so the lifted shifted solves are
// exact. Oracle: Eigen LU on the dense shifted matrix.
TEST(Multishift, FullKrylovSpaceSolvesExactly) {
  Rng rng(24);
  const auto shifts = r3_shifts();
  for (int trial = 0; trial < 10; ++trial) {
    const DenseSymMatrix m = random_spd(20, 1.0, 1e3, rng);
    const DenseOperator op(m);
    const auto v = random_vector(20, rng);
    const auto f = lanczos(op, v, 20);
    ASSERT_EQ(f.steps(), 20u);
    const auto ws = multishift_solve(f, shifts);
    const Eigen::MatrixXd a = to_eigen(m);
    for (std::size_t j = 0; j < shifts.size(); ++j) {
      const Eigen::MatrixXd shifted = a + shifts[j] * Eigen::MatrixXd::Identity(20, 20);
      const Eigen::VectorXd want = shifted.partialPivLu().solve(to_eigen(v));
      const Eigen::VectorXd got = to_eigen(lift(f, ws[j]));
      EXPECT_LE((got - want).norm(), 1e-8 * to_eigen(v).norm()) << "trial " << trial << " shift " << j;
    }
  }
}

TEST(Multishift, ShortRunOnWellConditionedMatrix) {
  Rng rng(25);
  const DenseSymMatrix m = random_spd(200, 1.0, 9.0, rng);
  const DenseOperator op(m);
  const auto v = random_vector(200, rng);
  const auto f = lanczos(op, v, 20);
  const auto shifts = r3_shifts();
  const auto ws = multishift_solve(f, shifts);
  for (std::size_t j = 0; j < shifts.size(); ++j) {
    const Eigen::MatrixXd shifted = to_eigen(m) + shifts[j] * Eigen::MatrixXd::Identity(200, 200);
    const Eigen::VectorXd want = shifted.llt().solve(to_eigen(v));
    EXPECT_LE(testing::rel_diff(to_eigen(lift(f, ws[j])), want), 1e-6) << "shift " << j;
  }
}

// Lanczos on M + sigma I solved without shift equals Lanczos on M solved with
// shift sigma: one factorization serves every pole.
TEST(Multishift, ShiftInvariance) {
  Rng rng(26);
  const DenseSymMatrix m = random_spd(25, 0.5, 50.0, rng);
  const auto v = random_vector(25, rng);
  for (double sigma : r3_shifts()) {
    const DenseOperator plain(m);
    const FunctionOperator shifted(25, [&](std::span<const double> x, std::span<double> y) {
      matvec(m, x, y);
      axpy(sigma, x, y);
    });
    const auto f = lanczos(plain, v, 25);
    const auto g = lanczos(shifted, v, 25);
    const std::vector<double> s1{sigma}, s0{0.0};
    const auto x1 = lift(f, multishift_solve(f, s1).front());
    const auto x0 = lift(g, multishift_solve(g, s0).front());
    EXPECT_LE(testing::rel_diff(to_eigen(x1), to_eigen(x0)), 1e-8);
  }
}

TEST(Multishift, LiftRejectsWrongLength) {
  LanczosFactorization f;
  f.tridiag = TridiagMatrix{{1, 1}, {0}};
  f.basis = RowMatrix(2, 3);
  EXPECT_THROW(lift(f, std::vector<double>{1, 2, 3}), DimensionMismatch);
}

class PreconditionedMetric : public ::testing::Test {
 protected:
  void SetUp() override {
    Rng rng(27);
    m_.emplace(build_covariance(KernelSpec{KernelFamily::Matern52, 1.0, 1.0, 1e-3}, sample_index_points(40, 2, rng)));
    PreconditionerConfig cfg;
    cfg.rank = 5;
    p_.emplace(build_preconditioner(*m_, cfg, rng));
    v_ = random_vector(40, rng);
  }
  std::optional<DenseSymMatrix> m_;
  std::optional<Preconditioner> p_;
  std::vector<double> v_;
};

TEST_F(PreconditionedMetric, BasisIsOrthonormalInInverseMetric) {
  RowMatrix start(1, 40);
  std::copy(v_.begin(), v_.end(), start.data());
  const auto f = preconditioned_lanczos_batch(*m_, *p_, start, 15).front();
  const Eigen::MatrixXd q = to_eigen(f.basis);
  const Eigen::MatrixXd pinv = to_eigen(p_->materialize()).inverse();
  const Eigen::MatrixXd g = q * pinv * q.transpose() - Eigen::MatrixXd::Identity(q.rows(), q.rows());
  EXPECT_LE(g.cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(f.start_norm, std::sqrt(to_eigen(v_).dot(pinv * to_eigen(v_))), 1e-12 * f.start_norm);
  // T is the projection of M P^{-1} in that metric: T = Q P^{-1} M P^{-1} Q^T.
  const Eigen::MatrixXd t = q * pinv * to_eigen(*m_) * pinv * q.transpose();
  EXPECT_LE((t - tridiag_dense(f.tridiag)).norm() / t.norm(), 1e-9);
}

TEST_F(PreconditionedMetric, FullRunSolvesShiftedPreconditionedSystems) {
  RowMatrix start(1, 40);
  std::copy(v_.begin(), v_.end(), start.data());
  const auto f = preconditioned_lanczos_batch(*m_, *p_, start, 40).front();
  const auto shifts = r3_shifts();
  const auto ws = multishift_solve(f, shifts);
  const Eigen::MatrixXd pd = to_eigen(p_->materialize());
  const Eigen::MatrixXd a = to_eigen(*m_) * pd.inverse();
  for (std::size_t j = 0; j < shifts.size(); ++j) {
    const Eigen::VectorXd want =
        (a + shifts[j] * Eigen::MatrixXd::Identity(40, 40)).partialPivLu().solve(to_eigen(v_));
    EXPECT_LE(testing::rel_diff(to_eigen(lift(f, ws[j])), want), 1e-7) << "shift " << j;
  }
}

TEST_F(PreconditionedMetric, IdentityPreconditionerMatchesEuclidean) {
  const Preconditioner eye(PreconditionerKind::Identity, std::vector<double>(40, 1.0), RowMatrix());
  RowMatrix start(1, 40);
  std::copy(v_.begin(), v_.end(), start.data());
  const auto a = lanczos_batch(*m_, eye, start, 12, LanczosMetric::Preconditioned).front();
  const auto b = lanczos_batch(*m_, eye, start, 12, LanczosMetric::Euclidean).front();
  ASSERT_EQ(a.steps(), b.steps());
  for (std::size_t i = 0; i < a.steps(); ++i) EXPECT_NEAR(a.tridiag.diag[i], b.tridiag.diag[i], 1e-12);
  EXPECT_LE((to_eigen(a.basis) - to_eigen(b.basis)).norm(), 1e-10);
}

TEST_F(PreconditionedMetric, BatchRowsMatchSingleRunsBitwise) {
  Rng rng(28);
  RowMatrix starts(3, 40);
  for (std::size_t i = 0; i < 3 * 40; ++i) starts.data()[i] = rng.normal();
  const auto batch = preconditioned_lanczos_batch(*m_, *p_, starts, 10);
  for (std::size_t r = 0; r < 3; ++r) {
    RowMatrix one(1, 40);
    std::copy(starts.row(r).begin(), starts.row(r).end(), one.data());
    const auto single = preconditioned_lanczos_batch(*m_, *p_, one, 10).front();
    EXPECT_EQ(batch[r].basis, single.basis);
    EXPECT_EQ(batch[r].tridiag.diag, single.tridiag.diag);
  }
}

}  // namespace
}  // namespace rstar
