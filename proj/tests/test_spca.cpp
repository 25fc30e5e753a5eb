#include <cmath>
#include <cstdint>
#include <random>

#include <gtest/gtest.h>

#include "mqpam/prox.hpp"
#include "mqpam/spca.hpp"
#include "mqpam/stiefel.hpp"
#include "oracles.hpp"

namespace {

using mqpam::Matrix;
using mqpam::SpcaInstance;

Matrix embedding(int n, int p) { return Matrix::Identity(n, n).leftCols(p); }

TEST(BuildInstance, CovarianceIsSymmetricGram) {
  const SpcaInstance inst = mqpam::build_instance(300, 300, 50, 1e-6, 9);
  const Matrix& c = inst.covariance();
  EXPECT_LE((c - c.transpose()).norm(), 1e-10);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Matrix x = mqpam::gaussian_matrix(300, 1, 1000 + s);
    EXPECT_GE((x.transpose() * c * x)(0, 0), 0.0);
  }
  const Matrix a = mqpam::gaussian_matrix(300, 300, 9);
  EXPECT_LE((c - a.transpose() * a).norm() / c.norm(), 1e-13);
}

TEST(BuildInstance, Deterministic) {
  const SpcaInstance a = mqpam::build_instance(20, 15, 3, 0.1, 4);
  const SpcaInstance b = mqpam::build_instance(20, 15, 3, 0.1, 4);
  EXPECT_TRUE((a.covariance().array() == b.covariance().array()).all());
}

TEST(BuildInstance, RejectsBadShapes) {
  EXPECT_THROW(mqpam::build_instance(5, 3, 4, 0.1, 1), std::invalid_argument);
  EXPECT_THROW(mqpam::build_instance(0, 3, 2, 0.1, 1), std::invalid_argument);
  EXPECT_THROW(mqpam::build_instance(5, 3, 2, 0.0, 1), std::invalid_argument);
}

TEST(SpcaObjective, IdentityCovariance) {
  const double mu = 0.3;
  const SpcaInstance inst(Matrix::Identity(6, 6), mu, 2);
  EXPECT_NEAR(mqpam::spca_objective(inst, embedding(6, 2)), -mu * 2 / 2 + 2, 1e-15);
}

TEST(SpcaObjective, TinyMuIsNearL1Norm) {
  const SpcaInstance inst = mqpam::build_instance(50, 50, 5, 1e-10, 3);
  const Matrix x = embedding(50, 5);
  EXPECT_NEAR(mqpam::spca_objective(inst, x), 5.0, 1e-6);
}

TEST(SpcaObjective, MatchesRecomputationWithoutCovariance) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const double mu = 0.01 * static_cast<double>(seed + 1);
    const SpcaInstance inst = mqpam::build_instance(25, 12, 3, mu, seed);
    const Matrix a = mqpam::gaussian_matrix(25, 12, seed);
    const Matrix x = mqpam::random_point(12, 3, seed + 50).value();
    double l1 = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) l1 += std::abs(x(i));
    const double ref = -0.5 * mu * (a * x).squaredNorm() + l1;
    const double got = mqpam::spca_objective(inst, x);
    EXPECT_LE(std::abs(got - ref) / std::abs(ref), 1e-8);
  }
}

TEST(SpcaObjective, InvariantUnderColumnSignFlips) {
  const SpcaInstance inst = mqpam::build_instance(30, 20, 4, 0.05, 8);
  const Matrix x = mqpam::random_point(20, 4, 9).value();
  Eigen::VectorXd d(4);
  d << 1, -1, -1, 1;
  EXPECT_NEAR(mqpam::spca_objective(inst, x * d.asDiagonal()), mqpam::spca_objective(inst, x),
              1e-12);
}

TEST(SpcaObjective, TraceTermNonNegative) {
  const SpcaInstance inst = mqpam::build_instance(10, 12, 3, 1.0, 2);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Matrix x = mqpam::gaussian_matrix(12, 3, s);
    EXPECT_LE(mqpam::spca_smooth_objective(inst, x), 1e-12);
  }
}

TEST(SpcaGradient, ForcedValues) {
  const Matrix x = mqpam::random_point(6, 2, 1).value();
  const Matrix y = mqpam::gaussian_matrix(6, 2, 2);
  const double beta = 3.0;
  const double mu = 0.25;
  const SpcaInstance ident(Matrix::Identity(6, 6), mu, 2);
  EXPECT_LE((mqpam::spca_euclidean_gradient(ident, x, y, beta) - ((beta - mu) * x - beta * y))
                .norm(),
            1e-14);
  const SpcaInstance tiny(Matrix::Identity(6, 6), 1e-300, 2);
  EXPECT_LE(mqpam::spca_euclidean_gradient(tiny, x, x, beta).norm(), 1e-290);
}

TEST(SpcaGradient, MatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const double mu = 0.02 * static_cast<double>(seed + 1);
    const double beta = 100.5;
    const SpcaInstance inst = mqpam::build_instance(15, 10, 3, mu, seed);
    const Matrix x = mqpam::random_point(10, 3, seed + 7).value();
    const Matrix y = mqpam::soft_threshold(x, 1.0 / beta);
    const auto smooth = [&](const Matrix& z) {
      return -0.5 * mu * (z.transpose() * inst.covariance() * z).trace() +
             0.5 * beta * (y - z).squaredNorm();
    };
    const Matrix fd = mqpam::oracle::finite_difference_gradient(smooth, x);
    const Matrix g = mqpam::spca_euclidean_gradient(inst, x, y, beta);
    EXPECT_LE((fd - g).norm() / g.norm(), 1e-5) << "seed " << seed;
  }
}

TEST(Sparsity, Values) {
  EXPECT_EQ(mqpam::sparsity(Matrix::Zero(3, 4)), 1.0);
  EXPECT_EQ(mqpam::sparsity(Matrix::Ones(3, 4)), 0.0);
  const Matrix u = mqpam::gaussian_matrix(40, 5, 12);
  const double tau = 0.6;
  const double expected = static_cast<double>((u.array().abs() <= tau).count()) / 200.0;
  EXPECT_EQ(mqpam::sparsity(mqpam::soft_threshold(u, tau)), expected);
}

TEST(Sparsity, ThresholdedVariant) {
  Matrix x(2, 2);
  x << 1e-6, -2e-6, 0.5, 1e-4;
  EXPECT_EQ(mqpam::thresholded_sparsity(x, 1e-5), 0.5);
}

TEST(SmoothProblem, DelegatesToSpcaFunctions) {
  const SpcaInstance inst = mqpam::build_instance(12, 8, 2, 0.03, 5);
  const auto problem = mqpam::make_smooth_problem(inst);
  const Matrix x = mqpam::random_point(8, 2, 6).value();
  const Matrix y = mqpam::gaussian_matrix(8, 2, 7);
  const Matrix g1 = problem.euclidean_gradient(x, y, 4.0);
  const Matrix g2 = mqpam::spca_euclidean_gradient(inst, x, y, 4.0);
  EXPECT_TRUE((g1.array() == g2.array()).all());
  EXPECT_EQ(problem.penalized_objective(x, x, 4.0), problem.objective(x));

  const double mu = 0.2;
  const SpcaInstance ident(Matrix::Identity(5, 5), mu, 2);
  const auto p2 = mqpam::make_smooth_problem(ident);
  EXPECT_NEAR(p2.objective(embedding(5, 2)), -mu * 2 / 2, 1e-15);
}

}  // namespace
