#include <gtest/gtest.h>

#include <random>

#include "magplate/density.hpp"
#include "oracles.hpp"

using namespace magplate;

TEST(Density, SpecValidation) {
  DensitySpec s;
  EXPECT_NO_THROW(s.validate());
  s.beta = 8;
  EXPECT_THROW(s.validate(), ConfigError);
  s = {};
  s.p = 3;
  EXPECT_THROW(s.validate(), ConfigError);
  s = {};
  s.alpha = 0;
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Density, NormalizationAndErrors) {
  DensitySpec s;
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(eval_W(Mat3::Identity(), oracle::random_unit(rng), s), 0.0);
  EXPECT_THROW(eval_W(Mat3::Identity(), Vec3(1, 1, 0), s), ConfigError);
  Mat3 bad = Mat3::Identity();
  bad(0, 1) = std::nan("");
  EXPECT_THROW(eval_W(bad, Vec3::UnitZ(), s), ConfigError);
}

TEST(Density, ScaledIdentity) {
  DensitySpec s;
  EXPECT_NEAR(eval_W(2 * Mat3::Identity(), Vec3::UnitZ(), s), 21.0, 1e-12);
  std::mt19937_64 rng(7);
  for (double c : {2.0, 0.5, 1.3}) {
    EXPECT_NEAR(oracle::dist_by_rotation_search(c * Mat3::Identity(), rng), std::sqrt(3.0) * std::abs(c - 1), 1e-6);
    EXPECT_NEAR(dist_so3(c * Mat3::Identity()), std::sqrt(3.0) * std::abs(c - 1), 1e-12);
  }
}

TEST(Density, DistMatchesRotationSearch) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    Mat3 F = oracle::random_rotation(rng) * (Mat3::Identity() + oracle::random_matrix(rng, 0.6));
    EXPECT_NEAR(dist_so3(F), oracle::dist_by_rotation_search(F, rng), 1e-6) << F;
  }
}

TEST(Density, ReflectionBranchMatchesRotationSearch) {
  std::mt19937_64 rng(12);
  int tested = 0;
  while (tested < 10) {
    Mat3 F = oracle::random_matrix(rng, 1.5);
    if (F.determinant() > 0) F.row(0) *= -1;
    ++tested;
    EXPECT_NEAR(dist_so3(F), oracle::dist_by_rotation_search(F, rng), 1e-6) << F;
  }
}

TEST(Density, FrameIndifference) {
  DensitySpec s;
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    Mat3 R = oracle::random_rotation(rng);
    Mat3 F = Mat3::Identity() + oracle::random_matrix(rng, 0.4);
    Vec3 nu = oracle::random_unit(rng);
    double a = eval_W(F, nu, s), b = eval_W(R * F, R * nu, s);
    EXPECT_NEAR(a, b, 1e-10 * std::max(1.0, a));
    EXPECT_NEAR(eval_W(R, R * nu, s), 0.0, 1e-12);
  }
}

TEST(Density, Growth) {
  DensitySpec s;
  std::mt19937_64 rng(6);
  for (int i = 0; i < 1000; ++i) {
    Mat3 F = oracle::random_rotation(rng) * (Mat3::Identity() + oracle::random_matrix(rng, 1.0));
    double d = dist_so3(F);
    EXPECT_GE(eval_W(F, oracle::random_unit(rng), s), std::max(d * d, std::pow(d, s.p)) - 1e-12);
  }
}

TEST(Density, IncompressibleAndPenalized) {
  DensitySpec s;
  EXPECT_EQ(eval_W_inc(Mat3::Identity(), Vec3::UnitZ(), s), 0.0);
  EXPECT_EQ(eval_W_inc(Vec3(2, 1, 1).asDiagonal(), Vec3::UnitX(), s), kInfinite);
  Mat3 F = Vec3(2, 0.5, 1).asDiagonal();
  EXPECT_EQ(eval_W_inc(F, Vec3::UnitZ(), s), eval_W(F, Vec3::UnitZ(), s));
  Mat3 D = Vec3(2, 1, 1).asDiagonal();
  EXPECT_NEAR(eval_W_k(D, Vec3::UnitX(), 2, s), eval_W(D, Vec3::UnitX(), s) + 1, 1e-12);
  EXPECT_EQ(eval_W_k(Mat3::Identity(), Vec3::UnitY(), 5, s), 0.0);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    Mat3 G = Mat3::Identity() + oracle::random_matrix(rng, 0.5);
    Vec3 nu = oracle::random_unit(rng);
    EXPECT_GE(eval_W_k(G, nu, i + 1, s), eval_W_k(G, nu, i, s));
  }
}

TEST(Density, HessianMatchesClosedForm) {
  std::mt19937_64 rng(8);
  for (double kappa : {0.0, 1.0, 2.5}) {
    DensitySpec s;
    s.kappa = kappa;
    for (int i = 0; i < 10; ++i) {
      Vec3 nu = oracle::random_unit(rng);
      ElasticTensor fd = assemble_C_nu(nu, s);
      ElasticTensor cf = closed_form_C_nu(nu, kappa);
      EXPECT_LT((fd.K - cf.K).cwiseAbs().maxCoeff(), 1e-6);
      EXPECT_LT(fd.fd_error, 1e-5);
      Mat3 G = oracle::random_matrix(rng, 1.0);
      Mat3 S = 0.5 * (G + G.transpose());
      double ref = 2 * S.squaredNorm() + 8 * kappa * std::pow(nu.dot(S * nu), 2);
      EXPECT_NEAR(fd.contract(G), ref, 1e-6 * std::max(1.0, ref));
      Mat3 W = G - G.transpose();
      EXPECT_NEAR(fd.contract(W), 0.0, 1e-6);
    }
  }
  DensitySpec s;
  EXPECT_NEAR(assemble_C_nu(Vec3::UnitZ(), s).contract(Vec3(0, 0, 1).asDiagonal()), 10.0, 1e-6);
}

TEST(Density, TensorSymmetryAndDefiniteness) {
  std::mt19937_64 rng(9);
  DensitySpec s;
  for (int i = 0; i < 10; ++i) {
    ElasticTensor C = assemble_C_nu(oracle::random_unit(rng), s);
    EXPECT_LT((C.K - C.K.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    // Orthonormal basis of symmetric matrices.
    Eigen::Matrix<double, 9, 6> B = Eigen::Matrix<double, 9, 6>::Zero();
    int col = 0;
    for (int a = 0; a < 3; ++a)
      for (int b = a; b < 3; ++b, ++col) {
        Mat3 E = Mat3::Zero();
        E(a, b) = E(b, a) = (a == b) ? 1.0 : std::sqrt(0.5);
        B.col(col) = flatten(E);
      }
    Eigen::Matrix<double, 6, 6> R = B.transpose() * C.K * B;
    using Eig6 = Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>>;
    EXPECT_GT(Eig6(R).eigenvalues().minCoeff(), 1.0);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat9>(C.K).eigenvalues().minCoeff(), -1e-6);
  }
}

TEST(Density, TensorLipschitzInNu) {
  std::mt19937_64 rng(10);
  double L = 0;
  for (int i = 0; i < 50; ++i) {
    Vec3 a = oracle::random_unit(rng), b = oracle::random_unit(rng);
    L = std::max(L, (closed_form_C_nu(a, 1).K - closed_form_C_nu(b, 1).K).norm() / (a - b).norm());
  }
  EXPECT_LT(L, 40.0);
  RecordProperty("lipschitz", std::to_string(L));
}

TEST(Density, Remainder) {
  DensitySpec s;
  EXPECT_EQ(remainder_probe(Mat3::Zero(), Vec3::UnitX(), s), 0.0);
  std::mt19937_64 rng(4);
  Mat3 G0 = oracle::random_matrix(rng, 1.0);
  G0 *= 0.4 / G0.norm();
  Vec3 nu = oracle::random_unit(rng);
  double prev = 1e300;
  for (double t : {1e-1, 1e-2, 1e-3}) {
    // Exact quadratic part avoids the finite-difference floor at tiny t.
    double w = eval_W_strain(t * G0, nu, s) - 0.5 * closed_form_C_nu(nu, s.kappa).contract(t * G0);
    double r = std::abs(w) / (t * t);
    EXPECT_LT(r, prev);
    prev = r;
  }
  EXPECT_LT(prev, 1e-2);
  Mat3 G = oracle::random_matrix(rng, 1.0);
  G *= 1e-4 / G.norm();
  EXPECT_LE(std::abs(remainder_probe(G, nu, s)), 1e-10);
  EXPECT_THROW(remainder_probe(Mat3::Identity(), nu, s), ConfigError);
}

TEST(Density, ProviderNuGradient) {
  std::mt19937_64 rng(13);
  ClosedFormProvider cf(1.0);
  for (int i = 0; i < 10; ++i) {
    Mat3 G = oracle::random_matrix(rng, 1.0);
    Vec3 nu = oracle::random_unit(rng);
    Vec3 a = cf.q3_nu_gradient(G, nu);
    Vec3 b = cf.TensorProvider::q3_nu_gradient(G, nu);
    EXPECT_LT((a - b).norm(), 1e-4 * std::max(1.0, a.norm()));
    EXPECT_NEAR(a.dot(nu), 0, 1e-12);
  }
}
