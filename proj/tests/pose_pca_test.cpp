// SPDX-License-Identifier: Apache-2.0
#include <random>

#include <gtest/gtest.h>

#include "gesture/error.hpp"
#include "gesture/pca.hpp"
#include "gesture/pose.hpp"
#include "support.hpp"

namespace gesture {
namespace {

using testing::random_raw_pose;

RawPose hand_pose() {
  RawPose p;
  p[Joint::Neck] = {100, 200};
  p[Joint::LShoulder] = {140, 200};
  p[Joint::RShoulder] = {60, 200};
  p[Joint::Head] = {100, 160};
  p[Joint::LElbow] = {150, 240};
  p[Joint::LWrist] = {160, 280};
  p[Joint::RElbow] = {50, 240};
  p[Joint::RWrist] = {40, 280};
  p.present.fill(true);
  return p;
}

TEST(NormalizePose, HandArithmetic) {
  const NormalizedPose n = normalize_pose(hand_pose());
  EXPECT_EQ(n[Joint::Neck].x, 0.0);
  EXPECT_EQ(n[Joint::Neck].y, 0.0);
  EXPECT_DOUBLE_EQ(n[Joint::LShoulder].x, 1.0);
  EXPECT_DOUBLE_EQ(n[Joint::RShoulder].x, -1.0);
  EXPECT_DOUBLE_EQ(n[Joint::Head].y, -1.0);
  EXPECT_DOUBLE_EQ(n[Joint::LWrist].x, 1.5);
  EXPECT_DOUBLE_EQ(n[Joint::LWrist].y, 2.0);
}

TEST(NormalizePose, IdempotentAndInvariant) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const RawPose raw = random_raw_pose(rng);
    const NormalizedPose n = normalize_pose(raw);
    EXPECT_NEAR(shoulder_length(n.joints), 1.0, 1e-9);

    const NormalizedPose again = normalize_joints(n.joints);
    RawPose shifted = raw;
    RawPose scaled = raw;
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      shifted.joints[j].x += 7.0;
      shifted.joints[j].y -= 3.0;
      scaled.joints[j].x *= 2.5;
      scaled.joints[j].y *= 2.5;
    }
    const NormalizedPose a = normalize_pose(shifted);
    const NormalizedPose b = normalize_pose(scaled);
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      const double mag = 1.0 + std::abs(n.joints[j].x) + std::abs(n.joints[j].y);
      EXPECT_NEAR(again.joints[j].x, n.joints[j].x, 1e-12 * mag);
      EXPECT_NEAR(again.joints[j].y, n.joints[j].y, 1e-12 * mag);
      EXPECT_NEAR(a.joints[j].x, n.joints[j].x, 1e-12 * mag);
      EXPECT_NEAR(a.joints[j].y, n.joints[j].y, 1e-12 * mag);
      EXPECT_NEAR(b.joints[j].x, n.joints[j].x, 1e-12 * mag);
      EXPECT_NEAR(b.joints[j].y, n.joints[j].y, 1e-12 * mag);
    }
  }
}

TEST(NormalizePose, Errors) {
  RawPose missing = hand_pose();
  missing.present[index(Joint::RWrist)] = false;
  try {
    normalize_pose(missing);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MissingJoint);
  }
  RawPose degenerate = hand_pose();
  degenerate[Joint::LShoulder] = degenerate[Joint::Neck];
  degenerate[Joint::RShoulder] = degenerate[Joint::Neck];
  try {
    normalize_pose(degenerate);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DegeneratePose);
  }
}

TEST(NormalizedPose, FlattenOrder) {
  const NormalizedPose n = normalize_pose(hand_pose());
  const PoseFlat f = n.flatten();
  EXPECT_EQ(f(0), n[Joint::Head].x);
  EXPECT_EQ(f(1), n[Joint::Head].y);
  EXPECT_EQ(f(4), n[Joint::LShoulder].x);
  EXPECT_EQ(f(15), n[Joint::RWrist].y);
  const NormalizedPose back = NormalizedPose::from_flat(f);
  EXPECT_EQ(back.flatten(), f);
  EXPECT_THROW(NormalizedPose::from_flat(Eigen::VectorXd::Zero(15)), Error);
}

// Data of exact rank `rank` around a random mean.
Eigen::MatrixXd low_rank_data(int rows, int rank, std::uint64_t seed, double spread) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd basis(rank, 16);
  for (Eigen::Index i = 0; i < basis.size(); ++i) basis.data()[i] = g(rng);
  Eigen::VectorXd mean(16);
  for (Eigen::Index i = 0; i < 16; ++i) mean(i) = g(rng);
  Eigen::MatrixXd data(rows, 16);
  for (int r = 0; r < rows; ++r) {
    Eigen::VectorXd c(rank);
    for (int k = 0; k < rank; ++k) c(k) = spread * g(rng);
    data.row(r) = (mean + basis.transpose() * c).transpose();
  }
  return data;
}

TEST(FitPca, ConstantData) {
  Eigen::MatrixXd data(20, 16);
  for (int r = 0; r < 20; ++r) {
    for (int c = 0; c < 16; ++c) data(r, c) = 0.1 * c;
  }
  const PcaModel m = fit_pca_flat(data, 10);
  for (Eigen::Index k = 0; k < 10; ++k) EXPECT_EQ(m.explained_variance_ratio(k), 0.0);
  for (int c = 0; c < 16; ++c) EXPECT_NEAR(m.mean(c), 0.1 * c, 1e-15);
}

TEST(FitPca, RankOneDirection) {
  Eigen::VectorXd d = Eigen::VectorXd::LinSpaced(16, -1.0, 2.0).normalized();
  Eigen::MatrixXd data(50, 16);
  for (int r = 0; r < 50; ++r) data.row(r) = (std::sin(0.7 * r) * 3.0 * d).transpose();
  const PcaModel m = fit_pca_flat(data, 10);
  EXPECT_NEAR(m.explained_variance_ratio(0), 1.0, 1e-9);
  const double align = std::abs(m.components.row(0).dot(d));
  EXPECT_NEAR(align, 1.0, 1e-9);
  for (Eigen::Index k = 1; k < 10; ++k) EXPECT_LE(m.explained_variance_ratio(k), 1e-12);
}

TEST(FitPca, InvariantsAndSignConvention) {
  const Eigen::MatrixXd data = low_rank_data(200, 16, 5, 1.0);
  const PcaModel m = fit_pca_flat(data, 10);
  const Eigen::MatrixXd gram = m.components * m.components.transpose();
  EXPECT_LE((gram - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff(), 1e-10);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < 10; ++k) {
    EXPECT_GE(m.explained_variance_ratio(k), 0.0);
    if (k > 0) {
      EXPECT_LE(m.explained_variance_ratio(k), m.explained_variance_ratio(k - 1));
    }
    sum += m.explained_variance_ratio(k);
    Eigen::Index arg = 0;
    m.components.row(k).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(m.components(k, arg), 0.0);
  }
  EXPECT_LE(sum, 1.0 + 1e-12);
}

TEST(FitPca, AgreesWithJacobiOracle) {
  const Eigen::MatrixXd data = low_rank_data(200, 16, 9, 1.0);
  const PcaModel m = fit_pca_flat(data, 10);
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / (data.rows() - 1.0);
  const auto [values, vectors] = testing::jacobi_eigen(cov);
  const double total = values.sum();
  for (Eigen::Index k = 0; k < 10; ++k) {
    EXPECT_NEAR(m.explained_variance_ratio(k), values(k) / total, 1e-10);
    EXPECT_NEAR(std::abs(m.components.row(k).dot(vectors.col(k))), 1.0, 1e-8);
  }
}

TEST(FitPca, RankTenRoundTrip) {
  const Eigen::MatrixXd data = low_rank_data(200, 10, 21, 0.05);
  const PcaModel m = fit_pca_flat(data, 10);
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    const Eigen::VectorXd p = data.row(r).transpose();
    const GestureVector v = encode_pose(m, NormalizedPose::from_flat(p));
    ASSERT_LE(std::abs(v(0)), 1.0);
    ASSERT_LE(std::abs(v(3)), 1.0);
    const Eigen::VectorXd back = decode_flat(m, v);
    EXPECT_LE((back - p).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(FitPca, Errors) {
  EXPECT_THROW(fit_pca_flat(Eigen::MatrixXd::Zero(10, 16), 10), Error);
  try {
    fit_pca_flat(Eigen::MatrixXd::Zero(10, 16), 10);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InsufficientData);
  }
  EXPECT_NO_THROW(fit_pca_flat(Eigen::MatrixXd::Zero(11, 16), 10));
  EXPECT_THROW(fit_pca_flat(Eigen::MatrixXd::Zero(30, 16), 17), Error);
}

class PcaModelTest : public ::testing::Test {
 protected:
  void SetUp() override { model = fit_pca_flat(low_rank_data(300, 16, 33, 1.0), 10); }
  PcaModel model;
};

TEST_F(PcaModelTest, MeanEncodesToZero) {
  const NormalizedPose mean = NormalizedPose::from_flat(model.mean);
  EXPECT_LE(encode_pose(model, mean).cwiseAbs().maxCoeff(), 1e-12);
  const NormalizedPose decoded = decode_pose(model, GestureVector::Zero(10));
  EXPECT_EQ(decoded.flatten(), model.mean);
}

TEST_F(PcaModelTest, ProjectionAndClamp) {
  const Eigen::VectorXd half = model.mean + 0.5 * model.components.row(1).transpose();
  const GestureVector v = encode_pose(model, NormalizedPose::from_flat(half));
  EXPECT_NEAR(v(1), 0.5, 1e-12);
  for (Eigen::Index k = 0; k < 10; ++k) {
    if (k != 1) {
      EXPECT_NEAR(v(k), 0.0, 1e-12);
    }
  }
  const Eigen::VectorXd far = model.mean + 3.0 * model.components.row(0).transpose();
  EXPECT_EQ(encode_pose(model, NormalizedPose::from_flat(far))(0), 1.0);
  EXPECT_NEAR(project_pose(model, NormalizedPose::from_flat(far))(0), 3.0, 1e-12);
  const Eigen::VectorXd low = model.mean - 4.0 * model.components.row(3).transpose();
  EXPECT_EQ(encode_pose(model, NormalizedPose::from_flat(low))(3), -1.0);
}

TEST_F(PcaModelTest, BasisDecoding) {
  for (int k = 0; k < 10; ++k) {
    GestureVector e = GestureVector::Zero(10);
    e(k) = 1.0;
    const Eigen::VectorXd expected = model.mean + model.components.row(k).transpose();
    EXPECT_LE((decode_flat(model, e) - expected).cwiseAbs().maxCoeff(), 1e-15);
  }
  EXPECT_THROW(decode_flat(model, GestureVector::Zero(9)), Error);
  EXPECT_THROW(decode_flat(PcaModel{}, GestureVector::Zero(10)), Error);
}

TEST_F(PcaModelTest, ProjectionIsOptimal) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd p(16);
    for (Eigen::Index i = 0; i < 16; ++i) p(i) = model.mean(i) + g(rng);
    const NormalizedPose pose = NormalizedPose::from_flat(p);
    const double best = (decode_flat(model, project_pose(model, pose)) - p).norm();
    for (int w = 0; w < 50; ++w) {
      GestureVector other(10);
      for (Eigen::Index i = 0; i < 10; ++i) other(i) = g(rng);
      EXPECT_LE(best, (decode_flat(model, other) - p).norm() + 1e-9);
    }
  }
}

TEST_F(PcaModelTest, ComponentSweep) {
  const std::vector<double> zero = {0.0};
  const auto only_mean = component_sweep(model, 2, zero);
  ASSERT_EQ(only_mean.size(), 1u);
  EXPECT_EQ(only_mean[0].flatten(), model.mean);

  const std::vector<double> values = {-1.0, 0.0, 1.0};
  const auto line = component_sweep(model, 2, values);
  ASSERT_EQ(line.size(), 3u);
  const Eigen::VectorXd a = line[1].flatten() - line[0].flatten();
  const Eigen::VectorXd b = line[2].flatten() - line[1].flatten();
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-12);

  std::size_t gallery = 0;
  const std::vector<double> grid = {-1.0, -0.5, 0.0, 0.5, 1.0};
  for (int dim = 1; dim <= 10; ++dim) gallery += component_sweep(model, dim, grid).size();
  EXPECT_EQ(gallery, 50u);

  try {
    component_sweep(model, 11, values);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::IndexOutOfRange);
  }
  EXPECT_THROW(component_sweep(model, 0, values), Error);
}

}  // namespace
}  // namespace gesture
