/*
 * Copyright 2026 The bopdp Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bopdp/errors.hpp"
#include "bopdp/objective.hpp"
#include "bopdp/surrogate.hpp"
#include "test_util.hpp"

namespace bopdp {
namespace {

KernelSpec Iso(KernelFamily family, std::size_t d, double ell = 1.0, double s2 = 1.0) {
  KernelSpec k;
  k.family = family;
  k.lengthscales = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d), ell);
  k.signal_variance = s2;
  return k;
}

TEST(Kernel, HandValues) {
  const double a[] = {0.0};
  const double b[] = {1.0};
  EXPECT_NEAR(kernel_eval(Iso(KernelFamily::kMatern32, 1), a, b),
              (1 + std::sqrt(3.0)) * std::exp(-std::sqrt(3.0)), 1e-15);
  EXPECT_NEAR(kernel_eval(Iso(KernelFamily::kMatern32, 1), a, b), 0.4834, 1e-4);
  EXPECT_NEAR(kernel_eval(Iso(KernelFamily::kGaussian, 1), a, b), 0.6065, 1e-4);
  EXPECT_DOUBLE_EQ(kernel_eval(Iso(KernelFamily::kGaussian, 1, 1.0, 2.5), a, a), 2.5);
  EXPECT_DOUBLE_EQ(kernel_eval(Iso(KernelFamily::kMatern32, 1, 1.0, 2.5), b, b), 2.5);
}

TEST(Kernel, ArdScalesEachAxis) {
  KernelSpec k = Iso(KernelFamily::kGaussian, 2);
  k.lengthscales << 2.0, 0.5;
  const double a[] = {0.0, 0.0};
  const double b[] = {2.0, 0.5};
  EXPECT_NEAR(kernel_eval(k, a, b), std::exp(-1.0), 1e-15);
}

TEST(Gp, ConstantTargets) {
  Eigen::MatrixXd X(3, 1);
  X << 0.0, 0.5, 1.0;
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(3, 4.0);
  const auto gp = GpSurrogate::condition(Iso(KernelFamily::kMatern32, 1), X, y);
  Eigen::MatrixXd Q(4, 1);
  Q << -3.0, 0.25, 0.8, 7.0;
  Eigen::VectorXd m, v;
  gp.predict_marginal(Q, &m, &v);
  for (Eigen::Index i = 0; i < 4; ++i) {
    EXPECT_NEAR(m[i], 4.0, 1e-12);
    EXPECT_LE(v[i], gp.kernel().signal_variance + 1e-12);
  }
  const auto fitted = fit(X, y, FitOptions{});
  EXPECT_NEAR(fitted.predict_mean(Q)[2], 4.0, 1e-12);
}

TEST(Gp, InterpolatesTrainingPoints) {
  Eigen::MatrixXd X(2, 1);
  X << 0.2, 0.7;
  Eigen::VectorXd y(2);
  y << 1.5, -0.5;
  const auto gp = GpSurrogate::condition(Iso(KernelFamily::kMatern32, 1, 0.3), X, y);
  Eigen::VectorXd m, v;
  gp.predict_marginal(X, &m, &v);
  EXPECT_NEAR(m[0], 1.5, 1e-4);
  EXPECT_NEAR(m[1], -0.5, 1e-4);
  const double s2 = gp.kernel().signal_variance * gp.target_scale() * gp.target_scale();
  EXPECT_LE(v[0], 1e-6 * s2);
  EXPECT_LE(v[1], 1e-6 * s2);
}

TEST(Gp, RevertsToPriorFarFromData) {
  Eigen::MatrixXd X(3, 2);
  X << 0, 0, 1, 0, 0, 1;
  Eigen::VectorXd y(3);
  y << 1.0, 2.0, 4.0;
  const auto gp = GpSurrogate::condition(Iso(KernelFamily::kMatern32, 2, 0.5), X, y);
  Eigen::MatrixXd Q(1, 2);
  Q << 40.0, -40.0;
  Eigen::VectorXd m, v;
  gp.predict_marginal(Q, &m, &v);
  const double scale2 = gp.target_scale() * gp.target_scale();
  EXPECT_NEAR(m[0], gp.target_mean(), 1e-3);
  EXPECT_NEAR(v[0] / scale2, gp.kernel().signal_variance, 1e-3);
  EXPECT_NEAR(gp.target_mean(), 7.0 / 3.0, 1e-12);
}

class GpProperties : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto st = styblinski_tang(3);
    model_ = testing::FitOn(st.space(), 30, 5, [&](const Config& c) { return st(c); });
    queries_ = sample_uniform(st.space(), 40, 77);
  }
  Surrogate model_;
  std::vector<Config> queries_;
};

TEST_F(GpProperties, JointAndMarginalAgree) {
  const auto slice = model_.predict_joint(queries_);
  Eigen::VectorXd m, v;
  model_.predict_marginal(queries_, &m, &v);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    EXPECT_NEAR(slice.means[i], m[i], 1e-9 * (1 + std::abs(m[i])));
    EXPECT_NEAR(slice.covariance(i, i), v[i], 1e-9 * (1 + v[i]));
  }
  EXPECT_TRUE(slice.covariance.isApprox(slice.covariance.transpose(), 0.0));
}

TEST_F(GpProperties, CovarianceIsPsd) {
  const auto slice = model_.predict_joint(queries_);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(slice.covariance);
  const double scale2 = model_.gp.target_scale() * model_.gp.target_scale();
  EXPECT_GE(es.eigenvalues().minCoeff() / scale2, -1e-8);
}

TEST_F(GpProperties, FittedLikelihoodBeatsRandomDraws) {
  const auto& gp = model_.gp;
  const Eigen::VectorXd ys =
      (gp.targets().array() - gp.target_mean()) / gp.target_scale();
  const double fitted = log_marginal_likelihood(gp.kernel(), gp.inputs(), ys);
  EXPECT_NEAR(fitted, gp.log_marginal_likelihood(), 1e-8 * std::abs(fitted));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(std::log(1e-2), std::log(1e2));
  for (int draw = 0; draw < 20; ++draw) {
    KernelSpec k = gp.kernel();
    for (Eigen::Index j = 0; j < k.lengthscales.size(); ++j) k.lengthscales[j] = std::exp(u(rng));
    k.signal_variance = std::exp(u(rng));
    EXPECT_GE(fitted, log_marginal_likelihood(k, gp.inputs(), ys));
  }
}

TEST(Gp, FitIsDeterministic) {
  const auto st = styblinski_tang(2);
  auto f = [&](const Config& c) { return st(c); };
  const auto a = testing::FitOn(st.space(), 15, 8, f);
  const auto b = testing::FitOn(st.space(), 15, 8, f);
  EXPECT_EQ(a.gp.kernel().lengthscales, b.gp.kernel().lengthscales);
  EXPECT_EQ(a.gp.kernel().signal_variance, b.gp.kernel().signal_variance);
}

TEST(Gp, RejectsBadInput) {
  Eigen::MatrixXd X(2, 1);
  X << 0, 1;
  Eigen::VectorXd y(3);
  y << 0, 1, 2;
  EXPECT_THROW(GpSurrogate::condition(Iso(KernelFamily::kMatern32, 1), X, y), ContractError);
  Eigen::MatrixXd Q(1, 2);
  Q << 0, 0;
  const auto gp = GpSurrogate::condition(Iso(KernelFamily::kMatern32, 1), X, y.head(2));
  EXPECT_THROW(gp.predict_mean(Q), ContractError);
}

TEST(Gp, DuplicateInputsStillFactorize) {
  Eigen::MatrixXd X(3, 1);
  X << 0.5, 0.5, 0.9;
  Eigen::VectorXd y(3);
  y << 1.0, 1.0, 2.0;
  KernelSpec k = Iso(KernelFamily::kGaussian, 1, 1.0);
  k.nugget = 0.0;
  const auto gp = GpSurrogate::condition(k, X, y);
  EXPECT_GE(gp.kernel().nugget, 0.0);
  EXPECT_LE(gp.kernel().nugget, 1e-4);
  Eigen::MatrixXd Q(1, 1);
  Q << 0.5;
  EXPECT_TRUE(gp.predict_mean(Q).allFinite());
}

TEST(FeatureEncoder, HierarchicalLayout) {
  const auto fig = testing::FigureASpace();
  const FeatureEncoder enc(fig);
  // k, algorithm(2), eta, nrounds, C, kernel(2), sigma + 5 activity columns.
  EXPECT_EQ(enc.width(), 9u + 5u);
  const Config xgb = fig.make_config({{"k", 2}, {"algorithm", "xgboost"}, {"eta", 0.01},
                                      {"nrounds", 100}});
  const Eigen::VectorXd row = enc.encode(xgb);
  EXPECT_EQ(row[0], 2.0);
  EXPECT_EQ(row[1], 0.0);
  EXPECT_EQ(row[2], 1.0);
  EXPECT_NEAR(row[3], -2.0, 1e-12);  // log10(0.01)
  EXPECT_NEAR(row[4], 2.0, 1e-12);   // log10(100)
  EXPECT_NEAR(row[5], 0.0, 1e-12);   // inactive C imputed at mid of [-2, 2]
  EXPECT_EQ(row[6], 0.0);            // inactive kernel: empty one-hot
  EXPECT_EQ(row[7], 0.0);
  EXPECT_NEAR(row[8], -1.5, 1e-12);  // inactive sigma imputed at mid of [-3, 0]
  EXPECT_EQ(row.tail(5), (Eigen::VectorXd(5) << 1, 1, 0, 0, 0).finished());
}

TEST(KernelSpec, JsonRoundTrip) {
  KernelSpec k = Iso(KernelFamily::kGaussian, 3, 0.7, 1.3);
  k.nugget = 1e-6;
  const auto back = KernelSpec::from_json(k.to_json());
  EXPECT_EQ(back.family, k.family);
  EXPECT_EQ(back.lengthscales, k.lengthscales);
  EXPECT_EQ(back.signal_variance, k.signal_variance);
  EXPECT_EQ(back.nugget, k.nugget);
  EXPECT_THROW(parse_kernel_family("rq"), ContractError);
}

}  // namespace
}  // namespace bopdp
