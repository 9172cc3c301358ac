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
#include <numbers>
#include <random>

#include "bopdp/errors.hpp"
#include "bopdp/metrics.hpp"
#include "test_util.hpp"

namespace bopdp {
namespace {

Eigen::MatrixXd Uniform(std::size_t n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), 1);
  for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, 0) = u(rng);
  return m;
}

PdpEstimate Estimate(std::vector<double> mean, std::vector<double> var,
                     std::vector<double> grid) {
  PdpEstimate e;
  e.grid.points = std::move(grid);
  e.mean = Eigen::Map<Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  e.variance = Eigen::Map<Eigen::VectorXd>(var.data(), static_cast<Eigen::Index>(var.size()));
  return e;
}

TEST(Mmd, HandEvaluatedThreeTerms) {
  Eigen::MatrixXd X(2, 1);
  X << 0, 1;
  const double k01 = std::exp(-0.5);
  const double expected = k01 + k01 - 0.5 * (2 + 2 * k01);
  EXPECT_NEAR(mmd2(X, X, 1.0), expected, 1e-15);
  EXPECT_NEAR(mmd2(X, X, 1.0), -0.3935, 1e-4);
}

TEST(Mmd, SameDistributionIsNearZero) {
  int small = 0;
  for (std::uint64_t t = 0; t < 10; ++t) {
    if (std::abs(mmd2(Uniform(200, 0, 1, 2 * t), Uniform(200, 0, 1, 2 * t + 1))) < 0.02) ++small;
  }
  EXPECT_GE(small, 9);
}

TEST(Mmd, ShiftedDistributionIsLarge) {
  EXPECT_GT(mmd2(Uniform(300, 0, 1, 1), Uniform(300, 0.8, 1, 2)), 0.1);
}

TEST(Mmd, SymmetricAndMedianHeuristic) {
  const auto X = Uniform(40, 0, 1, 3);
  const auto Y = Uniform(30, 0.2, 1.4, 4);
  EXPECT_NEAR(mmd2(X, Y), mmd2(Y, X), 1e-14);
  Eigen::MatrixXd P(3, 1);
  P << 0, 1, 3;
  EXPECT_DOUBLE_EQ(median_pairwise_distance(P), 2.0);
  Eigen::MatrixXd pooled(70, 1);
  pooled << X, Y;
  EXPECT_NEAR(mmd2(X, Y), mmd2(X, Y, median_pairwise_distance(pooled)), 1e-14);
}

TEST(Mmd, UnitCoordinates) {
  const auto fig = testing::FigureASpace();
  const Config c = fig.make_config({{"k", 10}, {"algorithm", "xgboost"}, {"eta", 0.001},
                                    {"nrounds", 100}});
  const Eigen::MatrixXd u = unit_coordinates(fig, std::vector<Config>{c});
  EXPECT_DOUBLE_EQ(u(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(u(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(u(0, 2), 0.0);
  EXPECT_NEAR(u(0, 3), 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(u(0, 4), 0.5);
  EXPECT_DOUBLE_EQ(u(0, 6), 0.5);
}

TEST(Nll, StandardNormalValues) {
  const double base = 0.5 * std::log(2 * std::numbers::pi);
  EXPECT_NEAR(nll_point(2.0, 2.0, 1.0), base, 1e-15);
  EXPECT_NEAR(nll_point(2.0, 2.0, 1.0), 0.9189, 1e-4);
  EXPECT_NEAR(nll_point(3.0, 2.0, 1.0), 1.4189, 1e-4);
  EXPECT_NEAR(nll_point(3.0, 2.0, 0.25), 2.2258, 1e-4);
  EXPECT_TRUE(std::isfinite(nll_point(1.0, 0.0, 0.0)));
}

TEST(Nll, MinimizedAtSquaredError) {
  // For error e the NLL in v is minimized at v = e^2.
  const double e = std::exp(1.0);
  const double at = nll_point(e, 0.0, e * e);
  for (double f : {0.5, 0.9, 0.99, 1.01, 1.1, 2.0}) {
    EXPECT_LT(at, nll_point(e, 0.0, f * e * e));
  }
}

TEST(Nll, MonotoneInVarianceAtZeroError) {
  double prev = nll_point(0.0, 0.0, 1.0 / (2 * std::numbers::pi));
  for (double v = 0.2; v < 10.0; v += 0.3) {
    const double cur = nll_point(0.0, 0.0, v);
    EXPECT_GT(cur, prev);
    prev = cur;
  }
}

TEST(Nll, AveragesAndChecksTheGrid) {
  const auto pdp = Estimate({2, 2}, {1, 1}, {0, 1});
  TrueMarginal truth;
  truth.grid.points = {0, 1};
  truth.values = {2, 3};
  const auto r = nll(pdp, truth);
  EXPECT_NEAR(r.mean, 0.5 * (0.9189385 + 1.4189385), 1e-6);
  truth.grid.points = {0, 2};
  EXPECT_THROW(nll(pdp, truth), ContractError);
}

TEST(Confidence, Examples) {
  const auto space = testing::BoxSpace(1, 0, 3);
  const auto flat = Estimate({0, 0, 0, 0}, {4, 4, 4, 4}, {0, 1, 2, 3});
  const auto c = confidence(flat, space, 1.3);
  EXPECT_DOUBLE_EQ(c.mc, 2.0);
  EXPECT_DOUBLE_EQ(c.oc, 2.0);

  const auto zero = confidence(Estimate({0, 0}, {0, 0}, {0, 3}), space, 1.0);
  EXPECT_EQ(zero.mc, 0.0);
  EXPECT_EQ(zero.oc, 0.0);

  const auto ramp = Estimate({0, 0, 0, 0}, {1, 4, 9, 16}, {0, 1, 2, 3});
  EXPECT_DOUBLE_EQ(confidence(ramp, space, 1.5).oc, 2.0);
  EXPECT_DOUBLE_EQ(confidence(ramp, space, 1.51).oc, 3.0);
  EXPECT_DOUBLE_EQ(confidence(ramp, space, 0.0).mc, 2.5);
}

TEST(Confidence, LogScaleDistances) {
  const SearchSpace space({ParamDef::Continuous("lr", 1e-4, 1e-1, true)});
  const auto est = Estimate({0, 0, 0, 0}, {1, 4, 9, 16}, {1e-4, 1e-3, 1e-2, 1e-1});
  // 0.004 is nearer 1e-2 in log10 although nearer 1e-3 natively.
  EXPECT_DOUBLE_EQ(confidence(est, space, 0.004).oc, 3.0);
}

TEST(Confidence, InvariantToRowOrder) {
  const auto space = testing::BoxSpace(2);
  const auto sample = sample_uniform(space, 6, 1);
  Eigen::MatrixXd var = Eigen::MatrixXd::Random(6, 4).cwiseAbs();
  const auto b = testing::HandBundle(0, sample, Eigen::MatrixXd::Zero(6, 4), var);
  const std::vector<std::size_t> fwd{0, 1, 2, 3, 4, 5};
  const std::vector<std::size_t> rev{5, 3, 1, 4, 2, 0};
  const auto a = confidence(pdp(b, fwd), space, 0.4);
  const auto r = confidence(pdp(b, rev), space, 0.4);
  EXPECT_NEAR(a.mc, r.mc, 1e-14);
  EXPECT_NEAR(a.oc, r.oc, 1e-14);
}

TEST(Improvement, Examples) {
  PdpScore g;
  g.mc = 2;
  g.oc = 1;
  g.mean_nll = 4;
  const auto same = improvement(g, g);
  EXPECT_EQ(*same.delta_mc, 0.0);
  EXPECT_EQ(*same.delta_oc, 0.0);
  EXPECT_EQ(*same.delta_nll, 0.0);
  PdpScore s = g;
  s.mc = 1;
  s.mean_nll = 5;
  const auto d = improvement(g, s);
  EXPECT_DOUBLE_EQ(*d.delta_mc, 50.0);
  EXPECT_DOUBLE_EQ(*d.delta_nll, -25.0);
  EXPECT_DOUBLE_EQ(*relative_improvement(-2.0, -3.0), 50.0);
  EXPECT_FALSE(relative_improvement(0.0, 1.0).has_value());
  EXPECT_FALSE(relative_improvement(1.0, std::nan("")).has_value());
}

}  // namespace
}  // namespace bopdp
