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

#include "bopdp/errors.hpp"
#include "bopdp/space.hpp"
#include "test_util.hpp"

namespace bopdp {
namespace {

using testing::FigureASpace;

TEST(SampleUniform, FixedSeedIsRepeatable) {
  const SearchSpace space({ParamDef::Continuous("a", 0, 1)});
  const auto a = sample_uniform(space, 3, 42);
  const auto b = sample_uniform(space, 3, 42);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a, b);
  for (const auto& c : a) {
    EXPECT_GE(c.at(0), 0.0);
    EXPECT_LE(c.at(0), 1.0);
  }
}

TEST(SampleUniform, MeansMatchDirectSampling) {
  const auto space = testing::BoxSpace(2, -5, 5);
  const auto sample = sample_uniform(space, 10000, 7);
  for (std::size_t j = 0; j < 2; ++j) {
    double sum = 0.0;
    for (const auto& c : sample) sum += c.at(j);
    EXPECT_NEAR(sum / 10000.0, 0.0, 0.15);
  }
}

TEST(SampleUniform, LogScaleIsUniformInExponent) {
  const SearchSpace space({ParamDef::Continuous("lr", 1e-4, 1e-1, true)});
  const auto sample = sample_uniform(space, 20000, 3);
  std::size_t below = 0;
  for (const auto& c : sample) below += c.at(0) < 1e-3 ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(below) / 20000.0, 1.0 / 3.0, 0.02);
}

TEST(SampleUniform, FigureAChildrenFollowTheirParent) {
  const auto space = FigureASpace();
  const auto sample = sample_uniform(space, 500, 11);
  const std::size_t algo = space.index_of("algorithm");
  std::size_t svm = 0;
  for (const auto& c : sample) {
    EXPECT_TRUE(is_valid(space, c));
    if (c.at(algo) == 0.0) {
      ++svm;
      EXPECT_FALSE(c.active(space.index_of("eta")));
      EXPECT_FALSE(c.active(space.index_of("nrounds")));
      EXPECT_TRUE(c.active(space.index_of("C")));
      EXPECT_EQ(c.active(space.index_of("sigma")), c.at(space.index_of("kernel")) == 1.0);
    } else {
      EXPECT_FALSE(c.active(space.index_of("C")));
      EXPECT_FALSE(c.active(space.index_of("kernel")));
      EXPECT_FALSE(c.active(space.index_of("sigma")));
    }
  }
  EXPECT_GT(svm, 150u);
  EXPECT_LT(svm, 350u);
}

TEST(IsValid, FigureARows) {
  const auto space = FigureASpace();
  Config xgb = space.make_config({{"k", 2}, {"algorithm", "xgboost"}, {"eta", 0.01},
                                  {"nrounds", 100}});
  EXPECT_TRUE(is_valid(space, xgb));
  xgb.values[space.index_of("C")] = 1.0;
  EXPECT_FALSE(is_valid(space, xgb));
  const Config svm = space.make_config(
      {{"k", 3}, {"algorithm", "svm"}, {"C", 10}, {"kernel", "rbf"}, {"sigma", 0.2}});
  EXPECT_TRUE(is_valid(space, svm));
  const Config svm_missing_sigma =
      space.make_config({{"k", 3}, {"algorithm", "svm"}, {"C", 10}, {"kernel", "rbf"}});
  EXPECT_FALSE(is_valid(space, svm_missing_sigma));
}

TEST(IsValid, ClosedBoundsAndSizeMismatch) {
  const auto space = testing::BoxSpace(2, -5, 5);
  EXPECT_TRUE(is_valid(space, Config({5.0, -5.0})));
  EXPECT_FALSE(is_valid(space, Config({5.0000001, 0.0})));
  EXPECT_THROW(is_valid(space, Config({0.0})), ContractError);
}

TEST(MakeGrid, Examples) {
  const auto space = testing::BoxSpace(1, -5, 5);
  EXPECT_EQ(make_grid(space, 0, 3).points, (std::vector<double>{-5, 0, 5}));

  const SearchSpace lr({ParamDef::Continuous("lr", 1e-4, 1e-1, true)});
  const auto g = make_grid(lr, 0, 4).points;
  ASSERT_EQ(g.size(), 4u);
  const double expected[] = {1e-4, 1e-3, 1e-2, 1e-1};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(g[i], expected[i], 1e-12 * expected[i] + 1e-18);
  EXPECT_EQ(g.front(), 1e-4);
  EXPECT_EQ(g.back(), 1e-1);

  const auto fig = FigureASpace();
  const auto kernel = make_grid(fig, fig.index_of("kernel"), 20);
  EXPECT_EQ(kernel.points, (std::vector<double>{0, 1}));
}

TEST(MakeGrid, IntegerGridsAreRoundedAndUnique) {
  const SearchSpace space({ParamDef::Integer("layers", 1, 5)});
  EXPECT_EQ(make_grid(space, 0, 20).points, (std::vector<double>{1, 2, 3, 4, 5}));
  EXPECT_THROW(make_grid(space, 0, 1), ContractError);
  EXPECT_THROW(make_grid(space, 3, 5), ContractError);
}

TEST(SubsetActive, Examples) {
  const auto flat = testing::BoxSpace(2);
  const auto configs = sample_uniform(flat, 5, 1);
  EXPECT_EQ(subset_active(flat, configs, 1), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_TRUE(subset_active(flat, std::vector<Config>{}, 0).empty());

  const auto fig = FigureASpace();
  const auto sample = sample_uniform(fig, 200, 5);
  const auto rows = subset_active(fig, sample, fig.index_of("nrounds"));
  std::vector<std::size_t> xgb;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (sample[i].at(fig.index_of("algorithm")) == 1.0) xgb.push_back(i);
  }
  EXPECT_EQ(rows, xgb);
}

TEST(SearchSpace, JsonRoundTripAndBundledFile) {
  const auto fig = FigureASpace();
  EXPECT_EQ(SearchSpace::from_json(fig.to_json()).to_json(), fig.to_json());
  EXPECT_EQ(SearchSpace::load(testing::DataPath("figure_a_space.json")).to_json(),
            fig.to_json());
  const auto lcb = SearchSpace::load(testing::DataPath("lcbench_space.json"));
  EXPECT_EQ(lcb.size(), 7u);
  EXPECT_TRUE(lcb.param(lcb.index_of("learning_rate")).log_scale);
}

TEST(SearchSpace, RejectsBadDefinitions) {
  EXPECT_THROW(SearchSpace({ParamDef::Continuous("a", 1, 0)}), ContractError);
  EXPECT_THROW(SearchSpace({ParamDef::Continuous("a", 0, 1),
                            ParamDef::Continuous("a", 0, 1)}),
               ContractError);
  EXPECT_THROW(SearchSpace({ParamDef::Continuous("a", 0, 1).When("b", {"x"})}),
               ContractError);
  EXPECT_THROW(SearchSpace({ParamDef::Categorical("a", {"x", "y"}).When("b", {"x"}),
                            ParamDef::Categorical("b", {"x", "y"}).When("a", {"x"})}),
               ContractError);
  EXPECT_THROW(FigureASpace().index_of("nope"), ContractError);
}

TEST(SearchSpace, SnapRoundsIntegersAndClamps) {
  const SearchSpace space({ParamDef::Integer("n", 1, 5), ParamDef::Continuous("x", 0, 1)});
  const Config c = space.snap(Config({2.6, 1.7}));
  EXPECT_EQ(c.at(0), 3.0);
  EXPECT_EQ(c.at(1), 1.0);
}

TEST(SearchSpace, ConfigJsonUsesLabels) {
  const auto fig = FigureASpace();
  const Config c = fig.make_config({{"k", 2}, {"algorithm", "xgboost"}, {"eta", 0.01},
                                    {"nrounds", 100}});
  const auto j = fig.config_to_json(c);
  EXPECT_EQ(j.at("algorithm"), "xgboost");
  EXPECT_TRUE(j.at("C").is_null());
  EXPECT_EQ(fig.make_config(j), c);
  EXPECT_THROW(fig.make_config({{"algorithm", "lasso"}}), ContractError);
}

TEST(MixSeed, StreamsDiffer) {
  EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
  EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
  EXPECT_EQ(mix_seed(5, 9), mix_seed(5, 9));
}

}  // namespace
}  // namespace bopdp
