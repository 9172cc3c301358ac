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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bopdp/errors.hpp"
#include "bopdp/harness.hpp"
#include "test_util.hpp"

namespace bopdp {
namespace {

namespace fs = std::filesystem;

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> ParseCsv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::size_t Column(const std::vector<std::string>& header, const std::string& name) {
  return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
}

class HarnessTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("bopdp_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  nlohmann::json SmallSpec() const {
    return {{"objective", {{"kind", "styblinski_tang"}, {"d", 2}}},
            {"taus", {0.1, 5.0}},
            {"budget", 11},
            {"init_design_size", 8},
            {"replications", 2},
            {"param", "x1"},
            {"max_splits", 2},
            {"min_node_size", 5},
            {"grid_size", 5},
            {"n_mc", 60},
            {"n_candidates", 100},
            {"fit_restarts", 2},
            {"workers", 2},
            {"seed", 3},
            {"out", (dir_ / "out").string()}};
  }

  std::string WriteJson(const std::string& name, const nlohmann::json& j) const {
    const auto p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p.string();
  }

  static int Run(std::vector<std::string> args) {
    args.insert(args.begin(), "bopdp");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli(static_cast<int>(argv.size()), argv.data());
  }

  fs::path dir_;
};

TEST_F(HarnessTest, SyntheticStudyIsByteIdenticalAcrossRuns) {
  auto spec = SmallSpec();
  const auto cfg = WriteJson("spec.json", spec);
  ASSERT_EQ(Run({"bench", "synthetic", "--config", cfg, "--out", (dir_ / "a").string()}), 0);
  ASSERT_EQ(Run({"bench", "synthetic", "--config", cfg, "--out", (dir_ / "b").string(),
                 "--workers", "1"}),
            0);
  const auto a = Slurp(dir_ / "a" / "results.csv");
  EXPECT_EQ(a, Slurp(dir_ / "b" / "results.csv"));
  EXPECT_EQ(Slurp(dir_ / "a" / "manifest.json"), Slurp(dir_ / "b" / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir_ / "a" / "archives" / "tau0.1_rep0.json"));
  EXPECT_TRUE(fs::exists(dir_ / "a" / "experiment.json"));

  const auto rows = ParseCsv(a);
  const auto& h = rows.front();
  for (const char* col : {"d", "tau", "tau_label", "replication", "status", "mmd", "splits",
                          "leaf_size", "mc", "oc", "nll", "delta_mc", "delta_oc", "delta_nll"}) {
    EXPECT_LT(Column(h, col), h.size()) << col;
  }
  std::size_t ok = 0;
  for (const auto& r : rows) ok += r[Column(h, "status")] == "ok";
  // 2 taus x 2 replications x 3 checkpoints.
  EXPECT_EQ(ok, 12u);
  EXPECT_NE(a.find(",high,"), std::string::npos);
  EXPECT_NE(a.find(",low,"), std::string::npos);
}

TEST_F(HarnessTest, NoSplitsMeansNoImprovement) {
  auto j = SmallSpec();
  j["replications"] = 1;
  j["taus"] = {2.0};
  j["max_splits"] = 0;
  const auto study = run_synthetic_study(ExperimentSpec::from_json(j));
  ASSERT_EQ(study.replications.size(), 1u);
  const auto& rep = study.replications[0];
  ASSERT_TRUE(rep.ok) << rep.error;
  ASSERT_EQ(rep.checkpoints.size(), 1u);
  const auto& cp = rep.checkpoints[0];
  EXPECT_EQ(cp.leaf_size, 60u);
  EXPECT_EQ(*cp.leaf_delta.delta_mc, 0.0);
  EXPECT_EQ(*cp.leaf_delta.delta_oc, 0.0);
  EXPECT_EQ(*cp.leaf_delta.delta_nll, 0.0);
  EXPECT_EQ(*cp.baseline_delta.delta_mc, 0.0);
  EXPECT_EQ(cp.baseline.mean_nll, rep.global.mean_nll);
  EXPECT_GE(rep.mmd, 0.0);
}

TEST_F(HarnessTest, BaselineCompareWritesPairedDeltas) {
  auto j = SmallSpec();
  j["replications"] = 1;
  j["taus"] = {2.0};
  j["max_splits"] = 1;
  const auto study = run_baseline_compare(ExperimentSpec::from_json(j));
  const auto csv = Slurp(dir_ / "out" / "baseline.csv");
  const auto rows = ParseCsv(csv);
  ASSERT_GE(rows.size(), 3u);
  const auto& rep = study.replications[0];
  ASSERT_TRUE(rep.ok) << rep.error;
  for (const auto& cp : rep.checkpoints) {
    if (cp.splits == 0) {
      EXPECT_EQ(cp.leaf.mean_nll, cp.baseline.mean_nll);
      EXPECT_EQ(cp.leaf.mc, cp.baseline.mc);
    }
    EXPECT_EQ(cp.splits == 0 ? 60u : cp.leaf_size, cp.leaf_size);
  }
  j["max_splits"] = 0;
  EXPECT_THROW(run_baseline_compare(ExperimentSpec::from_json(j)), ContractError);
}

TEST_F(HarnessTest, FailedReplicationsAreIsolated) {
  ExperimentSpec spec = ExperimentSpec::from_json(SmallSpec());
  spec.taus = {2.0};
  spec.param = "x9";  // unknown to the objective, so each replication fails
  const auto study = run_replications(spec);
  ASSERT_EQ(study.replications.size(), 2u);
  const auto rows = ParseCsv(results_csv(study));
  ASSERT_FALSE(rows.empty());
  const auto status = Column(rows.front(), "status");
  const auto rep = Column(rows.front(), "replication");
  std::size_t failed = 0;
  for (const auto& r : rows) {
    failed += r[status] == "failed" && r[rep] != "mean" && r[rep] != "sd";
  }
  EXPECT_EQ(failed, 2u);
  auto j = SmallSpec();
  j["param"] = "x9";
  EXPECT_EQ(Run({"bench", "synthetic", "--config", WriteJson("bad.json", j)}), 2);
  EXPECT_NE(Slurp(dir_ / "out" / "results.csv").find(",0,failed,"), std::string::npos);
}

TEST_F(HarnessTest, MissingTableIsAUsageError) {
  auto j = SmallSpec();
  j["objective"] = {{"kind", "table"}, {"table", "missing.csv"}, {"space", "missing.json"}};
  j["param"] = "";
  EXPECT_EQ(Run({"bench", "synthetic", "--config", WriteJson("bad.json", j)}), 1);
}

TEST_F(HarnessTest, OneFailingReplicationDoesNotStopOthers) {
  ExperimentSpec spec = ExperimentSpec::from_json(SmallSpec());
  spec.taus = {2.0};
  spec.replications = 1;
  const auto good = run_replication(spec, 2.0, 0);
  EXPECT_TRUE(good.ok) << good.error;
  spec.grid_size = 1;  // rejected by make_grid inside the replication
  const auto bad = run_replication(spec, 2.0, 0);
  EXPECT_FALSE(bad.ok);
  EXPECT_FALSE(bad.error.empty());
}

TEST_F(HarnessTest, MisspecSingleReplicationHasNoSd) {
  MisspecSpec spec;
  spec.replications = 1;
  spec.n_mc = 50;
  spec.n_truth = 2000;
  spec.grid_size = 5;
  spec.fit_restarts = 2;
  spec.out_dir = (dir_ / "mis").string();
  const auto result = run_misspec_study(spec);
  ASSERT_EQ(result.replications.size(), 1u);
  ASSERT_TRUE(result.replications[0].ok) << result.replications[0].error;
  const auto csv = misspec_csv(result);
  EXPECT_NE(csv.find("n/a"), std::string::npos);
  EXPECT_EQ(csv, Slurp(dir_ / "mis" / "misspec.csv"));
  for (auto& k : result.replications[0].nll) {
    for (double v : k) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST_F(HarnessTest, ManifestHashes) {
  std::ofstream(dir_ / "abc.txt") << "abc";
  write_manifest(dir_.string(), {"abc.txt"});
  const auto m = nlohmann::json::parse(Slurp(dir_ / "manifest.json"));
  const auto& a = m.at("artifacts").at(0);
  EXPECT_EQ(a.at("path"), "abc.txt");
  EXPECT_EQ(a.at("bytes"), 3);
  EXPECT_EQ(a.at("sha256"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_F(HarnessTest, CliPdpPartitionAndScore) {
  const auto archive = (dir_ / "run.json").string();
  ASSERT_EQ(Run({"optimize", "--d", "2", "--tau", "2", "--budget", "12", "--seed", "4",
                 "--out", archive}),
            0);
  const auto csv_path = (dir_ / "global.csv").string();
  ASSERT_EQ(Run({"pdp", "--archive", archive, "--param", "0", "--splits", "0", "--grid", "6",
                 "--n-mc", "80", "--out", csv_path}),
            0);
  const auto rows = ParseCsv(Slurp(csv_path));
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0][0], "grid_value");
  EXPECT_EQ(rows[1][0], "-5");
  EXPECT_EQ(rows[6][0], "5");

  const auto part = dir_ / "part";
  ASSERT_EQ(Run({"partition", "--archive", archive, "--param", "x1", "--splits", "6", "--n-mc",
                 "120", "--min-node", "10", "--out", part.string()}),
            0);
  const auto tree = nlohmann::json::parse(Slurp(part / "tree.json"));
  EXPECT_LE(tree.at("n_splits").get<int>(), 6);
  std::size_t leaf_files = 0;
  for (const auto& node : tree.at("nodes")) {
    if (!node.contains("pdp_file")) continue;
    ++leaf_files;
    EXPECT_TRUE(fs::exists(part / node.at("pdp_file").get<std::string>()));
  }
  EXPECT_EQ(leaf_files, tree.at("n_splits").get<std::size_t>() + 1);
  EXPECT_TRUE(fs::exists(part / "leaves.csv"));
  EXPECT_TRUE(fs::exists(part / "manifest.json"));

  const auto score_path = (dir_ / "score.csv").string();
  ASSERT_EQ(Run({"score", "--archive", archive, "--splits", "2", "--n-mc", "80", "--out",
                 score_path}),
            0);
  EXPECT_GE(ParseCsv(Slurp(score_path)).size(), 2u);
}

TEST_F(HarnessTest, CliUsageErrors) {
  EXPECT_EQ(Run({"pdp", "--bogus"}), 1);
  EXPECT_EQ(Run({"pdp", "--archive", (dir_ / "none.json").string()}), 1);
  EXPECT_EQ(Run({"--help"}), 0);
}

TEST(HarnessHelpers, SmallUtilities) {
  const auto ms = mean_sd({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(ms.mean, 2.5);
  EXPECT_NEAR(*ms.sd, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_FALSE(mean_sd({7}).sd.has_value());
  EXPECT_EQ(tau_label(0.1), "high");
  EXPECT_EQ(tau_label(2.0), "medium");
  EXPECT_EQ(tau_label(5.0), "low");
  EXPECT_EQ(default_budget(3), 80u);
  EXPECT_EQ(default_budget(5), 150u);
  EXPECT_EQ(default_budget(8), 250u);
}

TEST(HarnessHelpers, BundledConfigsLoad) {
  const auto st3 = ExperimentSpec::load(std::string(BOPDP_SOURCE_DIR) + "/configs/st3.json");
  EXPECT_EQ(st3.objective.d, 3u);
  EXPECT_EQ(st3.effective_budget(), 80u);
  EXPECT_EQ(st3.effective_init_design(), 12u);
  EXPECT_EQ(st3.effective_checkpoints(), (std::vector<std::size_t>{0, 1, 3}));
  EXPECT_TRUE(fs::path(st3.out_dir).is_absolute());
  const auto back = ExperimentSpec::from_json(st3.to_json());
  EXPECT_EQ(back.to_json(), st3.to_json());
  EXPECT_THROW(ExperimentSpec::from_json({{"criterion", "gini"}}), ContractError);
}

TEST(HarnessHelpers, McSampleKeepsActiveRows) {
  const auto fig = testing::FigureASpace();
  const auto rows = mc_sample(fig, fig.index_of("sigma"), 200, 5);
  EXPECT_FALSE(rows.empty());
  EXPECT_LT(rows.size(), 200u);
  for (const auto& c : rows) EXPECT_TRUE(c.active(fig.index_of("sigma")));
  EXPECT_EQ(rows, mc_sample(fig, fig.index_of("sigma"), 200, 5));
}

}  // namespace
}  // namespace bopdp
