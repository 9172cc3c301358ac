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

// Experiment orchestration: replicated BO runs, PDPs, partitions and scores,
// written as deterministic CSV / JSON artifacts. Also hosts the CLI entry.

#ifndef BOPDP_HARNESS_HPP_
#define BOPDP_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bopdp/effects.hpp"
#include "bopdp/metrics.hpp"
#include "bopdp/objective.hpp"
#include "bopdp/optimizer.hpp"
#include "bopdp/partition.hpp"
#include "json.hpp"

namespace bopdp {

// Describes how to rebuild an objective; stored inside run archives.
struct ObjectiveSpec {
  std::string kind = "styblinski_tang";  // or "table"
  std::size_t d = 3;
  StyblinskiTangVariant variant = StyblinskiTangVariant::kStandard;
  std::string table_path;  // kind == "table"
  std::string space_path;  // kind == "table"
  std::size_t neighbours = 5;

  nlohmann::json to_json() const;
  // Relative paths are resolved against `base_dir`.
  static ObjectiveSpec from_json(const nlohmann::json& j,
                                 const std::string& base_dir = "");
};

Objective make_objective(const ObjectiveSpec& spec);

// Default BO budget for a dimension: 80 / 150 / 250 for d = 3 / 5 / 8.
std::size_t default_budget(std::size_t d);

// "high" (0.1), "medium" (1 or 2), "low" (5); otherwise the number itself.
std::string tau_label(double tau);

struct ExperimentSpec {
  ObjectiveSpec objective;
  std::vector<double> taus = {0.1, 2.0, 5.0};
  std::size_t budget = 0;            // 0: default_budget(d)
  std::size_t init_design_size = 0;  // 0: 4 d
  std::size_t replications = 10;
  std::string param = "";            // PDP parameter; empty: the first one
  SplitCriterion criterion = SplitCriterion::kL2;
  std::size_t max_splits = 3;
  std::vector<std::size_t> checkpoints;  // empty: 0..max_splits
  std::size_t min_node_size = 10;
  VarianceEstimator estimator = VarianceEstimator::kDiag;
  std::size_t grid_size = 20;
  std::size_t n_mc = 1000;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> init_design_seed;  // default derived from seed
  KernelFamily kernel = KernelFamily::kMatern32;
  IncumbentRule incumbent = IncumbentRule::kSurrogate;
  std::size_t n_candidates = 0;
  int fit_restarts = 10;
  std::size_t workers = 0;  // 0: hardware concurrency
  bool save_archives = true;
  std::string out_dir;

  void validate() const;
  std::size_t effective_budget() const;
  std::size_t effective_init_design() const;
  std::vector<std::size_t> effective_checkpoints() const;
  nlohmann::json to_json() const;
  static ExperimentSpec from_json(const nlohmann::json& j,
                                  const std::string& base_dir = "");
  static ExperimentSpec load(const std::string& path);
};

// Uniform Monte Carlo rows (snapped) on which parameter s is active.
std::vector<Config> mc_sample(const SearchSpace& space, std::size_t s, std::size_t n,
                              std::uint64_t seed);

// Scores of one member set at one split-count checkpoint.
struct CheckpointResult {
  std::size_t splits = 0;
  std::size_t leaf_size = 0;
  PdpScore leaf;
  ImprovementReport leaf_delta;
  PdpScore baseline;
  ImprovementReport baseline_delta;
};

struct ReplicationResult {
  double tau = 0.0;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double mmd = 0.0;
  PdpScore global;
  std::vector<CheckpointResult> checkpoints;
  double wall_seconds = 0.0;
  std::optional<RunArchive> archive;
};

struct StudyResult {
  ExperimentSpec spec;
  std::vector<ReplicationResult> replications;  // tau-major, then replication
};

// One replication: BO, global PDP, MMD, tree, leaf and baseline scores.
ReplicationResult run_replication(const ExperimentSpec& spec, double tau,
                                  std::size_t replication);

// All (tau, replication) pairs on a worker pool; order is deterministic.
StudyResult run_replications(const ExperimentSpec& spec);

// results.csv (+ aggregate rows), timings.csv and archives under out_dir.
StudyResult run_synthetic_study(const ExperimentSpec& spec);
// Same pipeline; writes baseline.csv with paired tree / L1-baseline deltas.
StudyResult run_baseline_compare(const ExperimentSpec& spec);

std::string results_csv(const StudyResult& study);
std::string baseline_csv(const StudyResult& study);
std::string timings_csv(const StudyResult& study);

struct MisspecSpec {
  std::size_t d = 3;
  std::size_t replications = 20;
  std::size_t n_train = 30;
  std::size_t n_mc = 1000;
  std::size_t n_truth = 100000;
  std::size_t grid_size = 20;
  std::uint64_t seed = 1;
  int fit_restarts = 10;
  std::string out_dir;

  nlohmann::json to_json() const;
  static MisspecSpec from_json(const nlohmann::json& j,
                               const std::string& base_dir = "");
};

struct MisspecReplication {
  std::size_t replication = 0;
  bool ok = false;
  std::string error;
  // [kernel][estimator]: kernel 0 = matern32 (correct), 1 = gaussian;
  // estimator 0 = full covariance, 1 = diagonal.
  double nll[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
};

struct MisspecResult {
  MisspecSpec spec;
  std::vector<MisspecReplication> replications;
};

MisspecReplication run_misspec_replication(const MisspecSpec& spec,
                                           std::size_t replication);
MisspecResult run_misspec_study(const MisspecSpec& spec);
std::string misspec_csv(const MisspecResult& result);

// Writes manifest.json listing `files` (relative to dir) with SHA-256.
void write_manifest(const std::string& dir, const std::vector<std::string>& files);

// Sample mean and (n - 1) standard deviation; sd is empty for n < 2.
struct MeanSd {
  double mean = 0.0;
  std::optional<double> sd;
  std::size_t n = 0;
};
MeanSd mean_sd(const std::vector<double>& values);

// Command-line entry point; returns the process exit status.
int cli(int argc, const char* const* argv);

}  // namespace bopdp

#endif  // BOPDP_HARNESS_HPP_
