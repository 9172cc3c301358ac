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

// Command-line front end: optimize, pdp, partition, score and bench.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <utility>

#include "CLI11.hpp"
#include "bopdp/errors.hpp"
#include "bopdp/format.hpp"
#include "bopdp/harness.hpp"

namespace bopdp {

namespace {

namespace fs = std::filesystem;

struct Common {
  std::string config;
  std::string archive;
  std::string param;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string estimator;
  std::string criterion;
  std::optional<std::size_t> splits;
  std::string incumbent;
  std::size_t grid_size = 20;
  std::size_t n_mc = 1000;
  std::size_t min_node_size = 10;
  double alpha = 0.05;
};

void Emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    const auto parent = fs::path(out).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    WriteFile(out, text);
  }
}

RunArchive LoadArchive(const std::string& path) {
  if (path.empty()) throw ContractError("--archive is required");
  try {
    return RunArchive::from_json(nlohmann::json::parse(ReadFile(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ContractError("cannot read archive " + path + ": " + e.what());
  }
}

std::size_t ResolveParam(const SearchSpace& space, const std::string& text) {
  if (text.empty()) return 0;
  if (std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    const std::size_t i = std::stoul(text);
    if (i >= space.size()) throw ContractError("--param index out of range");
    return i;
  }
  return space.index_of(text);
}

// Everything the archive-based subcommands share.
struct Analysis {
  RunArchive archive;
  std::size_t s = 0;
  VarianceEstimator estimator = VarianceEstimator::kDiag;
  IceBundle bundle;
  PdpEstimate global;
};

Analysis Analyze(const Common& o) {
  Analysis a;
  a.archive = LoadArchive(o.archive);
  const auto& space = a.archive.space;
  a.s = ResolveParam(space, o.param);
  a.estimator = o.estimator.empty() ? VarianceEstimator::kDiag : parse_estimator(o.estimator);
  IceOptions ice_opts;
  ice_opts.mode = a.estimator == VarianceEstimator::kFullCov ? IceMode::kWithJoint
                                                             : IceMode::kDiagOnly;
  ice_opts.max_joint_n = std::max(ice_opts.max_joint_n, o.n_mc);
  const std::uint64_t seed = o.seed.value_or(a.archive.bo_config.seed);
  a.bundle = ice(a.archive.surrogate, space, a.s, make_grid(space, a.s, o.grid_size),
                 mc_sample(space, a.s, o.n_mc, seed), ice_opts);
  a.global = pdp(a.bundle, all_members(a.bundle), a.estimator, o.alpha);
  return a;
}

PartitionTree Grow(const Analysis& a, const Common& o, std::size_t splits) {
  GrowOptions g;
  g.criterion = o.criterion.empty() ? SplitCriterion::kL2 : parse_criterion(o.criterion);
  g.max_splits = splits;
  g.min_node_size = o.min_node_size;
  g.estimator = a.estimator;
  g.alpha = o.alpha;
  return grow(a.bundle, a.archive.space, g);
}

int RunOptimize(const Common& o, double tau, std::size_t budget, std::size_t d) {
  ExperimentSpec spec;
  if (!o.config.empty()) spec = ExperimentSpec::load(o.config);
  else spec.objective.d = d;
  if (o.seed) spec.seed = *o.seed;
  if (!o.incumbent.empty()) spec.incumbent = parse_incumbent_rule(o.incumbent);
  const Objective obj = make_objective(spec.objective);
  BoConfig bo;
  bo.tau = tau > 0.0 ? tau : spec.taus.front();
  bo.budget = budget > 0 ? budget : spec.effective_budget();
  bo.init_design_size = spec.effective_init_design();
  bo.family = spec.kernel;
  bo.seed = spec.seed;
  bo.init_design_seed = spec.init_design_seed;
  bo.n_candidates = spec.n_candidates;
  bo.fit_restarts = spec.fit_restarts;
  bo.incumbent = spec.incumbent;
  RunArchive archive = run_bo(obj, obj.space(), bo);
  archive.objective = spec.objective.to_json();
  Emit(o.out, archive.to_json().dump(2) + "\n");
  return 0;
}

int RunPdp(const Common& o) {
  const Analysis a = Analyze(o);
  const std::size_t splits = o.splits.value_or(0);
  if (splits == 0) {
    Emit(o.out, pdp_to_csv(a.global, a.archive.space));
    return 0;
  }
  const PartitionTree tree = Grow(a, o, splits);
  const auto& leaf = locate(tree, a.archive.space, a.archive.incumbent());
  Emit(o.out, pdp_to_csv(leaf.pdp, a.archive.space));
  return 0;
}

int RunPartition(const Common& o) {
  if (o.out.empty()) throw ContractError("--out directory is required");
  const Analysis a = Analyze(o);
  const PartitionTree tree = Grow(a, o, o.splits.value_or(3));
  const auto& space = a.archive.space;
  fs::create_directories(o.out);
  std::vector<std::string> files = {"global_pdp.csv", "tree.json", "leaves.csv"};
  std::vector<std::string> pdp_files(tree.nodes.size());
  for (std::size_t id : tree.leaves()) {
    pdp_files[id] = "leaf_" + std::to_string(id) + ".csv";
    WriteFile((fs::path(o.out) / pdp_files[id]).string(),
              pdp_to_csv(tree.nodes[id].pdp, space));
    files.push_back(pdp_files[id]);
  }
  WriteFile((fs::path(o.out) / "global_pdp.csv").string(), pdp_to_csv(a.global, space));
  WriteFile((fs::path(o.out) / "tree.json").string(),
            tree_to_json(tree, space, pdp_files).dump(2) + "\n");
  WriteFile((fs::path(o.out) / "leaves.csv").string(), leaves_to_csv(tree, space));
  write_manifest(o.out, files);
  return 0;
}

int RunScore(const Common& o) {
  const Analysis a = Analyze(o);
  if (a.archive.objective.is_null()) {
    throw ContractError("archive carries no objective description");
  }
  const Objective obj = make_objective(ObjectiveSpec::from_json(a.archive.objective));
  const auto& space = a.archive.space;
  const std::size_t splits = o.splits.value_or(0);
  const PartitionTree tree = Grow(a, o, splits);
  const Config incumbent = a.archive.incumbent();
  const double inc_s = incumbent.active(a.s) ? incumbent.at(a.s) : a.bundle.grid.points.front();
  const auto everyone = all_members(a.bundle);
  const PdpScore global =
      score(a.global,
            true_pd_on_sample(obj, space, a.s, a.bundle.grid, a.bundle.sample, everyone),
            space, inc_s);
  std::string out = CsvLine({"splits", "leaf_size", "mc", "oc", "nll", "delta_mc",
                             "delta_oc", "delta_nll"});
  auto cell = [](const std::optional<double>& v) { return v ? FormatDouble(*v) : ""; };
  for (std::size_t k = 0; k <= tree.n_splits; ++k) {
    const auto& leaf = locate(tree, space, incumbent, k);
    const PdpScore sub =
        score(leaf.pdp,
              true_pd_on_sample(obj, space, a.s, a.bundle.grid, a.bundle.sample, leaf.members),
              space, inc_s);
    const auto d = improvement(global, sub);
    out += CsvLine({std::to_string(k), std::to_string(leaf.members.size()),
                    FormatDouble(sub.mc), FormatDouble(sub.oc), FormatDouble(sub.mean_nll),
                    cell(d.delta_mc), cell(d.delta_oc), cell(d.delta_nll)});
  }
  Emit(o.out, out);
  return 0;
}

ExperimentSpec BenchSpec(const Common& o, std::optional<std::size_t> reps,
                         std::optional<std::size_t> workers) {
  if (o.config.empty()) throw ContractError("--config is required");
  ExperimentSpec spec = ExperimentSpec::load(o.config);
  if (o.seed) spec.seed = *o.seed;
  if (!o.out.empty()) spec.out_dir = o.out;
  if (!o.estimator.empty()) spec.estimator = parse_estimator(o.estimator);
  if (!o.criterion.empty()) spec.criterion = parse_criterion(o.criterion);
  if (o.splits) {
    spec.max_splits = *o.splits;
    std::erase_if(spec.checkpoints, [&](std::size_t k) { return k > *o.splits; });
  }
  if (!o.incumbent.empty()) spec.incumbent = parse_incumbent_rule(o.incumbent);
  if (reps) spec.replications = *reps;
  if (workers) spec.workers = *workers;
  spec.validate();
  if (spec.out_dir.empty()) throw ContractError("an output directory is required (--out)");
  return spec;
}

int CountFailures(const StudyResult& study) {
  int failed = 0;
  for (const auto& r : study.replications) {
    if (!r.ok) {
      ++failed;
      std::cerr << "replication tau=" << FormatDouble(r.tau) << " rep=" << r.replication
                << " failed: " << r.error << "\n";
    }
  }
  return failed;
}

}  // namespace

int cli(int argc, const char* const* argv) {
  CLI::App app{"Uncertainty-aware partial dependence for Bayesian optimization runs", "bopdp"};
  app.require_subcommand(1);
  Common o;
  double tau = 0.0;
  std::size_t budget = 0;
  std::size_t d = 3;
  std::optional<std::size_t> reps;
  std::optional<std::size_t> workers;

  auto add_archive = [&](CLI::App* sub) {
    sub->add_option("--archive", o.archive, "Run archive JSON")->required();
    sub->add_option("--param", o.param, "PDP parameter (name or index)");
    sub->add_option("--seed", o.seed, "Monte Carlo sample seed");
    sub->add_option("--out", o.out, "Output path");
    sub->add_option("--estimator", o.estimator, "Variance estimator")
        ->check(CLI::IsMember({"diag", "full"}));
    sub->add_option("--criterion", o.criterion, "Split criterion")
        ->check(CLI::IsMember({"l2", "area", "var", "mean"}));
    sub->add_option("--splits", o.splits, "Number of splits");
    sub->add_option("--grid", o.grid_size, "Grid points")->check(CLI::PositiveNumber);
    sub->add_option("--n-mc", o.n_mc, "Monte Carlo rows")->check(CLI::PositiveNumber);
    sub->add_option("--min-node", o.min_node_size, "Minimum node size");
    sub->add_option("--alpha", o.alpha, "Band level");
  };

  auto* optimize = app.add_subcommand("optimize", "Run Bayesian optimization");
  optimize->add_option("--config", o.config, "Experiment JSON");
  optimize->add_option("--d", d, "Styblinski-Tang dimension without --config");
  optimize->add_option("--tau", tau, "LCB exploration factor");
  optimize->add_option("--budget", budget, "Total evaluations");
  optimize->add_option("--seed", o.seed, "Seed");
  optimize->add_option("--incumbent", o.incumbent, "Incumbent rule")
      ->check(CLI::IsMember({"surrogate", "observed"}));
  optimize->add_option("--out", o.out, "Archive path");

  auto* pdp_cmd = app.add_subcommand("pdp", "PDP CSV of the global or incumbent region");
  add_archive(pdp_cmd);
  auto* part = app.add_subcommand("partition", "Tree JSON and per-leaf PDP CSVs");
  add_archive(part);
  auto* score_cmd = app.add_subcommand("score", "Scores against the true PD per split count");
  add_archive(score_cmd);

  auto* bench = app.add_subcommand("bench", "Replicated studies");
  bench->require_subcommand(1);
  std::vector<CLI::App*> bench_subs;
  const std::pair<const char*, const char*> bench_names[] = {
      {"synthetic", "Sampling-bias study on Styblinski-Tang"},
      {"misspec", "Kernel misspecification study"},
      {"baseline", "Tree leaves against the L1 neighbourhood baseline"}};
  for (const auto& [name, about] : bench_names) {
    auto* sub = bench->add_subcommand(name, about);
    sub->add_option("--config", o.config, "Experiment JSON")->required();
    sub->add_option("--seed", o.seed, "Base seed");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--reps", reps, "Replications");
    if (std::string(name) != "misspec") {
      sub->add_option("--estimator", o.estimator, "Variance estimator")
          ->check(CLI::IsMember({"diag", "full"}));
      sub->add_option("--criterion", o.criterion, "Split criterion")
          ->check(CLI::IsMember({"l2", "area", "var", "mean"}));
      sub->add_option("--splits", o.splits, "Maximum splits");
      sub->add_option("--incumbent", o.incumbent, "Incumbent rule")
          ->check(CLI::IsMember({"surrogate", "observed"}));
      sub->add_option("--workers", workers, "Worker threads");
    }
    bench_subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (optimize->parsed()) return RunOptimize(o, tau, budget, d);
    if (pdp_cmd->parsed()) return RunPdp(o);
    if (part->parsed()) return RunPartition(o);
    if (score_cmd->parsed()) return RunScore(o);
    if (bench_subs[0]->parsed()) {
      const auto study = run_synthetic_study(BenchSpec(o, reps, workers));
      return CountFailures(study) == static_cast<int>(study.replications.size()) ? 2 : 0;
    }
    if (bench_subs[2]->parsed()) {
      const auto study = run_baseline_compare(BenchSpec(o, reps, workers));
      return CountFailures(study) == static_cast<int>(study.replications.size()) ? 2 : 0;
    }
    if (bench_subs[1]->parsed()) {
      MisspecSpec spec = MisspecSpec::from_json(nlohmann::json::parse(ReadFile(o.config)),
                                                 fs::path(o.config).parent_path().string());
      if (o.seed) spec.seed = *o.seed;
      if (!o.out.empty()) spec.out_dir = o.out;
      if (reps) spec.replications = *reps;
      if (spec.out_dir.empty()) throw ContractError("an output directory is required (--out)");
      const auto result = run_misspec_study(spec);
      for (const auto& r : result.replications) {
        if (!r.ok) std::cerr << "replication " << r.replication << " failed: " << r.error << "\n";
      }
      return 0;
    }
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace bopdp
