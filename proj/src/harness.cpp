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

#include "bopdp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "bopdp/errors.hpp"
#include "bopdp/format.hpp"

namespace bopdp {

namespace fs = std::filesystem;

namespace {

// Seed sub-streams shared by every replication of a study.
constexpr std::uint64_t kStreamInitDesign = 7;
constexpr std::uint64_t kStreamMcSample = 101;
// Per-replication streams.
constexpr std::uint64_t kStreamReference = 17;
constexpr std::uint64_t kStreamTrainPoints = 21;
constexpr std::uint64_t kStreamTruthFit = 22;
constexpr std::uint64_t kStreamSurrogateFit = 23;
constexpr std::uint64_t kStreamTruthSample = 24;

std::string Resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

std::string OptionalCell(const std::optional<double>& v) {
  return v ? FormatDouble(*v) : std::string();
}

std::string TauText(double tau) { return FormatDouble(tau); }

}  // namespace

nlohmann::json ObjectiveSpec::to_json() const {
  if (kind == "table") {
    return {{"kind", kind}, {"table", table_path}, {"space", space_path},
            {"neighbours", neighbours}};
  }
  return {{"kind", kind},
          {"d", d},
          {"variant", variant == StyblinskiTangVariant::kPlusQuadratic
                          ? "plus_quadratic" : "standard"}};
}

ObjectiveSpec ObjectiveSpec::from_json(const nlohmann::json& j,
                                       const std::string& base_dir) {
  ObjectiveSpec s;
  s.kind = j.value("kind", s.kind);
  if (s.kind == "styblinski_tang") {
    s.d = j.value("d", s.d);
    const auto v = j.value("variant", std::string("standard"));
    if (v == "standard") {
      s.variant = StyblinskiTangVariant::kStandard;
    } else if (v == "plus_quadratic") {
      s.variant = StyblinskiTangVariant::kPlusQuadratic;
    } else {
      throw ContractError("unknown Styblinski-Tang variant '" + v + "'");
    }
  } else if (s.kind == "table") {
    s.table_path = Resolve(j.at("table").get<std::string>(), base_dir);
    s.space_path = Resolve(j.at("space").get<std::string>(), base_dir);
    s.neighbours = j.value("neighbours", s.neighbours);
  } else {
    throw ContractError("unknown objective kind '" + s.kind + "'");
  }
  return s;
}

Objective make_objective(const ObjectiveSpec& spec) {
  if (spec.kind == "table") {
    auto space = SearchSpace::load(spec.space_path);
    auto rows = read_table_csv(spec.table_path, space);
    return table_objective(std::move(rows), space, spec.neighbours);
  }
  if (spec.d < 1) throw ContractError("objective dimension must be >= 1");
  return styblinski_tang(spec.d, spec.variant);
}

std::size_t default_budget(std::size_t d) {
  if (d <= 3) return 80;
  if (d <= 5) return 150;
  if (d <= 8) return 250;
  return 30 * d;
}

std::string tau_label(double tau) {
  if (tau == 0.1) return "high";
  if (tau == 1.0 || tau == 2.0) return "medium";
  if (tau == 5.0) return "low";
  return FormatDouble(tau);
}

void ExperimentSpec::validate() const {
  if (replications < 1) throw ContractError("replications must be >= 1");
  if (taus.empty()) throw ContractError("at least one tau is required");
  for (double t : taus) {
    if (!(t > 0.0)) throw ContractError("tau values must be positive");
  }
  if (grid_size < 2) throw ContractError("grid_size must be >= 2");
  if (n_mc < 2) throw ContractError("n_mc must be >= 2");
  if (min_node_size < 1) throw ContractError("min_node_size must be >= 1");
  for (std::size_t k : checkpoints) {
    if (k > max_splits) throw ContractError("checkpoint exceeds max_splits");
  }
}

std::size_t ExperimentSpec::effective_budget() const {
  return budget > 0 ? budget : default_budget(make_objective(objective).dimension());
}

std::size_t ExperimentSpec::effective_init_design() const {
  return init_design_size > 0 ? init_design_size
                              : 4 * make_objective(objective).dimension();
}

std::vector<std::size_t> ExperimentSpec::effective_checkpoints() const {
  if (!checkpoints.empty()) {
    auto c = checkpoints;
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    return c;
  }
  std::vector<std::size_t> c(max_splits + 1);
  std::iota(c.begin(), c.end(), std::size_t{0});
  return c;
}

nlohmann::json ExperimentSpec::to_json() const {
  nlohmann::json j = {{"objective", objective.to_json()},
                      {"taus", taus},
                      {"budget", budget},
                      {"init_design_size", init_design_size},
                      {"replications", replications},
                      {"param", param},
                      {"criterion", to_string(criterion)},
                      {"max_splits", max_splits},
                      {"checkpoints", checkpoints},
                      {"min_node_size", min_node_size},
                      {"estimator", to_string(estimator)},
                      {"grid_size", grid_size},
                      {"n_mc", n_mc},
                      {"seed", seed},
                      {"kernel", to_string(kernel)},
                      {"incumbent", to_string(incumbent)},
                      {"n_candidates", n_candidates},
                      {"fit_restarts", fit_restarts},
                      {"save_archives", save_archives}};
  j["init_design_seed"] = init_design_seed ? nlohmann::json(*init_design_seed)
                                           : nlohmann::json();
  return j;
}

ExperimentSpec ExperimentSpec::from_json(const nlohmann::json& j,
                                         const std::string& base_dir) {
  ExperimentSpec s;
  if (j.contains("objective")) s.objective = ObjectiveSpec::from_json(j.at("objective"), base_dir);
  s.taus = j.value("taus", s.taus);
  s.budget = j.value("budget", s.budget);
  s.init_design_size = j.value("init_design_size", s.init_design_size);
  s.replications = j.value("replications", s.replications);
  s.param = j.value("param", s.param);
  s.criterion = parse_criterion(j.value("criterion", to_string(s.criterion)));
  s.max_splits = j.value("max_splits", s.max_splits);
  s.checkpoints = j.value("checkpoints", s.checkpoints);
  s.min_node_size = j.value("min_node_size", s.min_node_size);
  s.estimator = parse_estimator(j.value("estimator", to_string(s.estimator)));
  s.grid_size = j.value("grid_size", s.grid_size);
  s.n_mc = j.value("n_mc", s.n_mc);
  s.seed = j.value("seed", s.seed);
  if (j.contains("init_design_seed") && !j.at("init_design_seed").is_null()) {
    s.init_design_seed = j.at("init_design_seed").get<std::uint64_t>();
  }
  s.kernel = parse_kernel_family(j.value("kernel", to_string(s.kernel)));
  s.incumbent = parse_incumbent_rule(j.value("incumbent", to_string(s.incumbent)));
  s.n_candidates = j.value("n_candidates", s.n_candidates);
  s.fit_restarts = j.value("fit_restarts", s.fit_restarts);
  s.workers = j.value("workers", s.workers);
  s.save_archives = j.value("save_archives", s.save_archives);
  s.out_dir = Resolve(j.value("out", s.out_dir), base_dir);
  s.validate();
  return s;
}

ExperimentSpec ExperimentSpec::load(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ReadFile(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ContractError("cannot parse " + path + ": " + e.what());
  }
  return from_json(j, fs::path(path).parent_path().string());
}

namespace {

std::size_t PdpParam(const ExperimentSpec& spec, const SearchSpace& space) {
  return spec.param.empty() ? 0 : space.index_of(spec.param);
}

// Incumbent value of the PDP parameter; NaN when inactive.
double IncumbentValue(const Config& incumbent, std::size_t s) {
  return incumbent.active(s) ? incumbent.at(s) : std::numeric_limits<double>::quiet_NaN();
}

PdpScore ScoreAt(const PdpEstimate& estimate, const TrueMarginal& truth,
                 const SearchSpace& space, double incumbent_s) {
  if (std::isnan(incumbent_s)) {
    PdpScore s = score(estimate, truth, space, estimate.grid.points.front());
    s.oc = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  return score(estimate, truth, space, incumbent_s);
}

}  // namespace

std::vector<Config> mc_sample(const SearchSpace& space, std::size_t s, std::size_t n,
                              std::uint64_t seed) {
  std::vector<Config> sample;
  for (auto& c : sample_uniform(space, n, mix_seed(seed, kStreamMcSample))) {
    Config snapped = space.snap(std::move(c));
    if (snapped.active(s)) sample.push_back(std::move(snapped));
  }
  if (sample.empty()) throw EstimationError("no sampled row has the PDP parameter active");
  return sample;
}

ReplicationResult run_replication(const ExperimentSpec& spec, double tau,
                                  std::size_t replication) {
  const auto start = std::chrono::steady_clock::now();
  ReplicationResult r;
  r.tau = tau;
  r.replication = replication;
  r.seed = spec.seed + replication;
  try {
    const Objective obj = make_objective(spec.objective);
    const SearchSpace& space = obj.space();
    const std::size_t s = PdpParam(spec, space);

    BoConfig bo;
    bo.tau = tau;
    bo.budget = spec.effective_budget();
    bo.init_design_size = spec.effective_init_design();
    bo.family = spec.kernel;
    bo.seed = r.seed;
    bo.init_design_seed =
        spec.init_design_seed.value_or(mix_seed(spec.seed, kStreamInitDesign));
    bo.n_candidates = spec.n_candidates;
    bo.fit_restarts = spec.fit_restarts;
    bo.incumbent = spec.incumbent;
    RunArchive archive = run_bo(obj, space, bo);
    archive.objective = spec.objective.to_json();

    // Grid and Monte Carlo rows are shared by all replications.
    const auto sample = mc_sample(space, s, spec.n_mc, spec.seed);
    const Grid grid = make_grid(space, s, spec.grid_size);
    IceOptions ice_opts;
    ice_opts.mode = spec.estimator == VarianceEstimator::kFullCov ? IceMode::kWithJoint
                                                                  : IceMode::kDiagOnly;
    const IceBundle bundle = ice(archive.surrogate, space, s, grid, sample, ice_opts);
    const auto everyone = all_members(bundle);
    const PdpEstimate global = pdp(bundle, everyone, spec.estimator);
    const Config incumbent = archive.incumbent();
    const double inc_s = IncumbentValue(incumbent, s);
    r.global = ScoreAt(global,
                       true_pd_on_sample(obj, space, s, grid, bundle.sample, everyone),
                       space, inc_s);

    const auto evaluated = archive.configs();
    const auto reference = sample_uniform(space, evaluated.size(),
                                          mix_seed(r.seed, kStreamReference));
    r.mmd = std::sqrt(std::max(mmd2(space, evaluated, reference), 0.0));

    GrowOptions grow_opts;
    grow_opts.criterion = spec.criterion;
    grow_opts.max_splits = spec.max_splits;
    grow_opts.min_node_size = spec.min_node_size;
    grow_opts.estimator = spec.estimator;
    const PartitionTree tree = grow(bundle, space, grow_opts);

    for (std::size_t k : spec.effective_checkpoints()) {
      CheckpointResult cp;
      cp.splits = k;
      const PartitionNode& leaf = locate(tree, space, incumbent, k);
      cp.leaf_size = leaf.members.size();
      cp.leaf = ScoreAt(leaf.pdp,
                        true_pd_on_sample(obj, space, s, grid, bundle.sample, leaf.members),
                        space, inc_s);
      cp.leaf_delta = improvement(r.global, cp.leaf);
      const auto near = l1_baseline(bundle, space, incumbent, leaf.members.size());
      cp.baseline = ScoreAt(pdp(bundle, near, spec.estimator),
                            true_pd_on_sample(obj, space, s, grid, bundle.sample, near),
                            space, inc_s);
      cp.baseline_delta = improvement(r.global, cp.baseline);
      r.checkpoints.push_back(std::move(cp));
    }
    r.archive = std::move(archive);
    r.ok = true;
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
    r.checkpoints.clear();
  }
  r.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

namespace {

std::size_t WorkerCount(std::size_t requested, std::size_t tasks) {
  std::size_t w = requested > 0 ? requested : std::thread::hardware_concurrency();
  return std::clamp<std::size_t>(w, 1, std::max<std::size_t>(tasks, 1));
}

// Runs fn(i) for i in [0, n) on `workers` threads.
template <typename Fn>
void ParallelFor(std::size_t n, std::size_t workers, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
}

}  // namespace

StudyResult run_replications(const ExperimentSpec& spec) {
  spec.validate();
  StudyResult study;
  study.spec = spec;
  const std::size_t n = spec.taus.size() * spec.replications;
  study.replications.resize(n);
  ParallelFor(n, WorkerCount(spec.workers, n), [&](std::size_t i) {
    study.replications[i] =
        run_replication(spec, spec.taus[i / spec.replications], i % spec.replications);
  });
  return study;
}

MeanSd mean_sd(const std::vector<double>& values) {
  MeanSd out;
  out.n = values.size();
  if (values.empty()) return out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(out.n);
  if (out.n >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(out.n - 1));
  }
  return out;
}

namespace {

const std::vector<std::string> kResultColumns = {
    "d", "tau", "tau_label", "replication", "status", "n_ok", "mmd", "splits",
    "leaf_size", "mc", "oc", "nll", "delta_mc", "delta_oc", "delta_nll",
    "global_mc", "global_oc", "global_nll"};

std::size_t StudyDimension(const StudyResult& study) {
  return make_objective(study.spec.objective).dimension();
}

// Per (tau, checkpoint) values of `get` over successful replications.
template <typename Get>
std::vector<double> Collect(const StudyResult& study, double tau, std::size_t cp_index,
                            Get&& get) {
  std::vector<double> out;
  for (const auto& r : study.replications) {
    if (r.tau != tau || !r.ok) continue;
    const auto v = get(r, r.checkpoints[cp_index]);
    if (v && std::isfinite(*v)) out.push_back(*v);
  }
  return out;
}

}  // namespace

std::string results_csv(const StudyResult& study) {
  const std::string d = std::to_string(StudyDimension(study));
  const auto checkpoints = study.spec.effective_checkpoints();
  std::string out = CsvLine(kResultColumns);
  for (const auto& r : study.replications) {
    const std::string tau = TauText(r.tau);
    const std::string rep = std::to_string(r.replication);
    if (!r.ok) {
      std::vector<std::string> row(kResultColumns.size());
      row[0] = d;
      row[1] = tau;
      row[2] = tau_label(r.tau);
      row[3] = rep;
      row[4] = "failed";
      out += CsvLine(row);
      continue;
    }
    for (const auto& cp : r.checkpoints) {
      out += CsvLine({d, tau, tau_label(r.tau), rep, "ok", "1", FormatDouble(r.mmd),
                      std::to_string(cp.splits), std::to_string(cp.leaf_size),
                      FormatDouble(cp.leaf.mc), FormatDouble(cp.leaf.oc),
                      FormatDouble(cp.leaf.mean_nll), OptionalCell(cp.leaf_delta.delta_mc),
                      OptionalCell(cp.leaf_delta.delta_oc),
                      OptionalCell(cp.leaf_delta.delta_nll), FormatDouble(r.global.mc),
                      FormatDouble(r.global.oc), FormatDouble(r.global.mean_nll)});
    }
  }
  using Get = std::function<std::optional<double>(const ReplicationResult&,
                                                  const CheckpointResult&)>;
  const std::vector<Get> getters = {
      [](const auto& r, const auto&) { return std::optional<double>(r.mmd); },
      [](const auto&, const auto& c) { return std::optional<double>(static_cast<double>(c.leaf_size)); },
      [](const auto&, const auto& c) { return std::optional<double>(c.leaf.mc); },
      [](const auto&, const auto& c) { return std::optional<double>(c.leaf.oc); },
      [](const auto&, const auto& c) { return std::optional<double>(c.leaf.mean_nll); },
      [](const auto&, const auto& c) { return c.leaf_delta.delta_mc; },
      [](const auto&, const auto& c) { return c.leaf_delta.delta_oc; },
      [](const auto&, const auto& c) { return c.leaf_delta.delta_nll; },
      [](const auto& r, const auto&) { return std::optional<double>(r.global.mc); },
      [](const auto& r, const auto&) { return std::optional<double>(r.global.oc); },
      [](const auto& r, const auto&) { return std::optional<double>(r.global.mean_nll); }};
  for (double tau : study.spec.taus) {
    std::size_t n_ok = 0;
    for (const auto& r : study.replications) n_ok += (r.tau == tau && r.ok) ? 1 : 0;
    for (std::size_t ci = 0; ci < checkpoints.size(); ++ci) {
      std::vector<MeanSd> stats;
      for (const auto& get : getters) stats.push_back(mean_sd(Collect(study, tau, ci, get)));
      for (const char* kind : {"mean", "sd"}) {
        std::vector<std::string> row = {d, TauText(tau), tau_label(tau), kind,
                                        n_ok > 0 ? "aggregate" : "failed",
                                        std::to_string(n_ok)};
        for (std::size_t g = 0; g < stats.size(); ++g) {
          std::string cell;
          if (stats[g].n > 0) {
            cell = std::string(kind) == "mean" ? FormatDouble(stats[g].mean)
                                               : OptionalCell(stats[g].sd);
          }
          row.push_back(cell);
          if (g == 0) row.push_back(std::to_string(checkpoints[ci]));
        }
        out += CsvLine(row);
      }
    }
  }
  return out;
}

std::string baseline_csv(const StudyResult& study) {
  const std::string d = std::to_string(StudyDimension(study));
  std::string out = CsvLine({"d", "tau", "tau_label", "replication", "status", "splits",
                             "members", "tree_delta_mc", "tree_delta_oc",
                             "tree_delta_nll", "baseline_delta_mc", "baseline_delta_oc",
                             "baseline_delta_nll"});
  for (const auto& r : study.replications) {
    if (!r.ok) {
      out += CsvLine({d, TauText(r.tau), tau_label(r.tau), std::to_string(r.replication),
                      "failed", "", "", "", "", "", "", "", ""});
      continue;
    }
    for (const auto& cp : r.checkpoints) {
      out += CsvLine({d, TauText(r.tau), tau_label(r.tau), std::to_string(r.replication),
                      "ok", std::to_string(cp.splits), std::to_string(cp.leaf_size),
                      OptionalCell(cp.leaf_delta.delta_mc),
                      OptionalCell(cp.leaf_delta.delta_oc),
                      OptionalCell(cp.leaf_delta.delta_nll),
                      OptionalCell(cp.baseline_delta.delta_mc),
                      OptionalCell(cp.baseline_delta.delta_oc),
                      OptionalCell(cp.baseline_delta.delta_nll)});
    }
  }
  return out;
}

std::string timings_csv(const StudyResult& study) {
  std::string out = CsvLine({"tau", "replication", "status", "wall_seconds", "error"});
  for (const auto& r : study.replications) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out += CsvLine({TauText(r.tau), std::to_string(r.replication), r.ok ? "ok" : "failed",
                    FormatDouble(r.wall_seconds), err});
  }
  return out;
}

void write_manifest(const std::string& dir, const std::vector<std::string>& files) {
  nlohmann::json list = nlohmann::json::array();
  auto sorted = files;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& f : sorted) {
    const std::string bytes = ReadFile((fs::path(dir) / f).string());
    list.push_back({{"path", f}, {"bytes", bytes.size()}, {"sha256", Sha256Hex(bytes)}});
  }
  WriteFile((fs::path(dir) / "manifest.json").string(),
            nlohmann::json({{"artifacts", list}}).dump(2) + "\n");
}

namespace {

// Writes the common artifacts of a study and returns the file list.
std::vector<std::string> WriteStudy(const StudyResult& study) {
  const std::string& dir = study.spec.out_dir;
  std::vector<std::string> files;
  fs::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& text) {
    fs::create_directories((fs::path(dir) / name).parent_path());
    WriteFile((fs::path(dir) / name).string(), text);
    files.push_back(name);
  };
  put("experiment.json", study.spec.to_json().dump(2) + "\n");
  if (study.spec.save_archives) {
    for (const auto& r : study.replications) {
      if (!r.archive) continue;
      put("archives/tau" + TauText(r.tau) + "_rep" + std::to_string(r.replication) + ".json",
          r.archive->to_json().dump() + "\n");
    }
  }
  // Wall times vary between runs and stay out of the manifest.
  WriteFile((fs::path(dir) / "timings.csv").string(), timings_csv(study));
  return files;
}

}  // namespace

StudyResult run_synthetic_study(const ExperimentSpec& spec) {
  StudyResult study = run_replications(spec);
  if (!spec.out_dir.empty()) {
    auto files = WriteStudy(study);
    WriteFile((fs::path(spec.out_dir) / "results.csv").string(), results_csv(study));
    files.push_back("results.csv");
    write_manifest(spec.out_dir, files);
  }
  return study;
}

StudyResult run_baseline_compare(const ExperimentSpec& spec) {
  if (spec.max_splits < 1) throw ContractError("baseline comparison needs max_splits >= 1");
  StudyResult study = run_replications(spec);
  if (!spec.out_dir.empty()) {
    auto files = WriteStudy(study);
    WriteFile((fs::path(spec.out_dir) / "baseline.csv").string(), baseline_csv(study));
    files.push_back("baseline.csv");
    write_manifest(spec.out_dir, files);
  }
  return study;
}

nlohmann::json MisspecSpec::to_json() const {
  return {{"d", d}, {"replications", replications}, {"n_train", n_train},
          {"n_mc", n_mc}, {"n_truth", n_truth}, {"grid_size", grid_size},
          {"seed", seed}, {"fit_restarts", fit_restarts}};
}

MisspecSpec MisspecSpec::from_json(const nlohmann::json& j,
                                   const std::string& base_dir) {
  MisspecSpec s;
  s.d = j.value("d", s.d);
  s.replications = j.value("replications", s.replications);
  s.n_train = j.value("n_train", s.n_train);
  s.n_mc = j.value("n_mc", s.n_mc);
  s.n_truth = j.value("n_truth", s.n_truth);
  s.grid_size = j.value("grid_size", s.grid_size);
  s.seed = j.value("seed", s.seed);
  s.fit_restarts = j.value("fit_restarts", s.fit_restarts);
  s.out_dir = Resolve(j.value("out", s.out_dir), base_dir);
  if (s.replications < 1) throw ContractError("replications must be >= 1");
  if (s.n_train < 2) throw ContractError("n_train must be >= 2");
  return s;
}

MisspecReplication run_misspec_replication(const MisspecSpec& spec,
                                           std::size_t replication) {
  MisspecReplication out;
  out.replication = replication;
  try {
    const std::uint64_t seed = spec.seed + replication;
    const Objective st = styblinski_tang(spec.d);
    const SearchSpace& space = st.space();
    const auto train = sample_uniform(space, spec.n_train, mix_seed(seed, kStreamTrainPoints));
    const FeatureEncoder encoder(space);
    const Eigen::MatrixXd X = encoder.encode(train);
    Eigen::VectorXd y(X.rows());
    for (std::size_t i = 0; i < train.size(); ++i) y[static_cast<Eigen::Index>(i)] = st(train[i]);

    // Ground truth: posterior mean of a Matern-3/2 GP on the ST sample.
    FitOptions truth_opts;
    truth_opts.restarts = spec.fit_restarts;
    truth_opts.seed = mix_seed(seed, kStreamTruthFit);
    const GpSurrogate truth_gp = fit(X, y, truth_opts);
    const Eigen::VectorXd c_train = truth_gp.predict_mean(X);
    const Objective truth("gp_truth", space, [&truth_gp, &encoder](const Config& c) {
      const Eigen::VectorXd row = encoder.encode(c);
      return truth_gp.predict_mean(row.transpose())[0];
    });

    const Grid grid = make_grid(space, 0, spec.grid_size);
    const TrueMarginal c_s =
        true_pd(truth, space, 0, grid, spec.n_truth, mix_seed(seed, kStreamTruthSample));
    const auto sample = sample_uniform(space, spec.n_mc, mix_seed(spec.seed, kStreamMcSample));

    const KernelFamily families[2] = {KernelFamily::kMatern32, KernelFamily::kGaussian};
    for (int k = 0; k < 2; ++k) {
      FitOptions opts;
      opts.family = families[k];
      opts.restarts = spec.fit_restarts;
      opts.seed = mix_seed(seed, kStreamSurrogateFit + static_cast<std::uint64_t>(k));
      Surrogate model{encoder, fit(X, c_train, opts)};
      IceOptions ice_opts;
      ice_opts.mode = IceMode::kWithJoint;
      ice_opts.max_joint_n = std::max(ice_opts.max_joint_n, spec.n_mc);
      const IceBundle bundle = ice(model, space, 0, grid, sample, ice_opts);
      const auto members = all_members(bundle);
      out.nll[k][0] = nll(pdp(bundle, members, VarianceEstimator::kFullCov), c_s).mean;
      out.nll[k][1] = nll(pdp(bundle, members, VarianceEstimator::kDiag), c_s).mean;
    }
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

MisspecResult run_misspec_study(const MisspecSpec& spec) {
  MisspecResult result;
  result.spec = spec;
  result.replications.resize(spec.replications);
  // Joint covariance blocks are large; replications run one at a time.
  for (std::size_t r = 0; r < spec.replications; ++r) {
    result.replications[r] = run_misspec_replication(spec, r);
  }
  if (!spec.out_dir.empty()) {
    fs::create_directories(spec.out_dir);
    WriteFile((fs::path(spec.out_dir) / "misspec.csv").string(), misspec_csv(result));
    WriteFile((fs::path(spec.out_dir) / "misspec_spec.json").string(),
              spec.to_json().dump(2) + "\n");
    write_manifest(spec.out_dir, {"misspec.csv", "misspec_spec.json"});
  }
  return result;
}

std::string misspec_csv(const MisspecResult& result) {
  const char* kernels[2] = {"matern32", "gaussian"};
  const char* estimators[2] = {"full", "diag"};
  const std::string d = std::to_string(result.spec.d);
  std::string out = CsvLine({"d", "kernel", "correct", "estimator", "replication",
                             "status", "nll"});
  for (int k = 0; k < 2; ++k) {
    for (int e = 0; e < 2; ++e) {
      std::vector<double> values;
      for (const auto& r : result.replications) {
        out += CsvLine({d, kernels[k], k == 0 ? "1" : "0", estimators[e],
                        std::to_string(r.replication), r.ok ? "ok" : "failed",
                        r.ok ? FormatDouble(r.nll[k][e]) : ""});
        if (r.ok) values.push_back(r.nll[k][e]);
      }
      const MeanSd ms = mean_sd(values);
      out += CsvLine({d, kernels[k], k == 0 ? "1" : "0", estimators[e], "mean",
                      "aggregate", ms.n > 0 ? FormatDouble(ms.mean) : ""});
      out += CsvLine({d, kernels[k], k == 0 ? "1" : "0", estimators[e], "sd",
                      "aggregate", ms.sd ? FormatDouble(*ms.sd) : "n/a"});
    }
  }
  return out;
}

}  // namespace bopdp
