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

#include "bopdp/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "bopdp/errors.hpp"

namespace bopdp {

namespace {

constexpr int kRefineSteps = 20;
constexpr double kRefineScale = 0.05;

// Seed sub-streams.
constexpr std::uint64_t kStreamInitDesign = 1;
constexpr std::uint64_t kStreamFit = 1000;
constexpr std::uint64_t kStreamPropose = 2000000;
constexpr std::uint64_t kStreamFinalFit = 3;
constexpr std::uint64_t kStreamCandidates = 11;
constexpr std::uint64_t kStreamRefine = 12;

std::size_t ArgMin(const Eigen::VectorXd& v) {
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] < v[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(i);
  }
  return best;
}

}  // namespace

std::string to_string(IncumbentRule rule) {
  return rule == IncumbentRule::kObserved ? "observed" : "surrogate";
}

IncumbentRule parse_incumbent_rule(const std::string& name) {
  if (name == "surrogate") return IncumbentRule::kSurrogate;
  if (name == "observed") return IncumbentRule::kObserved;
  throw ContractError("unknown incumbent rule '" + name + "'");
}

void BoConfig::validate() const {
  if (!(tau > 0.0)) throw ContractError("BO: tau must be positive");
  if (init_design_size < 2) throw ContractError("BO: initial design needs >= 2 points");
  if (budget < init_design_size) {
    throw ContractError("BO: budget smaller than the initial design");
  }
  if (!(nugget >= 0.0)) throw ContractError("BO: nugget must be nonnegative");
  if (fit_restarts < 1) throw ContractError("BO: fit_restarts must be >= 1");
}

nlohmann::json BoConfig::to_json() const {
  nlohmann::json j = {{"tau", tau},
                      {"budget", budget},
                      {"init_design_size", init_design_size},
                      {"kernel", to_string(family)},
                      {"nugget", nugget},
                      {"estimate_nugget", estimate_nugget},
                      {"seed", seed},
                      {"n_candidates", n_candidates},
                      {"fit_restarts", fit_restarts},
                      {"incumbent", to_string(incumbent)}};
  j["init_design_seed"] =
      init_design_seed ? nlohmann::json(*init_design_seed) : nlohmann::json();
  return j;
}

BoConfig BoConfig::from_json(const nlohmann::json& j) {
  BoConfig c;
  c.tau = j.value("tau", c.tau);
  c.budget = j.value("budget", c.budget);
  c.init_design_size = j.value("init_design_size", c.init_design_size);
  c.family = parse_kernel_family(j.value("kernel", std::string("matern32")));
  c.nugget = j.value("nugget", c.nugget);
  c.estimate_nugget = j.value("estimate_nugget", c.estimate_nugget);
  c.seed = j.value("seed", c.seed);
  c.n_candidates = j.value("n_candidates", c.n_candidates);
  c.fit_restarts = j.value("fit_restarts", c.fit_restarts);
  c.incumbent = parse_incumbent_rule(j.value("incumbent", std::string("surrogate")));
  if (j.contains("init_design_seed") && !j.at("init_design_seed").is_null()) {
    c.init_design_seed = j.at("init_design_seed").get<std::uint64_t>();
  }
  return c;
}

std::vector<Config> RunArchive::configs() const {
  std::vector<Config> out;
  out.reserve(evaluations.size());
  for (const auto& e : evaluations) out.push_back(e.config);
  return out;
}

nlohmann::json RunArchive::to_json() const {
  nlohmann::json evals = nlohmann::json::array();
  for (const auto& e : evaluations) {
    evals.push_back({{"config", space.config_to_json(e.config)},
                     {"cost", e.cost},
                     {"iteration", e.iteration}});
  }
  const auto& gp = surrogate.gp;
  nlohmann::json X = nlohmann::json::array();
  for (Eigen::Index r = 0; r < gp.inputs().rows(); ++r) {
    std::vector<double> row(gp.inputs().cols());
    for (Eigen::Index c = 0; c < gp.inputs().cols(); ++c) row[c] = gp.inputs()(r, c);
    X.push_back(row);
  }
  std::vector<double> y(gp.targets().data(), gp.targets().data() + gp.targets().size());
  return {{"space", space.to_json()},
          {"bo_config", bo_config.to_json()},
          {"evaluations", evals},
          {"incumbent_index", incumbent_index},
          {"surrogate",
           {{"kernel", to_string(gp.kernel().family)},
            {"hyperparameters", gp.kernel().to_json()},
            {"X", X},
            {"y", y},
            {"fit_seed", surrogate_fit_seed}}},
          {"objective", objective}};
}

RunArchive RunArchive::from_json(const nlohmann::json& j) {
  RunArchive a;
  a.space = SearchSpace::from_json(j.at("space"));
  a.bo_config = BoConfig::from_json(j.at("bo_config"));
  for (const auto& e : j.at("evaluations")) {
    a.evaluations.push_back({a.space.make_config(e.at("config")),
                             e.at("cost").get<double>(),
                             e.at("iteration").get<std::size_t>()});
  }
  a.incumbent_index = j.at("incumbent_index").get<std::size_t>();
  if (a.incumbent_index >= a.evaluations.size()) {
    throw ContractError("archive: incumbent index out of range");
  }
  const auto& s = j.at("surrogate");
  const auto kernel = KernelSpec::from_json(s.at("hyperparameters"));
  const auto rows = s.at("X").get<std::vector<std::vector<double>>>();
  const auto y = s.at("y").get<std::vector<double>>();
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), kernel.lengthscales.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<Eigen::Index>(rows[r].size()) != X.cols()) {
      throw ContractError("archive: surrogate input width mismatch");
    }
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  a.surrogate.encoder = FeatureEncoder(a.space);
  a.surrogate.gp = GpSurrogate::condition(
      kernel, std::move(X),
      Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())));
  a.surrogate_fit_seed = s.value("fit_seed", std::uint64_t{0});
  if (j.contains("objective")) a.objective = j.at("objective");
  return a;
}

double lcb(const Surrogate& model, const Config& config, double tau) {
  return lcb(model, std::span<const Config>(&config, 1), tau)[0];
}

Eigen::VectorXd lcb(const Surrogate& model, std::span<const Config> configs,
                    double tau) {
  if (!(tau > 0.0)) throw ContractError("lcb: tau must be positive");
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
  model.predict_marginal(configs, &mean, &var);
  return mean.array() - tau * var.array().max(0.0).sqrt();
}

Config propose(const Surrogate& model, const SearchSpace& space, double tau,
               std::size_t n_candidates, std::uint64_t seed) {
  if (n_candidates == 0) throw ContractError("propose: need >= 1 candidate");
  const auto candidates =
      sample_uniform(space, n_candidates, mix_seed(seed, kStreamCandidates));
  const Eigen::VectorXd scores = lcb(model, candidates, tau);
  const std::size_t best_index = ArgMin(scores);
  Config best = candidates[best_index];
  double best_score = scores[static_cast<Eigen::Index>(best_index)];

  Rng rng(mix_seed(seed, kStreamRefine));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int step = 0; step < kRefineSteps; ++step) {
    Config trial = best;
    for (std::size_t i = 0; i < space.size(); ++i) {
      const auto& p = space.param(i);
      if (!trial.active(i) || p.kind == ParamKind::kCategorical) continue;
      const auto [lo, hi] = space.model_bounds(i);
      const double m = space.to_model(i, trial.at(i)) +
                       kRefineScale * (hi - lo) * normal(rng);
      trial.values[i] =
          std::clamp(space.from_model(i, std::clamp(m, lo, hi)), p.lower, p.upper);
    }
    const double score = lcb(model, trial, tau);
    if (score < best_score) {
      best = std::move(trial);
      best_score = score;
    }
  }
  return space.snap(std::move(best));
}

Surrogate fit_surrogate(const SearchSpace& space,
                        std::span<const Config> configs,
                        std::span<const double> costs, const BoConfig& cfg,
                        std::uint64_t seed) {
  Surrogate s;
  s.encoder = FeatureEncoder(space);
  FitOptions opts;
  opts.family = cfg.family;
  opts.nugget = cfg.nugget;
  opts.estimate_nugget = cfg.estimate_nugget;
  opts.restarts = cfg.fit_restarts;
  opts.seed = seed;
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(
      costs.data(), static_cast<Eigen::Index>(costs.size()));
  s.gp = fit(s.encoder.encode(configs), y, opts);
  return s;
}

std::size_t select_incumbent(const Surrogate& model,
                             std::span<const Evaluation> evaluations,
                             IncumbentRule rule) {
  if (evaluations.empty()) throw ContractError("no evaluations");
  Eigen::VectorXd score(static_cast<Eigen::Index>(evaluations.size()));
  if (rule == IncumbentRule::kObserved) {
    for (std::size_t i = 0; i < evaluations.size(); ++i) {
      score[static_cast<Eigen::Index>(i)] = evaluations[i].cost;
    }
  } else {
    std::vector<Config> configs;
    configs.reserve(evaluations.size());
    for (const auto& e : evaluations) configs.push_back(e.config);
    model.predict_marginal(configs, &score, nullptr);
  }
  return ArgMin(score);
}

RunArchive run_bo(const Objective& obj, const SearchSpace& space,
                  const BoConfig& cfg) {
  cfg.validate();
  RunArchive archive;
  archive.space = space;
  archive.bo_config = cfg;

  std::vector<Config> configs;
  std::vector<double> costs;
  auto evaluate = [&](Config c, std::size_t iteration) {
    double cost;
    try {
      cost = obj(c);
    } catch (const std::exception& e) {
      throw ObjectiveError(iteration, e.what());
    }
    if (!std::isfinite(cost)) throw ObjectiveError(iteration, "non-finite cost");
    archive.evaluations.push_back({c, cost, iteration});
    configs.push_back(std::move(c));
    costs.push_back(cost);
  };

  const std::uint64_t init_seed =
      cfg.init_design_seed.value_or(mix_seed(cfg.seed, kStreamInitDesign));
  for (auto& c : sample_uniform(space, cfg.init_design_size, init_seed)) {
    evaluate(space.snap(std::move(c)), 0);
  }

  const std::size_t n_candidates =
      cfg.n_candidates > 0 ? cfg.n_candidates : 1000 * space.size();
  for (std::size_t it = 1; configs.size() < cfg.budget; ++it) {
    const Surrogate model =
        fit_surrogate(space, configs, costs, cfg, mix_seed(cfg.seed, kStreamFit + it));
    evaluate(propose(model, space, cfg.tau, n_candidates,
                     mix_seed(cfg.seed, kStreamPropose + it)),
             it);
  }

  archive.surrogate_fit_seed = mix_seed(cfg.seed, kStreamFinalFit);
  archive.surrogate =
      fit_surrogate(space, configs, costs, cfg, archive.surrogate_fit_seed);
  archive.incumbent_index =
      select_incumbent(archive.surrogate, archive.evaluations, cfg.incumbent);
  return archive;
}

}  // namespace bopdp
