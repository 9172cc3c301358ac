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

// Bayesian optimization with the lower confidence bound acquisition.

#ifndef BOPDP_OPTIMIZER_HPP_
#define BOPDP_OPTIMIZER_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bopdp/objective.hpp"
#include "bopdp/space.hpp"
#include "bopdp/surrogate.hpp"
#include "json.hpp"

namespace bopdp {

enum class IncumbentRule {
  kSurrogate,  // lowest final posterior mean among evaluated configs
  kObserved,   // lowest observed cost
};

std::string to_string(IncumbentRule rule);
IncumbentRule parse_incumbent_rule(const std::string& name);

struct BoConfig {
  double tau = 1.0;
  std::size_t budget = 80;
  std::size_t init_design_size = 12;
  KernelFamily family = KernelFamily::kMatern32;
  double nugget = 1e-8;
  bool estimate_nugget = false;
  std::uint64_t seed = 0;
  // Seed of the initial design; defaults to `seed`. Setting it keeps the
  // initial design fixed across replications that differ in `seed`.
  std::optional<std::uint64_t> init_design_seed;
  // Random acquisition candidates per iteration; 0 means 1000 * d.
  std::size_t n_candidates = 0;
  int fit_restarts = 10;
  IncumbentRule incumbent = IncumbentRule::kSurrogate;

  void validate() const;
  nlohmann::json to_json() const;
  static BoConfig from_json(const nlohmann::json& j);
};

struct Evaluation {
  Config config;
  double cost = 0.0;
  std::size_t iteration = 0;  // 0 for the initial design
};

struct RunArchive {
  SearchSpace space;
  BoConfig bo_config;
  std::vector<Evaluation> evaluations;  // evaluation order
  Surrogate surrogate;                  // fitted on all evaluations
  std::uint64_t surrogate_fit_seed = 0;
  std::size_t incumbent_index = 0;
  // Free-form description of the objective, used to rebuild it for scoring.
  nlohmann::json objective;

  std::vector<Config> configs() const;
  const Config& incumbent() const {
    return evaluations.at(incumbent_index).config;
  }

  nlohmann::json to_json() const;
  static RunArchive from_json(const nlohmann::json& j);
};

// Raised when the objective throws; carries the failing iteration.
class ObjectiveError : public std::runtime_error {
 public:
  ObjectiveError(std::size_t iteration, const std::string& what)
      : std::runtime_error("objective failed at iteration " +
                           std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

// m(x) - tau * s(x), minimized.
double lcb(const Surrogate& model, const Config& config, double tau);
Eigen::VectorXd lcb(const Surrogate& model, std::span<const Config> configs,
                    double tau);

// Best of `n_candidates` uniform candidates, refined by 20 Gaussian
// perturbation steps (sd = 5% of each model range) around it.
Config propose(const Surrogate& model, const SearchSpace& space, double tau,
               std::size_t n_candidates, std::uint64_t seed);

// Fits a surrogate to evaluated configurations.
Surrogate fit_surrogate(const SearchSpace& space,
                        std::span<const Config> configs,
                        std::span<const double> costs, const BoConfig& cfg,
                        std::uint64_t seed);

std::size_t select_incumbent(const Surrogate& model,
                             std::span<const Evaluation> evaluations,
                             IncumbentRule rule);

RunArchive run_bo(const Objective& obj, const SearchSpace& space,
                  const BoConfig& cfg);

}  // namespace bopdp

#endif  // BOPDP_OPTIMIZER_HPP_
