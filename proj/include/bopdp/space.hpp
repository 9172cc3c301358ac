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

// Hyperparameter search spaces: typed parameters, parent conditions,
// uniform sampling and PDP grids.
//
// Values are stored in native units. Categorical values are stored as the
// level index. Three coordinate systems are used throughout the library:
//
//   native     what the user sees (e.g. learning rate 1e-3)
//   model      log10(native) for log-scaled params, native otherwise,
//              level index for categoricals. Sampling is uniform here and
//              the surrogate consumes these coordinates.
//   unit       model coordinates affinely mapped onto [0, 1].

#ifndef BOPDP_SPACE_HPP_
#define BOPDP_SPACE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace bopdp {

using Rng = std::mt19937_64;

// Derives an independent seed for a named sub-stream (splitmix64 mixing).
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);

enum class ParamKind { kContinuous, kInteger, kCategorical };

struct Condition {
  std::string parent;
  // Parent values that activate the child. Categorical parents use level
  // labels; numeric parents are not supported as condition sources.
  std::vector<std::string> values;
};

struct ParamDef {
  std::string name;
  ParamKind kind = ParamKind::kContinuous;
  double lower = 0.0;
  double upper = 1.0;
  std::vector<std::string> levels;
  bool log_scale = false;
  std::optional<Condition> condition;

  static ParamDef Continuous(std::string name, double lower, double upper,
                             bool log_scale = false);
  static ParamDef Integer(std::string name, double lower, double upper,
                          bool log_scale = false);
  static ParamDef Categorical(std::string name,
                              std::vector<std::string> levels);
  ParamDef& When(std::string parent, std::vector<std::string> values);

  bool is_numeric() const { return kind != ParamKind::kCategorical; }
};

// One configuration. `values[i]` is empty iff param i is inactive.
struct Config {
  std::vector<std::optional<double>> values;

  Config() = default;
  explicit Config(std::vector<std::optional<double>> v)
      : values(std::move(v)) {}

  std::size_t size() const { return values.size(); }
  bool active(std::size_t i) const { return values[i].has_value(); }
  double at(std::size_t i) const { return *values[i]; }

  friend bool operator==(const Config&, const Config&) = default;
};

// Immutable after construction. Parameters keep their declaration order;
// conditions must form a forest.
class SearchSpace {
 public:
  SearchSpace() = default;
  explicit SearchSpace(std::vector<ParamDef> params);

  std::size_t size() const { return params_.size(); }
  const std::vector<ParamDef>& params() const { return params_; }
  const ParamDef& param(std::size_t i) const { return params_.at(i); }

  // Throws ContractError for unknown names.
  std::size_t index_of(const std::string& name) const;

  bool is_flat() const;
  std::optional<std::size_t> parent_of(std::size_t i) const {
    return parents_[i];
  }
  // Activating level indices of the parent (sorted).
  const std::vector<std::size_t>& activating_levels(std::size_t i) const {
    return activating_[i];
  }
  // Parents precede children.
  const std::vector<std::size_t>& topological_order() const {
    return order_;
  }

  // Whether param i should be active given the already-set ancestors.
  bool should_be_active(std::size_t i, const Config& config) const;

  double to_model(std::size_t i, double native) const;
  double from_model(std::size_t i, double model) const;
  std::pair<double, double> model_bounds(std::size_t i) const;
  double to_unit(std::size_t i, double native) const;

  // Integer params are rounded and every active value clamped to bounds.
  Config snap(Config config) const;

  // Builds a config from name/value pairs; labels are accepted for
  // categoricals. Missing params are inactive. Throws on unknown names.
  Config make_config(const nlohmann::json& values) const;
  nlohmann::json config_to_json(const Config& config) const;

  // Renders a value in native units (label for categoricals).
  std::string format_value(std::size_t i, double native) const;

  nlohmann::json to_json() const;
  static SearchSpace from_json(const nlohmann::json& doc);
  static SearchSpace load(const std::string& path);

 private:
  std::vector<ParamDef> params_;
  std::vector<std::optional<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> activating_;
  std::vector<std::size_t> order_;
};

struct Grid {
  std::size_t param = 0;
  std::vector<double> points;  // native units, strictly increasing

  std::size_t size() const { return points.size(); }
};

std::vector<Config> sample_uniform(const SearchSpace& space, std::size_t n,
                                   Rng& rng);
std::vector<Config> sample_uniform(const SearchSpace& space, std::size_t n,
                                   std::uint64_t seed);

bool is_valid(const SearchSpace& space, const Config& config);

Grid make_grid(const SearchSpace& space, std::size_t s, std::size_t g);

std::vector<std::size_t> subset_active(const SearchSpace& space,
                                       std::span<const Config> configs,
                                       std::size_t s);

}  // namespace bopdp

#endif  // BOPDP_SPACE_HPP_
