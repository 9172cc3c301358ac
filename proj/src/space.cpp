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

#include "bopdp/space.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "bopdp/errors.hpp"
#include "bopdp/format.hpp"

namespace bopdp {

namespace {

std::string KindName(ParamKind kind) {
  switch (kind) {
    case ParamKind::kContinuous:
      return "continuous";
    case ParamKind::kInteger:
      return "integer";
    case ParamKind::kCategorical:
      return "categorical";
  }
  return "continuous";
}

ParamKind ParseKind(const std::string& name) {
  if (name == "continuous" || name == "float" || name == "real") {
    return ParamKind::kContinuous;
  }
  if (name == "integer" || name == "int") return ParamKind::kInteger;
  if (name == "categorical" || name == "cat") return ParamKind::kCategorical;
  throw ContractError("unknown parameter kind '" + name + "'");
}

void Validate(const ParamDef& p) {
  if (p.name.empty()) throw ContractError("parameter with empty name");
  if (p.is_numeric()) {
    if (!(std::isfinite(p.lower) && std::isfinite(p.upper)) ||
        !(p.lower < p.upper)) {
      throw ContractError("parameter '" + p.name +
                          "' needs finite lower < upper");
    }
    if (p.log_scale && !(p.lower > 0.0)) {
      throw ContractError("log-scaled parameter '" + p.name +
                          "' needs lower > 0");
    }
  } else {
    if (p.levels.empty()) {
      throw ContractError("categorical parameter '" + p.name +
                          "' has no levels");
    }
    std::set<std::string> unique(p.levels.begin(), p.levels.end());
    if (unique.size() != p.levels.size()) {
      throw ContractError("categorical parameter '" + p.name +
                          "' has duplicate levels");
    }
    if (p.log_scale) {
      throw ContractError("categorical parameter '" + p.name +
                          "' cannot be log-scaled");
    }
  }
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ParamDef ParamDef::Continuous(std::string name, double lower, double upper,
                              bool log_scale) {
  ParamDef p;
  p.name = std::move(name);
  p.kind = ParamKind::kContinuous;
  p.lower = lower;
  p.upper = upper;
  p.log_scale = log_scale;
  return p;
}

ParamDef ParamDef::Integer(std::string name, double lower, double upper,
                           bool log_scale) {
  ParamDef p = Continuous(std::move(name), lower, upper, log_scale);
  p.kind = ParamKind::kInteger;
  return p;
}

ParamDef ParamDef::Categorical(std::string name,
                               std::vector<std::string> levels) {
  ParamDef p;
  p.name = std::move(name);
  p.kind = ParamKind::kCategorical;
  p.levels = std::move(levels);
  p.lower = 0.0;
  p.upper = static_cast<double>(p.levels.size()) - 1.0;
  return p;
}

ParamDef& ParamDef::When(std::string parent, std::vector<std::string> values) {
  condition = Condition{std::move(parent), std::move(values)};
  return *this;
}

SearchSpace::SearchSpace(std::vector<ParamDef> params)
    : params_(std::move(params)) {
  const std::size_t d = params_.size();
  std::set<std::string> names;
  for (const auto& p : params_) {
    Validate(p);
    if (!names.insert(p.name).second) {
      throw ContractError("duplicate parameter name '" + p.name + "'");
    }
  }
  parents_.assign(d, std::nullopt);
  activating_.assign(d, {});
  for (std::size_t i = 0; i < d; ++i) {
    const auto& cond = params_[i].condition;
    if (!cond) continue;
    const std::size_t parent = index_of(cond->parent);
    if (parent == i) {
      throw ContractError("parameter '" + params_[i].name +
                          "' conditions on itself");
    }
    const auto& pdef = params_[parent];
    if (pdef.kind != ParamKind::kCategorical) {
      throw ContractError("condition parent '" + pdef.name +
                          "' must be categorical");
    }
    if (cond->values.empty()) {
      throw ContractError("condition on '" + params_[i].name +
                          "' lists no activating values");
    }
    for (const auto& v : cond->values) {
      auto it = std::find(pdef.levels.begin(), pdef.levels.end(), v);
      if (it == pdef.levels.end()) {
        throw ContractError("condition value '" + v + "' is not a level of '" +
                            pdef.name + "'");
      }
      activating_[i].push_back(
          static_cast<std::size_t>(it - pdef.levels.begin()));
    }
    std::sort(activating_[i].begin(), activating_[i].end());
    activating_[i].erase(
        std::unique(activating_[i].begin(), activating_[i].end()),
        activating_[i].end());
    parents_[i] = parent;
  }

  // Depth = number of ancestors; a chain longer than d means a cycle.
  std::vector<std::size_t> depth(d, 0);
  for (std::size_t i = 0; i < d; ++i) {
    std::size_t cur = i;
    while (parents_[cur]) {
      cur = *parents_[cur];
      if (++depth[i] > d) {
        throw ContractError("cyclic conditions involving '" +
                            params_[i].name + "'");
      }
    }
  }
  order_.resize(d);
  for (std::size_t i = 0; i < d; ++i) order_[i] = i;
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::size_t a, std::size_t b) {
                     return depth[a] < depth[b];
                   });
}

std::size_t SearchSpace::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  throw ContractError("unknown parameter '" + name + "'");
}

bool SearchSpace::is_flat() const {
  return std::none_of(parents_.begin(), parents_.end(),
                      [](const auto& p) { return p.has_value(); });
}

bool SearchSpace::should_be_active(std::size_t i, const Config& config) const {
  const auto parent = parents_[i];
  if (!parent) return true;
  if (!config.active(*parent)) return false;
  const double v = config.at(*parent);
  const double r = std::round(v);
  if (r != v || r < 0) return false;
  const auto level = static_cast<std::size_t>(r);
  return std::binary_search(activating_[i].begin(), activating_[i].end(),
                            level);
}

double SearchSpace::to_model(std::size_t i, double native) const {
  return params_[i].log_scale ? std::log10(native) : native;
}

double SearchSpace::from_model(std::size_t i, double model) const {
  return params_[i].log_scale ? std::pow(10.0, model) : model;
}

std::pair<double, double> SearchSpace::model_bounds(std::size_t i) const {
  const auto& p = params_[i];
  return {to_model(i, p.lower), to_model(i, p.upper)};
}

double SearchSpace::to_unit(std::size_t i, double native) const {
  const auto [lo, hi] = model_bounds(i);
  if (hi <= lo) return 0.0;
  return (to_model(i, native) - lo) / (hi - lo);
}

Config SearchSpace::snap(Config config) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (!config.active(i)) continue;
    const auto& p = params_[i];
    double v = std::clamp(config.at(i), p.lower, p.upper);
    if (p.kind != ParamKind::kContinuous) v = std::round(v);
    config.values[i] = v;
  }
  return config;
}

Config SearchSpace::make_config(const nlohmann::json& values) const {
  Config c;
  c.values.assign(params_.size(), std::nullopt);
  for (auto it = values.begin(); it != values.end(); ++it) {
    const std::size_t i = index_of(it.key());
    const auto& v = it.value();
    if (v.is_null()) continue;
    const auto& p = params_[i];
    if (v.is_string()) {
      if (p.kind != ParamKind::kCategorical) {
        throw ContractError("parameter '" + p.name + "' expects a number");
      }
      const auto s = v.get<std::string>();
      auto lv = std::find(p.levels.begin(), p.levels.end(), s);
      if (lv == p.levels.end()) {
        throw ContractError("'" + s + "' is not a level of '" + p.name + "'");
      }
      c.values[i] = static_cast<double>(lv - p.levels.begin());
    } else {
      c.values[i] = v.get<double>();
    }
  }
  return c;
}

nlohmann::json SearchSpace::config_to_json(const Config& config) const {
  if (config.size() != params_.size()) {
    throw ContractError("config size does not match search space");
  }
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& p = params_[i];
    if (!config.active(i)) {
      out[p.name] = nullptr;
    } else if (p.kind == ParamKind::kCategorical) {
      out[p.name] = p.levels.at(static_cast<std::size_t>(config.at(i)));
    } else {
      out[p.name] = config.at(i);
    }
  }
  return out;
}

std::string SearchSpace::format_value(std::size_t i, double native) const {
  const auto& p = params_[i];
  if (p.kind == ParamKind::kCategorical) {
    return p.levels.at(static_cast<std::size_t>(native));
  }
  return FormatDouble(native);
}

nlohmann::json SearchSpace::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : params_) {
    nlohmann::json o;
    o["name"] = p.name;
    o["kind"] = KindName(p.kind);
    if (p.is_numeric()) {
      o["lower"] = p.lower;
      o["upper"] = p.upper;
      o["log"] = p.log_scale;
    } else {
      o["levels"] = p.levels;
    }
    if (p.condition) {
      o["condition"] = {{"parent", p.condition->parent},
                        {"values", p.condition->values}};
    }
    arr.push_back(std::move(o));
  }
  return arr;
}

SearchSpace SearchSpace::from_json(const nlohmann::json& doc) {
  const nlohmann::json& arr =
      doc.is_object() && doc.contains("params") ? doc.at("params") : doc;
  if (!arr.is_array()) {
    throw ContractError("search space must be a JSON array of parameters");
  }
  std::vector<ParamDef> params;
  for (const auto& o : arr) {
    ParamDef p;
    p.name = o.at("name").get<std::string>();
    p.kind = ParseKind(o.value("kind", std::string("continuous")));
    if (p.kind == ParamKind::kCategorical) {
      p.levels = o.at("levels").get<std::vector<std::string>>();
      p.lower = 0.0;
      p.upper = static_cast<double>(p.levels.size()) - 1.0;
    } else {
      p.lower = o.at("lower").get<double>();
      p.upper = o.at("upper").get<double>();
    }
    p.log_scale = o.value("log", false);
    if (o.contains("condition") && !o.at("condition").is_null()) {
      const auto& c = o.at("condition");
      p.condition = Condition{c.at("parent").get<std::string>(),
                              c.at("values").get<std::vector<std::string>>()};
    }
    params.push_back(std::move(p));
  }
  return SearchSpace(std::move(params));
}

SearchSpace SearchSpace::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractError("cannot open search space file " + path);
  return from_json(nlohmann::json::parse(in));
}

std::vector<Config> sample_uniform(const SearchSpace& space, std::size_t n,
                                   Rng& rng) {
  std::vector<Config> out;
  out.reserve(n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t k = 0; k < n; ++k) {
    Config c;
    c.values.assign(space.size(), std::nullopt);
    for (std::size_t i : space.topological_order()) {
      if (!space.should_be_active(i, c)) continue;
      const auto& p = space.param(i);
      const double u = unit(rng);
      if (p.kind == ParamKind::kCategorical) {
        const auto q = p.levels.size();
        c.values[i] = static_cast<double>(
            std::min(q - 1, static_cast<std::size_t>(u * static_cast<double>(q))));
      } else {
        const auto [lo, hi] = space.model_bounds(i);
        const double v = space.from_model(i, lo + u * (hi - lo));
        c.values[i] = std::clamp(v, p.lower, p.upper);
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Config> sample_uniform(const SearchSpace& space, std::size_t n,
                                   std::uint64_t seed) {
  Rng rng(seed);
  return sample_uniform(space, n, rng);
}

bool is_valid(const SearchSpace& space, const Config& config) {
  if (config.size() != space.size()) {
    throw ContractError("config has " + std::to_string(config.size()) +
                        " entries, search space has " +
                        std::to_string(space.size()));
  }
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (space.should_be_active(i, config) != config.active(i)) return false;
    if (!config.active(i)) continue;
    const auto& p = space.param(i);
    const double v = config.at(i);
    if (!std::isfinite(v)) return false;
    if (p.kind == ParamKind::kCategorical) {
      if (v != std::round(v) || v < 0 ||
          v >= static_cast<double>(p.levels.size())) {
        return false;
      }
    } else if (v < p.lower || v > p.upper) {
      return false;
    }
  }
  return true;
}

Grid make_grid(const SearchSpace& space, std::size_t s, std::size_t g) {
  if (s >= space.size()) {
    throw ContractError("grid parameter index " + std::to_string(s) +
                        " out of range");
  }
  const auto& p = space.param(s);
  Grid grid;
  grid.param = s;
  if (p.kind == ParamKind::kCategorical) {
    for (std::size_t l = 0; l < p.levels.size(); ++l) {
      grid.points.push_back(static_cast<double>(l));
    }
    return grid;
  }
  if (g < 2) throw ContractError("numeric grids need at least 2 points");
  const auto [lo, hi] = space.model_bounds(s);
  for (std::size_t k = 0; k < g; ++k) {
    double v;
    if (k == 0) {
      v = p.lower;
    } else if (k + 1 == g) {
      v = p.upper;
    } else {
      const double t = static_cast<double>(k) / static_cast<double>(g - 1);
      v = space.from_model(s, lo + t * (hi - lo));
    }
    if (p.kind == ParamKind::kInteger) v = std::round(v);
    if (grid.points.empty() || v > grid.points.back()) grid.points.push_back(v);
  }
  return grid;
}

std::vector<std::size_t> subset_active(const SearchSpace& space,
                                       std::span<const Config> configs,
                                       std::size_t s) {
  if (s >= space.size()) {
    throw ContractError("parameter index out of range");
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    if (configs[i].active(s)) out.push_back(i);
  }
  return out;
}

}  // namespace bopdp
