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

// Black-box cost functions and brute-force partial dependence oracles.

#ifndef BOPDP_OBJECTIVE_HPP_
#define BOPDP_OBJECTIVE_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bopdp/space.hpp"

namespace bopdp {

// A pure cost function over configurations of one search space.
class Objective {
 public:
  using Fn = std::function<double(const Config&)>;

  Objective(std::string name, SearchSpace space, Fn fn)
      : name_(std::move(name)), space_(std::move(space)), fn_(std::move(fn)) {}

  double operator()(const Config& config) const { return fn_(config); }

  const std::string& name() const { return name_; }
  const SearchSpace& space() const { return space_; }
  std::size_t dimension() const { return space_.size(); }

 private:
  std::string name_;
  SearchSpace space_;
  Fn fn_;
};

// kStandard is the usual two-well function (minimum -39.166 per dimension).
// kPlusQuadratic flips the quadratic term to +16 x^2, a single-well variant.
enum class StyblinskiTangVariant { kStandard, kPlusQuadratic };

// 0.5 * sum(x^4 - 16 x^2 + 5 x) on [-5, 5]^d, params named x1..xd.
Objective styblinski_tang(
    std::size_t d,
    StyblinskiTangVariant variant = StyblinskiTangVariant::kStandard);

// One coordinate's term of the separable sum.
double styblinski_tang_term(
    double x, StyblinskiTangVariant variant = StyblinskiTangVariant::kStandard);

SearchSpace styblinski_tang_space(std::size_t d);

struct TableRow {
  Config config;
  double cost = 0.0;
};

// Inverse-distance-weighted k-nearest-neighbour interpolation over the rows,
// in unit-scaled coordinates. A query coinciding with a row returns that
// row's cost.
Objective table_objective(std::vector<TableRow> rows, const SearchSpace& space,
                          std::size_t k);

// CSV with one column per parameter (native units, labels for categoricals,
// empty cell = inactive) followed by a `cost` column.
std::vector<TableRow> read_table_csv(const std::string& path,
                                     const SearchSpace& space);
std::vector<TableRow> parse_table_csv(const std::string& text,
                                      const SearchSpace& space);

struct TrueMarginal {
  Grid grid;
  std::vector<double> values;
  std::size_t mc_sample_size = 0;
};

// Monte Carlo partial dependence of the true cost. One uniform sample of the
// remaining parameters is shared by all grid points; combinations that are
// invalid in the search space are left out of the average.
TrueMarginal true_pd(const Objective& obj, const SearchSpace& space,
                     std::size_t s, const Grid& grid, std::size_t n_mc,
                     std::uint64_t seed);

// Same estimate on a given sample restricted to `members`: the ground truth
// for a sub-regional PDP computed on the same rows.
TrueMarginal true_pd_on_sample(const Objective& obj, const SearchSpace& space,
                               std::size_t s, const Grid& grid,
                               std::span<const Config> sample,
                               std::span<const std::size_t> members);

}  // namespace bopdp

#endif  // BOPDP_OBJECTIVE_HPP_
