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

#include "bopdp/objective.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>

#include "bopdp/errors.hpp"
#include "bopdp/format.hpp"

namespace bopdp {

double styblinski_tang_term(double x, StyblinskiTangVariant variant) {
  const double quad = variant == StyblinskiTangVariant::kStandard ? -16.0 : 16.0;
  const double x2 = x * x;
  return 0.5 * (x2 * x2 + quad * x2 + 5.0 * x);
}

SearchSpace styblinski_tang_space(std::size_t d) {
  if (d == 0) throw ContractError("Styblinski-Tang needs d >= 1");
  std::vector<ParamDef> params;
  for (std::size_t i = 0; i < d; ++i) {
    params.push_back(ParamDef::Continuous("x" + std::to_string(i + 1), -5.0, 5.0));
  }
  return SearchSpace(std::move(params));
}

Objective styblinski_tang(std::size_t d, StyblinskiTangVariant variant) {
  SearchSpace space = styblinski_tang_space(d);
  auto fn = [d, variant](const Config& c) {
    if (c.size() != d) throw ContractError("Styblinski-Tang dimension mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < d; ++i) sum += styblinski_tang_term(c.at(i), variant);
    return sum;
  };
  std::string name = "styblinski_tang";
  if (variant == StyblinskiTangVariant::kPlusQuadratic) name += "_plus";
  return Objective(std::move(name), std::move(space), std::move(fn));
}

namespace {

struct Table {
  SearchSpace space;
  std::vector<std::vector<double>> coords;  // unit scale, NaN = inactive
  std::vector<double> costs;
  std::size_t k = 1;

  std::vector<double> Project(const Config& c) const {
    std::vector<double> out(space.size(), std::nan(""));
    for (std::size_t i = 0; i < space.size(); ++i) {
      if (c.active(i)) out[i] = space.to_unit(i, c.at(i));
    }
    return out;
  }

  double Distance(const std::vector<double>& a,
                  const std::vector<double>& b) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const bool ia = std::isnan(a[i]);
      const bool ib = std::isnan(b[i]);
      if (ia && ib) continue;
      if (ia != ib) {
        sum += 1.0;
      } else if (space.param(i).kind == ParamKind::kCategorical) {
        sum += a[i] == b[i] ? 0.0 : 1.0;
      } else {
        sum += (a[i] - b[i]) * (a[i] - b[i]);
      }
    }
    return std::sqrt(sum);
  }

  double operator()(const Config& query) const {
    if (query.size() != space.size()) {
      throw ContractError("table objective: config size mismatch");
    }
    for (std::size_t i = 0; i < space.size(); ++i) {
      if (!query.active(i)) continue;
      const auto& p = space.param(i);
      const double v = query.at(i);
      if (!(v >= p.lower && v <= p.upper)) {
        throw ContractError("table objective: '" + p.name + "' = " +
                            FormatDouble(v) + " outside search space bounds");
      }
    }
    const auto q = Project(space.snap(query));
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(coords.size());
    for (std::size_t r = 0; r < coords.size(); ++r) {
      dist.emplace_back(Distance(q, coords[r]), r);
    }
    const std::size_t kk = std::min(k, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(kk),
                      dist.end());
    if (dist.front().first < 1e-12) return costs[dist.front().second];
    double wsum = 0.0;
    double acc = 0.0;
    for (std::size_t j = 0; j < kk; ++j) {
      const double w = 1.0 / dist[j].first;
      wsum += w;
      acc += w * costs[dist[j].second];
    }
    return acc / wsum;
  }
};

}  // namespace

Objective table_objective(std::vector<TableRow> rows, const SearchSpace& space,
                          std::size_t k) {
  if (rows.empty()) throw ContractError("table objective needs rows");
  if (k == 0) throw ContractError("table objective needs k >= 1");
  auto table = std::make_shared<Table>();
  table->space = space;
  table->k = k;
  for (const auto& row : rows) {
    if (!is_valid(space, row.config)) {
      throw ContractError("table objective: invalid configuration in rows");
    }
    table->coords.push_back(table->Project(row.config));
    table->costs.push_back(row.cost);
  }
  return Objective("table", space,
                   [table](const Config& c) { return (*table)(c); });
}

std::vector<TableRow> parse_table_csv(const std::string& text,
                                      const SearchSpace& space) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ContractError("empty objective CSV");
  const auto header = SplitCsvLine(line);
  if (header.empty() || header.back() != "cost") {
    throw ContractError("objective CSV must end with a 'cost' column");
  }
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c + 1 < header.size(); ++c) {
    cols.push_back(space.index_of(header[c]));
  }
  std::vector<TableRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = SplitCsvLine(line);
    if (cells.size() != header.size()) {
      throw ContractError("objective CSV line " + std::to_string(lineno) +
                          ": expected " + std::to_string(header.size()) +
                          " cells");
    }
    TableRow row;
    row.config.values.assign(space.size(), std::nullopt);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const std::size_t i = cols[c];
      const auto& cell = cells[c];
      if (cell.empty() || cell == "NA") continue;
      const auto& p = space.param(i);
      if (p.kind == ParamKind::kCategorical) {
        auto it = std::find(p.levels.begin(), p.levels.end(), cell);
        if (it == p.levels.end()) {
          throw ContractError("objective CSV line " + std::to_string(lineno) +
                              ": unknown level '" + cell + "'");
        }
        row.config.values[i] = static_cast<double>(it - p.levels.begin());
      } else {
        row.config.values[i] = std::stod(cell);
      }
    }
    row.cost = std::stod(cells.back());
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<TableRow> read_table_csv(const std::string& path,
                                     const SearchSpace& space) {
  return parse_table_csv(ReadFile(path), space);
}

TrueMarginal true_pd_on_sample(const Objective& obj, const SearchSpace& space,
                               std::size_t s, const Grid& grid,
                               std::span<const Config> sample,
                               std::span<const std::size_t> members) {
  if (s >= space.size()) throw ContractError("parameter index out of range");
  TrueMarginal out;
  out.grid = grid;
  out.mc_sample_size = members.size();
  out.values.resize(grid.size());
  const bool flat = space.is_flat();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i : members) {
      Config c = sample[i];
      c.values[s] = grid.points[g];
      if (!flat && !is_valid(space, c)) continue;
      sum += obj(c);
      ++count;
    }
    if (count == 0) {
      throw EstimationError("true PD: no valid configuration at grid point " +
                            std::to_string(g));
    }
    out.values[g] = sum / static_cast<double>(count);
  }
  return out;
}

TrueMarginal true_pd(const Objective& obj, const SearchSpace& space,
                     std::size_t s, const Grid& grid, std::size_t n_mc,
                     std::uint64_t seed) {
  if (n_mc == 0) throw ContractError("true PD needs n_mc >= 1");
  const auto sample = sample_uniform(space, n_mc, seed);
  std::vector<std::size_t> members(n_mc);
  std::iota(members.begin(), members.end(), std::size_t{0});
  return true_pd_on_sample(obj, space, s, grid, sample, members);
}

}  // namespace bopdp
