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

#include "bopdp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "bopdp/errors.hpp"

namespace bopdp {

double median_pairwise_distance(const Eigen::MatrixXd& points) {
  const auto n = points.rows();
  if (n < 2) throw ContractError("median distance needs at least two points");
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d.push_back((points.row(i) - points.row(j)).norm());
    }
  }
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
  const double upper = d[mid];
  if (d.size() % 2 == 1) return upper;
  const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

namespace {

// Sum of k(x, y) over all row pairs; `skip_diagonal` for within-sample sums.
double KernelSum(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double gamma,
                 bool skip_diagonal) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < B.rows(); ++j) {
      if (skip_diagonal && i == j) continue;
      total += std::exp(-gamma * (A.row(i) - B.row(j)).squaredNorm());
    }
  }
  return total;
}

}  // namespace

double mmd2(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
            std::optional<double> sigma) {
  if (X.rows() < 2 || Y.rows() < 2) throw ContractError("mmd2: need >= 2 points per sample");
  if (X.cols() != Y.cols()) throw ContractError("mmd2: dimension mismatch");
  double bw;
  if (sigma) {
    bw = *sigma;
  } else {
    Eigen::MatrixXd pooled(X.rows() + Y.rows(), X.cols());
    pooled << X, Y;
    bw = median_pairwise_distance(pooled);
  }
  if (!(bw > 0.0)) throw ContractError("mmd2: bandwidth must be positive");
  const double gamma = 1.0 / (2.0 * bw * bw);
  const double n = static_cast<double>(X.rows());
  const double m = static_cast<double>(Y.rows());
  return KernelSum(X, X, gamma, true) / (n * (n - 1.0)) +
         KernelSum(Y, Y, gamma, true) / (m * (m - 1.0)) -
         2.0 * KernelSum(X, Y, gamma, false) / (n * m);
}

Eigen::MatrixXd unit_coordinates(const SearchSpace& space,
                                 std::span<const Config> configs) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(configs.size()),
                      static_cast<Eigen::Index>(space.size()));
  for (std::size_t r = 0; r < configs.size(); ++r) {
    if (configs[r].size() != space.size()) throw ContractError("config size mismatch");
    for (std::size_t j = 0; j < space.size(); ++j) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
          configs[r].active(j) ? space.to_unit(j, configs[r].at(j)) : 0.5;
    }
  }
  return out;
}

double mmd2(const SearchSpace& space, std::span<const Config> X,
            std::span<const Config> Y, std::optional<double> sigma) {
  return mmd2(unit_coordinates(space, X), unit_coordinates(space, Y), sigma);
}

double nll_point(double truth, double mean, double variance) {
  const double v = std::max(variance, kVarianceFloor);
  const double e = truth - mean;
  return 0.5 * std::log(2.0 * std::numbers::pi * v) + e * e / (2.0 * v);
}

NllResult nll(const PdpEstimate& pdp, const TrueMarginal& truth) {
  if (pdp.grid.param != truth.grid.param || pdp.grid.points != truth.grid.points ||
      truth.values.size() != pdp.grid.size()) {
    throw ContractError("nll: PDP and true marginal use different grids");
  }
  NllResult out;
  const auto G = static_cast<Eigen::Index>(pdp.grid.size());
  out.per_point.resize(G);
  for (Eigen::Index g = 0; g < G; ++g) {
    out.per_point[g] =
        nll_point(truth.values[static_cast<std::size_t>(g)], pdp.mean[g], pdp.variance[g]);
  }
  out.mean = G > 0 ? out.per_point.mean() : 0.0;
  return out;
}

Confidence confidence(const PdpEstimate& pdp, const SearchSpace& space,
                      double incumbent_s) {
  const std::size_t G = pdp.grid.size();
  if (G == 0) throw ContractError("confidence: empty grid");
  Confidence c;
  const double target = space.to_model(pdp.grid.param, incumbent_s);
  std::size_t nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < G; ++g) {
    const double sd = std::sqrt(std::max(pdp.variance[static_cast<Eigen::Index>(g)], 0.0));
    c.mc += sd;
    const double dist = std::abs(space.to_model(pdp.grid.param, pdp.grid.points[g]) - target);
    if (dist < best) {
      best = dist;
      nearest = g;
    }
  }
  c.mc /= static_cast<double>(G);
  c.oc = std::sqrt(std::max(pdp.variance[static_cast<Eigen::Index>(nearest)], 0.0));
  return c;
}

PdpScore score(const PdpEstimate& pdp, const TrueMarginal& truth,
               const SearchSpace& space, double incumbent_s) {
  PdpScore s;
  auto n = nll(pdp, truth);
  s.nll = std::move(n.per_point);
  s.mean_nll = n.mean;
  const auto c = confidence(pdp, space, incumbent_s);
  s.mc = c.mc;
  s.oc = c.oc;
  return s;
}

std::optional<double> relative_improvement(double global, double sub) {
  if (!std::isfinite(global) || !std::isfinite(sub) || global == 0.0) return std::nullopt;
  return 100.0 * (global - sub) / std::abs(global);
}

ImprovementReport improvement(const PdpScore& global, const PdpScore& sub) {
  return {relative_improvement(global.mc, sub.mc),
          relative_improvement(global.oc, sub.oc),
          relative_improvement(global.mean_nll, sub.mean_nll)};
}

}  // namespace bopdp
