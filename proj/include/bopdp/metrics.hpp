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

// Evaluation scores: MMD between samples, NLL of the true partial dependence
// under a PDP, confidence band widths and relative improvements.

#ifndef BOPDP_METRICS_HPP_
#define BOPDP_METRICS_HPP_

#include <Eigen/Dense>

#include <optional>
#include <span>

#include "bopdp/effects.hpp"
#include "bopdp/objective.hpp"
#include "bopdp/space.hpp"

namespace bopdp {

// Median of the pairwise Euclidean distances between rows.
double median_pairwise_distance(const Eigen::MatrixXd& points);

// Unbiased MMD^2 with an RBF kernel exp(-|x - y|^2 / (2 sigma^2)). Rows are
// points. Without `sigma` the median pairwise distance of the pooled sample
// is used. May be negative.
double mmd2(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
            std::optional<double> sigma = std::nullopt);

// Unit-cube coordinates of configurations; inactive values map to 0.5.
Eigen::MatrixXd unit_coordinates(const SearchSpace& space,
                                 std::span<const Config> configs);

// MMD^2 of two configuration samples after mapping both onto [0, 1]^d.
double mmd2(const SearchSpace& space, std::span<const Config> X,
            std::span<const Config> Y, std::optional<double> sigma = std::nullopt);

inline constexpr double kVarianceFloor = 1e-12;

// Gaussian NLL of `truth` under N(mean, variance), variance floored.
double nll_point(double truth, double mean, double variance);

struct NllResult {
  Eigen::VectorXd per_point;
  double mean = 0.0;
};

NllResult nll(const PdpEstimate& pdp, const TrueMarginal& truth);

struct Confidence {
  double mc = 0.0;  // mean posterior sd over the grid
  double oc = 0.0;  // posterior sd at the grid point nearest the incumbent
};

// Distances to the incumbent are measured in model coordinates; ties go to
// the lower grid point.
Confidence confidence(const PdpEstimate& pdp, const SearchSpace& space,
                      double incumbent_s);

struct PdpScore {
  Eigen::VectorXd nll;
  double mean_nll = 0.0;
  double mc = 0.0;
  double oc = 0.0;
};

PdpScore score(const PdpEstimate& pdp, const TrueMarginal& truth,
               const SearchSpace& space, double incumbent_s);

struct ImprovementReport {
  // Percent; empty when the global value is zero or not finite.
  std::optional<double> delta_mc;
  std::optional<double> delta_oc;
  std::optional<double> delta_nll;
};

// 100 * (global - sub) / |global|, or empty when undefined.
std::optional<double> relative_improvement(double global, double sub);

ImprovementReport improvement(const PdpScore& global, const PdpScore& sub);

}  // namespace bopdp

#endif  // BOPDP_METRICS_HPP_
