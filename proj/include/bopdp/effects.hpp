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

// ICE curves and partial dependence with model uncertainty.
//
// For a parameter S, a grid over S and a Monte Carlo sample of the other
// parameters, the surrogate is queried at every (grid point, sample row)
// pair. A PDP over a member set N' averages those predictions:
//
//   mean      (1/|N'|) sum_i m(x_S, x_C^i)
//   full_cov  (1/|N'|^2) 1' K(x_S) 1   using the joint posterior covariance
//   diag      (1/|N'|) sum_i s^2(x_S, x_C^i)
//
// In hierarchical spaces only rows that stay valid after inserting x_S
// enter the average at that grid point.

#ifndef BOPDP_EFFECTS_HPP_
#define BOPDP_EFFECTS_HPP_

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bopdp/space.hpp"
#include "bopdp/surrogate.hpp"

namespace bopdp {

enum class IceMode { kDiagOnly, kWithJoint };
enum class VarianceEstimator { kDiag, kFullCov };

std::string to_string(VarianceEstimator estimator);
VarianceEstimator parse_estimator(const std::string& name);

struct IceBundle {
  std::size_t s = 0;
  Grid grid;
  std::vector<Config> sample;
  Eigen::MatrixXd mean_curves;  // n x G
  Eigen::MatrixXd var_curves;   // n x G
  // valid(i, g) == 1 iff sample row i stays valid with x_S = grid[g].
  Eigen::Matrix<unsigned char, Eigen::Dynamic, Eigen::Dynamic> valid;
  bool all_valid = true;
  // Posterior variance at each sample row's own configuration.
  Eigen::VectorXd point_var;
  // One n x n posterior covariance per grid point (kWithJoint only).
  std::vector<Eigen::MatrixXd> joint_cov;

  std::size_t n() const { return sample.size(); }
  std::size_t grid_size() const { return grid.size(); }
  bool has_joint() const { return !joint_cov.empty(); }
  bool is_valid(std::size_t i, std::size_t g) const {
    return valid(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g)) != 0;
  }
};

struct IceOptions {
  IceMode mode = IceMode::kDiagOnly;
  // Largest sample for which joint covariances are cached.
  std::size_t max_joint_n = 2000;
};

IceBundle ice(const Surrogate& model, const SearchSpace& space, std::size_t s,
              const Grid& grid, std::vector<Config> sample,
              const IceOptions& options = {});

std::vector<std::size_t> all_members(const IceBundle& bundle);

// Throws EstimationError naming the grid point if it has no valid member.
Eigen::VectorXd pdp_mean(const IceBundle& bundle,
                         std::span<const std::size_t> members);
Eigen::VectorXd pdp_var_diag(const IceBundle& bundle,
                             std::span<const std::size_t> members);
// Requires a bundle built with IceMode::kWithJoint over a flat space.
Eigen::VectorXd pdp_var_full(const IceBundle& bundle,
                             std::span<const std::size_t> members);

// Number of valid members per grid point.
std::vector<std::size_t> valid_counts(const IceBundle& bundle,
                                      std::span<const std::size_t> members);

struct PdpEstimate {
  Grid grid;
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  VarianceEstimator estimator = VarianceEstimator::kDiag;
  double alpha = 0.05;
  std::vector<std::size_t> members;
  std::vector<std::size_t> n_valid;

  // q_{1-alpha/2} * sqrt(variance[g]).
  double half_width(std::size_t g) const;
  double band_lo(std::size_t g) const;
  double band_hi(std::size_t g) const;
};

// Standard normal quantile q_{1-alpha/2}.
double normal_quantile_two_sided(double alpha);

PdpEstimate pdp(const IceBundle& bundle, std::span<const std::size_t> members,
                VarianceEstimator estimator = VarianceEstimator::kDiag,
                double alpha = 0.05);

// Builds the bundle and returns the global PDP over the whole sample.
PdpEstimate pdp(const Surrogate& model, const SearchSpace& space, std::size_t s,
                const Grid& grid, std::vector<Config> sample,
                VarianceEstimator estimator = VarianceEstimator::kDiag,
                double alpha = 0.05);

// CSV: grid_value,mean,variance,band_lo,band_hi,n_members,estimator
std::string pdp_to_csv(const PdpEstimate& estimate, const SearchSpace& space);

}  // namespace bopdp

#endif  // BOPDP_EFFECTS_HPP_
