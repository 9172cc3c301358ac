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

// Box-constrained Nelder-Mead simplex search.

#ifndef BOPDP_NELDER_MEAD_HPP_
#define BOPDP_NELDER_MEAD_HPP_

#include <Eigen/Dense>

#include <functional>

namespace bopdp {

struct NelderMeadOptions {
  int max_evaluations = 400;
  // Initial simplex edge as a fraction of each box width.
  double initial_step = 0.1;
  double f_tolerance = 1e-8;
  double x_tolerance = 1e-6;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
};

// Minimizes f over [lower, upper]. Trial points are clamped onto the box,
// so f is only ever evaluated inside it. Non-finite values count as +inf.
NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& start, const Eigen::VectorXd& lower,
    const Eigen::VectorXd& upper, const NelderMeadOptions& options = {});

}  // namespace bopdp

#endif  // BOPDP_NELDER_MEAD_HPP_
