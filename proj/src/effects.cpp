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

#include "bopdp/effects.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <numeric>

#include "bopdp/errors.hpp"
#include "bopdp/format.hpp"

namespace bopdp {

std::string to_string(VarianceEstimator estimator) {
  return estimator == VarianceEstimator::kFullCov ? "full" : "diag";
}

VarianceEstimator parse_estimator(const std::string& name) {
  if (name == "diag") return VarianceEstimator::kDiag;
  if (name == "full" || name == "full_cov") return VarianceEstimator::kFullCov;
  throw ContractError("unknown variance estimator '" + name + "'");
}

IceBundle ice(const Surrogate& model, const SearchSpace& space, std::size_t s,
              const Grid& grid, std::vector<Config> sample,
              const IceOptions& options) {
  if (s >= space.size()) throw ContractError("ice: parameter index out of range");
  if (grid.param != s) throw ContractError("ice: grid belongs to another parameter");
  if (grid.size() == 0) throw ContractError("ice: empty grid");
  if (sample.empty()) throw ContractError("ice: empty Monte Carlo sample");
  for (const auto& c : sample) {
    if (c.size() != space.size()) throw ContractError("ice: config size mismatch");
  }
  const bool flat = space.is_flat();
  const bool joint = options.mode == IceMode::kWithJoint;
  if (joint && !flat) {
    throw ContractError(
        "ice: joint covariances are only supported for flat search spaces");
  }
  if (joint && sample.size() > options.max_joint_n) {
    throw ContractError("ice: sample of " + std::to_string(sample.size()) +
                        " rows exceeds the joint covariance cap of " +
                        std::to_string(options.max_joint_n));
  }

  const auto n = static_cast<Eigen::Index>(sample.size());
  const auto G = static_cast<Eigen::Index>(grid.size());
  IceBundle b;
  b.s = s;
  b.grid = grid;
  b.mean_curves = Eigen::MatrixXd::Zero(n, G);
  b.var_curves = Eigen::MatrixXd::Zero(n, G);
  b.valid.setOnes(n, G);
  if (joint) b.joint_cov.resize(grid.size());

  std::vector<Config> queries;
  std::vector<Eigen::Index> rows;
  for (Eigen::Index g = 0; g < G; ++g) {
    queries.clear();
    rows.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      Config c = sample[static_cast<std::size_t>(i)];
      c.values[s] = grid.points[static_cast<std::size_t>(g)];
      if (!flat && !is_valid(space, c)) {
        b.valid(i, g) = 0;
        b.all_valid = false;
        continue;
      }
      queries.push_back(std::move(c));
      rows.push_back(i);
    }
    if (queries.empty()) continue;
    if (joint) {
      auto slice = model.predict_joint(queries);
      b.mean_curves.col(g) = slice.means;
      b.var_curves.col(g) = slice.covariance.diagonal();
      b.joint_cov[static_cast<std::size_t>(g)] = std::move(slice.covariance);
    } else {
      Eigen::VectorXd mean;
      Eigen::VectorXd var;
      model.predict_marginal(queries, &mean, &var);
      for (std::size_t k = 0; k < rows.size(); ++k) {
        b.mean_curves(rows[k], g) = mean[static_cast<Eigen::Index>(k)];
        b.var_curves(rows[k], g) = var[static_cast<Eigen::Index>(k)];
      }
    }
  }
  model.predict_marginal(sample, nullptr, &b.point_var);
  b.sample = std::move(sample);
  return b;
}

std::vector<std::size_t> all_members(const IceBundle& bundle) {
  std::vector<std::size_t> m(bundle.n());
  std::iota(m.begin(), m.end(), std::size_t{0});
  return m;
}

namespace {

Eigen::VectorXd MaskedColumnMeans(const IceBundle& b, const Eigen::MatrixXd& curves,
                                  std::span<const std::size_t> members) {
  const auto G = static_cast<Eigen::Index>(b.grid_size());
  Eigen::VectorXd out(G);
  for (Eigen::Index g = 0; g < G; ++g) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i : members) {
      if (i >= b.n()) throw ContractError("pdp: member index out of range");
      if (!b.is_valid(i, static_cast<std::size_t>(g))) continue;
      sum += curves(static_cast<Eigen::Index>(i), g);
      ++count;
    }
    if (count == 0) {
      throw EstimationError("pdp: grid point " + std::to_string(g) + " (value " +
                            FormatDouble(b.grid.points[static_cast<std::size_t>(g)]) +
                            ") has no valid member");
    }
    out[g] = sum / static_cast<double>(count);
  }
  return out;
}

}  // namespace

Eigen::VectorXd pdp_mean(const IceBundle& bundle,
                         std::span<const std::size_t> members) {
  return MaskedColumnMeans(bundle, bundle.mean_curves, members);
}

Eigen::VectorXd pdp_var_diag(const IceBundle& bundle,
                             std::span<const std::size_t> members) {
  return MaskedColumnMeans(bundle, bundle.var_curves, members);
}

Eigen::VectorXd pdp_var_full(const IceBundle& bundle,
                             std::span<const std::size_t> members) {
  if (!bundle.has_joint()) {
    throw ContractError("pdp_var_full: bundle lacks joint covariances");
  }
  if (members.empty()) throw EstimationError("pdp_var_full: no members");
  const auto G = static_cast<Eigen::Index>(bundle.grid_size());
  const double m = static_cast<double>(members.size());
  Eigen::VectorXd out(G);
  for (Eigen::Index g = 0; g < G; ++g) {
    const auto& K = bundle.joint_cov[static_cast<std::size_t>(g)];
    double sum = 0.0;
    for (std::size_t j : members) {
      if (j >= bundle.n()) throw ContractError("pdp: member index out of range");
      const auto col = K.col(static_cast<Eigen::Index>(j));
      for (std::size_t i : members) sum += col[static_cast<Eigen::Index>(i)];
    }
    out[g] = std::max(sum / (m * m), 0.0);
  }
  return out;
}

std::vector<std::size_t> valid_counts(const IceBundle& bundle,
                                      std::span<const std::size_t> members) {
  std::vector<std::size_t> out(bundle.grid_size(), 0);
  for (std::size_t g = 0; g < bundle.grid_size(); ++g) {
    for (std::size_t i : members) out[g] += bundle.is_valid(i, g) ? 1 : 0;
  }
  return out;
}

double normal_quantile_two_sided(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ContractError("alpha must be in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(),
                               1.0 - alpha / 2.0);
}

double PdpEstimate::half_width(std::size_t g) const {
  return normal_quantile_two_sided(alpha) *
         std::sqrt(std::max(variance[static_cast<Eigen::Index>(g)], 0.0));
}

double PdpEstimate::band_lo(std::size_t g) const {
  return mean[static_cast<Eigen::Index>(g)] - half_width(g);
}

double PdpEstimate::band_hi(std::size_t g) const {
  return mean[static_cast<Eigen::Index>(g)] + half_width(g);
}

PdpEstimate pdp(const IceBundle& bundle, std::span<const std::size_t> members,
                VarianceEstimator estimator, double alpha) {
  normal_quantile_two_sided(alpha);  // validates alpha
  PdpEstimate out;
  out.grid = bundle.grid;
  out.mean = pdp_mean(bundle, members);
  out.variance = estimator == VarianceEstimator::kFullCov
                     ? pdp_var_full(bundle, members)
                     : pdp_var_diag(bundle, members);
  out.estimator = estimator;
  out.alpha = alpha;
  out.members.assign(members.begin(), members.end());
  out.n_valid = valid_counts(bundle, members);
  return out;
}

PdpEstimate pdp(const Surrogate& model, const SearchSpace& space, std::size_t s,
                const Grid& grid, std::vector<Config> sample,
                VarianceEstimator estimator, double alpha) {
  IceOptions opts;
  opts.mode = estimator == VarianceEstimator::kFullCov ? IceMode::kWithJoint
                                                       : IceMode::kDiagOnly;
  const auto bundle = ice(model, space, s, grid, std::move(sample), opts);
  return pdp(bundle, all_members(bundle), estimator, alpha);
}

std::string pdp_to_csv(const PdpEstimate& e, const SearchSpace& space) {
  std::string out =
      CsvLine({"grid_value", "mean", "variance", "band_lo", "band_hi",
               "n_members", "estimator"});
  for (std::size_t g = 0; g < e.grid.size(); ++g) {
    out += CsvLine({space.format_value(e.grid.param, e.grid.points[g]),
                    FormatDouble(e.mean[static_cast<Eigen::Index>(g)]),
                    FormatDouble(e.variance[static_cast<Eigen::Index>(g)]),
                    FormatDouble(e.band_lo(g)), FormatDouble(e.band_hi(g)),
                    std::to_string(e.n_valid.empty() ? e.members.size() : e.n_valid[g]),
                    to_string(e.estimator)});
  }
  return out;
}

}  // namespace bopdp
