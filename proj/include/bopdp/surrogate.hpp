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

// Gaussian-process regression surrogate.
//
// The GP works on numeric feature rows (see FeatureEncoder for how
// configurations become rows). Targets are standardized internally; every
// prediction is reported on the original cost scale.

#ifndef BOPDP_SURROGATE_HPP_
#define BOPDP_SURROGATE_HPP_

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bopdp/space.hpp"
#include "json.hpp"

namespace bopdp {

enum class KernelFamily { kMatern32, kGaussian };

std::string to_string(KernelFamily family);
KernelFamily parse_kernel_family(const std::string& name);

// Hyperparameters live in standardized target units.
struct KernelSpec {
  KernelFamily family = KernelFamily::kMatern32;
  Eigen::VectorXd lengthscales;  // one per input column (ARD)
  double signal_variance = 1.0;
  double nugget = 1e-8;

  void validate() const;
  nlohmann::json to_json() const;
  static KernelSpec from_json(const nlohmann::json& j);
};

// matern32: s2 (1 + sqrt3 r) exp(-sqrt3 r); gaussian: s2 exp(-r^2 / 2),
// with r the lengthscale-scaled Euclidean distance. The nugget is not added.
double kernel_eval(const KernelSpec& spec, std::span<const double> a,
                   std::span<const double> b);

// Rows of `a` and `b` are points.
Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b);

struct PosteriorSlice {
  Eigen::VectorXd means;
  Eigen::MatrixXd covariance;
};

struct FitOptions {
  KernelFamily family = KernelFamily::kMatern32;
  double nugget = 1e-8;
  bool estimate_nugget = false;
  bool isotropic = false;
  int restarts = 10;
  int max_evaluations_per_start = 400;
  std::uint64_t seed = 0;
};

class GpSurrogate {
 public:
  GpSurrogate() = default;

  // Conditions on (X, y) with fixed hyperparameters. The nugget is raised
  // x10 (up to 1e-4) if the Cholesky factorization fails.
  static GpSurrogate condition(KernelSpec kernel, Eigen::MatrixXd X,
                               Eigen::VectorXd y);
  // A GP without data: constant mean `mean`, variance scale^2 * s2.
  static GpSurrogate prior(KernelSpec kernel, double mean, double scale);

  PosteriorSlice predict_joint(const Eigen::MatrixXd& queries) const;
  void predict_marginal(const Eigen::MatrixXd& queries, Eigen::VectorXd* mean,
                        Eigen::VectorXd* variance) const;
  Eigen::VectorXd predict_mean(const Eigen::MatrixXd& queries) const;

  // Log marginal likelihood of the standardized targets.
  double log_marginal_likelihood() const { return log_marginal_likelihood_; }

  const KernelSpec& kernel() const { return kernel_; }
  const Eigen::MatrixXd& inputs() const { return X_; }
  const Eigen::VectorXd& targets() const { return y_; }
  double target_mean() const { return y_mean_; }
  double target_scale() const { return y_scale_; }
  const Eigen::MatrixXd& cholesky() const { return L_; }
  const Eigen::VectorXd& dual_weights() const { return alpha_; }
  std::size_t num_train() const { return static_cast<std::size_t>(X_.rows()); }
  std::size_t dim() const {
    return static_cast<std::size_t>(kernel_.lengthscales.size());
  }

 private:
  KernelSpec kernel_;
  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  Eigen::MatrixXd L_;
  Eigen::VectorXd alpha_;
  double log_marginal_likelihood_ = 0.0;
};

// Log marginal likelihood of already-standardized targets; -inf when the
// kernel matrix cannot be factorized.
double log_marginal_likelihood(const KernelSpec& spec, const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& y_standardized);

// Type-II maximum likelihood: multi-start bounded Nelder-Mead over log
// lengthscales and log signal variance, both in [1e-2, 1e2]. Deterministic
// given options.seed.
GpSurrogate fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                const FitOptions& options);

// Maps configurations to GP input rows. Numeric params contribute their
// model-scale value, categoricals a one-hot block. Conditional params get an
// extra activity indicator column and inactive values are imputed with the
// middle of the model range (one-hot blocks are left at zero).
class FeatureEncoder {
 public:
  FeatureEncoder() = default;
  explicit FeatureEncoder(SearchSpace space);

  std::size_t width() const { return width_; }
  const SearchSpace& space() const { return space_; }

  void encode(const Config& config, double* row) const;
  Eigen::VectorXd encode(const Config& config) const;
  Eigen::MatrixXd encode(std::span<const Config> configs) const;

 private:
  SearchSpace space_;
  std::vector<std::size_t> offset_;
  std::vector<std::ptrdiff_t> indicator_;
  std::size_t width_ = 0;
};

// A fitted GP together with the encoder that feeds it.
struct Surrogate {
  FeatureEncoder encoder;
  GpSurrogate gp;

  PosteriorSlice predict_joint(std::span<const Config> configs) const;
  void predict_marginal(std::span<const Config> configs, Eigen::VectorXd* mean,
                        Eigen::VectorXd* variance) const;
};

}  // namespace bopdp

#endif  // BOPDP_SURROGATE_HPP_
