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

#include "bopdp/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "bopdp/errors.hpp"
#include "bopdp/nelder_mead.hpp"

namespace bopdp {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kMaxNugget = 1e-4;
constexpr double kLogBoundLow = -4.605170185988091;  // log(1e-2)
constexpr double kLogBoundHigh = 4.605170185988091;  // log(1e2)
constexpr double kLogNuggetLow = -18.420680743952367;  // log(1e-8)
constexpr double kLogNuggetHigh = -2.3025850929940455;  // log(1e-1)

// Kernel value from a squared scaled distance.
inline double KernelFromR2(KernelFamily family, double s2, double r2) {
  r2 = std::max(r2, 0.0);
  if (family == KernelFamily::kGaussian) return s2 * std::exp(-0.5 * r2);
  const double t = kSqrt3 * std::sqrt(r2);
  return s2 * (1.0 + t) * std::exp(-t);
}

void Standardize(const Eigen::VectorXd& y, double* mean, double* scale) {
  const auto n = y.size();
  *mean = n > 0 ? y.mean() : 0.0;
  double sd = 0.0;
  if (n > 1) {
    sd = std::sqrt((y.array() - *mean).square().sum() /
                   static_cast<double>(n - 1));
  }
  *scale = sd < 1e-12 ? 1.0 : sd;
}

// Cholesky of K + nugget I; false when not positive definite.
bool Factorize(const Eigen::MatrixXd& K, double nugget, Eigen::MatrixXd* L) {
  Eigen::MatrixXd A = K;
  A.diagonal().array() += nugget;
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) return false;
  *L = llt.matrixL();
  const auto diag = L->diagonal();
  return diag.allFinite() && (diag.array() > 0.0).all();
}

}  // namespace

std::string to_string(KernelFamily family) {
  return family == KernelFamily::kGaussian ? "gaussian" : "matern32";
}

KernelFamily parse_kernel_family(const std::string& name) {
  if (name == "matern32" || name == "matern3_2") return KernelFamily::kMatern32;
  if (name == "gaussian" || name == "rbf" || name == "squared_exponential") {
    return KernelFamily::kGaussian;
  }
  throw ContractError("unknown kernel family '" + name + "'");
}

void KernelSpec::validate() const {
  if (lengthscales.size() == 0) throw ContractError("kernel without lengthscales");
  if (!(lengthscales.array() > 0.0).all() || !lengthscales.allFinite()) {
    throw ContractError("lengthscales must be positive");
  }
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
    throw ContractError("signal variance must be positive");
  }
  if (!(nugget >= 0.0)) throw ContractError("nugget must be nonnegative");
}

nlohmann::json KernelSpec::to_json() const {
  return {{"family", to_string(family)},
          {"lengthscales",
           std::vector<double>(lengthscales.data(),
                               lengthscales.data() + lengthscales.size())},
          {"signal_variance", signal_variance},
          {"nugget", nugget}};
}

KernelSpec KernelSpec::from_json(const nlohmann::json& j) {
  KernelSpec spec;
  spec.family = parse_kernel_family(j.at("family").get<std::string>());
  const auto ls = j.at("lengthscales").get<std::vector<double>>();
  spec.lengthscales = Eigen::Map<const Eigen::VectorXd>(
      ls.data(), static_cast<Eigen::Index>(ls.size()));
  spec.signal_variance = j.at("signal_variance").get<double>();
  spec.nugget = j.at("nugget").get<double>();
  spec.validate();
  return spec;
}

double kernel_eval(const KernelSpec& spec, std::span<const double> a,
                   std::span<const double> b) {
  const auto d = static_cast<std::size_t>(spec.lengthscales.size());
  if (a.size() != d || b.size() != d) {
    throw ContractError("kernel_eval: dimension mismatch");
  }
  double r2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double z = (a[i] - b[i]) / spec.lengthscales[static_cast<Eigen::Index>(i)];
    r2 += z * z;
  }
  return KernelFromR2(spec.family, spec.signal_variance, r2);
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b) {
  const auto d = spec.lengthscales.size();
  if (a.cols() != d || b.cols() != d) {
    throw ContractError("kernel_matrix: dimension mismatch");
  }
  const Eigen::RowVectorXd inv = spec.lengthscales.cwiseInverse().transpose();
  const Eigen::MatrixXd as = a.array().rowwise() * inv.array();
  const Eigen::MatrixXd bs = b.array().rowwise() * inv.array();
  Eigen::MatrixXd K(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double r2 = (as.row(i) - bs.row(j)).squaredNorm();
      K(i, j) = KernelFromR2(spec.family, spec.signal_variance, r2);
    }
  }
  return K;
}

GpSurrogate GpSurrogate::condition(KernelSpec kernel, Eigen::MatrixXd X,
                                   Eigen::VectorXd y) {
  kernel.validate();
  if (X.rows() != y.size()) {
    throw ContractError("GP: inputs and targets differ in length");
  }
  if (X.cols() != kernel.lengthscales.size()) {
    throw ContractError("GP: input width does not match lengthscales");
  }
  if (!X.allFinite() || !y.allFinite()) {
    throw ContractError("GP: non-finite training data");
  }
  GpSurrogate gp;
  Standardize(y, &gp.y_mean_, &gp.y_scale_);
  const Eigen::VectorXd ys = (y.array() - gp.y_mean_) / gp.y_scale_;
  const auto n = X.rows();
  if (n > 0) {
    const Eigen::MatrixXd K = kernel_matrix(kernel, X, X);
    double nugget = kernel.nugget;
    while (!Factorize(K, nugget, &gp.L_)) {
      nugget = std::max(nugget * 10.0, 1e-10);
      if (nugget > kMaxNugget * (1.0 + 1e-12)) {
        throw ModelFitError("GP: Cholesky failed with nugget up to 1e-4");
      }
    }
    kernel.nugget = nugget;
    const Eigen::VectorXd w = gp.L_.triangularView<Eigen::Lower>().solve(ys);
    gp.alpha_ = gp.L_.transpose().triangularView<Eigen::Upper>().solve(w);
    gp.log_marginal_likelihood_ = -0.5 * w.squaredNorm() -
                                  gp.L_.diagonal().array().log().sum() -
                                  0.5 * static_cast<double>(n) *
                                      std::log(2.0 * std::numbers::pi);
  } else {
    gp.L_.resize(0, 0);
    gp.alpha_.resize(0);
  }
  gp.kernel_ = std::move(kernel);
  gp.X_ = std::move(X);
  gp.y_ = std::move(y);
  return gp;
}

GpSurrogate GpSurrogate::prior(KernelSpec kernel, double mean, double scale) {
  kernel.validate();
  if (!(scale > 0.0)) throw ContractError("GP prior: scale must be positive");
  GpSurrogate gp;
  gp.X_.resize(0, kernel.lengthscales.size());
  gp.y_.resize(0);
  gp.L_.resize(0, 0);
  gp.alpha_.resize(0);
  gp.y_mean_ = mean;
  gp.y_scale_ = scale;
  gp.kernel_ = std::move(kernel);
  return gp;
}

void GpSurrogate::predict_marginal(const Eigen::MatrixXd& queries,
                                   Eigen::VectorXd* mean,
                                   Eigen::VectorXd* variance) const {
  if (queries.cols() != kernel_.lengthscales.size()) {
    throw ContractError("GP predict: query width mismatch");
  }
  const auto m = queries.rows();
  const double s2 = kernel_.signal_variance;
  const double scale2 = y_scale_ * y_scale_;
  if (X_.rows() == 0) {
    if (mean) *mean = Eigen::VectorXd::Constant(m, y_mean_);
    if (variance) *variance = Eigen::VectorXd::Constant(m, s2 * scale2);
    return;
  }
  const Eigen::MatrixXd Ks = kernel_matrix(kernel_, X_, queries);
  if (mean) {
    *mean = (Ks.transpose() * alpha_).array() * y_scale_ + y_mean_;
  }
  if (variance) {
    const Eigen::MatrixXd V = L_.triangularView<Eigen::Lower>().solve(Ks);
    *variance = (s2 - V.colwise().squaredNorm().transpose().array())
                    .max(0.0) * scale2;
  }
}

Eigen::VectorXd GpSurrogate::predict_mean(const Eigen::MatrixXd& queries) const {
  Eigen::VectorXd mean;
  predict_marginal(queries, &mean, nullptr);
  return mean;
}

PosteriorSlice GpSurrogate::predict_joint(const Eigen::MatrixXd& queries) const {
  if (queries.cols() != kernel_.lengthscales.size()) {
    throw ContractError("GP predict: query width mismatch");
  }
  const double scale2 = y_scale_ * y_scale_;
  PosteriorSlice out;
  Eigen::MatrixXd cov = kernel_matrix(kernel_, queries, queries);
  if (X_.rows() == 0) {
    out.means = Eigen::VectorXd::Constant(queries.rows(), y_mean_);
  } else {
    const Eigen::MatrixXd Ks = kernel_matrix(kernel_, X_, queries);
    out.means = (Ks.transpose() * alpha_).array() * y_scale_ + y_mean_;
    const Eigen::MatrixXd V = L_.triangularView<Eigen::Lower>().solve(Ks);
    cov.noalias() -= V.transpose() * V;
  }
  cov = 0.5 * (cov + cov.transpose());
  cov.diagonal() = cov.diagonal().cwiseMax(0.0);
  out.covariance = cov * scale2;
  return out;
}

double log_marginal_likelihood(const KernelSpec& spec, const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& y_standardized) {
  Eigen::MatrixXd L;
  if (!Factorize(kernel_matrix(spec, X, X), spec.nugget, &L)) {
    return -std::numeric_limits<double>::infinity();
  }
  const Eigen::VectorXd w = L.triangularView<Eigen::Lower>().solve(y_standardized);
  return -0.5 * w.squaredNorm() - L.diagonal().array().log().sum() -
         0.5 * static_cast<double>(X.rows()) * std::log(2.0 * std::numbers::pi);
}

GpSurrogate fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                const FitOptions& options) {
  const auto n = X.rows();
  const auto p = X.cols();
  if (n < 2) throw ContractError("GP fit needs at least 2 points");
  if (y.size() != n) throw ContractError("GP fit: X and y differ in length");
  if (p == 0) throw ContractError("GP fit: zero-width inputs");
  if (!X.allFinite() || !y.allFinite()) {
    throw ContractError("GP fit: non-finite training data");
  }
  if (options.restarts < 1) throw ContractError("GP fit needs restarts >= 1");

  double y_mean = 0.0;
  double y_scale = 1.0;
  Standardize(y, &y_mean, &y_scale);
  const Eigen::VectorXd ys = (y.array() - y_mean) / y_scale;

  // Squared coordinate differences, one n x n matrix per input column.
  std::vector<Eigen::MatrixXd> sqdiff(static_cast<std::size_t>(p));
  for (Eigen::Index k = 0; k < p; ++k) {
    auto& D = sqdiff[static_cast<std::size_t>(k)];
    D.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double diff = X(i, k) - X(j, k);
        D(i, j) = diff * diff;
      }
    }
  }

  const Eigen::Index n_ls = options.isotropic ? 1 : p;
  const Eigen::Index n_theta = n_ls + 1 + (options.estimate_nugget ? 1 : 0);
  Eigen::VectorXd lower = Eigen::VectorXd::Constant(n_theta, kLogBoundLow);
  Eigen::VectorXd upper = Eigen::VectorXd::Constant(n_theta, kLogBoundHigh);
  if (options.estimate_nugget) {
    lower[n_theta - 1] = kLogNuggetLow;
    upper[n_theta - 1] = kLogNuggetHigh;
  }

  auto to_spec = [&](const Eigen::VectorXd& theta) {
    KernelSpec spec;
    spec.family = options.family;
    spec.lengthscales.resize(p);
    for (Eigen::Index k = 0; k < p; ++k) {
      spec.lengthscales[k] = std::exp(theta[options.isotropic ? 0 : k]);
    }
    spec.signal_variance = std::exp(theta[n_ls]);
    spec.nugget = options.estimate_nugget ? std::exp(theta[n_theta - 1])
                                          : options.nugget;
    return spec;
  };

  Eigen::MatrixXd R2(n, n);
  Eigen::MatrixXd K(n, n);
  const double log2pi = std::log(2.0 * std::numbers::pi);
  auto neg_lml = [&](const Eigen::VectorXd& theta) {
    R2.setZero();
    for (Eigen::Index k = 0; k < p; ++k) {
      const double l = std::exp(theta[options.isotropic ? 0 : k]);
      R2 += sqdiff[static_cast<std::size_t>(k)] / (l * l);
    }
    const double s2 = std::exp(theta[n_ls]);
    const double nug = options.estimate_nugget ? std::exp(theta[n_theta - 1])
                                               : options.nugget;
    K = R2.unaryExpr([&](double r2) {
      return KernelFromR2(options.family, s2, r2);
    });
    K.diagonal().array() += nug;
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success) {
      return std::numeric_limits<double>::infinity();
    }
    const auto Lm = llt.matrixL();
    const Eigen::VectorXd w = Lm.solve(ys);
    const double logdet = llt.matrixLLT().diagonal().array().log().sum();
    if (!std::isfinite(logdet)) return std::numeric_limits<double>::infinity();
    return 0.5 * w.squaredNorm() + logdet + 0.5 * static_cast<double>(n) * log2pi;
  };

  Rng rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  NelderMeadOptions nm;
  nm.max_evaluations = options.max_evaluations_per_start;

  Eigen::VectorXd best_theta;
  double best_value = std::numeric_limits<double>::infinity();
  for (int start = 0; start < options.restarts; ++start) {
    Eigen::VectorXd theta(n_theta);
    if (start == 0) {
      // Half the observed input range per column, unit signal variance.
      for (Eigen::Index k = 0; k < n_ls; ++k) {
        double range = options.isotropic
                           ? (X.colwise().maxCoeff() - X.colwise().minCoeff()).maxCoeff()
                           : X.col(k).maxCoeff() - X.col(k).minCoeff();
        range = std::clamp(0.5 * range, 1e-2, 1e2);
        theta[k] = std::log(range);
      }
      theta[n_ls] = 0.0;
      if (options.estimate_nugget) theta[n_theta - 1] = std::log(1e-6);
    } else {
      for (Eigen::Index k = 0; k < n_theta; ++k) {
        theta[k] = lower[k] + unit(rng) * (upper[k] - lower[k]);
      }
    }
    const auto result = nelder_mead(neg_lml, theta, lower, upper, nm);
    if (result.value < best_value) {
      best_value = result.value;
      best_theta = result.x;
    }
  }
  if (!std::isfinite(best_value)) {
    // Every start failed to factorize; fall back to the default start and
    // let condition() escalate the nugget.
    best_theta = Eigen::VectorXd::Zero(n_theta);
    if (options.estimate_nugget) best_theta[n_theta - 1] = std::log(1e-6);
  }
  return GpSurrogate::condition(to_spec(best_theta), X, y);
}

FeatureEncoder::FeatureEncoder(SearchSpace space) : space_(std::move(space)) {
  const std::size_t d = space_.size();
  offset_.resize(d);
  indicator_.assign(d, -1);
  std::size_t w = 0;
  for (std::size_t i = 0; i < d; ++i) {
    offset_[i] = w;
    const auto& p = space_.param(i);
    w += p.kind == ParamKind::kCategorical ? p.levels.size() : 1;
  }
  for (std::size_t i = 0; i < d; ++i) {
    if (space_.parent_of(i)) indicator_[i] = static_cast<std::ptrdiff_t>(w++);
  }
  width_ = w;
}

void FeatureEncoder::encode(const Config& config, double* row) const {
  if (config.size() != space_.size()) {
    throw ContractError("encode: config size does not match search space");
  }
  for (std::size_t i = 0; i < space_.size(); ++i) {
    const auto& p = space_.param(i);
    const std::size_t o = offset_[i];
    if (p.kind == ParamKind::kCategorical) {
      for (std::size_t l = 0; l < p.levels.size(); ++l) row[o + l] = 0.0;
      if (config.active(i)) {
        row[o + static_cast<std::size_t>(config.at(i))] = 1.0;
      }
    } else if (config.active(i)) {
      row[o] = space_.to_model(i, config.at(i));
    } else {
      const auto [lo, hi] = space_.model_bounds(i);
      row[o] = 0.5 * (lo + hi);
    }
    if (indicator_[i] >= 0) {
      row[indicator_[i]] = config.active(i) ? 1.0 : 0.0;
    }
  }
}

Eigen::VectorXd FeatureEncoder::encode(const Config& config) const {
  Eigen::VectorXd row(static_cast<Eigen::Index>(width_));
  encode(config, row.data());
  return row;
}

Eigen::MatrixXd FeatureEncoder::encode(std::span<const Config> configs) const {
  // Row-major scratch so each config writes one contiguous row.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(
      static_cast<Eigen::Index>(configs.size()), static_cast<Eigen::Index>(width_));
  for (std::size_t r = 0; r < configs.size(); ++r) {
    encode(configs[r], out.row(static_cast<Eigen::Index>(r)).data());
  }
  return out;
}

PosteriorSlice Surrogate::predict_joint(std::span<const Config> configs) const {
  return gp.predict_joint(encoder.encode(configs));
}

void Surrogate::predict_marginal(std::span<const Config> configs,
                                 Eigen::VectorXd* mean,
                                 Eigen::VectorXd* variance) const {
  gp.predict_marginal(encoder.encode(configs), mean, variance);
}

}  // namespace bopdp
