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

#ifndef BOPDP_ERRORS_HPP_
#define BOPDP_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace bopdp {

// A caller broke a documented precondition (bad index, unknown name,
// mismatched dimensions, out-of-range query).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The Gaussian process could not be conditioned on its training data.
class ModelFitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A PDP quantity is undefined, e.g. a grid point without valid members.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A categorical parameter has too many levels for exhaustive subset search.
class UnsupportedSplitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bopdp

#endif  // BOPDP_ERRORS_HPP_
