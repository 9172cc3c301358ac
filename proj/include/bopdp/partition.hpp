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

// Tree-based partitioning of the complement space C into sub-regions whose
// ICE curves of the posterior variance are alike, each carrying its own PDP.

#ifndef BOPDP_PARTITION_HPP_
#define BOPDP_PARTITION_HPP_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bopdp/effects.hpp"
#include "bopdp/space.hpp"
#include "json.hpp"

namespace bopdp {

enum class SplitCriterion {
  kL2,    // squared deviation of variance ICE curves from their node mean
  kArea,  // squared mean deviation (area) of each variance ICE curve
  kVar,   // squared deviation of each row's own posterior variance
  kMean,  // squared deviation of posterior-mean ICE curves
};

std::string to_string(SplitCriterion criterion);
SplitCriterion parse_criterion(const std::string& name);

// Largest categorical cardinality searched exhaustively.
inline constexpr std::size_t kMaxCategoricalLevels = 10;

struct Split {
  std::size_t param = 0;
  bool categorical = false;
  double threshold = 0.0;         // model scale; value <= threshold goes left
  std::uint64_t left_levels = 0;  // categorical: bit l set => level l left

  bool goes_left(const SearchSpace& space, const Config& config) const;
};

struct SplitResult {
  Split split;
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
  double objective = 0.0;  // impurity(left) + impurity(right)
};

// Per-parameter extent of a node, in model coordinates.
struct ParamRange {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_open = false;
  std::uint64_t levels = 0;  // categorical
};

struct Box {
  std::vector<ParamRange> ranges;

  static Box full(const SearchSpace& space);
  bool contains(const SearchSpace& space, const Config& config,
                std::size_t skip_param) const;
};

double impurity(const IceBundle& bundle, std::span<const std::size_t> members,
                SplitCriterion criterion);

// Exhaustive search over every parameter of C (never the PDP parameter) and
// every threshold / level subset. Ties go to the lowest parameter index and
// then the lowest threshold (smallest left-level bitmask). Candidates leaving
// a child below `min_node_size` are skipped.
std::optional<SplitResult> best_split(const IceBundle& bundle,
                                      std::span<const std::size_t> members,
                                      const SearchSpace& space,
                                      SplitCriterion criterion,
                                      std::size_t min_node_size);

struct PartitionNode {
  std::size_t id = 0;
  std::vector<std::size_t> members;
  Box box;
  std::optional<Split> split;
  std::optional<std::size_t> left;
  std::optional<std::size_t> right;
  std::size_t depth = 0;
  double impurity = 0.0;
  // 1-based position of this node's split in the growth sequence.
  std::size_t split_order = 0;
  PdpEstimate pdp;

  bool is_leaf() const { return !split.has_value(); }
};

struct GrowOptions {
  SplitCriterion criterion = SplitCriterion::kL2;
  std::size_t max_splits = 3;
  std::size_t min_node_size = 10;
  VarianceEstimator estimator = VarianceEstimator::kDiag;
  double alpha = 0.05;
};

struct PartitionTree {
  std::vector<PartitionNode> nodes;  // nodes[0] is the root
  std::size_t s = 0;
  GrowOptions options;
  std::size_t n_splits = 0;

  const PartitionNode& root() const { return nodes.front(); }
  // Leaves of the tree truncated after the first `splits` splits.
  std::vector<std::size_t> leaves(
      std::size_t splits = std::numeric_limits<std::size_t>::max()) const;
};

// Best-first growth: each step splits the leaf with the largest impurity
// reduction; only strictly improving splits are executed.
PartitionTree grow(const IceBundle& bundle, const SearchSpace& space,
                   const GrowOptions& options);
PartitionTree grow(const IceBundle& bundle, std::span<const std::size_t> members,
                   const SearchSpace& space, const GrowOptions& options);

// Leaf containing `config`, considering only the first `splits` splits.
const PartitionNode& locate(
    const PartitionTree& tree, const SearchSpace& space, const Config& config,
    std::size_t splits = std::numeric_limits<std::size_t>::max());

// The `target_size` rows nearest to `incumbent` in L1 distance over the
// model-scale C coordinates (categorical mismatch counts 1); ties by index.
std::vector<std::size_t> l1_baseline(const IceBundle& bundle,
                                     const SearchSpace& space,
                                     const Config& incumbent,
                                     std::size_t target_size);

// `pdp_files` maps node id to a file name for leaves (may be empty).
nlohmann::json tree_to_json(const PartitionTree& tree, const SearchSpace& space,
                            const std::vector<std::string>& pdp_files = {});
// One row per leaf of the full tree.
std::string leaves_to_csv(const PartitionTree& tree, const SearchSpace& space);

}  // namespace bopdp

#endif  // BOPDP_PARTITION_HPP_
