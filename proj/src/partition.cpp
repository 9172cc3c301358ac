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

#include "bopdp/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bopdp/errors.hpp"
#include "bopdp/format.hpp"

namespace bopdp {

std::string to_string(SplitCriterion criterion) {
  switch (criterion) {
    case SplitCriterion::kL2: return "l2";
    case SplitCriterion::kArea: return "area";
    case SplitCriterion::kVar: return "var";
    case SplitCriterion::kMean: return "mean";
  }
  return "l2";
}

SplitCriterion parse_criterion(const std::string& name) {
  if (name == "l2") return SplitCriterion::kL2;
  if (name == "area") return SplitCriterion::kArea;
  if (name == "var") return SplitCriterion::kVar;
  if (name == "mean") return SplitCriterion::kMean;
  throw ContractError("unknown split criterion '" + name + "'");
}

bool Split::goes_left(const SearchSpace& space, const Config& config) const {
  if (param >= config.size() || !config.active(param)) {
    throw ContractError("split parameter '" + space.param(param).name +
                        "' is inactive in the configuration");
  }
  if (categorical) {
    const auto level = static_cast<std::uint64_t>(std::llround(config.at(param)));
    return (left_levels >> level) & 1u;
  }
  return space.to_model(param, config.at(param)) <= threshold;
}

Box Box::full(const SearchSpace& space) {
  Box b;
  b.ranges.resize(space.size());
  for (std::size_t j = 0; j < space.size(); ++j) {
    const auto& p = space.param(j);
    auto& r = b.ranges[j];
    const auto [lo, hi] = space.model_bounds(j);
    r.lo = lo;
    r.hi = hi;
    if (!p.is_numeric()) r.levels = (std::uint64_t{1} << p.levels.size()) - 1;
  }
  return b;
}

bool Box::contains(const SearchSpace& space, const Config& config,
                   std::size_t skip_param) const {
  for (std::size_t j = 0; j < space.size(); ++j) {
    if (j == skip_param || !config.active(j)) continue;
    const auto& r = ranges[j];
    if (!space.param(j).is_numeric()) {
      const auto level = static_cast<std::uint64_t>(std::llround(config.at(j)));
      if (!((r.levels >> level) & 1u)) return false;
      continue;
    }
    const double m = space.to_model(j, config.at(j));
    if (m > r.hi || m < r.lo || (r.lo_open && m == r.lo)) return false;
  }
  return true;
}

namespace {

// Sum of squared deviations from the member mean, per grid point, counting
// only valid cells.
double MaskedCurveSpread(const IceBundle& b, const Eigen::MatrixXd& curves,
                         std::span<const std::size_t> members) {
  double total = 0.0;
  for (std::size_t g = 0; g < b.grid_size(); ++g) {
    const auto col = static_cast<Eigen::Index>(g);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i : members) {
      if (!b.is_valid(i, g)) continue;
      sum += curves(static_cast<Eigen::Index>(i), col);
      ++count;
    }
    if (count == 0) continue;
    const double mean = sum / static_cast<double>(count);
    for (std::size_t i : members) {
      if (!b.is_valid(i, g)) continue;
      const double d = curves(static_cast<Eigen::Index>(i), col) - mean;
      total += d * d;
    }
  }
  return total;
}

double Spread(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double total = 0.0;
  for (double x : v) total += (x - mean) * (x - mean);
  return total;
}

double RowMean(const IceBundle& b, std::size_t i) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t g = 0; g < b.grid_size(); ++g) {
    if (!b.is_valid(i, g)) continue;
    sum += b.var_curves(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g));
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

void CheckMembers(const IceBundle& b, std::span<const std::size_t> members) {
  for (std::size_t i : members) {
    if (i >= b.n()) throw ContractError("member index out of range");
  }
}

// Per-row features whose total squared deviation equals the impurity on
// flat bundles.
Eigen::MatrixXd Features(const IceBundle& b, SplitCriterion criterion) {
  switch (criterion) {
    case SplitCriterion::kL2: return b.var_curves;
    case SplitCriterion::kMean: return b.mean_curves;
    case SplitCriterion::kArea: return b.var_curves.rowwise().mean();
    case SplitCriterion::kVar: return b.point_var;
  }
  return b.var_curves;
}

struct Candidate {
  Split split;
  double objective = 0.0;
};

// Objectives within this relative margin count as ties, so equal partitions
// reached through different summation orders keep the earlier candidate.
constexpr double kTieTolerance = 1e-10;

bool Improves(double obj, const std::optional<Candidate>& best, double scale) {
  return !best || obj < best->objective - kTieTolerance * (1.0 + scale);
}

bool Eligible(const IceBundle& b, const SearchSpace& space,
              std::span<const std::size_t> members, std::size_t j) {
  if (j == b.s) return false;
  for (std::size_t i : members) {
    if (!b.sample[i].active(j)) return false;
  }
  if (!space.param(j).is_numeric() &&
      space.param(j).levels.size() > kMaxCategoricalLevels) {
    throw UnsupportedSplitError("categorical parameter '" + space.param(j).name +
                                "' has more than " +
                                std::to_string(kMaxCategoricalLevels) + " levels");
  }
  return true;
}

// Sorted unique model values of param j among members, and the members
// ordered by that value (stable by index).
std::vector<std::size_t> OrderBy(const IceBundle& b, const SearchSpace& space,
                                 std::span<const std::size_t> members, std::size_t j,
                                 std::vector<double>* values) {
  std::vector<std::size_t> order(members.begin(), members.end());
  std::vector<double> model(b.n(), 0.0);
  for (std::size_t i : members) model[i] = space.to_model(j, b.sample[i].at(j));
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return model[x] < model[y]; });
  values->clear();
  for (std::size_t i : order) values->push_back(model[i]);
  return order;
}

std::uint64_t LevelOf(const Config& c, std::size_t j) {
  return static_cast<std::uint64_t>(std::llround(c.at(j)));
}

void Partition(const IceBundle& b, const SearchSpace& space,
               std::span<const std::size_t> members, const Split& split,
               std::vector<std::size_t>* left, std::vector<std::size_t>* right) {
  left->clear();
  right->clear();
  for (std::size_t i : members) {
    (split.goes_left(space, b.sample[i]) ? left : right)->push_back(i);
  }
}

bool EveryGridPointCovered(const IceBundle& b, std::span<const std::size_t> members) {
  for (std::size_t g = 0; g < b.grid_size(); ++g) {
    bool any = false;
    for (std::size_t i : members) {
      if (b.is_valid(i, g)) {
        any = true;
        break;
      }
    }
    if (!any) return false;
  }
  return true;
}

// Enumerates candidate splits of param j in tie-break order.
template <typename Visit>
void EnumerateSplits(const IceBundle& b, const SearchSpace& space,
                     std::span<const std::size_t> members, std::size_t j,
                     Visit&& visit) {
  const auto& p = space.param(j);
  if (!p.is_numeric()) {
    const std::size_t q = p.levels.size();
    const std::uint64_t full = (std::uint64_t{1} << q) - 1;
    for (std::uint64_t mask = 1; mask < full; mask += 2) {
      Split s;
      s.param = j;
      s.categorical = true;
      s.left_levels = mask;
      visit(s);
    }
    return;
  }
  std::vector<double> values;
  OrderBy(b, space, members, j, &values);
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (!(values[k] > values[k - 1])) continue;
    Split s;
    s.param = j;
    s.threshold = 0.5 * (values[k - 1] + values[k]);
    visit(s);
  }
}

std::optional<Candidate> BruteForce(const IceBundle& b, const SearchSpace& space,
                                    std::span<const std::size_t> members,
                                    SplitCriterion criterion, std::size_t min_size) {
  std::optional<Candidate> best;
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
  const double scale = impurity(b, members, criterion);
  for (std::size_t j = 0; j < space.size(); ++j) {
    if (!Eligible(b, space, members, j)) continue;
    EnumerateSplits(b, space, members, j, [&](const Split& s) {
      Partition(b, space, members, s, &left, &right);
      if (left.size() < min_size || right.size() < min_size) return;
      if (!b.all_valid &&
          (!EveryGridPointCovered(b, left) || !EveryGridPointCovered(b, right))) {
        return;
      }
      const double obj = impurity(b, left, criterion) + impurity(b, right, criterion);
      if (Improves(obj, best, scale)) best = Candidate{s, obj};
    });
  }
  return best;
}

// Flat bundles: prefix sums over the members sorted by each parameter.
std::optional<Candidate> Fast(const IceBundle& b, const SearchSpace& space,
                              std::span<const std::size_t> members,
                              SplitCriterion criterion, std::size_t min_size) {
  const Eigen::MatrixXd raw = Features(b, criterion);
  const auto f = raw.cols();
  const std::size_t m = members.size();
  Eigen::RowVectorXd center = Eigen::RowVectorXd::Zero(f);
  for (std::size_t i : members) center += raw.row(static_cast<Eigen::Index>(i));
  center /= static_cast<double>(m);
  Eigen::MatrixXd F(static_cast<Eigen::Index>(b.n()), f);
  F.setZero();
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(b.n()));
  Eigen::RowVectorXd total1 = Eigen::RowVectorXd::Zero(f);
  double total2 = 0.0;
  for (std::size_t i : members) {
    const auto r = static_cast<Eigen::Index>(i);
    F.row(r) = raw.row(r) - center;
    sq[r] = F.row(r).squaredNorm();
    total1 += F.row(r);
    total2 += sq[r];
  }
  auto spread = [](const Eigen::RowVectorXd& s1, double s2, std::size_t n) {
    return std::max(s2 - s1.squaredNorm() / static_cast<double>(n), 0.0);
  };

  std::optional<Candidate> best;
  for (std::size_t j = 0; j < space.size(); ++j) {
    if (!Eligible(b, space, members, j)) continue;
    const auto& p = space.param(j);
    if (!p.is_numeric()) {
      const std::size_t q = p.levels.size();
      std::vector<Eigen::RowVectorXd> s1(q, Eigen::RowVectorXd::Zero(f));
      std::vector<double> s2(q, 0.0);
      std::vector<std::size_t> cnt(q, 0);
      for (std::size_t i : members) {
        const auto l = LevelOf(b.sample[i], j);
        s1[l] += F.row(static_cast<Eigen::Index>(i));
        s2[l] += sq[static_cast<Eigen::Index>(i)];
        ++cnt[l];
      }
      const std::uint64_t full = (std::uint64_t{1} << q) - 1;
      for (std::uint64_t mask = 1; mask < full; mask += 2) {
        Eigen::RowVectorXd l1 = Eigen::RowVectorXd::Zero(f);
        double l2 = 0.0;
        std::size_t n = 0;
        for (std::size_t l = 0; l < q; ++l) {
          if (!((mask >> l) & 1u)) continue;
          l1 += s1[l];
          l2 += s2[l];
          n += cnt[l];
        }
        if (n < min_size || m - n < min_size) continue;
        const double obj =
            spread(l1, l2, n) + spread(total1 - l1, total2 - l2, m - n);
        if (Improves(obj, best, total2)) {
          Split s;
          s.param = j;
          s.categorical = true;
          s.left_levels = mask;
          best = Candidate{s, obj};
        }
      }
      continue;
    }
    std::vector<double> values;
    const auto order = OrderBy(b, space, members, j, &values);
    Eigen::RowVectorXd l1 = Eigen::RowVectorXd::Zero(f);
    double l2 = 0.0;
    for (std::size_t k = 1; k < m; ++k) {
      const auto r = static_cast<Eigen::Index>(order[k - 1]);
      l1 += F.row(r);
      l2 += sq[r];
      if (!(values[k] > values[k - 1])) continue;
      if (k < min_size || m - k < min_size) continue;
      const double obj = spread(l1, l2, k) + spread(total1 - l1, total2 - l2, m - k);
      if (Improves(obj, best, total2)) {
        Split s;
        s.param = j;
        s.threshold = 0.5 * (values[k - 1] + values[k]);
        best = Candidate{s, obj};
      }
    }
  }
  return best;
}

}  // namespace

double impurity(const IceBundle& bundle, std::span<const std::size_t> members,
                SplitCriterion criterion) {
  CheckMembers(bundle, members);
  switch (criterion) {
    case SplitCriterion::kL2:
      return MaskedCurveSpread(bundle, bundle.var_curves, members);
    case SplitCriterion::kMean:
      return MaskedCurveSpread(bundle, bundle.mean_curves, members);
    case SplitCriterion::kArea: {
      std::vector<double> v;
      for (std::size_t i : members) v.push_back(RowMean(bundle, i));
      return Spread(v);
    }
    case SplitCriterion::kVar: {
      std::vector<double> v;
      for (std::size_t i : members) v.push_back(bundle.point_var[static_cast<Eigen::Index>(i)]);
      return Spread(v);
    }
  }
  return 0.0;
}

std::optional<SplitResult> best_split(const IceBundle& bundle,
                                      std::span<const std::size_t> members,
                                      const SearchSpace& space,
                                      SplitCriterion criterion,
                                      std::size_t min_node_size) {
  CheckMembers(bundle, members);
  if (min_node_size < 1) min_node_size = 1;
  if (members.size() < 2 * min_node_size) return std::nullopt;
  const auto cand = bundle.all_valid
                        ? Fast(bundle, space, members, criterion, min_node_size)
                        : BruteForce(bundle, space, members, criterion, min_node_size);
  if (!cand) return std::nullopt;
  SplitResult out;
  out.split = cand->split;
  Partition(bundle, space, members, out.split, &out.left, &out.right);
  out.objective = impurity(bundle, out.left, criterion) +
                  impurity(bundle, out.right, criterion);
  return out;
}

std::vector<std::size_t> PartitionTree::leaves(std::size_t splits) const {
  std::vector<std::size_t> out;
  std::vector<std::size_t> stack = {0};
  while (!stack.empty()) {
    const std::size_t id = stack.back();
    stack.pop_back();
    const auto& node = nodes[id];
    if (node.is_leaf() || node.split_order > splits) {
      out.push_back(id);
      continue;
    }
    stack.push_back(*node.right);
    stack.push_back(*node.left);
  }
  return out;
}

PartitionTree grow(const IceBundle& bundle, const SearchSpace& space,
                   const GrowOptions& options) {
  const auto members = all_members(bundle);
  return grow(bundle, members, space, options);
}

PartitionTree grow(const IceBundle& bundle, std::span<const std::size_t> members,
                   const SearchSpace& space, const GrowOptions& options) {
  if (members.empty()) throw ContractError("grow: empty member set");
  if (bundle.sample.empty() || bundle.sample.front().size() != space.size()) {
    throw ContractError("grow: bundle does not match the search space");
  }
  PartitionTree tree;
  tree.s = bundle.s;
  tree.options = options;

  auto make_node = [&](std::vector<std::size_t> ids, Box box, std::size_t depth) {
    PartitionNode node;
    node.id = tree.nodes.size();
    node.members = std::move(ids);
    node.box = std::move(box);
    node.depth = depth;
    node.impurity = impurity(bundle, node.members, options.criterion);
    node.pdp = pdp(bundle, node.members, options.estimator, options.alpha);
    tree.nodes.push_back(std::move(node));
    return tree.nodes.size() - 1;
  };
  make_node({members.begin(), members.end()}, Box::full(space), 0);

  std::vector<std::optional<SplitResult>> pending;  // per node
  auto evaluate = [&](std::size_t id) {
    pending.resize(tree.nodes.size());
    const auto& node = tree.nodes[id];
    pending[id] = best_split(bundle, node.members, space, options.criterion,
                             options.min_node_size);
  };
  evaluate(0);

  while (tree.n_splits < options.max_splits) {
    std::optional<std::size_t> chosen;
    double best_gain = 0.0;
    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
      if (!tree.nodes[id].is_leaf() || id >= pending.size() || !pending[id]) continue;
      const double gain = tree.nodes[id].impurity - pending[id]->objective;
      if (gain > best_gain) {
        best_gain = gain;
        chosen = id;
      }
    }
    if (!chosen) break;
    SplitResult res = std::move(*pending[*chosen]);
    pending[*chosen].reset();

    Box lbox = tree.nodes[*chosen].box;
    Box rbox = lbox;
    auto& lr = lbox.ranges[res.split.param];
    auto& rr = rbox.ranges[res.split.param];
    if (res.split.categorical) {
      lr.levels &= res.split.left_levels;
      rr.levels &= ~res.split.left_levels;
    } else {
      lr.hi = res.split.threshold;
      rr.lo = res.split.threshold;
      rr.lo_open = true;
    }
    const std::size_t depth = tree.nodes[*chosen].depth + 1;
    const std::size_t l = make_node(std::move(res.left), std::move(lbox), depth);
    const std::size_t r = make_node(std::move(res.right), std::move(rbox), depth);
    auto& parent = tree.nodes[*chosen];
    parent.split = res.split;
    parent.left = l;
    parent.right = r;
    parent.split_order = ++tree.n_splits;
    if (tree.n_splits < options.max_splits) {
      evaluate(l);
      evaluate(r);
    }
  }
  return tree;
}

const PartitionNode& locate(const PartitionTree& tree, const SearchSpace& space,
                            const Config& config, std::size_t splits) {
  if (tree.nodes.empty()) throw ContractError("locate: empty tree");
  if (config.size() != space.size()) throw ContractError("locate: config size mismatch");
  for (std::size_t j = 0; j < space.size(); ++j) {
    if (!config.active(j)) continue;
    const auto& p = space.param(j);
    const double v = config.at(j);
    if (!(v >= p.lower && v <= p.upper)) {
      throw ContractError("locate: value of '" + p.name + "' lies outside the space");
    }
  }
  const PartitionNode* node = &tree.root();
  while (!node->is_leaf() && node->split_order <= splits) {
    node = &tree.nodes[node->split->goes_left(space, config) ? *node->left : *node->right];
  }
  return *node;
}

std::vector<std::size_t> l1_baseline(const IceBundle& bundle,
                                     const SearchSpace& space,
                                     const Config& incumbent,
                                     std::size_t target_size) {
  if (incumbent.size() != space.size()) {
    throw ContractError("l1_baseline: config size mismatch");
  }
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(bundle.n());
  for (std::size_t i = 0; i < bundle.n(); ++i) {
    const auto& c = bundle.sample[i];
    double d = 0.0;
    for (std::size_t j = 0; j < space.size(); ++j) {
      if (j == bundle.s) continue;
      const bool a = incumbent.active(j);
      const bool b = c.active(j);
      if (a != b) {
        d += 1.0;
      } else if (a) {
        if (space.param(j).is_numeric()) {
          d += std::abs(space.to_model(j, incumbent.at(j)) - space.to_model(j, c.at(j)));
        } else if (LevelOf(incumbent, j) != LevelOf(c, j)) {
          d += 1.0;
        }
      }
    }
    dist.emplace_back(d, i);
  }
  std::sort(dist.begin(), dist.end());
  const std::size_t k = std::min(target_size, dist.size());
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(dist[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

nlohmann::json BoxJson(const Box& box, const SearchSpace& space, std::size_t s) {
  nlohmann::json out = nlohmann::json::object();
  const Box full = Box::full(space);
  for (std::size_t j = 0; j < space.size(); ++j) {
    if (j == s) continue;
    const auto& p = space.param(j);
    const auto& r = box.ranges[j];
    if (!p.is_numeric()) {
      if (r.levels == full.ranges[j].levels) continue;
      nlohmann::json levels = nlohmann::json::array();
      for (std::size_t l = 0; l < p.levels.size(); ++l) {
        if ((r.levels >> l) & 1u) levels.push_back(p.levels[l]);
      }
      out[p.name] = {{"levels", levels}};
      continue;
    }
    if (r.lo == full.ranges[j].lo && r.hi == full.ranges[j].hi) continue;
    out[p.name] = {{"lower", space.from_model(j, r.lo)},
                   {"upper", space.from_model(j, r.hi)},
                   {"lower_open", r.lo_open}};
  }
  return out;
}

std::string BoxText(const Box& box, const SearchSpace& space, std::size_t s) {
  std::ostringstream os;
  bool first = true;
  const nlohmann::json ranges = BoxJson(box, space, s);
  for (const auto& [name, r] : ranges.items()) {
    if (!first) os << "; ";
    first = false;
    if (r.contains("levels")) {
      os << name << " in {";
      bool f2 = true;
      for (const auto& l : r.at("levels")) {
        os << (f2 ? "" : " ") << l.get<std::string>();
        f2 = false;
      }
      os << "}";
    } else {
      os << name << " in " << (r.at("lower_open").get<bool>() ? "(" : "[")
         << FormatDouble(r.at("lower").get<double>()) << " "
         << FormatDouble(r.at("upper").get<double>()) << "]";
    }
  }
  return os.str();
}

}  // namespace

nlohmann::json tree_to_json(const PartitionTree& tree, const SearchSpace& space,
                            const std::vector<std::string>& pdp_files) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : tree.nodes) {
    double mc = 0.0;
    for (Eigen::Index g = 0; g < n.pdp.variance.size(); ++g) {
      mc += std::sqrt(std::max(n.pdp.variance[g], 0.0));
    }
    if (n.pdp.variance.size() > 0) mc /= static_cast<double>(n.pdp.variance.size());
    nlohmann::json j = {{"id", n.id},
                        {"depth", n.depth},
                        {"n_members", n.members.size()},
                        {"impurity", n.impurity},
                        {"mean_confidence", mc},
                        {"box", BoxJson(n.box, space, tree.s)}};
    if (n.split) {
      const auto& sp = *n.split;
      nlohmann::json split = {{"param", space.param(sp.param).name},
                              {"order", n.split_order}};
      if (sp.categorical) {
        nlohmann::json levels = nlohmann::json::array();
        const auto& p = space.param(sp.param);
        for (std::size_t l = 0; l < p.levels.size(); ++l) {
          if ((sp.left_levels >> l) & 1u) levels.push_back(p.levels[l]);
        }
        split["left_levels"] = levels;
      } else {
        split["threshold"] = space.from_model(sp.param, sp.threshold);
      }
      j["split"] = split;
      j["left"] = *n.left;
      j["right"] = *n.right;
    } else if (n.id < pdp_files.size() && !pdp_files[n.id].empty()) {
      j["pdp_file"] = pdp_files[n.id];
    }
    nodes.push_back(j);
  }
  return {{"param", space.param(tree.s).name},
          {"criterion", to_string(tree.options.criterion)},
          {"estimator", to_string(tree.options.estimator)},
          {"max_splits", tree.options.max_splits},
          {"min_node_size", tree.options.min_node_size},
          {"n_splits", tree.n_splits},
          {"nodes", nodes}};
}

std::string leaves_to_csv(const PartitionTree& tree, const SearchSpace& space) {
  std::string out = CsvLine({"leaf_id", "depth", "n_members", "impurity",
                             "mean_confidence", "region"});
  for (std::size_t id : tree.leaves()) {
    const auto& n = tree.nodes[id];
    double mc = 0.0;
    for (Eigen::Index g = 0; g < n.pdp.variance.size(); ++g) {
      mc += std::sqrt(std::max(n.pdp.variance[g], 0.0));
    }
    if (n.pdp.variance.size() > 0) mc /= static_cast<double>(n.pdp.variance.size());
    out += CsvLine({std::to_string(id), std::to_string(n.depth),
                    std::to_string(n.members.size()), FormatDouble(n.impurity),
                    FormatDouble(mc), BoxText(n.box, space, tree.s)});
  }
  return out;
}

}  // namespace bopdp
