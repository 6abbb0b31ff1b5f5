#include "wqrf/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "wqrf/error.hpp"

namespace wqrf {

namespace {

__extension__ using u128 = unsigned __int128;

std::uint64_t sum_of_squares(const ClassCounts& counts) {
  std::uint64_t s = 0;
  for (std::uint32_t c : counts) s += static_cast<std::uint64_t>(c) * c;
  return s;
}

// Midpoint that stays strictly below hi, so x <= t separates lo from hi.
double split_point(double lo, double hi) {
  double mid = std::midpoint(lo, hi);
  return mid < hi ? mid : lo;
}

bool is_pure(const ClassCounts& counts) {
  return std::count_if(counts.begin(), counts.end(), [](std::uint32_t c) { return c > 0; }) <= 1;
}

}  // namespace

std::uint64_t total(const ClassCounts& counts) noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

double gini_impurity(const ClassCounts& counts) {
  const std::uint64_t n = total(counts);
  if (n == 0) throw Error(Errc::EmptyCounts, "gini impurity of an empty node");
  double sum = 0.0;
  for (std::uint32_t c : counts) {
    double p = static_cast<double>(c) / static_cast<double>(n);
    sum += p * p;
  }
  return 1.0 - sum;
}

PollutionLevel majority_level(const ClassCounts& counts) {
  std::size_t best = kLevelCount - 1;
  for (std::size_t c = kLevelCount; c-- > 0;) {
    if (counts[c] > counts[best]) best = c;
  }
  return static_cast<PollutionLevel>(best);
}

std::vector<double> candidate_thresholds(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) out.push_back(split_point(sorted[i], sorted[i + 1]));
  return out;
}

std::optional<SplitCandidate> best_split(const Dataset& data, std::span<const std::size_t> rows,
                                         std::span<const std::size_t> features) {
  const std::size_t n = rows.size();
  if (n < 2) return std::nullopt;

  ClassCounts parent{};
  for (std::size_t r : rows) ++parent[level_index(data.label(r))];
  const std::uint64_t parent_score = sum_of_squares(parent);

  std::vector<std::size_t> order(features.begin(), features.end());
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());

  struct Best {
    SplitCandidate split;
    std::uint64_t num;  // sum_L^2 * nR + sum_R^2 * nL
    std::uint64_t den;  // nL * nR
    ClassCounts left, right;
    std::size_t n_left;
  };
  std::optional<Best> best;

  std::vector<std::pair<double, std::size_t>> column(n);
  for (std::size_t f : order) {
    if (f >= kFeatureCount) throw Error(Errc::InvalidArgument, "feature index out of range");
    for (std::size_t i = 0; i < n; ++i) {
      column[i] = {data.sample(rows[i]).feature(f), level_index(data.label(rows[i]))};
    }
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    ClassCounts left{};
    for (std::size_t i = 0; i + 1 < n; ++i) {
      ++left[column[i].second];
      if (column[i].first == column[i + 1].first) continue;
      ClassCounts right;
      for (std::size_t c = 0; c < kLevelCount; ++c) right[c] = parent[c] - left[c];
      const std::uint64_t n_left = i + 1, n_right = n - n_left;
      const std::uint64_t num = sum_of_squares(left) * n_right + sum_of_squares(right) * n_left;
      const std::uint64_t den = n_left * n_right;
      if (!best || static_cast<u128>(num) * best->den > static_cast<u128>(best->num) * den) {
        best = Best{{f, split_point(column[i].first, column[i + 1].first), 0.0}, num, den, left, right, n_left};
      }
    }
  }

  // Children must be strictly purer than the parent: num/den > parent_score/n.
  if (!best || static_cast<u128>(best->num) * n <= static_cast<u128>(parent_score) * best->den) {
    return std::nullopt;
  }
  const double w_left = static_cast<double>(best->n_left) / static_cast<double>(n);
  best->split.weighted_impurity =
      w_left * gini_impurity(best->left) + (1.0 - w_left) * gini_impurity(best->right);
  return best->split;
}

std::optional<SplitCandidate> best_split(std::span<const LabeledSample> samples,
                                         std::span<const std::size_t> features) {
  Dataset data(std::vector<LabeledSample>(samples.begin(), samples.end()));
  std::vector<std::size_t> rows(samples.size());
  std::iota(rows.begin(), rows.end(), 0);
  return best_split(data, rows, features);
}

void TreeConfig::validate() const {
  if (features_per_split < 1 || features_per_split > kFeatureCount) {
    throw Error(Errc::InvalidArgument, "features_per_split must lie in [1, 4]");
  }
  if (min_samples_split < 2) throw Error(Errc::InvalidArgument, "min_samples_split must be at least 2");
}

// ---------------------------------------------------------------------------
// DecisionTree

DecisionTree::DecisionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw Error(Errc::CorruptModel, "tree has no nodes");
  std::vector<int> parents(nodes_.size(), 0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& node = nodes_[i];
    if (node.leaf) {
      if (total(node.counts) == 0) throw Error(Errc::CorruptModel, "leaf without samples");
      continue;
    }
    if (node.feature >= kFeatureCount) throw Error(Errc::CorruptModel, "feature index out of range");
    if (!std::isfinite(node.threshold)) throw Error(Errc::CorruptModel, "non-finite threshold");
    for (std::uint32_t child : {node.left, node.right}) {
      if (child <= i || child >= nodes_.size()) throw Error(Errc::CorruptModel, "dangling child reference");
      ++parents[child];
    }
  }
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (parents[i] != 1) throw Error(Errc::CorruptModel, "node is not referenced exactly once");
  }
}

DecisionTree DecisionTree::single_leaf(const ClassCounts& counts) {
  Node leaf;
  leaf.counts = counts;
  return DecisionTree({leaf});
}

const DecisionTree::Node& DecisionTree::route(const WaterSample& sample) const {
  const Node* node = &nodes_.front();
  while (!node->leaf) {
    node = &nodes_[sample.feature(node->feature) <= node->threshold ? node->left : node->right];
  }
  return *node;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> level(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes_[i].leaf) level[nodes_[i].left] = level[nodes_[i].right] = level[i] + 1;
  }
  return deepest;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.leaf; }));
}

// ---------------------------------------------------------------------------
// Growth

std::vector<std::size_t> bootstrap_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> rows(n);
  if (n == 0) return rows;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (auto& r : rows) r = pick(rng);
  return rows;
}

Dataset bootstrap_sample(const Dataset& dataset, Rng& rng) {
  if (dataset.empty()) throw Error(Errc::EmptyDataset, "cannot bootstrap an empty dataset");
  return dataset.subset(bootstrap_indices(dataset.size(), rng));
}

namespace {

class Grower {
 public:
  Grower(const Dataset& data, const TreeConfig& config, Rng& rng) : data_(data), config_(config), rng_(rng) {}

  std::vector<DecisionTree::Node> run() {
    std::vector<std::size_t> rows(data_.size());
    std::iota(rows.begin(), rows.end(), 0);
    grow(rows, 0);
    return std::move(nodes_);
  }

 private:
  std::uint32_t grow(std::vector<std::size_t>& rows, std::size_t depth) {
    const auto index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();

    ClassCounts counts{};
    for (std::size_t r : rows) ++counts[level_index(data_.label(r))];

    const bool stop = is_pure(counts) || rows.size() < config_.min_samples_split ||
                      (config_.max_depth && depth >= *config_.max_depth);
    std::optional<SplitCandidate> split;
    if (!stop) split = best_split(data_, rows, draw_features());
    if (!split) {
      nodes_[index].counts = counts;
      return index;
    }

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) {
      (data_.sample(r).feature(split->feature) <= split->threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    const std::uint32_t l = grow(left, depth + 1);
    const std::uint32_t r = grow(right, depth + 1);
    auto& node = nodes_[index];
    node.leaf = false;
    node.feature = split->feature;
    node.threshold = split->threshold;
    node.left = l;
    node.right = r;
    return index;
  }

  // Partial Fisher-Yates over the feature indices.
  std::vector<std::size_t> draw_features() {
    std::array<std::size_t, kFeatureCount> pool{0, 1, 2, 3};
    for (std::size_t i = 0; i < config_.features_per_split; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, kFeatureCount - 1);
      std::swap(pool[i], pool[pick(rng_)]);
    }
    return {pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(config_.features_per_split)};
  }

  const Dataset& data_;
  const TreeConfig& config_;
  Rng& rng_;
  std::vector<DecisionTree::Node> nodes_;
};

}  // namespace

DecisionTree grow_tree(const Dataset& data, const TreeConfig& config, Rng& rng) {
  config.validate();
  if (data.empty()) throw Error(Errc::EmptyDataset, "cannot grow a tree from an empty dataset");
  if (!data.labeled()) throw Error(Errc::MissingColumn, "training data has no pollution_level column");
  return DecisionTree(Grower(data, config, rng).run());
}

}  // namespace wqrf
