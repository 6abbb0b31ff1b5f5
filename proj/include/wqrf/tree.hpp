#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wqrf/data.hpp"

namespace wqrf {

/// Per-level sample counts, indexed by level_index().
using ClassCounts = std::array<std::uint32_t, kLevelCount>;

std::uint64_t total(const ClassCounts& counts) noexcept;

/// 1 - sum_c (n_c / n)^2. Throws Error{EmptyCounts} when every count is zero.
double gini_impurity(const ClassCounts& counts);

/// Majority level; ties go to the more severe level.
PollutionLevel majority_level(const ClassCounts& counts);

/// Midpoints between consecutive distinct sorted values, ascending.
std::vector<double> candidate_thresholds(std::span<const double> values);

struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  double weighted_impurity = 0.0;

  bool operator==(const SplitCandidate&) const = default;
};

/// Gini-optimal axis split over the given features; left takes x <= threshold.
///
/// Candidates are compared exactly: minimizing weighted Gini is equivalent to
/// maximizing sum_c nL_c^2 / nL + sum_c nR_c^2 / nR, which is a ratio of
/// integers. Ties go to the lowest feature index, then the lowest threshold.
/// Returns nullopt when every selected feature is constant on the rows or when
/// no split lowers impurity below the parent's.
std::optional<SplitCandidate> best_split(const Dataset& data, std::span<const std::size_t> rows,
                                         std::span<const std::size_t> features);
std::optional<SplitCandidate> best_split(std::span<const LabeledSample> samples,
                                         std::span<const std::size_t> features);

struct TreeConfig {
  std::size_t features_per_split = 2;
  std::size_t min_samples_split = 2;
  std::optional<std::size_t> max_depth;

  /// Throws Error{InvalidArgument}.
  void validate() const;

  bool operator==(const TreeConfig&) const = default;
};

/// An unpruned CART tree stored as a flat node array; node 0 is the root.
/// Children always sit at higher indices than their parent.
class DecisionTree {
 public:
  struct Node {
    // Internal nodes
    std::size_t feature = 0;
    double threshold = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    // Leaves
    ClassCounts counts{};
    bool leaf = true;

    bool operator==(const Node&) const = default;
  };

  DecisionTree() = default;

  /// Checks child links, feature indices, thresholds and leaf counts.
  /// Throws Error{CorruptModel}.
  explicit DecisionTree(std::vector<Node> nodes);

  static DecisionTree single_leaf(const ClassCounts& counts);

  std::span<const Node> nodes() const noexcept { return nodes_; }
  const Node& root() const { return nodes_.front(); }

  /// Leaf reached by routing the sample from the root.
  const Node& route(const WaterSample& sample) const;
  PollutionLevel predict(const WaterSample& sample) const { return majority_level(route(sample).counts); }

  std::size_t depth() const;
  std::size_t leaf_count() const;

  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<Node> nodes_;
};

/// N rows drawn uniformly with replacement from [0, n).
std::vector<std::size_t> bootstrap_indices(std::size_t n, Rng& rng);
Dataset bootstrap_sample(const Dataset& dataset, Rng& rng);

/// Grows a tree until nodes are pure, smaller than min_samples_split, at
/// max_depth, or unsplittable. Each node draws its own feature subset.
DecisionTree grow_tree(const Dataset& data, const TreeConfig& config, Rng& rng);

inline PollutionLevel tree_predict(const DecisionTree& tree, const WaterSample& sample) {
  return tree.predict(sample);
}

}  // namespace wqrf
