#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wqrf/data.hpp"
#include "wqrf/tree.hpp"

namespace wqrf {

struct ForestConfig {
  std::size_t n_trees = 100;
  TreeConfig tree{};
  std::uint64_t seed = 42;

  void validate() const;

  bool operator==(const ForestConfig&) const = default;
};

/// Fraction of trees voting for each level, indexed by level_index().
struct ClassDistribution {
  std::array<std::uint32_t, kLevelCount> votes{};
  std::uint32_t n_trees = 0;

  double probability(PollutionLevel level) const {
    return static_cast<double>(votes[level_index(level)]) / static_cast<double>(n_trees);
  }
  std::array<double, kLevelCount> probabilities() const;
};

class ForestModel {
 public:
  static constexpr int kFormatVersion = 1;

  /// Throws Error{CorruptModel} when trees is empty, its length differs from
  /// config.n_trees, or a leaf holds a level outside classes.
  ForestModel(std::vector<DecisionTree> trees, ForestConfig config, std::vector<PollutionLevel> classes);

  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
  const ForestConfig& config() const noexcept { return config_; }
  const std::vector<PollutionLevel>& classes() const noexcept { return classes_; }

  ClassDistribution predict_proba(const WaterSample& sample) const;

  /// Argmax of predict_proba; ties go to the more severe level.
  PollutionLevel predict(const WaterSample& sample) const;

  bool operator==(const ForestModel&) const = default;

 private:
  std::vector<DecisionTree> trees_;
  ForestConfig config_;
  std::vector<PollutionLevel> classes_;
};

/// Trains config.n_trees trees, tree i (1-based) on a bootstrap drawn from an
/// rng seeded with derive_seed(config.seed, i). The result does not depend on
/// `workers`.
ForestModel train_forest(const Dataset& dataset, const ForestConfig& config, unsigned workers = 1);

inline ClassDistribution forest_predict_proba(const ForestModel& model, const WaterSample& sample) {
  return model.predict_proba(sample);
}
inline PollutionLevel forest_predict(const ForestModel& model, const WaterSample& sample) {
  return model.predict(sample);
}

/// Versioned JSON model document.
std::string serialize_model(const ForestModel& model);
/// Throws Error{FormatVersionMismatch} or Error{CorruptModel}.
ForestModel deserialize_model(std::string_view bytes);

}  // namespace wqrf
