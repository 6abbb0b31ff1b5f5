#include "wqrf/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "wqrf/error.hpp"

namespace wqrf {

using ordered_json = nlohmann::ordered_json;

void ForestConfig::validate() const {
  if (n_trees < 1) throw Error(Errc::InvalidArgument, "n_trees must be at least 1");
  tree.validate();
}

std::array<double, kLevelCount> ClassDistribution::probabilities() const {
  std::array<double, kLevelCount> out{};
  for (PollutionLevel l : kAllLevels) out[level_index(l)] = probability(l);
  return out;
}

ForestModel::ForestModel(std::vector<DecisionTree> trees, ForestConfig config, std::vector<PollutionLevel> classes)
    : trees_(std::move(trees)), config_(std::move(config)), classes_(std::move(classes)) {
  if (trees_.empty()) throw Error(Errc::CorruptModel, "model has no trees");
  if (trees_.size() != config_.n_trees) {
    throw Error(Errc::CorruptModel, "model declares " + std::to_string(config_.n_trees) + " trees but holds " +
                                        std::to_string(trees_.size()));
  }
  std::array<bool, kLevelCount> known{};
  for (PollutionLevel l : classes_) {
    if (known[level_index(l)]) throw Error(Errc::CorruptModel, "class " + std::string(level_name(l)) + " listed twice");
    known[level_index(l)] = true;
  }
  for (const auto& tree : trees_) {
    for (const auto& node : tree.nodes()) {
      if (!node.leaf) continue;
      for (std::size_t c = 0; c < kLevelCount; ++c) {
        if (node.counts[c] > 0 && !known[c]) {
          throw Error(Errc::CorruptModel, "leaf holds class " + std::string(level_name(static_cast<PollutionLevel>(c))) +
                                              " absent from the class list");
        }
      }
    }
  }
}

ClassDistribution ForestModel::predict_proba(const WaterSample& sample) const {
  ClassDistribution dist;
  dist.n_trees = static_cast<std::uint32_t>(trees_.size());
  for (const auto& tree : trees_) ++dist.votes[level_index(tree.predict(sample))];
  return dist;
}

PollutionLevel ForestModel::predict(const WaterSample& sample) const {
  return majority_level(predict_proba(sample).votes);
}

ForestModel train_forest(const Dataset& dataset, const ForestConfig& config, unsigned workers) {
  config.validate();
  if (dataset.empty()) throw Error(Errc::EmptyDataset, "training data is empty");
  if (!dataset.labeled()) throw Error(Errc::MissingColumn, "training data has no pollution_level column");
  auto classes = dataset.class_list();
  if (classes.size() < 2) {
    throw Error(Errc::SingleClassDataset,
                "training data contains only class " + std::string(level_name(classes.front())));
  }

  std::vector<DecisionTree> trees(config.n_trees);
  auto build = [&](std::size_t i) {
    Rng rng(derive_seed(config.seed, i + 1));
    Dataset bootstrap = dataset.subset(bootstrap_indices(dataset.size(), rng));
    trees[i] = grow_tree(bootstrap, config.tree, rng);
  };

  workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(config.n_trees));
  if (workers == 1) {
    for (std::size_t i = 0; i < config.n_trees; ++i) build(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t i; (i = next.fetch_add(1)) < config.n_trees;) {
            try {
              build(i);
            } catch (...) {
              std::lock_guard lock(failure_mutex);
              if (!failure) failure = std::current_exception();
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  return ForestModel(std::move(trees), config, std::move(classes));
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

ordered_json node_to_json(const DecisionTree& tree, std::size_t index) {
  const auto& node = tree.nodes()[index];
  ordered_json j;
  if (node.leaf) {
    ordered_json counts = ordered_json::object();
    for (PollutionLevel l : kAllLevels) {
      if (node.counts[level_index(l)] > 0) counts[std::string(level_name(l))] = node.counts[level_index(l)];
    }
    j["leaf"] = std::move(counts);
  } else {
    j["feature"] = node.feature;
    j["threshold"] = node.threshold;
    j["left"] = node_to_json(tree, node.left);
    j["right"] = node_to_json(tree, node.right);
  }
  return j;
}

[[noreturn]] void corrupt(const std::string& what) { throw Error(Errc::CorruptModel, what); }

const ordered_json& field(const ordered_json& j, const char* key) {
  if (!j.is_object()) corrupt(std::string("expected an object holding '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) corrupt(std::string("missing field '") + key + "'");
  return *it;
}

std::uint64_t unsigned_field(const ordered_json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    corrupt(std::string("field '") + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

PollutionLevel level_from_json(const std::string& name) {
  try {
    return parse_level(name);
  } catch (const Error&) {
    corrupt("unknown class '" + name + "'");
  }
}

void node_from_json(const ordered_json& j, std::vector<DecisionTree::Node>& nodes, std::size_t depth) {
  if (depth > 100000) corrupt("tree is too deep");
  if (!j.is_object()) corrupt("tree node must be an object");
  const std::size_t index = nodes.size();
  nodes.emplace_back();
  if (j.contains("leaf")) {
    const auto& counts = field(j, "leaf");
    if (!counts.is_object()) corrupt("leaf counts must be an object");
    for (const auto& [name, value] : counts.items()) {
      if (!value.is_number_integer() || value.get<std::int64_t>() < 0 ||
          value.get<std::int64_t>() > std::numeric_limits<std::uint32_t>::max()) {
        corrupt("leaf count for '" + name + "' must be a non-negative integer");
      }
      nodes[index].counts[level_index(level_from_json(name))] = value.get<std::uint32_t>();
    }
    return;
  }
  const auto feature = unsigned_field(j, "feature");
  const auto& threshold = field(j, "threshold");
  if (!threshold.is_number()) corrupt("threshold must be a number");
  node_from_json(field(j, "left"), nodes, depth + 1);
  const auto right_index = nodes.size();
  node_from_json(field(j, "right"), nodes, depth + 1);
  auto& node = nodes[index];
  node.leaf = false;
  node.feature = feature;
  node.threshold = threshold.get<double>();
  node.left = static_cast<std::uint32_t>(index + 1);
  node.right = static_cast<std::uint32_t>(right_index);
}

}  // namespace

std::string serialize_model(const ForestModel& model) {
  const auto& cfg = model.config();
  ordered_json j;
  j["format_version"] = ForestModel::kFormatVersion;
  ordered_json tree_cfg;
  tree_cfg["features_per_split"] = cfg.tree.features_per_split;
  tree_cfg["min_samples_split"] = cfg.tree.min_samples_split;
  tree_cfg["max_depth"] = cfg.tree.max_depth ? ordered_json(*cfg.tree.max_depth) : ordered_json(nullptr);
  j["config"] = {{"n_trees", cfg.n_trees}, {"seed", cfg.seed}, {"tree", std::move(tree_cfg)}};
  ordered_json classes = ordered_json::array();
  for (PollutionLevel l : model.classes()) classes.push_back(level_name(l));
  j["classes"] = std::move(classes);
  j["features"] = kFeatureNames;
  ordered_json trees = ordered_json::array();
  for (const auto& tree : model.trees()) trees.push_back(node_to_json(tree, 0));
  j["trees"] = std::move(trees);
  return j.dump() + "\n";
}

ForestModel deserialize_model(std::string_view bytes) {
  ordered_json j;
  try {
    j = ordered_json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    corrupt(std::string("not a JSON document: ") + e.what());
  }
  if (!j.is_object()) corrupt("model must be a JSON object");

  const auto& version = field(j, "format_version");
  if (!version.is_number_integer() || version.get<std::int64_t>() != ForestModel::kFormatVersion) {
    throw Error(Errc::FormatVersionMismatch,
                "expected format_version " + std::to_string(ForestModel::kFormatVersion) + ", found " + version.dump());
  }

  try {
    const auto& cfg_json = field(j, "config");
    ForestConfig cfg;
    cfg.n_trees = unsigned_field(cfg_json, "n_trees");
    cfg.seed = unsigned_field(cfg_json, "seed");
    const auto& tree_json = field(cfg_json, "tree");
    cfg.tree.features_per_split = unsigned_field(tree_json, "features_per_split");
    cfg.tree.min_samples_split = unsigned_field(tree_json, "min_samples_split");
    const auto& depth = field(tree_json, "max_depth");
    if (!depth.is_null()) cfg.tree.max_depth = unsigned_field(tree_json, "max_depth");
    try {
      cfg.validate();
    } catch (const Error& e) {
      corrupt(e.what());
    }

    const auto& features = field(j, "features");
    if (features != ordered_json(kFeatureNames)) corrupt("unexpected feature list " + features.dump());

    std::vector<PollutionLevel> classes;
    const auto& classes_json = field(j, "classes");
    if (!classes_json.is_array()) corrupt("classes must be an array");
    for (const auto& c : classes_json) {
      if (!c.is_string()) corrupt("class names must be strings");
      classes.push_back(level_from_json(c.get<std::string>()));
    }

    const auto& trees_json = field(j, "trees");
    if (!trees_json.is_array()) corrupt("trees must be an array");
    std::vector<DecisionTree> trees;
    trees.reserve(trees_json.size());
    for (const auto& t : trees_json) {
      std::vector<DecisionTree::Node> nodes;
      node_from_json(t, nodes, 0);
      trees.emplace_back(std::move(nodes));
    }
    return ForestModel(std::move(trees), cfg, std::move(classes));
  } catch (const nlohmann::json::exception& e) {
    corrupt(e.what());
  }
}

}  // namespace wqrf
