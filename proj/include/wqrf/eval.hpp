#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "wqrf/data.hpp"
#include "wqrf/forest.hpp"

namespace wqrf {

/// counts(i, j) = instances of true class classes[i] predicted as classes[j].
class ConfusionMatrix {
 public:
  /// Throws Error{InvalidArgument} on duplicate classes or a size mismatch.
  ConfusionMatrix(std::vector<PollutionLevel> classes, std::vector<std::uint64_t> counts);
  explicit ConfusionMatrix(std::vector<PollutionLevel> classes);

  std::size_t size() const noexcept { return classes_.size(); }
  const std::vector<PollutionLevel>& classes() const noexcept { return classes_; }

  std::uint64_t operator()(std::size_t truth, std::size_t predicted) const { return counts_[truth * size() + predicted]; }
  std::uint64_t& operator()(std::size_t truth, std::size_t predicted) { return counts_[truth * size() + predicted]; }

  /// Position of a class; throws Error{UnknownClass}.
  std::size_t index_of(PollutionLevel level) const;

  std::uint64_t total() const;
  std::uint64_t trace() const;
  std::uint64_t row_sum(std::size_t i) const;
  std::uint64_t col_sum(std::size_t j) const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::vector<PollutionLevel> classes_;
  std::vector<std::uint64_t> counts_;
};

ConfusionMatrix build_confusion(std::span<const PollutionLevel> truths, std::span<const PollutionLevel> preds,
                                std::span<const PollutionLevel> classes);

double precision(const ConfusionMatrix& m, PollutionLevel level);
double recall(const ConfusionMatrix& m, PollutionLevel level);
double f_measure(const ConfusionMatrix& m, PollutionLevel level);
double fp_rate(const ConfusionMatrix& m, PollutionLevel level);

struct AccuracySummary {
  double accuracy = 0.0;
  std::uint64_t correct = 0;
  std::uint64_t incorrect = 0;
};
AccuracySummary accuracy(const ConfusionMatrix& m);

struct ClassMetrics {
  double tp_rate = 0.0;
  double fp_rate = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  std::uint64_t support = 0;
  // Diagonal count; lets the weighted recall be formed as sum(tp) / N.
  std::uint64_t true_positives = 0;
};

ClassMetrics class_metrics(const ConfusionMatrix& m, PollutionLevel level);

/// Support-weighted mean of each metric. Recall and TP rate are computed as
/// sum(tp) / sum(support), which is the same quantity without the rounding.
ClassMetrics weighted_average(const std::map<PollutionLevel, ClassMetrics>& per_class);

/// Cohen's kappa from observed and chance agreement. Returns 1 when chance
/// agreement is total and the matrix is diagonal, 0 when it is total otherwise.
double cohen_kappa(const ConfusionMatrix& m);

enum class Agreement { None, Minimal, Weak, Moderate, Strong, AlmostPerfect };

/// Landis-Koch band: <0.21 None, [0.21,0.40) Minimal, [0.40,0.60) Weak,
/// [0.60,0.80) Moderate, [0.80,0.90] Strong, >0.90 Almost Perfect.
/// Throws Error{OutOfRange} for |kappa| > 1.
Agreement agreement_level(double kappa);
std::string_view agreement_name(Agreement a) noexcept;

struct EvaluationReport {
  ConfusionMatrix matrix;
  std::map<PollutionLevel, ClassMetrics> per_class;
  ClassMetrics weighted;
  double accuracy = 0.0;
  std::uint64_t correct = 0;
  std::uint64_t incorrect = 0;
  double kappa = 0.0;
  Agreement agreement = Agreement::None;
};

EvaluationReport evaluate(const ConfusionMatrix& matrix);
EvaluationReport evaluate(std::span<const PollutionLevel> truths, std::span<const PollutionLevel> preds,
                          std::span<const PollutionLevel> classes);

struct CrossValidationOptions {
  std::size_t k = 10;
  bool stratified = true;
  std::uint64_t seed = 42;
  unsigned workers = 1;
};

/// Row indices per fold. Stratified folds deal each class's shuffled members
/// round-robin, continuing where the previous class stopped, so per-class
/// counts differ by at most one between folds.
std::vector<std::vector<std::size_t>> make_folds(const Dataset& dataset, std::size_t k, bool stratified,
                                                 std::uint64_t seed);

/// Forest config used for fold i (0-based): the caller's config with its seed
/// replaced by derive_seed(seed, i + 1).
ForestConfig fold_config(const ForestConfig& config, std::uint64_t seed, std::size_t fold);

/// Trains on k-1 folds, predicts the held-out fold, and evaluates all
/// out-of-fold predictions pooled into one matrix over dataset.class_list().
EvaluationReport k_fold_cross_validate(const Dataset& dataset, const ForestConfig& config,
                                       const CrossValidationOptions& options);

}  // namespace wqrf
