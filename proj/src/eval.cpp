#include "wqrf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "wqrf/error.hpp"

namespace wqrf {

ConfusionMatrix::ConfusionMatrix(std::vector<PollutionLevel> classes, std::vector<std::uint64_t> counts)
    : classes_(std::move(classes)), counts_(std::move(counts)) {
  if (classes_.empty()) throw Error(Errc::InvalidArgument, "confusion matrix needs at least one class");
  std::array<bool, kLevelCount> seen{};
  for (PollutionLevel l : classes_) {
    if (seen[level_index(l)]) throw Error(Errc::InvalidArgument, "duplicate class " + std::string(level_name(l)));
    seen[level_index(l)] = true;
  }
  if (counts_.size() != classes_.size() * classes_.size()) {
    throw Error(Errc::InvalidArgument, "confusion matrix must be square over its classes");
  }
}

ConfusionMatrix::ConfusionMatrix(std::vector<PollutionLevel> classes)
    : ConfusionMatrix(classes, std::vector<std::uint64_t>(classes.size() * classes.size(), 0)) {}

std::size_t ConfusionMatrix::index_of(PollutionLevel level) const {
  auto it = std::find(classes_.begin(), classes_.end(), level);
  if (it == classes_.end()) {
    throw Error(Errc::UnknownClass, "class " + std::string(level_name(level)) + " is not in the matrix");
  }
  return static_cast<std::size_t>(it - classes_.begin());
}

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < size(); ++i) t += (*this)(i, i);
  return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t i) const {
  std::uint64_t s = 0;
  for (std::size_t j = 0; j < size(); ++j) s += (*this)(i, j);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t j) const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < size(); ++i) s += (*this)(i, j);
  return s;
}

ConfusionMatrix build_confusion(std::span<const PollutionLevel> truths, std::span<const PollutionLevel> preds,
                                std::span<const PollutionLevel> classes) {
  if (truths.size() != preds.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(truths.size()) + " truths vs " + std::to_string(preds.size()) +
                                          " predictions");
  }
  if (truths.empty()) throw Error(Errc::EmptyDataset, "no predictions to evaluate");
  ConfusionMatrix m({classes.begin(), classes.end()});
  for (std::size_t t = 0; t < truths.size(); ++t) ++m(m.index_of(truths[t]), m.index_of(preds[t]));
  return m;
}

namespace {

__extension__ using i128 = __int128;

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

struct Tally {
  std::uint64_t tp, fp, fn, tn;
};

Tally tally(const ConfusionMatrix& m, PollutionLevel level) {
  const std::size_t c = m.index_of(level);
  const std::uint64_t tp = m(c, c);
  const std::uint64_t fp = m.col_sum(c) - tp;
  const std::uint64_t fn = m.row_sum(c) - tp;
  return {tp, fp, fn, m.total() - tp - fp - fn};
}

}  // namespace

double precision(const ConfusionMatrix& m, PollutionLevel level) {
  auto t = tally(m, level);
  return ratio(t.tp, t.tp + t.fp);
}

double recall(const ConfusionMatrix& m, PollutionLevel level) {
  auto t = tally(m, level);
  return ratio(t.tp, t.tp + t.fn);
}

// 2PR/(P+R) reduces to 2tp/(2tp+fp+fn); the integer form rounds once.
double f_measure(const ConfusionMatrix& m, PollutionLevel level) {
  auto t = tally(m, level);
  return ratio(2 * t.tp, 2 * t.tp + t.fp + t.fn);
}

double fp_rate(const ConfusionMatrix& m, PollutionLevel level) {
  auto t = tally(m, level);
  return ratio(t.fp, t.fp + t.tn);
}

AccuracySummary accuracy(const ConfusionMatrix& m) {
  const std::uint64_t n = m.total();
  if (n == 0) throw Error(Errc::EmptyDataset, "confusion matrix is empty");
  const std::uint64_t correct = m.trace();
  return {ratio(correct, n), correct, n - correct};
}

ClassMetrics class_metrics(const ConfusionMatrix& m, PollutionLevel level) {
  ClassMetrics out;
  out.precision = precision(m, level);
  out.recall = recall(m, level);
  out.tp_rate = out.recall;
  out.f_measure = f_measure(m, level);
  out.fp_rate = fp_rate(m, level);
  const std::size_t c = m.index_of(level);
  out.support = m.row_sum(c);
  out.true_positives = m(c, c);
  return out;
}

ClassMetrics weighted_average(const std::map<PollutionLevel, ClassMetrics>& per_class) {
  ClassMetrics out;
  for (const auto& [level, cm] : per_class) {
    out.support += cm.support;
    out.true_positives += cm.true_positives;
  }
  if (out.support == 0) throw Error(Errc::EmptyDataset, "weighted average over zero support");
  const auto n = static_cast<double>(out.support);
  for (const auto& [level, cm] : per_class) {
    const double w = static_cast<double>(cm.support);
    out.precision += w * cm.precision;
    out.f_measure += w * cm.f_measure;
    out.fp_rate += w * cm.fp_rate;
  }
  out.precision /= n;
  out.f_measure /= n;
  out.fp_rate /= n;
  out.recall = ratio(out.true_positives, out.support);
  out.tp_rate = out.recall;
  return out;
}

double cohen_kappa(const ConfusionMatrix& m) {
  const std::uint64_t n = m.total();
  if (n == 0) throw Error(Errc::EmptyDataset, "confusion matrix is empty");
  // kappa = (N*trace - sum_c row_c*col_c) / (N^2 - sum_c row_c*col_c)
  i128 chance = 0;
  for (std::size_t c = 0; c < m.size(); ++c) chance += static_cast<i128>(m.row_sum(c)) * m.col_sum(c);
  const i128 nn = static_cast<i128>(n) * n;
  const i128 num = static_cast<i128>(n) * m.trace() - chance;
  const i128 den = nn - chance;
  if (den == 0) return m.trace() == n ? 1.0 : 0.0;
  constexpr i128 kExact = i128{1} << 53;
  if (num < kExact && -num < kExact && den < kExact) {
    return static_cast<double>(num) / static_cast<double>(den);
  }
  return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

Agreement agreement_level(double kappa) {
  if (!(kappa >= -1.0 && kappa <= 1.0)) {
    throw Error(Errc::OutOfRange, "kappa " + std::to_string(kappa) + " lies outside [-1, 1]");
  }
  if (kappa < 0.21) return Agreement::None;
  if (kappa < 0.40) return Agreement::Minimal;
  if (kappa < 0.60) return Agreement::Weak;
  if (kappa < 0.80) return Agreement::Moderate;
  if (kappa <= 0.90) return Agreement::Strong;
  return Agreement::AlmostPerfect;
}

std::string_view agreement_name(Agreement a) noexcept {
  switch (a) {
    case Agreement::None: return "None";
    case Agreement::Minimal: return "Minimal";
    case Agreement::Weak: return "Weak";
    case Agreement::Moderate: return "Moderate";
    case Agreement::Strong: return "Strong";
    case Agreement::AlmostPerfect: return "Almost Perfect";
  }
  return "?";
}

EvaluationReport evaluate(const ConfusionMatrix& matrix) {
  EvaluationReport r{matrix, {}, {}, 0.0, 0, 0, 0.0, Agreement::None};
  const auto acc = accuracy(matrix);
  r.accuracy = acc.accuracy;
  r.correct = acc.correct;
  r.incorrect = acc.incorrect;
  for (PollutionLevel l : matrix.classes()) r.per_class[l] = class_metrics(matrix, l);
  r.weighted = weighted_average(r.per_class);
  r.kappa = cohen_kappa(matrix);
  r.agreement = agreement_level(r.kappa);
  return r;
}

EvaluationReport evaluate(std::span<const PollutionLevel> truths, std::span<const PollutionLevel> preds,
                          std::span<const PollutionLevel> classes) {
  return evaluate(build_confusion(truths, preds, classes));
}

// ---------------------------------------------------------------------------
// Cross-validation

std::vector<std::vector<std::size_t>> make_folds(const Dataset& dataset, std::size_t k, bool stratified,
                                                 std::uint64_t seed) {
  if (k < 2) throw Error(Errc::InvalidArgument, "cross-validation needs at least 2 folds");
  if (dataset.empty()) throw Error(Errc::EmptyDataset, "cannot cross-validate an empty dataset");
  if (k > dataset.size()) {
    throw Error(Errc::InsufficientClassMembers,
                std::to_string(k) + " folds requested for " + std::to_string(dataset.size()) + " rows");
  }

  Rng rng(derive_seed(seed, 0));
  std::vector<std::vector<std::size_t>> groups;
  if (stratified) {
    groups.resize(kLevelCount);
    for (std::size_t i = 0; i < dataset.size(); ++i) groups[level_index(dataset.label(i))].push_back(i);
    for (PollutionLevel l : kAllLevels) {
      const auto& members = groups[level_index(l)];
      if (!members.empty() && members.size() < k) {
        throw Error(Errc::InsufficientClassMembers, "class " + std::string(level_name(l)) + " has " +
                                                        std::to_string(members.size()) + " members, fewer than " +
                                                        std::to_string(k) + " folds");
      }
    }
  } else {
    groups.emplace_back(dataset.size());
    std::iota(groups.front().begin(), groups.front().end(), 0);
  }

  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t cursor = 0;
  for (auto& group : groups) {
    std::shuffle(group.begin(), group.end(), rng);
    for (std::size_t row : group) {
      folds[cursor].push_back(row);
      cursor = (cursor + 1) % k;
    }
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

ForestConfig fold_config(const ForestConfig& config, std::uint64_t seed, std::size_t fold) {
  ForestConfig out = config;
  out.seed = derive_seed(seed, fold + 1);
  return out;
}

EvaluationReport k_fold_cross_validate(const Dataset& dataset, const ForestConfig& config,
                                       const CrossValidationOptions& options) {
  if (!dataset.labeled()) throw Error(Errc::MissingColumn, "cross-validation needs a pollution_level column");
  const auto folds = make_folds(dataset, options.k, options.stratified, options.seed);

  std::vector<PollutionLevel> predicted(dataset.size());
  std::vector<bool> in_fold(dataset.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::fill(in_fold.begin(), in_fold.end(), false);
    for (std::size_t row : folds[f]) in_fold[row] = true;
    std::vector<std::size_t> train_rows;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (!in_fold[i]) train_rows.push_back(i);
    }
    Dataset train = dataset.subset(train_rows);
    if (train.class_list().size() < 2) {
      throw Error(Errc::DegenerateFold, "training side of fold " + std::to_string(f + 1) + " has a single class");
    }
    const ForestModel model = train_forest(train, fold_config(config, options.seed, f), options.workers);
    for (std::size_t row : folds[f]) predicted[row] = model.predict(dataset.sample(row));
  }
  const auto classes = dataset.class_list();
  return evaluate(dataset.labels(), predicted, classes);
}

}  // namespace wqrf
