// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "wqrf/cli.hpp"
#include "wqrf/error.hpp"
#include "wqrf/eval.hpp"
#include "wqrf/forest.hpp"
#include "wqrf/report.hpp"

using namespace wqrf;
using L = PollutionLevel;

namespace {

// Collects the first few failure reasons for a criterion.
struct Check {
  std::vector<std::string> failures;
  std::string detail;

  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
  }
  bool ok() const { return failures.empty(); }
};

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

std::string fmt(double x, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << x;
  return s.str();
}

const std::string kReferenceMatrix =
    R"({"classes":["red","yellow","orange"],"counts":[[324,5,6],[8,50,1],[18,1,60]]})";

void fixture_replay(Check& c) {
  const auto report = evaluate(parse_matrix_json(kReferenceMatrix));
  c.expect(std::abs(report.accuracy * 100 - 91.7548) <= 0.00005, "accuracy " + fmt(report.accuracy * 100));
  c.expect(report.correct == 434, "correct " + std::to_string(report.correct));
  c.expect(report.incorrect == 39, "incorrect " + std::to_string(report.incorrect));

  const std::map<L, std::array<double, 4>> expected = {
      {L::Red, {0.926, 0.967, 0.946, 0.188}},
      {L::Yellow, {0.893, 0.847, 0.870, 0.014}},
      {L::Orange, {0.896, 0.759, 0.822, 0.018}},
  };
  for (const auto& [level, want] : expected) {
    const auto& m = report.per_class.at(level);
    const std::array<double, 4> got = {m.precision, m.recall, m.f_measure, m.fp_rate};
    for (std::size_t i = 0; i < 4; ++i) {
      c.expect(round3(got[i]) == want[i], std::string(level_name(level)) + " metric " + std::to_string(i) + " = " +
                                              fmt(got[i]));
    }
  }
  const auto& w = report.weighted;
  c.expect(round3(w.precision) == 0.917, "weighted precision " + fmt(w.precision));
  c.expect(round3(w.recall) == 0.918, "weighted recall " + fmt(w.recall));
  c.expect(round3(w.f_measure) == 0.916, "weighted f " + fmt(w.f_measure));
  c.expect(round3(w.fp_rate) == 0.138, "weighted fp rate " + fmt(w.fp_rate));
  c.expect(std::abs(report.kappa - 0.8115) <= 0.00005, "kappa " + fmt(report.kappa));
  c.expect(report.agreement == Agreement::Strong, "agreement " + std::string(agreement_name(report.agreement)));

  // The same numbers through the command-line metrics path.
  const auto path = (std::filesystem::temp_directory_path() / "wqrf_acceptance_matrix.json").string();
  cli::write_file_atomic(path, kReferenceMatrix);
  std::ostringstream out, err;
  const int status = cli::run({"metrics", path}, out, err);
  std::remove(path.c_str());
  c.expect(status == 0, "metrics exit status " + std::to_string(status));
  for (const char* needle : {"91.7548", "8.2452", "0.8115", "Strong"}) {
    c.expect(out.str().find(needle) != std::string::npos, std::string("metrics text lacks ") + needle);
  }
  c.detail = "accuracy " + fmt(report.accuracy * 100, 4) + "%, kappa " + fmt(report.kappa, 4);
}

void kappa_bands(Check& c) {
  const std::vector<std::pair<double, Agreement>> points = {
      {-1.0, Agreement::None},       {0.0, Agreement::None},      {0.2099, Agreement::None},
      {0.21, Agreement::Minimal},    {0.3999, Agreement::Minimal}, {0.40, Agreement::Weak},
      {0.5999, Agreement::Weak},     {0.60, Agreement::Moderate}, {0.7999, Agreement::Moderate},
      {0.80, Agreement::Strong},     {0.90, Agreement::Strong},   {0.9001, Agreement::AlmostPerfect},
  };
  for (const auto& [k, want] : points) {
    const auto got = agreement_level(k);
    c.expect(got == want, fmt(k, 4) + " -> " + std::string(agreement_name(got)));
  }
  c.detail = std::to_string(points.size()) + " boundary points";
}

void split_oracle(Check& c) {
  std::mt19937_64 rng(20240601);
  const std::vector<std::size_t> features = {0, 1, 2, 3};
  int with_split = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 50)(rng);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(2, 4)(rng);
    const int range = std::array{2, 5, 20, 1000}[trial % 4];
    const auto samples = oracle::random_samples(rng, n, k, range);
    const auto got = best_split(samples, features);
    const auto want = oracle::brute_force_split(samples, features);
    const std::string where = "dataset " + std::to_string(trial);
    if (got.has_value() != want.has_value()) {
      c.expect(false, where + ": presence differs");
      continue;
    }
    if (!got) continue;
    ++with_split;
    c.expect(got->feature == want->feature && got->threshold == want->threshold,
             where + ": (" + std::to_string(got->feature) + ", " + fmt(got->threshold) + ") vs (" +
                 std::to_string(want->feature) + ", " + fmt(want->threshold) + ")");
    c.expect(std::abs(got->weighted_impurity - oracle::as_double(*want)) < 1e-12, where + ": impurity differs");
  }
  c.detail = "200 datasets, " + std::to_string(with_split) + " with a split";
}

void interpolation(Check& c) {
  TreeConfig cfg;
  cfg.features_per_split = kFeatureCount;
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<LabeledSample> rows;
    if (trial % 2 == 0) {
      const auto synth = generate_synthetic({.n = 100, .seed = static_cast<std::uint64_t>(trial), .noise_rate = 0.1});
      for (std::size_t i = 0; i < synth.size(); ++i) rows.push_back(synth.labeled_sample(i));
    } else {
      // Arbitrary labels on coarse values; keep the first label of any repeated vector.
      std::map<std::array<double, 4>, L> seen;
      for (const auto& s : oracle::random_samples(gen, 400, 4, 6)) {
        std::array<double, 4> key{s.sample.do_mg_l, s.sample.ph, s.sample.bod_mg_l, s.sample.tss_mg_l};
        rows.push_back({s.sample, seen.emplace(key, s.level).first->second});
        if (rows.size() == 100) break;
      }
    }
    Dataset data(rows);
    Rng rng(derive_seed(99, static_cast<std::uint64_t>(trial)));
    const auto tree = grow_tree(data, cfg, rng);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) correct += tree.predict(data.sample(i)) == data.label(i);
    c.expect(correct == data.size(), "dataset " + std::to_string(trial) + ": " + std::to_string(correct) + "/" +
                                         std::to_string(data.size()));
  }
  c.detail = "50 datasets of 100";
}

Dataset probe_samples(std::size_t n, std::uint64_t seed) {
  SynthOptions opts;
  opts.n = n;
  opts.seed = seed;
  opts.class_mix = {0.25, 0.25, 0.25, 0.25};
  return generate_synthetic(opts);
}

void parallel_determinism(Check& c) {
  const auto data = generate_synthetic({.n = 473, .seed = 42, .noise_rate = 0.08});
  ForestConfig cfg;
  const auto reference = serialize_model(train_forest(data, cfg, 1));
  for (unsigned workers : {4u, 8u}) {
    c.expect(serialize_model(train_forest(data, cfg, workers)) == reference,
             std::to_string(workers) + " workers changed the model bytes");
  }
  const auto model = deserialize_model(reference);
  const auto original = train_forest(data, cfg, 1);
  const auto probe = probe_samples(1000, 7);
  std::size_t same = 0;
  for (const auto& s : probe.samples()) {
    same += model.predict(s) == original.predict(s) && model.predict_proba(s).votes == original.predict_proba(s).votes;
  }
  c.expect(same == 1000, std::to_string(1000 - same) + " predictions changed after a round trip");
  c.expect(serialize_model(model) == reference, "re-serialization differs");
  c.detail = "model " + std::to_string(reference.size()) + " bytes, 1000 round-trip predictions";
}

void vote_algebra(Check& c) {
  const auto data = generate_synthetic({.n = 473, .seed = 42, .noise_rate = 0.08});
  ForestConfig cfg;
  cfg.n_trees = 100;
  const auto model = train_forest(data, cfg, 4);
  const auto probe = probe_samples(1000, 11);
  std::size_t ties = 0;
  for (const auto& s : probe.samples()) {
    const auto dist = model.predict_proba(s);
    const auto p = dist.probabilities();
    double sum = 0.0;
    for (double v : p) {
      sum += v;
      c.expect(std::abs(v * 100 - std::round(v * 100)) < 1e-9, "probability " + fmt(v, 12) + " is not a vote share");
    }
    c.expect(std::abs(sum - 1.0) <= 1e-9, "probabilities sum to " + fmt(sum, 12));
    // Argmax, scanning from the most severe level so ties resolve upward.
    std::size_t best = kLevelCount - 1;
    for (std::size_t i = kLevelCount - 1; i-- > 0;) {
      if (p[i] > p[best]) best = i;
    }
    std::size_t at_max = 0;
    for (double v : p) at_max += v == p[best];
    ties += at_max > 1;
    c.expect(model.predict(s) == static_cast<L>(best), "prediction is not the severity-broken argmax");
  }
  c.detail = "1000 samples, " + std::to_string(ties) + " tied votes";
}

void cv_structure(Check& c) {
  const auto data = generate_synthetic({.n = 473, .seed = 42, .noise_rate = 0.08});
  const auto folds = make_folds(data, 10, true, 42);
  std::vector<int> seen(data.size(), 0);
  for (const auto& fold : folds) {
    for (auto r : fold) ++seen[r];
  }
  c.expect(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }), "folds are not a partition");
  for (L level : data.class_list()) {
    std::size_t lo = data.size(), hi = 0;
    for (const auto& fold : folds) {
      const auto n = static_cast<std::size_t>(
          std::count_if(fold.begin(), fold.end(), [&](auto r) { return data.label(r) == level; }));
      lo = std::min(lo, n);
      hi = std::max(hi, n);
    }
    c.expect(hi - lo <= 1, std::string(level_name(level)) + " fold counts range " + std::to_string(lo) + ".." +
                               std::to_string(hi));
  }
  ForestConfig cfg;
  cfg.n_trees = 25;
  const auto pooled = k_fold_cross_validate(data, cfg, {.k = 10, .stratified = true, .seed = 42, .workers = 4});
  c.expect(pooled.matrix.total() == 473, "pooled matrix sums to " + std::to_string(pooled.matrix.total()));

  // Leave-one-out against a hand-rolled loop.
  for (std::uint64_t round = 0; round < 3; ++round) {
    const std::size_t n = 10 + round;
    std::mt19937_64 gen(round);
    auto rows = oracle::random_samples(gen, n, 3, 50);
    for (std::size_t i = 0; i < 3; ++i) rows[i].level = static_cast<L>(i);
    Dataset tiny(rows);
    ForestConfig small;
    small.n_trees = 11;
    const auto got = k_fold_cross_validate(tiny, small, {.k = n, .stratified = false, .seed = round});
    const auto loo = make_folds(tiny, n, false, round);
    std::vector<L> predicted(n), truths;
    for (std::size_t f = 0; f < n; ++f) {
      const std::size_t held = loo[f].front();
      std::vector<LabeledSample> rest;
      for (std::size_t i = 0; i < n; ++i) {
        if (i != held) rest.push_back(rows[i]);
      }
      ForestConfig fc = small;
      fc.seed = derive_seed(round, f + 1);
      predicted[held] = train_forest(Dataset(rest), fc).predict(rows[held].sample);
    }
    for (const auto& r : rows) truths.push_back(r.level);
    c.expect(got.matrix == build_confusion(truths, predicted, tiny.class_list()),
             "leave-one-out differs for n = " + std::to_string(n));
  }
  c.detail = "10 folds over 473, leave-one-out on n = 10..12";
}

void performance_band(Check& c) {
  const auto start = std::chrono::steady_clock::now();
  CrossValidationOptions opts;
  opts.workers = 4;
  const auto noisy = k_fold_cross_validate(generate_synthetic({.n = 473, .seed = 42, .noise_rate = 0.08}),
                                           ForestConfig{}, opts);
  const auto clean = k_fold_cross_validate(generate_synthetic({.n = 473, .seed = 42, .noise_rate = 0.0}),
                                           ForestConfig{}, opts);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(noisy.accuracy >= 0.85, "noisy accuracy " + fmt(noisy.accuracy, 4));
  c.expect(noisy.kappa >= 0.60, "noisy kappa " + fmt(noisy.kappa, 4));
  c.expect(clean.accuracy >= 0.98, "noiseless accuracy " + fmt(clean.accuracy, 4));
  c.expect(seconds < 30.0, "took " + fmt(seconds, 1) + " s");
  c.detail = "noisy accuracy " + fmt(noisy.accuracy, 4) + " kappa " + fmt(noisy.kappa, 4) + " (" +
             std::string(agreement_name(noisy.agreement)) + "), noiseless accuracy " + fmt(clean.accuracy, 4) + ", " +
             fmt(seconds, 2) + " s";
}

void matrix_identities(Check& c) {
  std::mt19937_64 rng(500);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = 2 + static_cast<std::size_t>(trial % 3);
    std::vector<L> classes(kAllLevels.begin(), kAllLevels.end());
    std::shuffle(classes.begin(), classes.end(), rng);
    classes.resize(k);
    std::vector<std::uint64_t> counts(k * k);
    for (auto& x : counts) x = std::uniform_int_distribution<std::uint64_t>(0, 200)(rng);
    counts[0] += 1;
    const ConfusionMatrix m(classes, counts);
    const auto r = evaluate(m);
    const std::string where = "matrix " + std::to_string(trial);
    c.expect(r.weighted.recall == r.accuracy, where + ": weighted recall != accuracy");
    c.expect(r.kappa <= r.accuracy, where + ": kappa above accuracy");
    for (std::uint64_t factor : {2u, 7u}) {
      std::vector<std::uint64_t> scaled(counts);
      for (auto& x : scaled) x *= factor;
      const double ks = cohen_kappa(ConfusionMatrix(classes, scaled));
      c.expect(std::abs(ks - r.kappa) <= 1e-12, where + ": kappa changed under scaling by " + std::to_string(factor));
    }
    for (const auto& [level, cm] : r.per_class) {
      c.expect(cm.f_measure >= std::min(cm.precision, cm.recall) - 1e-12 &&
                   cm.f_measure <= std::max(cm.precision, cm.recall) + 1e-12,
               where + ": f outside [min, max] for " + std::string(level_name(level)));
    }
  }
  c.detail = "500 matrices";
}

void bootstrap_statistics(Check& c) {
  Rng rng(derive_seed(42, 10'000));
  double sum = 0.0;
  for (int draw = 0; draw < 10'000; ++draw) {
    const auto rows = bootstrap_indices(100, rng);
    sum += static_cast<double>(std::set<std::size_t>(rows.begin(), rows.end()).size()) / 100.0;
  }
  const double mean = sum / 10'000;
  const double expected = 1.0 - std::pow(1.0 - 1.0 / 100.0, 100.0);
  c.expect(std::abs(mean - 0.634) <= 0.02, "mean distinct fraction " + fmt(mean, 4));
  c.detail = "mean distinct fraction " + fmt(mean, 4) + " (expected " + fmt(expected, 4) + ")";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"AC1 reference matrix replay", fixture_replay},
      {"AC2 kappa agreement bands", kappa_bands},
      {"AC3 best split matches exhaustive search", split_oracle},
      {"AC4 unpruned tree interpolates consistent data", interpolation},
      {"AC5 determinism under parallel training", parallel_determinism},
      {"AC6 vote algebra", vote_algebra},
      {"AC7 cross-validation structure", cv_structure},
      {"AC8 synthetic performance band", performance_band},
      {"AC9 metric identities on random matrices", matrix_identities},
      {"AC10 bootstrap distinct fraction", bootstrap_statistics},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Check check;
    try {
      fn(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    std::cout << (check.ok() ? "[PASS] " : "[FAIL] ") << name;
    if (!check.detail.empty()) std::cout << ": " << check.detail;
    std::cout << '\n';
    for (const auto& f : check.failures) std::cout << "       " << f << '\n';
    failed += !check.ok();
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
