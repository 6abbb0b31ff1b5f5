#include "wqrf/data.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "wqrf/error.hpp"

namespace wqrf {

std::string_view level_name(PollutionLevel level) noexcept {
  switch (level) {
    case PollutionLevel::Green: return "green";
    case PollutionLevel::Yellow: return "yellow";
    case PollutionLevel::Orange: return "orange";
    case PollutionLevel::Red: return "red";
  }
  return "?";
}

PollutionLevel parse_level(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (PollutionLevel level : kAllLevels) {
    if (lower == level_name(level)) return level;
  }
  throw Error(Errc::UnknownLabel, "'" + std::string(text) + "' is not one of green|yellow|orange|red");
}

std::optional<Date> parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto field = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    int value = 0;
    auto first = text.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, value);
    if (ec != std::errc{} || ptr != first + len) return std::nullopt;
    return value;
  };
  auto y = field(0, 4);
  auto m = field(5, 2);
  auto d = field(8, 2);
  if (!y || !m || !d) return std::nullopt;
  Date date{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
            std::chrono::day{static_cast<unsigned>(*d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_date(const Date& date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

std::string validate_sample(const WaterSample& s) {
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    if (!std::isfinite(s.feature(f))) return std::string(kFeatureNames[f]) + " is not finite";
  }
  if (s.ph < 0.0 || s.ph > 14.0) return "ph must lie in [0, 14]";
  if (s.do_mg_l < 0.0) return "do_mg_l must be >= 0";
  if (s.bod_mg_l < 0.0) return "bod_mg_l must be >= 0";
  if (s.tss_mg_l < 0.0) return "tss_mg_l must be >= 0";
  return {};
}

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(std::vector<LabeledSample> samples) {
  samples_.reserve(samples.size());
  labels_.reserve(samples.size());
  for (auto& s : samples) {
    samples_.push_back(std::move(s.sample));
    labels_.push_back(s.level);
  }
}

Dataset Dataset::unlabeled(std::vector<WaterSample> samples) {
  Dataset d;
  d.samples_ = std::move(samples);
  d.labeled_ = false;
  return d;
}

PollutionLevel Dataset::label(std::size_t i) const {
  if (!labeled_) throw Error(Errc::MissingColumn, "dataset has no pollution_level column");
  return labels_[i];
}

LabeledSample Dataset::labeled_sample(std::size_t i) const { return {samples_[i], label(i)}; }

void Dataset::push_back(const LabeledSample& s) {
  if (!labeled_) throw Error(Errc::InvalidArgument, "cannot add a labeled sample to an unlabeled dataset");
  samples_.push_back(s.sample);
  labels_.push_back(s.level);
}

std::array<std::size_t, kLevelCount> Dataset::class_histogram() const {
  std::array<std::size_t, kLevelCount> hist{};
  for (PollutionLevel l : labels_) ++hist[level_index(l)];
  return hist;
}

std::vector<PollutionLevel> Dataset::class_list() const {
  std::vector<PollutionLevel> out;
  auto hist = class_histogram();
  for (PollutionLevel l : kAllLevels) {
    if (hist[level_index(l)] > 0) out.push_back(l);
  }
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.labeled_ = labeled_;
  out.samples_.reserve(rows.size());
  if (labeled_) out.labels_.reserve(rows.size());
  for (std::size_t r : rows) {
    out.samples_.push_back(samples_.at(r));
    if (labeled_) out.labels_.push_back(labels_[r]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Labeling

void QualityStandards::validate() const {
  if (!(bod_max > 0 && ph_min > 0 && ph_max > 0 && tss_max > 0 && do_min > 0)) {
    throw Error(Errc::InvalidArgument, "all quality thresholds must be positive");
  }
  if (!(ph_min < ph_max)) throw Error(Errc::InvalidArgument, "ph_min must be below ph_max");
}

namespace {

// Bit f set when feature f violates its standard.
unsigned violation_mask(const WaterSample& s, const QualityStandards& q) {
  unsigned mask = 0;
  if (s.do_mg_l < q.do_min) mask |= 1u << 0;
  if (s.ph < q.ph_min || s.ph > q.ph_max) mask |= 1u << 1;
  if (s.bod_mg_l > q.bod_max) mask |= 1u << 2;
  if (s.tss_mg_l > q.tss_max) mask |= 1u << 3;
  return mask;
}

PollutionLevel level_for_violations(int count) {
  switch (count) {
    case 0: return PollutionLevel::Green;
    case 1: return PollutionLevel::Yellow;
    case 2: return PollutionLevel::Orange;
    default: return PollutionLevel::Red;
  }
}

}  // namespace

int violation_count(const WaterSample& sample, const QualityStandards& standards) {
  return std::popcount(violation_mask(sample, standards));
}

PollutionLevel rule_label(const WaterSample& sample, const QualityStandards& standards) {
  return level_for_violations(violation_count(sample, standards));
}

// ---------------------------------------------------------------------------
// Synthetic data

namespace {

double round2(double v) { return std::round(v * 100.0) / 100.0; }

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

struct Band {
  double lo, hi;
};

// Relative exceedance of a violated standard, by level. Worse classes exceed
// further; neighbouring bands overlap.
constexpr std::array<Band, kLevelCount> kExceedance = {{{0.0, 0.0}, {0.2, 0.8}, {0.7, 1.8}, {1.6, 4.0}}};
// Position of a compliant value between a clean reading (0) and the standard (1).
constexpr std::array<Band, kLevelCount> kCompliance = {{{0.0, 0.4}, {0.3, 0.65}, {0.55, 0.85}, {0.75, 0.95}}};
// pH units per unit of exceedance.
constexpr double kPhSpread = 1.2;

WaterSample draw_measurements(unsigned mask, PollutionLevel level, const QualityStandards& q, Rng& rng) {
  const Band over = kExceedance[level_index(level)];
  const Band within = kCompliance[level_index(level)];
  auto exceed = [&] { return uniform(rng, over.lo, over.hi); };
  auto closeness = [&] { return uniform(rng, within.lo, within.hi); };

  WaterSample s;
  s.do_mg_l = (mask & 1u) ? q.do_min / (1.0 + exceed()) : q.do_min * (2.0 - closeness());

  const double ph_mid = 0.5 * (q.ph_min + q.ph_max);
  const double ph_half = 0.5 * (q.ph_max - q.ph_min);
  const bool low = std::bernoulli_distribution(0.5)(rng);
  if (mask & 2u) {
    const double offset = ph_half + kPhSpread * exceed();
    s.ph = std::clamp(low ? ph_mid - offset : ph_mid + offset, 0.0, 14.0);
  } else {
    s.ph = low ? ph_mid - ph_half * closeness() : ph_mid + ph_half * closeness();
  }

  s.bod_mg_l = (mask & 4u) ? q.bod_max * (1.0 + exceed()) : q.bod_max * (0.1 + 0.9 * closeness());
  s.tss_mg_l = (mask & 8u) ? q.tss_max * (1.0 + exceed()) : q.tss_max * (0.1 + 0.9 * closeness());

  s.do_mg_l = round2(s.do_mg_l);
  s.ph = round2(s.ph);
  s.bod_mg_l = round2(s.bod_mg_l);
  s.tss_mg_l = round2(s.tss_mg_l);
  return s;
}

}  // namespace

Dataset generate_synthetic(const SynthOptions& opt) {
  if (opt.n == 0) throw Error(Errc::InvalidArgument, "n must be at least 1");
  if (!(opt.noise_rate >= 0.0 && opt.noise_rate <= 1.0)) {
    throw Error(Errc::InvalidArgument, "noise_rate must lie in [0, 1]");
  }
  double total = 0.0;
  for (double p : opt.class_mix) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw Error(Errc::InvalidDistribution, "class mix entries must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(Errc::InvalidDistribution, "class mix must sum to 1");
  opt.standards.validate();

  // Violation masks grouped by the level they produce.
  std::array<std::vector<unsigned>, kLevelCount> masks_by_level;
  for (unsigned mask = 0; mask < 16; ++mask) {
    masks_by_level[level_index(level_for_violations(std::popcount(mask)))].push_back(mask);
  }

  Rng rng(mix64(opt.seed));
  std::discrete_distribution<int> pick_level(opt.class_mix.begin(), opt.class_mix.end());
  std::bernoulli_distribution flip(opt.noise_rate);
  std::vector<LabeledSample> out;
  out.reserve(opt.n);

  for (std::size_t i = 0; i < opt.n; ++i) {
    const auto target = static_cast<PollutionLevel>(pick_level(rng));
    const auto& masks = masks_by_level[level_index(target)];
    WaterSample s;
    int attempts = 0;
    do {
      if (++attempts > 1000) {
        throw Error(Errc::InvalidArgument, "standards leave no room to synthesize level " +
                                               std::string(level_name(target)));
      }
      unsigned mask = masks[std::uniform_int_distribution<std::size_t>(0, masks.size() - 1)(rng)];
      s = draw_measurements(mask, target, opt.standards, rng);
    } while (rule_label(s, opt.standards) != target || !validate_sample(s).empty());

    PollutionLevel label = target;
    if (flip(rng)) {
      int offset = std::uniform_int_distribution<int>(1, 3)(rng);
      label = static_cast<PollutionLevel>((level_index(target) + offset) % kLevelCount);
    }
    out.push_back({s, label});
  }
  return Dataset(std::move(out));
}

// ---------------------------------------------------------------------------
// Splits

std::pair<Dataset, Dataset> split_chronological(const Dataset& dataset, const Date& cutoff) {
  std::vector<std::size_t> left, right;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& date = dataset.sample(i).date;
    if (!date) throw Error(Errc::MissingDate, "row " + std::to_string(i + 1) + " has no date");
    (*date <= cutoff ? left : right).push_back(i);
  }
  return {dataset.subset(left), dataset.subset(right)};
}

std::pair<Dataset, Dataset> split_random(const Dataset& dataset, double test_fraction,
                                         std::uint64_t seed, bool stratified) {
  if (dataset.empty()) throw Error(Errc::EmptyDataset, "cannot split an empty dataset");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(Errc::InvalidArgument, "test_fraction must lie in (0, 1)");
  }
  const std::size_t n = dataset.size();
  const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
  if (n_test == 0 || n_test == n) {
    throw Error(Errc::DegenerateSplit, "a test fraction of " + std::to_string(test_fraction) + " on " +
                                           std::to_string(n) + " rows leaves one side empty");
  }

  Rng rng(mix64(seed));
  std::vector<bool> in_test(n, false);

  if (stratified && dataset.labeled()) {
    std::array<std::vector<std::size_t>, kLevelCount> members;
    for (std::size_t i = 0; i < n; ++i) members[level_index(dataset.label(i))].push_back(i);

    std::array<std::size_t, kLevelCount> alloc{};
    std::array<double, kLevelCount> remainder{};
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < kLevelCount; ++c) {
      double quota = static_cast<double>(members[c].size()) * test_fraction;
      alloc[c] = static_cast<std::size_t>(std::floor(quota));
      remainder[c] = quota - static_cast<double>(alloc[c]);
      assigned += alloc[c];
    }
    std::array<std::size_t, kLevelCount> order{0, 1, 2, 3};
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < n_test && k < kLevelCount; ++k) {
      std::size_t c = order[k];
      if (alloc[c] < members[c].size()) {
        ++alloc[c];
        ++assigned;
      }
    }
    for (std::size_t c = 0; c < kLevelCount; ++c) {
      std::shuffle(members[c].begin(), members[c].end(), rng);
      for (std::size_t k = 0; k < alloc[c]; ++k) in_test[members[c][k]] = true;
    }
  } else {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t k = 0; k < n_test; ++k) in_test[perm[k]] = true;
  }

  std::vector<std::size_t> train, test;
  for (std::size_t i = 0; i < n; ++i) (in_test[i] ? test : train).push_back(i);
  return {dataset.subset(train), dataset.subset(test)};
}

}  // namespace wqrf
