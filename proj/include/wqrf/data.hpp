#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wqrf {

/// Pollution classification, ordered by severity.
enum class PollutionLevel : std::uint8_t { Green = 0, Yellow = 1, Orange = 2, Red = 3 };

inline constexpr std::size_t kLevelCount = 4;
inline constexpr std::array<PollutionLevel, kLevelCount> kAllLevels = {
    PollutionLevel::Green, PollutionLevel::Yellow, PollutionLevel::Orange, PollutionLevel::Red};

constexpr std::size_t level_index(PollutionLevel level) noexcept {
  return static_cast<std::size_t>(level);
}

/// Lowercase wire name: green, yellow, orange, red.
std::string_view level_name(PollutionLevel level) noexcept;

/// Case-insensitive inverse of level_name. Throws Error{UnknownLabel}.
PollutionLevel parse_level(std::string_view text);

/// Measurement order used by trees and model files.
enum class Feature : std::uint8_t { DissolvedOxygen = 0, PH = 1, BOD = 2, TSS = 3 };

inline constexpr std::size_t kFeatureCount = 4;
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "do_mg_l", "ph", "bod_mg_l", "tss_mg_l"};

using Date = std::chrono::year_month_day;

/// Parses YYYY-MM-DD. Returns nullopt for anything else, including impossible dates.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(const Date& date);

struct WaterSample {
  double do_mg_l = 0.0;
  double ph = 7.0;
  double bod_mg_l = 0.0;
  double tss_mg_l = 0.0;
  std::optional<Date> date;

  double feature(std::size_t index) const noexcept {
    switch (index) {
      case 0: return do_mg_l;
      case 1: return ph;
      case 2: return bod_mg_l;
      default: return tss_mg_l;
    }
  }
  double feature(Feature f) const noexcept { return feature(static_cast<std::size_t>(f)); }

  bool operator==(const WaterSample&) const = default;
};

/// Returns an empty string when the sample is physically valid, otherwise a
/// description of the first violated invariant.
std::string validate_sample(const WaterSample& sample);

struct LabeledSample {
  WaterSample sample;
  PollutionLevel level = PollutionLevel::Green;

  bool operator==(const LabeledSample&) const = default;
};

/// Ordered samples, optionally labeled. Unlabeled datasets come out of CSV
/// ingestion for prediction and cannot be used for training.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<LabeledSample> samples);

  static Dataset unlabeled(std::vector<WaterSample> samples);

  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  bool labeled() const noexcept { return labeled_; }

  const WaterSample& sample(std::size_t i) const { return samples_[i]; }
  PollutionLevel label(std::size_t i) const;
  LabeledSample labeled_sample(std::size_t i) const;

  std::span<const WaterSample> samples() const noexcept { return samples_; }
  std::span<const PollutionLevel> labels() const noexcept { return labels_; }

  void push_back(const LabeledSample& s);

  /// Distinct levels present, in severity order.
  std::vector<PollutionLevel> class_list() const;
  std::array<std::size_t, kLevelCount> class_histogram() const;

  /// Rows picked by index, duplicates allowed, in the given order.
  Dataset subset(std::span<const std::size_t> rows) const;

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<WaterSample> samples_;
  std::vector<PollutionLevel> labels_;
  bool labeled_ = true;
};

/// Class C water standards (mg/l except pH).
struct QualityStandards {
  double bod_max = 5.0;
  double ph_min = 6.5;
  double ph_max = 8.5;
  double tss_max = 65.0;
  double do_min = 5.0;

  /// Throws Error{InvalidArgument} when ph_min >= ph_max or a threshold is not positive.
  void validate() const;
};

/// Number of standards violated, 0..4. A value equal to its standard complies.
int violation_count(const WaterSample& sample, const QualityStandards& standards = {});

/// 0 violations -> Green, 1 -> Yellow, 2 -> Orange, 3 or 4 -> Red.
PollutionLevel rule_label(const WaterSample& sample, const QualityStandards& standards = {});

/// Probability per level, indexed by level_index().
using ClassMix = std::array<double, kLevelCount>;

/// Observed red/yellow/orange skew with 5% reserved for green.
inline constexpr ClassMix kDefaultClassMix = {0.05, 0.12, 0.16, 0.67};

struct SynthOptions {
  std::size_t n = 473;
  std::uint64_t seed = 42;
  QualityStandards standards{};
  double noise_rate = 0.0;
  ClassMix class_mix = kDefaultClassMix;
};

/// Draws a target level from class_mix, picks which standards to violate so
/// that rule_label yields that level, and draws measurements from level-specific
/// bands: violations exceed their standard further and compliant readings sit
/// closer to it as severity grows. A noise_rate fraction of labels is then
/// moved to one of the other three levels. Measurements carry two decimals.
Dataset generate_synthetic(const SynthOptions& options);

/// (date <= cutoff, date > cutoff); throws Error{MissingDate}.
std::pair<Dataset, Dataset> split_chronological(const Dataset& dataset, const Date& cutoff);

/// (train, test) with |test| = round(n * test_fraction). Stratified splits use
/// largest-remainder allocation so every class lands within one sample of
/// its proportional share. Row order is preserved on both sides.
std::pair<Dataset, Dataset> split_random(const Dataset& dataset, double test_fraction,
                                         std::uint64_t seed, bool stratified);

using Rng = std::mt19937_64;

/// Splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stream seed for the index-th child of a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(master ^ (0x9e3779b97f4a7c15ULL * index));
}

}  // namespace wqrf
