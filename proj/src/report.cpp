#include "wqrf/report.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "wqrf/error.hpp"

namespace wqrf {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json metrics_json(const ClassMetrics& m) {
  return {{"tp_rate", m.tp_rate},     {"fp_rate", m.fp_rate}, {"precision", m.precision},
          {"recall", m.recall},       {"f_measure", m.f_measure}, {"support", m.support}};
}

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string pad_left(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

std::string capitalized(std::string_view name) {
  std::string s(name);
  if (!s.empty()) s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string metric_row(const std::string& label, const ClassMetrics& m) {
  return pad(label, 18) + pad(fixed(m.tp_rate, 3), 9) + pad(fixed(m.fp_rate, 3), 9) + pad(fixed(m.precision, 3), 11) +
         pad(fixed(m.recall, 3), 8) + fixed(m.f_measure, 3) + "\n";
}

}  // namespace

std::string report_to_json(const EvaluationReport& r) {
  ordered_json j;
  ordered_json classes = ordered_json::array();
  for (PollutionLevel l : r.matrix.classes()) classes.push_back(level_name(l));
  ordered_json counts = ordered_json::array();
  for (std::size_t i = 0; i < r.matrix.size(); ++i) {
    ordered_json row = ordered_json::array();
    for (std::size_t k = 0; k < r.matrix.size(); ++k) row.push_back(r.matrix(i, k));
    counts.push_back(std::move(row));
  }
  j["matrix"] = {{"classes", classes}, {"counts", std::move(counts)}};
  ordered_json per_class = ordered_json::object();
  for (PollutionLevel l : r.matrix.classes()) per_class[std::string(level_name(l))] = metrics_json(r.per_class.at(l));
  j["per_class"] = std::move(per_class);
  j["weighted"] = metrics_json(r.weighted);
  j["accuracy"] = r.accuracy;
  j["correct"] = r.correct;
  j["incorrect"] = r.incorrect;
  j["kappa"] = r.kappa;
  j["agreement"] = agreement_name(r.agreement);
  return j.dump(2) + "\n";
}

std::string report_to_text(const EvaluationReport& r) {
  std::ostringstream out;
  const double n = static_cast<double>(r.correct + r.incorrect);

  out << "Correctness\n";
  out << pad("Classification", 16) << pad("No of sample", 14) << "Correctness in percentage\n";
  out << pad("Correct", 16) << pad(std::to_string(r.correct), 14)
      << fixed(100.0 * static_cast<double>(r.correct) / n, 4) << "\n";
  out << pad("Incorrect", 16) << pad(std::to_string(r.incorrect), 14)
      << fixed(100.0 * static_cast<double>(r.incorrect) / n, 4) << "\n\n";

  out << "Detailed accuracy by class\n";
  out << pad("Class", 18) << pad("TP Rate", 9) << pad("FP Rate", 9) << pad("Precision", 11) << pad("Recall", 8)
      << "F-Measure\n";
  for (PollutionLevel l : r.matrix.classes()) out << metric_row(capitalized(level_name(l)), r.per_class.at(l));
  out << metric_row("Weighted Average", r.weighted) << "\n";

  out << "Confusion matrix\n";
  std::size_t width = 4;
  for (std::size_t i = 0; i < r.matrix.size(); ++i) {
    for (std::size_t k = 0; k < r.matrix.size(); ++k) width = std::max(width, std::to_string(r.matrix(i, k)).size() + 1);
  }
  for (std::size_t k = 0; k < r.matrix.size(); ++k) out << pad_left(std::string(1, static_cast<char>('a' + k)), width);
  out << "   <-- classified as\n";
  for (std::size_t i = 0; i < r.matrix.size(); ++i) {
    for (std::size_t k = 0; k < r.matrix.size(); ++k) out << pad_left(std::to_string(r.matrix(i, k)), width);
    out << "   |  " << static_cast<char>('a' + i) << " - " << capitalized(level_name(r.matrix.classes()[i])) << "\n";
  }
  out << "\nKappa statistic: " << fixed(r.kappa, 4) << " (" << agreement_name(r.agreement) << ")\n";
  return out.str();
}

ConfusionMatrix parse_matrix_json(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedValue, std::string("matrix is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("classes") || !j.contains("counts")) {
    throw Error(Errc::MalformedValue, "matrix must be an object with 'classes' and 'counts'");
  }
  const auto& classes_json = j["classes"];
  const auto& grid = j["counts"];
  if (!classes_json.is_array() || classes_json.empty()) throw Error(Errc::MalformedValue, "'classes' must be a non-empty array");
  std::vector<PollutionLevel> classes;
  for (const auto& c : classes_json) {
    if (!c.is_string()) throw Error(Errc::MalformedValue, "class names must be strings");
    classes.push_back(parse_level(c.get<std::string>()));
  }
  const std::size_t k = classes.size();
  if (!grid.is_array() || grid.size() != k) {
    throw Error(Errc::MalformedValue, "'counts' must have one row per class (" + std::to_string(k) + ")");
  }
  std::vector<std::uint64_t> counts;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& row = grid[i];
    if (!row.is_array() || row.size() != k) {
      throw Error(Errc::MalformedValue, "row " + std::to_string(i + 1) + " of 'counts' must hold " + std::to_string(k) +
                                            " entries");
    }
    for (const auto& cell : row) {
      if (!cell.is_number_integer() || cell.get<std::int64_t>() < 0) {
        throw Error(Errc::MalformedValue, "row " + std::to_string(i + 1) + " of 'counts' has entry " + cell.dump() +
                                              "; counts must be non-negative integers");
      }
      counts.push_back(cell.get<std::uint64_t>());
    }
  }
  try {
    ConfusionMatrix m(std::move(classes), std::move(counts));
    if (m.total() == 0) throw Error(Errc::MalformedValue, "matrix holds no instances");
    return m;
  } catch (const Error& e) {
    if (e.code() == Errc::InvalidArgument) throw Error(Errc::MalformedValue, e.what());
    throw;
  }
}

}  // namespace wqrf
