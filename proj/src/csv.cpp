#include "wqrf/csv.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include "wqrf/error.hpp"

namespace wqrf {

namespace {

constexpr std::string_view kDateColumn = "date";
constexpr std::string_view kLabelColumn = "pollution_level";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool blank(std::string_view line) { return trim(line).empty(); }

std::string row_ref(std::size_t row, std::string_view column) {
  return "row " + std::to_string(row) + ", column " + std::string(column);
}

double parse_measurement(std::string_view text, std::size_t row, std::string_view column) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(Errc::MalformedValue, row_ref(row, column) + ": '" + std::string(text) + "' is not a number");
  }
  return value;
}

struct ColumnMap {
  std::optional<std::size_t> date;
  std::array<std::size_t, kFeatureCount> features{};
  std::optional<std::size_t> label;
  std::size_t width = 0;
};

ColumnMap map_header(const std::vector<std::string>& header, bool require_label) {
  ColumnMap map;
  map.width = header.size();
  std::array<std::optional<std::size_t>, kFeatureCount> found;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string_view name = trim(header[i]);
    if (name == kDateColumn) {
      map.date = i;
      continue;
    }
    if (name == kLabelColumn) {
      map.label = i;
      continue;
    }
    bool known = false;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      if (name == kFeatureNames[f]) {
        found[f] = i;
        known = true;
      }
    }
    if (!known) throw Error(Errc::UnknownColumn, "header has unexpected column '" + std::string(name) + "'");
  }
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    if (!found[f]) throw Error(Errc::MissingColumn, "header lacks column " + std::string(kFeatureNames[f]));
    map.features[f] = *found[f];
  }
  if (require_label && !map.label) throw Error(Errc::MissingColumn, "header lacks column pollution_level");
  return map;
}

}  // namespace

std::vector<std::string> split_csv_record(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

Dataset parse_csv(std::istream& in, bool require_label) {
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!blank(line)) {
      have_header = true;
      break;
    }
  }
  if (!have_header) throw Error(Errc::EmptyDataset, "input has no header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const ColumnMap map = map_header(split_csv_record(line), require_label);

  std::vector<LabeledSample> labeled;
  std::vector<WaterSample> unlabeled;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (blank(line)) continue;
    ++row;
    auto fields = split_csv_record(line);
    if (fields.size() != map.width) {
      throw Error(Errc::MalformedValue, "row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                                            " fields, header has " + std::to_string(map.width));
    }
    WaterSample s;
    s.do_mg_l = parse_measurement(fields[map.features[0]], row, kFeatureNames[0]);
    s.ph = parse_measurement(fields[map.features[1]], row, kFeatureNames[1]);
    s.bod_mg_l = parse_measurement(fields[map.features[2]], row, kFeatureNames[2]);
    s.tss_mg_l = parse_measurement(fields[map.features[3]], row, kFeatureNames[3]);
    if (auto problem = validate_sample(s); !problem.empty()) {
      throw Error(Errc::MalformedValue, "row " + std::to_string(row) + ": " + problem);
    }
    if (map.date) {
      std::string_view text = trim(fields[*map.date]);
      if (!text.empty()) {
        s.date = parse_date(text);
        if (!s.date) {
          throw Error(Errc::MalformedValue,
                      row_ref(row, kDateColumn) + ": '" + std::string(text) + "' is not a YYYY-MM-DD date");
        }
      }
    }
    if (map.label) {
      std::string_view text = trim(fields[*map.label]);
      try {
        labeled.push_back({s, parse_level(text)});
      } catch (const Error&) {
        throw Error(Errc::UnknownLabel, row_ref(row, kLabelColumn) + ": '" + std::string(text) +
                                            "' is not one of green|yellow|orange|red");
      }
    } else {
      unlabeled.push_back(s);
    }
  }
  if (row == 0) throw Error(Errc::EmptyDataset, "input has no data rows");
  return map.label ? Dataset(std::move(labeled)) : Dataset::unlabeled(std::move(unlabeled));
}

Dataset parse_csv_text(std::string_view text, bool require_label) {
  std::istringstream in{std::string(text)};
  return parse_csv(in, require_label);
}

Dataset read_csv_file(const std::string& path, bool require_label) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::InvalidArgument, "cannot open " + path);
  return parse_csv(in, require_label);
}

std::string format_number(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const Dataset& dataset) {
  bool dated = false;
  for (const auto& s : dataset.samples()) dated = dated || s.date.has_value();

  if (dated) out << kDateColumn << ',';
  out << "do_mg_l,ph,bod_mg_l,tss_mg_l";
  if (dataset.labeled()) out << ',' << kLabelColumn;
  out << '\n';
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& s = dataset.sample(i);
    if (dated) out << (s.date ? format_date(*s.date) : std::string()) << ',';
    out << format_number(s.do_mg_l) << ',' << format_number(s.ph) << ',' << format_number(s.bod_mg_l) << ','
        << format_number(s.tss_mg_l);
    if (dataset.labeled()) out << ',' << level_name(dataset.label(i));
    out << '\n';
  }
}

}  // namespace wqrf
