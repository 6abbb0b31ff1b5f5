#include "wqrf/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "wqrf/csv.hpp"
#include "wqrf/data.hpp"
#include "wqrf/eval.hpp"
#include "wqrf/forest.hpp"
#include "wqrf/report.hpp"

namespace wqrf::cli {

ExitStatus exit_status_for(Errc code) noexcept {
  switch (code) {
    case Errc::SingleClassDataset:
    case Errc::InsufficientClassMembers:
    case Errc::DegenerateFold:
    case Errc::EmptyCounts:
    case Errc::LengthMismatch:
    case Errc::UnknownClass:
    case Errc::OutOfRange:
      return kTrainingError;
    case Errc::FormatVersionMismatch:
    case Errc::CorruptModel:
      return kModelError;
    default:
      return kInputError;
  }
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(Errc::InvalidArgument, "cannot write " + tmp.string());
    f << contents;
    if (!f.flush()) throw Error(Errc::InvalidArgument, "failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(Errc::InvalidArgument, "cannot rename onto " + path + ": " + ec.message());
  }
}

namespace {

std::string read_text(const std::string& path, Errc on_failure) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), {}};
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(on_failure, "cannot open " + path);
  return {std::istreambuf_iterator<char>(f), {}};
}

ForestModel load_model(const std::string& path) {
  return deserialize_model(read_text(path, Errc::CorruptModel));
}

Dataset load_csv(const std::string& path, bool require_label) {
  return parse_csv_text(read_text(path, Errc::InvalidArgument), require_label);
}

struct ForestFlags {
  std::size_t trees = 100;
  std::size_t features_per_split = 2;
  std::size_t min_samples_split = 2;
  std::optional<std::size_t> max_depth;
  std::uint64_t seed = 42;
  unsigned workers = 1;

  ForestConfig config() const {
    ForestConfig c;
    c.n_trees = trees;
    c.seed = seed;
    c.tree.features_per_split = features_per_split;
    c.tree.min_samples_split = min_samples_split;
    c.tree.max_depth = max_depth;
    c.validate();
    return c;
  }
};

void add_forest_flags(CLI::App* cmd, ForestFlags& f) {
  cmd->add_option("--trees", f.trees, "Number of trees B")->capture_default_str();
  cmd->add_option("--features-per-split", f.features_per_split, "Features tried at each node")->capture_default_str();
  cmd->add_option("--min-samples-split", f.min_samples_split, "Smallest node that may be split")->capture_default_str();
  cmd->add_option("--max-depth", f.max_depth, "Depth limit (unlimited when omitted)");
  cmd->add_option("--workers", f.workers, "Training threads")->capture_default_str();
}

std::string distribution_line(const Dataset& data) {
  auto hist = data.class_histogram();
  std::string line;
  for (PollutionLevel l : data.class_list()) {
    if (!line.empty()) line += ", ";
    line += std::string(level_name(l)) + "=" + std::to_string(hist[level_index(l)]);
  }
  return line;
}

std::string format_report(const EvaluationReport& report, const std::string& format) {
  return format == "json" ? report_to_json(report) : report_to_text(report);
}

// Text always goes to stdout; a report file gets the selected format.
void emit_report(const EvaluationReport& report, const std::string& report_out, const std::string& format,
                 std::ostream& out) {
  if (report_out.empty()) {
    out << format_report(report, format);
    return;
  }
  write_file_atomic(report_out, format_report(report, format));
  out << report_to_text(report);
}

void write_or_print(const std::string& path, const std::string& contents, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << contents;
  } else {
    write_file_atomic(path, contents);
  }
}

QualityStandards load_standards(const std::string& path) {
  QualityStandards q;
  if (path.empty()) return q;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path, Errc::InvalidArgument));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedValue, "standards file is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) throw Error(Errc::MalformedValue, "standards file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw Error(Errc::MalformedValue, "standard '" + key + "' must be a number");
    const double v = value.get<double>();
    if (key == "bod_max") q.bod_max = v;
    else if (key == "ph_min") q.ph_min = v;
    else if (key == "ph_max") q.ph_max = v;
    else if (key == "tss_max") q.tss_max = v;
    else if (key == "do_min") q.do_min = v;
    else throw Error(Errc::MalformedValue, "unknown standard '" + key + "'");
  }
  q.validate();
  return q;
}

ClassMix parse_class_mix(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(Errc::InvalidDistribution, "class mix entry '" + item + "' is not a number");
    }
  }
  if (values.size() != kLevelCount) {
    throw Error(Errc::InvalidDistribution, "class mix needs 4 comma-separated values (green,yellow,orange,red)");
  }
  ClassMix mix{};
  std::copy(values.begin(), values.end(), mix.begin());
  return mix;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random forest pollution-level classifier for river water-quality samples", "wqrf"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "wqrf 1.0.0");

  std::uint64_t seed = 42;
  std::string format = "text";
  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
  };
  auto add_format = [&](CLI::App* cmd, std::vector<std::string> choices) {
    cmd->add_option("--format", format, "Output format")->check(CLI::IsMember(std::move(choices)))->capture_default_str();
  };

  ForestFlags forest;
  std::string data_path, model_path, output_path;

  auto* train = app.add_subcommand("train", "Train a forest on a labeled CSV and write the model JSON");
  train->add_option("data_csv", data_path, "Labeled CSV")->required();
  train->add_option("model_out", model_path, "Model file to write")->required();
  add_forest_flags(train, forest);
  add_seed(train);

  auto* predict = app.add_subcommand("predict", "Predict pollution levels for a CSV");
  predict->add_option("model_in", model_path, "Model JSON")->required();
  predict->add_option("data_csv", data_path, "CSV with measurements")->required();
  predict->add_option("out", output_path, "Output CSV (stdout when omitted)");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate a model against a labeled CSV");
  evaluate_cmd->add_option("model_in", model_path, "Model JSON")->required();
  evaluate_cmd->add_option("labeled_csv", data_path, "Labeled CSV")->required();
  evaluate_cmd->add_option("report_out", output_path, "Report file");
  add_format(evaluate_cmd, {"text", "json"});

  std::size_t folds = 10;
  bool no_stratify = false;
  auto* crossval = app.add_subcommand("crossval", "Stratified k-fold cross-validation");
  crossval->add_option("labeled_csv", data_path, "Labeled CSV")->required();
  crossval->add_option("report_out", output_path, "Report file");
  crossval->add_option("--folds", folds, "Number of folds k")->capture_default_str();
  crossval->add_flag("--no-stratify", no_stratify, "Assign folds without stratification");
  add_forest_flags(crossval, forest);
  add_seed(crossval);
  add_format(crossval, {"text", "json"});

  std::string matrix_path;
  auto* metrics = app.add_subcommand("metrics", "Evaluation report from a raw confusion matrix JSON");
  metrics->add_option("matrix_json", matrix_path, "Matrix file, or - for stdin")->required();
  metrics->add_option("report_out", output_path, "Report file");
  add_format(metrics, {"text", "json"});

  std::size_t n = 473;
  double noise = 0.0;
  std::string class_mix, standards_path;
  auto* synth = app.add_subcommand("synth", "Write a synthetic labeled CSV");
  synth->add_option("out_csv", output_path, "Output CSV (stdout when omitted)");
  synth->add_option("--n", n, "Number of samples")->capture_default_str();
  synth->add_option("--noise", noise, "Label noise rate in [0, 1]")->capture_default_str();
  synth->add_option("--class-mix", class_mix, "green,yellow,orange,red probabilities");
  synth->add_option("--standards", standards_path, "JSON override of water quality standards");
  add_seed(synth);

  auto* plot = app.add_subcommand("plot-data", "Export observed vs predicted levels per sample");
  plot->add_option("model_in", model_path, "Model JSON")->required();
  plot->add_option("labeled_csv", data_path, "Labeled CSV")->required();
  plot->add_option("out_csv", output_path, "Output CSV (stdout when omitted)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  try {
    if (train->parsed()) {
      forest.seed = seed;
      const ForestConfig config = forest.config();
      const Dataset data = load_csv(data_path, true);
      const auto start = std::chrono::steady_clock::now();
      const ForestModel model = train_forest(data, config, forest.workers);
      const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);
      write_file_atomic(model_path, serialize_model(model));
      out << "trees: " << model.trees().size() << "\n";
      out << "samples: " << data.size() << " (" << distribution_line(data) << ")\n";
      out << "training time: " << static_cast<long long>(elapsed.count()) << " ms\n";
      out << "model written to " << model_path << "\n";
    } else if (predict->parsed()) {
      const ForestModel model = load_model(model_path);
      const Dataset data = load_csv(data_path, false);
      std::ostringstream base;
      write_csv(base, data);
      std::istringstream lines(base.str());
      std::string line;
      std::ostringstream csv;
      std::getline(lines, line);
      csv << line << ",predicted_level";
      for (PollutionLevel l : model.classes()) csv << ",p_" << level_name(l);
      csv << "\n";
      for (std::size_t i = 0; i < data.size() && std::getline(lines, line); ++i) {
        const auto dist = model.predict_proba(data.sample(i));
        csv << line << ',' << level_name(majority_level(dist.votes));
        for (PollutionLevel l : model.classes()) csv << ',' << format_number(dist.probability(l));
        csv << "\n";
      }
      write_or_print(output_path, csv.str(), out);
    } else if (evaluate_cmd->parsed()) {
      const ForestModel model = load_model(model_path);
      const Dataset data = load_csv(data_path, true);
      std::vector<PollutionLevel> predicted;
      predicted.reserve(data.size());
      for (const auto& s : data.samples()) predicted.push_back(model.predict(s));
      std::vector<PollutionLevel> classes = data.class_list();
      for (PollutionLevel p : predicted) {
        if (std::find(classes.begin(), classes.end(), p) == classes.end()) classes.push_back(p);
      }
      std::sort(classes.begin(), classes.end());
      emit_report(evaluate(data.labels(), predicted, classes), output_path, format, out);
    } else if (crossval->parsed()) {
      forest.seed = seed;
      const ForestConfig config = forest.config();
      const Dataset data = load_csv(data_path, true);
      CrossValidationOptions options;
      options.k = folds;
      options.stratified = !no_stratify;
      options.seed = seed;
      options.workers = forest.workers;
      emit_report(k_fold_cross_validate(data, config, options), output_path, format, out);
    } else if (metrics->parsed()) {
      const auto matrix = parse_matrix_json(read_text(matrix_path, Errc::InvalidArgument));
      emit_report(evaluate(matrix), output_path, format, out);
    } else if (synth->parsed()) {
      SynthOptions opt;
      opt.n = n;
      opt.seed = seed;
      opt.noise_rate = noise;
      if (!class_mix.empty()) opt.class_mix = parse_class_mix(class_mix);
      opt.standards = load_standards(standards_path);
      std::ostringstream csv;
      write_csv(csv, generate_synthetic(opt));
      write_or_print(output_path, csv.str(), out);
    } else if (plot->parsed()) {
      const ForestModel model = load_model(model_path);
      const Dataset data = load_csv(data_path, true);
      std::ostringstream csv;
      csv << "index,do_mg_l,ph,bod_mg_l,tss_mg_l,true_level,predicted_level\n";
      for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& s = data.sample(i);
        csv << i << ',' << format_number(s.do_mg_l) << ',' << format_number(s.ph) << ','
            << format_number(s.bod_mg_l) << ',' << format_number(s.tss_mg_l) << ',' << level_name(data.label(i))
            << ',' << level_name(model.predict(s)) << "\n";
      }
      write_or_print(output_path, csv.str(), out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_status_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kOk;
}

}  // namespace wqrf::cli
