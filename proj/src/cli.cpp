#include "prb/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "prb/rapp.hpp"

namespace prb::cli {

namespace {

using json = nlohmann::json;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw std::invalid_argument("empty entry in list '" + text + "'");
    out.push_back(item.substr(b, e - b + 1));
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::vector<double> parse_percentiles(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw std::invalid_argument("bad percentile '" + item + "'");
    // Accept both 0.9 and 90.
    out.push_back(v >= 1.0 ? v / 100.0 : v);
  }
  return out;
}

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string models;
  std::string percentiles;
};

// Flag > config file > environment > built-in default.
ExperimentConfig resolve_experiment(const Overrides& o) {
  ExperimentConfig config = ExperimentConfig::defaults();
  bool file_sets_output = false;
  if (!o.config.empty()) {
    config = load_experiment(o.config);
    file_sets_output = json::parse(read_text(o.config)).contains("output_dir");
  }
  if (!file_sets_output) {
    const char* env = std::getenv(kOutputEnvVar);
    config.output_dir = (env && *env) ? env : kDefaultOutputDir;
  }
  if (!o.out.empty()) config.output_dir = o.out;
  if (o.seed) config.seed = *o.seed;
  if (!o.percentiles.empty()) config.percentiles = parse_percentiles(o.percentiles);
  if (!o.models.empty()) {
    std::vector<ForecasterConfig> chosen;
    for (const auto& name : split_list(o.models)) {
      const ModelKind kind = parse_model_kind(name);
      ForecasterConfig mc = ForecasterConfig::defaults(kind);
      for (const auto& existing : config.models) {
        if (existing.kind == kind) mc = existing;
      }
      chosen.push_back(mc);
    }
    config.models = std::move(chosen);
  }
  config.validate();
  return config;
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

std::string inspect_summary(const std::string& report_json) {
  const json r = json::parse(report_json);
  std::ostringstream os;
  const auto& models = r.at("models");
  if (models.empty()) return "no models in report\n";
  std::vector<std::string> labels;
  for (const auto& p : models.front().at("percentiles")) labels.push_back(p.at("label").get<std::string>());

  os << std::left << std::setw(12) << "model" << std::setw(10) << "stat";
  for (const auto& l : labels) os << std::right << std::setw(9) << l;
  os << '\n';
  for (const auto& m : models) {
    const std::string name = m.at("model").get<std::string>();
    for (const auto& [stat, key] : {std::pair{"saving%", "mean_saving_percent"},
                                    std::pair{"over%", "over_percent"},
                                    std::pair{"under%", "under_percent"}}) {
      os << std::left << std::setw(12) << name << std::setw(10) << stat;
      for (const auto& p : m.at("percentiles")) os << std::right << std::setw(9) << fixed(p.at(key).get<double>(), 2);
      os << '\n';
    }
  }
  const auto& base = r.at("baselines");
  os << "True Data saving%: " << fixed(base.at("true_data").at("mean_saving_percent").get<double>(), 2) << '\n';
  if (base.contains("lstm")) {
    const auto& l = base.at("lstm");
    os << "LSTM saving%: " << fixed(l.at("mean_saving_percent").get<double>(), 2)
       << "  over%: " << fixed(l.at("over_percent").get<double>(), 2)
       << "  under%: " << fixed(l.at("under_percent").get<double>(), 2) << '\n';
  }
  os << "Seasonal naive MAE: " << fixed(base.at("seasonal_naive").at("mae").get<double>(), 3) << '\n';
  return os.str();
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"PRB forecasting and power-aware allocation pipeline", "prb_oracle"};
  app.require_subcommand(1);

  Overrides run_opts;
  auto* run = app.add_subcommand("run", "Train all models, forecast the test split and write reports");
  run->add_option("--config", run_opts.config, "Experiment config JSON")->check(CLI::ExistingFile);
  run->add_option("--seed", run_opts.seed, "Global seed");
  run->add_option("--out", run_opts.out, "Output directory");
  run->add_option("--models", run_opts.models, "Comma-separated model subset, e.g. deepar,lstm");
  run->add_option("--percentiles", run_opts.percentiles, "Comma-separated levels, e.g. 0.05,0.5,0.9");
  bool quiet = false;
  run->add_flag("--quiet", quiet, "Suppress progress messages");

  Overrides gen_opts;
  std::string gen_path;
  auto* gen = app.add_subcommand("gen-trace", "Write a synthetic trace CSV");
  gen->add_option("--config", gen_opts.config, "Experiment config JSON (trace section)")->check(CLI::ExistingFile);
  gen->add_option("--seed", gen_opts.seed, "Trace seed");
  gen->add_option("--out", gen_path, "Output CSV path (default: <output dir>/trace.csv)");

  std::string report_path;
  auto* inspect = app.add_subcommand("inspect", "Print the saving/provisioning summary of a report");
  inspect->add_option("report", report_path, "report.json or a directory holding it")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "prb_oracle: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*run) {
      const ExperimentConfig config = resolve_experiment(run_opts);
      ProgressFn progress;
      if (!quiet) progress = [&err](const std::string& msg) { err << msg << '\n'; };
      const SustainabilityReport report = run_pipeline(config, progress);
      emit_report(report, config.output_dir);
      out << "wrote report to " << config.output_dir.string() << '\n';
      out << inspect_summary(report_to_json(report));
      return 0;
    }
    if (*gen) {
      ExperimentConfig config = resolve_experiment(gen_opts);
      const auto* synthetic = std::get_if<TraceConfig>(&config.trace);
      if (!synthetic) throw std::invalid_argument("gen-trace needs a synthetic trace section");
      TraceConfig tc = *synthetic;
      if (gen_opts.seed) tc.seed = *gen_opts.seed;
      std::filesystem::path path = gen_path.empty() ? config.output_dir / "trace.csv" : std::filesystem::path(gen_path);
      if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
      write_csv(generate_synthetic(tc, config.power.max_prb), path);
      out << "wrote " << path.string() << '\n';
      return 0;
    }
    if (*inspect) {
      std::filesystem::path path = report_path;
      if (std::filesystem::is_directory(path)) path /= "report.json";
      out << inspect_summary(read_text(path));
      return 0;
    }
  } catch (const std::exception& e) {
    err << "prb_oracle: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace prb::cli
