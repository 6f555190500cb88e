#include "prb/rapp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "prb/decision.hpp"

namespace prb {

using json = nlohmann::ordered_json;

namespace {

std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::uint64_t kind_stream(ModelKind kind) {
  switch (kind) {
    case ModelKind::LSTM:
      return 1;
    case ModelKind::SFF:
      return 2;
    case ModelKind::DeepAR:
      return 3;
    case ModelKind::Transformer:
      return 4;
  }
  return 0;
}

constexpr std::uint64_t kSamplingStream = 1'000'000;

json trace_to_json(const TraceSource& source) {
  if (const auto* csv = std::get_if<CsvTrace>(&source)) {
    return json{{"source", "csv"}, {"path", csv->path.generic_string()}};
  }
  const auto& t = std::get<TraceConfig>(source);
  return json{{"source", "synthetic"},          {"weeks", t.weeks},
              {"base_load", t.base_load},       {"daily_amplitude", t.daily_amplitude},
              {"weekly_factor", t.weekly_factor}, {"noise_std", t.noise_std},
              {"floor", t.floor},               {"seed", t.seed},
              {"start_time", format_timestamp(t.start_time)}};
}

TraceSource trace_from_json(const json& j, const std::filesystem::path& base_dir) {
  const std::string source = j.value("source", "synthetic");
  if (source == "csv") {
    std::filesystem::path p = j.at("path").get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    return CsvTrace{p};
  }
  if (source != "synthetic") throw std::invalid_argument("trace.source must be 'synthetic' or 'csv'");
  TraceConfig t;
  t.weeks = j.value("weeks", t.weeks);
  t.base_load = j.value("base_load", t.base_load);
  t.daily_amplitude = j.value("daily_amplitude", t.daily_amplitude);
  t.weekly_factor = j.value("weekly_factor", t.weekly_factor);
  t.noise_std = j.value("noise_std", t.noise_std);
  t.floor = j.value("floor", t.floor);
  t.seed = j.value("seed", t.seed);
  if (j.contains("start_time")) t.start_time = parse_timestamp(j.at("start_time").get<std::string>());
  return t;
}

json power_to_json(const PowerParams& p) {
  return json{{"p0", p.p0},         {"p_bb", p.p_bb},       {"p_tran", p.p_tran},
              {"p_pa", p.p_pa},     {"p_tx_dbm", p.p_tx_dbm}, {"eta", p.eta},
              {"max_prb", p.max_prb}, {"rf_chains", p.rf_chains}, {"carriers", p.carriers}};
}

PowerParams power_from_json(const json& j) {
  PowerParams p;
  p.p0 = j.value("p0", p.p0);
  p.p_bb = j.value("p_bb", p.p_bb);
  p.p_tran = j.value("p_tran", p.p_tran);
  p.p_pa = j.value("p_pa", p.p_pa);
  p.p_tx_dbm = j.value("p_tx_dbm", p.p_tx_dbm);
  p.eta = j.value("eta", p.eta);
  p.max_prb = j.value("max_prb", p.max_prb);
  p.rf_chains = j.value("rf_chains", p.rf_chains);
  p.carriers = j.value("carriers", p.carriers);
  return p;
}

json baseline_json(const BaselineReport& b) {
  return json{{"name", b.name},
              {"mean_saving_percent", b.saving.mean_percent},
              {"over_percent", b.provisioning.over_percent},
              {"under_percent", b.provisioning.under_percent},
              {"allocations", b.allocations},
              {"per_hour_saving_percent", b.saving.per_hour_percent}};
}

BaselineReport make_baseline(std::string name, std::vector<int> alloc, std::span<const double> truth,
                             const PowerParams& power) {
  BaselineReport b;
  b.name = std::move(name);
  b.saving = power_saving(alloc, power);
  b.provisioning = provisioning(truth, alloc);
  b.allocations = std::move(alloc);
  return b;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << content;
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

std::string percentile_label(double q) { return "p" + num(std::round(q * 1e6) / 1e4); }

std::uint64_t model_seed(std::uint64_t global_seed, ModelKind kind) {
  return derive_seed(global_seed, kind_stream(kind));
}

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  for (ModelKind k : kAllModelKinds) c.models.push_back(ForecasterConfig::defaults(k));
  return c;
}

void ExperimentConfig::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  }
  if (models.empty()) throw std::invalid_argument("at least one model is required");
  for (std::size_t i = 0; i < models.size(); ++i) {
    models[i].validate();
    for (std::size_t j = 0; j < i; ++j) {
      if (models[j].kind == models[i].kind) {
        throw std::invalid_argument("model " + to_string(models[i].kind) + " listed twice");
      }
    }
  }
  if (percentiles.empty()) throw std::invalid_argument("at least one percentile is required");
  for (std::size_t i = 0; i < percentiles.size(); ++i) {
    if (!(percentiles[i] > 0.0 && percentiles[i] < 1.0)) {
      throw std::invalid_argument("percentiles must lie in (0, 1)");
    }
    if (i > 0 && !(percentiles[i] > percentiles[i - 1])) {
      throw std::invalid_argument("percentiles must be strictly increasing");
    }
  }
  power.validate();
}

ExperimentConfig experiment_from_json(const std::string& text, const std::filesystem::path& base_dir) {
  const json j = json::parse(text);
  ExperimentConfig c = ExperimentConfig::defaults();
  if (j.contains("trace")) c.trace = trace_from_json(j.at("trace"), base_dir);
  c.train_fraction = j.value("train_fraction", c.train_fraction);
  if (j.contains("percentiles")) c.percentiles = j.at("percentiles").get<std::vector<double>>();
  if (j.contains("power")) c.power = power_from_json(j.at("power"));
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  c.seed = j.value("seed", c.seed);
  if (j.contains("models")) {
    c.models.clear();
    for (const auto& m : j.at("models")) {
      json full = m;
      if (m.is_string()) full = json{{"kind", m}};
      c.models.push_back(config_from_json(full.dump()));
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return experiment_from_json(ss.str(), path.parent_path());
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

std::string experiment_to_json(const ExperimentConfig& c) {
  json models = json::array();
  for (const auto& m : c.models) {
    json mj = json::parse(config_to_json(m));
    mj.erase("seed");
    models.push_back(std::move(mj));
  }
  const json j{{"seed", c.seed},
               {"output_dir", c.output_dir.generic_string()},
               {"trace", trace_to_json(c.trace)},
               {"train_fraction", c.train_fraction},
               {"percentiles", c.percentiles},
               {"power", power_to_json(c.power)},
               {"models", models}};
  return j.dump(2);
}

const ModelReport* SustainabilityReport::find(ModelKind kind) const {
  for (const auto& m : models) {
    if (m.kind == kind) return &m;
  }
  return nullptr;
}

std::optional<BaselineReport> SustainabilityReport::lstm_baseline() const {
  const ModelReport* m = find(ModelKind::LSTM);
  if (!m) return std::nullopt;
  std::vector<int> alloc;
  for (double v : m->median) alloc.push_back(allocate_value(v, config.power.max_prb));
  return make_baseline("LSTM", std::move(alloc), truth, config.power);
}

SustainabilityReport run_pipeline(const ExperimentConfig& config, const ProgressFn& progress) {
  config.validate();
  auto log = [&](const std::string& msg) {
    if (progress) progress(msg);
  };
  const int max_prb = config.power.max_prb;

  // Monitoring
  const PrbSeries series = std::visit(
      [&](const auto& src) -> PrbSeries {
        if constexpr (std::is_same_v<std::decay_t<decltype(src)>, CsvTrace>) {
          return load_csv(src.path, max_prb);
        } else {
          return generate_synthetic(src, max_prb);
        }
      },
      config.trace);
  const auto [train, test] = split(series, config.train_fraction);
  log("trace: " + std::to_string(series.size()) + " hours, train " + std::to_string(train.size()) +
      ", test " + std::to_string(test.size()));

  std::size_t horizon = config.models.front().horizon;
  std::size_t max_context = 0;
  for (const auto& m : config.models) {
    if (m.horizon != horizon) throw PipelineError("all models must share one horizon");
    max_context = std::max(max_context, m.context_len);
  }
  if (test.size() < max_context + horizon) {
    throw PipelineError("test segment of " + std::to_string(test.size()) +
                        " hours is shorter than context + horizon = " +
                        std::to_string(max_context + horizon));
  }
  if (train.size() < max_context) throw PipelineError("training segment shorter than the context");

  SustainabilityReport report;
  report.config = config;
  report.series_length = series.size();
  report.train_length = train.size();
  report.test_length = test.size();
  report.horizon = horizon;
  for (std::size_t t0 = train.size(); t0 + horizon <= series.size(); t0 += horizon) {
    report.window_origins.push_back(t0);
    for (std::size_t t = 0; t < horizon; ++t) {
      report.truth.push_back(series[t0 + t]);
      report.timestamps.push_back(format_timestamp(series.time_at(t0 + t)));
    }
  }

  // Analytic + Decision + Actuator, per model.
  for (const auto& base : config.models) {
    ForecasterConfig mc = base;
    mc.seed = model_seed(config.seed, mc.kind);
    log("fitting " + to_string(mc.kind));
    const TrainedModel model = fit(mc, train);

    ModelReport mr;
    mr.kind = mc.kind;
    mr.epoch_losses = model.epoch_losses;
    mr.final_loss = model.final_loss;
    mr.scale = model.scale;
    mr.outcomes.resize(config.percentiles.size());
    for (std::size_t p = 0; p < config.percentiles.size(); ++p) {
      mr.outcomes[p].percentile = config.percentiles[p];
    }
    for (std::size_t w = 0; w < report.window_origins.size(); ++w) {
      const std::size_t t0 = report.window_origins[w];
      const std::span<const double> context(series.values().data() + t0 - mc.context_len, mc.context_len);
      Rng rng(derive_seed(mc.seed, kSamplingStream + w));
      const ForecastResult result = predict(model, context, rng, series.calendar_at(t0 - mc.context_len), t0);
      const auto median = forecast_quantile(result, 0.5);
      mr.median.insert(mr.median.end(), median.begin(), median.end());
      for (auto& outcome : mr.outcomes) {
        const auto q = forecast_quantile(result, outcome.percentile);
        outcome.quantiles.insert(outcome.quantiles.end(), q.begin(), q.end());
        for (double v : q) outcome.allocations.push_back(allocate_value(v, max_prb));
      }
    }

    const PointErrors pe = point_errors(report.truth, mr.median);
    mr.metrics.mse = pe.mse;
    mr.metrics.mae = pe.mae;
    mr.metrics.mape_percent = pe.mape_percent;
    mr.metrics.nd = normalized_deviation(report.truth, mr.median);
    for (auto& outcome : mr.outcomes) {
      outcome.saving = power_saving(outcome.allocations, config.power);
      mr.metrics.percentiles.push_back(PercentileMetrics{
          outcome.percentile, quantile_loss(report.truth, outcome.quantiles, outcome.percentile),
          coverage(report.truth, outcome.quantiles), provisioning(report.truth, outcome.allocations)});
    }
    log(to_string(mc.kind) + ": final loss " + num(mr.final_loss) + ", median MAE " + num(pe.mae));
    report.models.push_back(std::move(mr));
  }

  std::vector<int> true_alloc;
  for (double y : report.truth) true_alloc.push_back(allocate_value(y, max_prb));
  report.true_data = make_baseline("True Data", std::move(true_alloc), report.truth, config.power);

  std::vector<double> naive;
  for (std::size_t t0 : report.window_origins) {
    for (std::size_t t = 0; t < horizon; ++t) {
      const std::size_t idx = t0 + t;
      naive.push_back(idx >= 24 ? series[idx - 24] : series[0]);
    }
  }
  report.seasonal_naive = point_errors(report.truth, naive);
  report.seasonal_naive_nd = normalized_deviation(report.truth, naive);
  return report;
}

std::string report_to_json(const SustainabilityReport& r) {
  json models = json::array();
  for (const auto& m : r.models) {
    json pct = json::array();
    for (std::size_t p = 0; p < m.outcomes.size(); ++p) {
      const auto& o = m.outcomes[p];
      const auto& pm = m.metrics.percentiles[p];
      pct.push_back(json{{"percentile", o.percentile},
                         {"label", percentile_label(o.percentile)},
                         {"quantile_loss", pm.quantile_loss},
                         {"coverage", pm.coverage},
                         {"over_percent", pm.provisioning.over_percent},
                         {"under_percent", pm.provisioning.under_percent},
                         {"mean_saving_percent", o.saving.mean_percent},
                         {"quantiles", o.quantiles},
                         {"allocations", o.allocations},
                         {"per_hour_saving_percent", o.saving.per_hour_percent}});
    }
    models.push_back(json{{"model", to_string(m.kind)},
                          {"probabilistic", is_probabilistic(m.kind)},
                          {"scale", m.scale},
                          {"epoch_losses", m.epoch_losses},
                          {"final_loss", m.final_loss},
                          {"mse", m.metrics.mse},
                          {"mae", m.metrics.mae},
                          {"mape_percent", m.metrics.mape_percent},
                          {"nd", m.metrics.nd},
                          {"median", m.median},
                          {"percentiles", pct}});
  }
  json baselines{{"true_data", baseline_json(r.true_data)},
                 {"seasonal_naive",
                  json{{"mse", r.seasonal_naive.mse},
                       {"mae", r.seasonal_naive.mae},
                       {"mape_percent", r.seasonal_naive.mape_percent},
                       {"nd", r.seasonal_naive_nd}}}};
  if (const auto lstm = r.lstm_baseline()) baselines["lstm"] = baseline_json(*lstm);
  json config = json::parse(experiment_to_json(r.config));
  config.erase("output_dir");  // where a report is written is not part of its content
  const json j{{"format", "prb-report/1"},
               {"config", config},
               {"series_length", r.series_length},
               {"train_length", r.train_length},
               {"test_length", r.test_length},
               {"horizon", r.horizon},
               {"window_origins", r.window_origins},
               {"timestamps", r.timestamps},
               {"truth", r.truth},
               {"models", models},
               {"baselines", baselines}};
  return j.dump(2) + "\n";
}

std::string table1_csv(const SustainabilityReport& r) {
  std::ostringstream os;
  os << "metric,model,value";
  for (double q : r.config.percentiles) os << ',' << percentile_label(q);
  os << '\n';
  const std::string blanks(r.config.percentiles.size(), ',');
  auto scalar_row = [&](const std::string& metric, const std::string& model, double v) {
    os << metric << ',' << model << ',' << num(v) << blanks << '\n';
  };
  for (const auto& m : r.models) scalar_row("mse", to_string(m.kind), m.metrics.mse);
  scalar_row("mse", "SeasonalNaive", r.seasonal_naive.mse);
  for (const auto& m : r.models) scalar_row("mae", to_string(m.kind), m.metrics.mae);
  scalar_row("mae", "SeasonalNaive", r.seasonal_naive.mae);
  for (const auto& m : r.models) scalar_row("mape_percent", to_string(m.kind), m.metrics.mape_percent);
  scalar_row("mape_percent", "SeasonalNaive", r.seasonal_naive.mape_percent);
  for (const auto& m : r.models) {
    if (is_probabilistic(m.kind)) scalar_row("nd", to_string(m.kind), m.metrics.nd);
  }
  auto grid = [&](const std::string& metric, auto field) {
    for (const auto& m : r.models) {
      if (!is_probabilistic(m.kind)) continue;
      os << metric << ',' << to_string(m.kind) << ',';
      for (const auto& pm : m.metrics.percentiles) os << ',' << num(field(pm));
      os << '\n';
    }
  };
  grid("quantile_loss", [](const PercentileMetrics& pm) { return pm.quantile_loss; });
  grid("coverage", [](const PercentileMetrics& pm) { return pm.coverage; });
  return os.str();
}

std::string table2_csv(const SustainabilityReport& r) {
  std::ostringstream os;
  os << "model,statistic,value";
  for (double q : r.config.percentiles) os << ',' << percentile_label(q);
  os << '\n';
  const std::string blanks(r.config.percentiles.size(), ',');
  os << "True Data,power_saving_percent," << num(r.true_data.saving.mean_percent) << blanks << '\n';
  if (const auto lstm = r.lstm_baseline()) {
    os << "LSTM,power_saving_percent," << num(lstm->saving.mean_percent) << blanks << '\n';
    os << "LSTM,over_provisioning_percent," << num(lstm->provisioning.over_percent) << blanks << '\n';
    os << "LSTM,under_provisioning_percent," << num(lstm->provisioning.under_percent) << blanks << '\n';
  }
  auto grid = [&](const std::string& stat, auto field) {
    for (const auto& m : r.models) {
      if (!is_probabilistic(m.kind)) continue;
      os << to_string(m.kind) << ',' << stat << ',';
      for (std::size_t p = 0; p < m.outcomes.size(); ++p) os << ',' << num(field(m, p));
      os << '\n';
    }
  };
  grid("power_saving_percent",
       [](const ModelReport& m, std::size_t p) { return m.outcomes[p].saving.mean_percent; });
  grid("over_provisioning_percent", [](const ModelReport& m, std::size_t p) {
    return m.metrics.percentiles[p].provisioning.over_percent;
  });
  grid("under_provisioning_percent", [](const ModelReport& m, std::size_t p) {
    return m.metrics.percentiles[p].provisioning.under_percent;
  });
  return os.str();
}

std::string hourly_csv(const SustainabilityReport& r) {
  std::ostringstream os;
  os << "hour,timestamp,truth,true_alloc,true_saving_percent";
  for (const auto& m : r.models) {
    const std::string name = to_string(m.kind);
    os << ',' << name << "_median";
    for (double q : r.config.percentiles) {
      const std::string l = percentile_label(q);
      os << ',' << name << '_' << l << ',' << name << "_alloc_" << l << ',' << name << "_saving_" << l;
    }
  }
  os << '\n';
  const std::size_t n = r.truth.size();
  const std::size_t first = n >= r.horizon ? n - r.horizon : 0;
  for (std::size_t i = first; i < n; ++i) {
    os << (i - first) << ',' << r.timestamps[i] << ',' << num(r.truth[i]) << ','
       << r.true_data.allocations[i] << ',' << num(r.true_data.saving.per_hour_percent[i]);
    for (const auto& m : r.models) {
      os << ',' << num(m.median[i]);
      for (const auto& o : m.outcomes) {
        os << ',' << num(o.quantiles[i]) << ',' << o.allocations[i] << ','
           << num(o.saving.per_hour_percent[i]);
      }
    }
    os << '\n';
  }
  return os.str();
}

std::string provisioning_csv(const SustainabilityReport& r) {
  std::ostringstream os;
  os << "model,percentile,over_percent,under_percent\n";
  for (const auto& m : r.models) {
    for (const auto& pm : m.metrics.percentiles) {
      os << to_string(m.kind) << ',' << num(pm.percentile) << ',' << num(pm.provisioning.over_percent)
         << ',' << num(pm.provisioning.under_percent) << '\n';
    }
  }
  return os.str();
}

void emit_report(const SustainabilityReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  write_file(dir / "report.json", report_to_json(report));
  write_file(dir / "table1.csv", table1_csv(report));
  write_file(dir / "table2.csv", table2_csv(report));
  write_file(dir / "hourly.csv", hourly_csv(report));
  write_file(dir / "provisioning.csv", provisioning_csv(report));
}

}  // namespace prb
