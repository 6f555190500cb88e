#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "prb/decision.hpp"
#include "prb/forecasters.hpp"
#include "prb/metrics.hpp"
#include "prb/power.hpp"
#include "prb/rapp.hpp"
#include "prb/traces.hpp"

namespace py = pybind11;
using namespace prb;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::span<const double> view(const DoubleArray& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-d array");
  return {a.data(), static_cast<std::size_t>(a.size())};
}

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::array_t<double> to_array(const nn::Tensor& t) {
  py::array_t<double> out({t.rows(), t.cols()});
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

PrbSeries series_from(const DoubleArray& values, const std::string& start, int max_prb) {
  const auto v = view(values);
  return PrbSeries(parse_timestamp(start), {v.begin(), v.end()}, max_prb);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "PRB demand forecasting and energy-aware allocation";

  py::register_exception<TraceError>(m, "TraceError", PyExc_ValueError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);
  py::register_exception<MetricsError>(m, "MetricsError", PyExc_ValueError);
  py::register_exception<PipelineError>(m, "PipelineError", PyExc_RuntimeError);

  py::enum_<ModelKind>(m, "ModelKind")
      .value("SFF", ModelKind::SFF)
      .value("DeepAR", ModelKind::DeepAR)
      .value("Transformer", ModelKind::Transformer)
      .value("LSTM", ModelKind::LSTM);
  m.def("parse_model_kind", [](const std::string& s) { return parse_model_kind(s); });

  py::class_<TraceConfig>(m, "TraceConfig")
      .def(py::init<>())
      .def_readwrite("weeks", &TraceConfig::weeks)
      .def_readwrite("base_load", &TraceConfig::base_load)
      .def_readwrite("daily_amplitude", &TraceConfig::daily_amplitude)
      .def_readwrite("weekly_factor", &TraceConfig::weekly_factor)
      .def_readwrite("noise_std", &TraceConfig::noise_std)
      .def_readwrite("floor", &TraceConfig::floor)
      .def_readwrite("seed", &TraceConfig::seed);

  py::class_<PrbSeries>(m, "PrbSeries")
      .def(py::init(&series_from), py::arg("values"), py::arg("start") = "2023-01-02T00:00:00",
           py::arg("max_prb") = kDefaultMaxPrb)
      .def_property_readonly("values", [](const PrbSeries& s) { return to_array(s.values()); })
      .def_property_readonly("start_time", [](const PrbSeries& s) { return format_timestamp(s.start_time()); })
      .def_property_readonly("max_prb", &PrbSeries::max_prb)
      .def("calendar_at", [](const PrbSeries& s, std::size_t i) {
        const CalendarPoint c = s.calendar_at(i);
        return py::make_tuple(c.hour, c.weekday);
      })
      .def("__len__", &PrbSeries::size);

  m.def("generate_synthetic", &generate_synthetic, py::arg("config") = TraceConfig{},
        py::arg("max_prb") = kDefaultMaxPrb);
  m.def("load_csv", &load_csv, py::arg("path"), py::arg("max_prb") = kDefaultMaxPrb);
  m.def("to_csv", &to_csv);
  m.def("split", &split, py::arg("series"), py::arg("train_fraction") = 0.8);

  py::class_<ForecasterConfig>(m, "ForecasterConfig")
      .def(py::init([](ModelKind kind, std::uint64_t seed) { return ForecasterConfig::defaults(kind, seed); }),
           py::arg("kind"), py::arg("seed") = 0)
      .def_readwrite("kind", &ForecasterConfig::kind)
      .def_readwrite("context_len", &ForecasterConfig::context_len)
      .def_readwrite("horizon", &ForecasterConfig::horizon)
      .def_readwrite("epochs", &ForecasterConfig::epochs)
      .def_readwrite("batch_size", &ForecasterConfig::batch_size)
      .def_readwrite("num_samples", &ForecasterConfig::num_samples)
      .def_readwrite("learning_rate", &ForecasterConfig::learning_rate)
      .def_readwrite("seed", &ForecasterConfig::seed)
      .def_readwrite("sff_hidden", &ForecasterConfig::sff_hidden)
      .def_readwrite("rnn_layers", &ForecasterConfig::rnn_layers)
      .def_readwrite("rnn_cells", &ForecasterConfig::rnn_cells)
      .def_readwrite("model_dim", &ForecasterConfig::model_dim)
      .def_readwrite("ff_scale", &ForecasterConfig::ff_scale)
      .def_readwrite("heads", &ForecasterConfig::heads)
      .def_readwrite("blocks", &ForecasterConfig::blocks)
      .def_readwrite("lstm_cells", &ForecasterConfig::lstm_cells)
      .def("validate", &ForecasterConfig::validate)
      .def("to_json", &config_to_json);

  py::class_<TrainedModel>(m, "TrainedModel")
      .def_readonly("config", &TrainedModel::config)
      .def_readonly("scale", &TrainedModel::scale)
      .def_readonly("epoch_losses", &TrainedModel::epoch_losses)
      .def_readonly("final_loss", &TrainedModel::final_loss)
      .def("save", [](const TrainedModel& tm, const std::filesystem::path& p) { save_model(tm, p); });
  m.def("load_model", &load_model);

  m.def("fit", &fit, py::arg("config"), py::arg("train"), py::call_guard<py::gil_scoped_release>());

  // Returns a (num_samples, horizon) array; the LSTM yields a single row.
  m.def(
      "predict",
      [](const TrainedModel& model, const DoubleArray& context, std::uint64_t seed, int hour, int weekday) {
        Rng rng(seed);
        const ForecastResult r = predict(model, view(context), rng, CalendarPoint{hour, weekday});
        return to_array(r.samples);
      },
      py::arg("model"), py::arg("context"), py::arg("seed") = 0, py::arg("hour") = 0, py::arg("weekday") = 0);

  m.def(
      "forecast_quantile",
      [](const DoubleArray& samples, double q) {
        if (samples.ndim() != 2) throw py::value_error("expected a 2-d sample array");
        ForecastResult r;
        r.samples = nn::Tensor(samples.shape(0), samples.shape(1),
                               std::vector<double>(samples.data(), samples.data() + samples.size()));
        return to_array(forecast_quantile(r, q));
      },
      py::arg("samples"), py::arg("q"));

  m.def("point_errors", [](const DoubleArray& y, const DoubleArray& p) {
    const PointErrors e = point_errors(view(y), view(p));
    return py::dict(py::arg("mse") = e.mse, py::arg("mae") = e.mae, py::arg("mape_percent") = e.mape_percent);
  });
  m.def("normalized_deviation", [](const DoubleArray& y, const DoubleArray& p) {
    return normalized_deviation(view(y), view(p));
  });
  m.def("quantile_loss", [](const DoubleArray& y, const DoubleArray& p, double q) {
    return quantile_loss(view(y), view(p), q);
  });
  m.def("coverage", [](const DoubleArray& y, const DoubleArray& p) { return coverage(view(y), view(p)); });
  m.def("provisioning", [](const DoubleArray& y, const std::vector<int>& alloc) {
    const Provisioning p = provisioning(view(y), alloc);
    return py::make_tuple(p.over_percent, p.under_percent);
  });

  py::class_<PowerParams>(m, "PowerParams")
      .def(py::init<>())
      .def_readwrite("p0", &PowerParams::p0)
      .def_readwrite("p_bb", &PowerParams::p_bb)
      .def_readwrite("p_tran", &PowerParams::p_tran)
      .def_readwrite("p_pa", &PowerParams::p_pa)
      .def_property_readonly("p_out_full", &PowerParams::p_out_full);
  m.def("total_power", &total_power, py::arg("ratio"), py::arg("params") = PowerParams{});
  m.def(
      "power_saving",
      [](const std::vector<int>& alloc, const PowerParams& params) {
        const PowerSaving s = power_saving(std::span<const int>(alloc), params);
        return py::make_tuple(to_array(s.per_hour_percent), s.mean_percent);
      },
      py::arg("alloc"), py::arg("params") = PowerParams{});
  m.def("allocate_value", &allocate_value, py::arg("quantile"), py::arg("max_prb") = kDefaultMaxPrb);

  // Full experiment; returns the report as JSON text.
  m.def(
      "run_experiment",
      [](const std::string& config_json, std::optional<std::uint64_t> seed, const std::filesystem::path& base_dir) {
        ExperimentConfig c = config_json.empty() ? ExperimentConfig::defaults()
                                                 : experiment_from_json(config_json, base_dir);
        if (seed) c.seed = *seed;
        py::gil_scoped_release release;
        return report_to_json(run_pipeline(c));
      },
      py::arg("config_json") = "", py::arg("seed") = py::none(), py::arg("base_dir") = std::filesystem::path{});
}
