import math

import numpy as np
import pytest

import prb_oracle as prb


def small_config(kind, seed=3):
    c = prb.ForecasterConfig(kind, seed)
    c.epochs = 1
    c.num_samples = 20
    c.sff_hidden = [8]
    c.rnn_layers = 1
    c.rnn_cells = 8
    c.model_dim = 8
    c.heads = 2
    c.blocks = 1
    c.lstm_cells = 8
    return c


def short_trace():
    cfg = prb.TraceConfig()
    cfg.weeks = 2
    return prb.generate_synthetic(cfg)


def test_trace_generation_and_split():
    series = short_trace()
    assert len(series) == 336
    assert series.start_time == "2023-01-02T00:00:00"
    assert series.calendar_at(0) == (0, 0)
    v = series.values
    assert v.min() >= 1.0 and v.max() <= 160.0
    train, test = prb.split(series, 0.75)
    assert len(train) == 252 and len(test) == 84


def test_trace_rejects_out_of_range_values():
    with pytest.raises(ValueError):
        prb.PrbSeries(np.array([10.0, 200.0]))
    with pytest.raises(prb.TraceError):
        prb.load_csv("/nonexistent/trace.csv")


@pytest.mark.parametrize("kind", [prb.ModelKind.SFF, prb.ModelKind.DeepAR, prb.ModelKind.Transformer])
def test_probabilistic_fit_predict(kind):
    series = short_trace()
    train, _ = prb.split(series, 0.75)
    model = prb.fit(small_config(kind), train)
    assert len(model.epoch_losses) == 1 and math.isfinite(model.final_loss)
    samples = prb.predict(model, train.values[-24:], seed=5)
    assert samples.shape == (20, 24)
    assert np.all(np.isfinite(samples))
    again = prb.predict(model, train.values[-24:], seed=5)
    np.testing.assert_array_equal(samples, again)
    q50 = prb.forecast_quantile(samples, 0.5)
    q90 = prb.forecast_quantile(samples, 0.9)
    assert np.all(q50 <= q90)


def test_lstm_returns_single_row():
    train, _ = prb.split(short_trace(), 0.75)
    model = prb.fit(small_config(prb.ModelKind.LSTM), train)
    assert prb.predict(model, train.values[-24:]).shape == (1, 24)


def test_metrics():
    y = np.array([10.0, 10.0])
    e = prb.point_errors(y, np.array([9.0, 11.0]))
    assert e["mse"] == 1.0 and e["mae"] == 1.0
    assert prb.quantile_loss(np.array([10.0]), np.array([8.0]), 0.9) == pytest.approx(3.6)
    assert prb.coverage(y, y) == 1.0
    assert prb.provisioning(np.array([5.0, 5.0]), [5, 4]) == (50.0, 50.0)
    with pytest.raises(prb.MetricsError):
        prb.point_errors(np.array([0.0]), np.array([1.0]))


def test_power_and_allocation():
    assert prb.total_power(1.0) == 1.0
    assert prb.total_power(0.0) == 0.7179
    per_hour, mean = prb.power_saving([80] * 24)
    assert mean == 50.0 and per_hour.shape == (24,)
    assert prb.allocate_value(41.2) == 42
    assert prb.allocate_value(-3.0) == 0
    assert prb.allocate_value(500.0) == 160


def test_run_experiment_small():
    config = {
        "seed": 11,
        "trace": {"source": "synthetic", "weeks": 3},
        "models": [{"kind": "SFF", "epochs": 1, "num_samples": 20, "sff_hidden": [8]}, "LSTM"],
        "percentiles": [0.5, 0.9],
    }
    report = prb.run_experiment(config)
    assert report["format"] == "prb-report/1"
    names = [m["model"] for m in report["models"]]
    assert names == ["SFF", "LSTM"]
