import numpy as np
import pytest

import tsnn


def _config(**kw):
    base = dict(layers=3, tolerance=1, steps_per_period=48)
    base.update(kw)
    return tsnn.Config(**base)


def test_synthetic_shape_and_determinism():
    a = tsnn.synthetic(steps=480, sensors=2, period=48, noise=0.05, seed=3)
    b = tsnn.synthetic(steps=480, sensors=2, period=48, noise=0.05, seed=3)
    assert a.shape == (480, 2)
    np.testing.assert_array_equal(a, b)


def test_build_predict_and_roundtrip(tmp_path):
    values = tsnn.synthetic(steps=960, period=48, noise=0.05)
    x, y, idx = tsnn.windows(values[:, 0], period=48, split="train")
    bank = tsnn.Bank(x, y, idx, _config())
    assert len(bank) == len(idx)
    assert bank.num_layers == 3

    tx, ty, tidx = tsnn.windows(values[:, 0], period=48, split="test")
    std = bank.predict_batch(tx, tidx)
    eff = bank.predict_batch(tx, tidx, strategy=tsnn.Strategy.MEMORY_EFFICIENT)
    np.testing.assert_allclose(std, eff, rtol=1e-9, atol=1e-9)
    assert std.shape == ty.shape

    single, trace = bank.predict(tx[0], tidx[0] % 48, trace=True)
    np.testing.assert_allclose(single, std[0], rtol=1e-12)
    assert len(trace["layers"]) == 3
    total = sum(layer["prediction"] for layer in trace["layers"])
    np.testing.assert_allclose(total, single, atol=1e-12)

    path = tmp_path / "s.bank"
    bank.save(path)
    assert tsnn.Bank.load(path) == bank


def test_evaluate_and_metrics():
    values = tsnn.synthetic(steps=960, period=48)
    result = tsnn.evaluate(values, _config(tolerance=0, layers=1))
    assert result["average"]["mae"] < 1e-9

    m = tsnn.metrics(np.array([0.0, 2.0]), np.array([1.0, 3.0]))
    assert m["mae"] == 1.0 and m["rmse"] == 1.0
    assert m["mape"] == pytest.approx(200.0 / 3.0)


def test_contributions_and_errors():
    values = tsnn.synthetic(steps=960, period=48, noise=0.05)
    x, y, idx = tsnn.windows(values[:, 0], period=48)
    bank = tsnn.Bank(x, y, idx, _config(layers=1))
    ids, contrib = bank.contributions(x[5], idx[5] % 48)
    assert len(ids) == len(contrib) == len(bank)
    steps = np.asarray(ids) % 48
    gap = np.minimum(np.abs(steps - idx[5] % 48), 48 - np.abs(steps - idx[5] % 48))
    assert np.all(contrib[gap > 1] == 0.0)

    with pytest.raises(tsnn.UsageError):
        tsnn.Config(layers=0)
    with pytest.raises(tsnn.DataError):
        tsnn.Bank.load("/nonexistent/bank")
