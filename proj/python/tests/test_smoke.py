import math

import pytest

import msgcn


def test_generate_and_round_trip():
    net = msgcn.generate_network("complete", 5, seed=3)
    assert net.num_nodes == 5
    assert net.validate() == []
    assert len(msgcn.candidate_links(net)) == 25
    assert msgcn.Network.from_json(net.to_json()) == net
    for lp, u, lq, v, w in net.inter_edges:
        assert w == (net.features[lp][u] + net.features[lq][v]) / 2


def test_bad_inputs_raise():
    with pytest.raises(RuntimeError):
        msgcn.generate_network("complete", 11)
    with pytest.raises(ValueError):
        msgcn.Network.from_json("{")


def test_fit_predict_evaluate(tmp_path):
    data = msgcn.generate_dataset("complete", 4, count=10, seed=1)
    model, history = msgcn.fit(data[:8], epochs=2, seed=5)
    assert len(history) == 2
    preds = model.predict(data[8])
    assert len(preds) == 16
    assert all(p[4] >= 0 for p in preds)
    scores = model.evaluate(data[8:])
    assert math.isfinite(scores["mse"])
    path = str(tmp_path / "m.ckpt")
    model.save(path)
    assert msgcn.Model.load(path).predict(data[8]) == preds


def test_statistics():
    m = msgcn.metrics([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert m["mse"] == 0.0
    assert m["pearson_r"] == pytest.approx(1.0)
    t, df, p = msgcn.welch_ttest([1, 2, 3, 4], [11, 12, 13, 14])
    assert p < 0.001
    assert t < 0


def test_gradcheck_and_cli():
    assert msgcn.gradcheck(1, instances=3)
    code, out, _ = msgcn.cli(["gradcheck", "--seed", "1", "--instances", "2"])
    assert code == 0
    assert "passed" in out
    assert msgcn.cli(["nope"])[0] == 2
