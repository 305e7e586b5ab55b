import json
import math

import numpy as np
import pytest

import hfevd


def test_registry_lists_builtin_models():
    names = hfevd.model_names()
    for name in ("linear_svar", "dar1", "sv_threshold", "sv_smooth", "tvar", "quadratic_example"):
        assert name in names
    m = hfevd.model("dar1", {"phi": 0.5, "alpha": 1.0, "beta": 0.5})
    assert m.dimension == 1
    assert m.theta == {"phi": 0.5, "alpha": 1.0, "beta": 0.5}


def test_dar_decomposition_shares():
    m = hfevd.model("dar1", {"phi": 0.5, "alpha": 1.0, "beta": 0.5})
    r = hfevd.decompose(m, np.zeros(1), h=2, S=200_000, seed=3, max_total_degree=3)
    shares = {e["label"]: e["share"][0] for e in r["entries"]}
    assert abs(shares["e1[t+1]"] - 0.15) < 0.03
    assert abs(shares["e1[t+2]"] - 0.82) < 0.03
    assert abs(shares["e1[t+1]^2*e1[t+2]"] - 0.03) < 0.03
    # Entries plus residual reproduce the total.
    total = np.array(r["total"])
    explained = sum(np.array(e["matrix"]) for e in r["entries"]) + np.array(r["residual"])
    assert np.allclose(explained, total, rtol=1e-10, atol=0)


def test_same_seed_same_report():
    m = hfevd.model("sv_threshold")
    a = hfevd.decompose(m, np.zeros(2), h=3, S=20_000, seed=9, max_total_degree=2)
    b = hfevd.decompose(m, np.zeros(2), h=3, S=20_000, seed=9, max_total_degree=2)
    assert json.dumps(a) == json.dumps(b)


def test_linear_eirf_matches_moving_average():
    A = [[0.5, 0.1], [0.0, 0.3]]
    D = [[1.0, 0.0], [0.4, 0.8]]
    m = hfevd.model("linear_svar", {"A": A, "D": D})
    mean, se = hfevd.eirf(m, np.zeros(2), h=2, component=1, magnitude=1.0, S=1000, seed=1)
    expected = np.array(A) @ np.array(D)[:, 0]
    assert np.allclose(mean, expected, atol=1e-12)
    path, _ = hfevd.irf_path(m, np.zeros(2), h=3, component=1, magnitude=1.0, kind="mit")
    assert path.shape == (3, 2)
    assert np.allclose(path[1], expected)


def test_ofevd_hermite_family_matches_hfevd():
    m = hfevd.model("dar1", {"phi": 0.5, "alpha": 1.0, "beta": 0.5})
    fam = hfevd.classical_family("hermite", 3)
    o = hfevd.ofevd(m, np.zeros(1), h=2, S=20_000, seed=4, families=[fam])
    d = hfevd.decompose(m, np.zeros(1), h=2, S=20_000, seed=4, max_total_degree=3)
    for eo, ed in zip(o["entries"], d["entries"]):
        assert np.allclose(eo["matrix"], ed["matrix"], atol=1e-12)


def test_tvar_fit_roundtrip():
    params = {
        "A1": [[0.6, 0.1], [-0.2, 0.3]],
        "A2": [[-0.3, 0.0], [0.2, 0.5]],
        "D1": [[0.5, 0.0], [0.1, 0.4]],
        "D2": [[1.0, 0.0], [-0.3, 0.8]],
        "threshold": 0.17,
    }
    data = hfevd.simulate(hfevd.model("tvar", params), np.zeros(2), T=3000, seed=2)
    assert data.shape == (3000, 2)
    fit = hfevd.tvar_fit(data, trigger=1, grid_points=40)
    assert abs(fit["threshold"] - 0.17) < 0.1
    fitted = hfevd.model_from_fit(fit)
    assert fitted.name == "tvar"
    r = hfevd.decompose(fitted, data[-1], h=2, S=5000, seed=1, max_total_degree=2)
    assert r["metadata"]["model"] == "tvar"


def test_errors_carry_codes():
    with pytest.raises(hfevd.HfevdError) as info:
        hfevd.model("garch")
    assert info.value.code == "registry.spec"
    with pytest.raises(hfevd.HfevdError) as info:
        hfevd.model("dar1", {"phi": 0.5})
    assert info.value.code == "registry.schema"
    m = hfevd.model("dar1", {"phi": 0.5, "beta": 0.5})
    with pytest.raises(hfevd.HfevdError) as info:
        hfevd.decompose(m, np.zeros(1), h=2, S=100, seed=1, partitions=[{"type": "bogus"}])
    assert info.value.code == "cli.schema"


def test_run_config_writes_artifacts(tmp_path):
    config = {
        "version": 1,
        "seed": 5,
        "model": {"name": "quadratic_example", "params": {"a": 0.5, "b": 0.7}},
        "run": {"history": {"values": [[0.0, 1.0]]}, "h": 2, "S": 10_000, "partitions": [{"type": "linear"}]},
    }
    hfevd.run_config("decompose", config, tmp_path, tmp_path / "out")
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["command"] == "decompose"
    assert (tmp_path / "out" / "shares.csv").read_text().startswith("index,label,component,contribution,share")
    assert not math.isnan(report["total"][0][0])
