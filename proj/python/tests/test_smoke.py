import json

import numpy as np
import pytest

import speccav


def test_regular_graph_eigenvalue_is_degree():
    g = speccav.generate_graph(speccav.DegreeSpec("regular:4"), 256, 1.0, seed=3)
    assert len(g) == 256
    assert len(g.edges) == 512
    lam, v, _ = speccav.first_eigenpair(g)
    assert lam == pytest.approx(4.0, abs=1e-8)
    assert np.allclose(v, v[0], atol=1e-6)
    assert np.linalg.norm(v) == pytest.approx(1.0)


def test_laplacian_matches_numpy():
    g = speccav.generate_graph(speccav.DegreeSpec("two_point:4,8,0.9"), 64, 1.0, seed=5)
    lam, v, _ = speccav.first_eigenpair(g, laplacian=True)
    m = np.zeros((64, 64))
    for i, j, c in g.edges:
        m[i, j] = m[j, i] = -c
    m[np.diag_indices(64)] = -m.sum(axis=1)
    assert lam == pytest.approx(np.linalg.eigvalsh(m)[-1], abs=1e-8)


def test_ensemble_is_reproducible():
    spec = speccav.DegreeSpec.two_point(4, 8, 0.9)
    a = speccav.ensemble_first_eigenvalues(spec, 128, 0.8, 4, seed=11)
    b = speccav.ensemble_first_eigenvalues(spec, 128, 0.8, 4, seed=11, workers=2)
    assert np.array_equal(a, b)


def test_cavity_regular_edge():
    r = speccav.find_lambda(speccav.DegreeSpec("regular:4"), 1.0, n_pop=2000, burn_in=50, measure=20, samples=1000)
    assert r["lambda_hat"] == pytest.approx(4.0, abs=1e-3)
    assert len(r["v"]) == 1000


def test_fit_scaling_recovers_parameters():
    n = np.array([256, 512, 1024, 2048, 4096], dtype=float)
    lam = np.exp(-0.87 * n**-0.539 + 1.465)
    f = speccav.fit_scaling(n, lam)
    assert f["beta"] == pytest.approx(0.539, abs=1e-6)
    assert f["lambda_infinity"] == pytest.approx(np.exp(1.465), rel=1e-6)


def test_fit_tail_on_pareto():
    rng = np.random.default_rng(0)
    x = (1.0 - rng.random(200000)) ** (-1 / 1.5)
    assert speccav.fit_tail(x)["alpha"] == pytest.approx(1.5, abs=0.05)
    with pytest.raises(speccav._core.InsufficientTailSamples):
        speccav.fit_tail(x[:100])


def test_normalize_and_histogram():
    v = speccav.normalize(np.array([1.0, -3.0, 2.0]), "abs_mean_unit")
    assert np.mean(np.abs(v)) == pytest.approx(1.0)
    h = speccav.histogram(np.array([0.1, 0.15, 0.7]), 0.2)
    assert h["total"] == 3
    assert h["count"] == [2, 0, 0, 1]


def test_run_experiment(tmp_path):
    cfg = {
        "recipe": "eigvec_density",
        "spec": "two_point:4,8,0.9",
        "deltas": [0.8],
        "sizes": [64],
        "ensemble_count": 1,
        "master_seed": 2,
        "method": "both",
        "output_dir": str(tmp_path),
    }
    m = json.loads(speccav.run_experiment(json.dumps(cfg), n_pop=2000, burn_in=30, measure=10, samples=20000))
    assert not m["failed"]
    assert (tmp_path / "manifest.json").exists()
    assert {o["path"] for o in m["outputs"]} >= {"ensemble_lambda.csv", "density_delta=0.8_cavity.csv"}
