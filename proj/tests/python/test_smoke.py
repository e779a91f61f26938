import json
import math

import numpy as np
import pytest

import clwe_pancakes as cp


def test_gaussian_primitives():
    assert cp.rho(1.0, [0.0]) == 1.0
    assert cp.rho(1.0, [1.0]) == pytest.approx(math.exp(-math.pi), rel=1e-14)
    assert cp.theta_mass(1.0) == pytest.approx(1.0864348112133, rel=1e-12)
    assert cp.poisson_residual(8.0) < 1e-12
    assert cp.discrete_gaussian_tail(1.0, 1) == pytest.approx(0.0795582121644, rel=1e-9)
    # width <-> sigma round trip
    assert cp.sigma_to_width(cp.width_to_sigma(0.7)) == pytest.approx(0.7, rel=1e-14)


def test_discrete_gaussian_sampler_moments():
    draws = cp.discrete_gaussian_sample(8.0, 200_000, seed=3)
    sigma = cp.width_to_sigma(8.0)
    assert abs(draws.mean()) < 3 * sigma / math.sqrt(len(draws))
    assert draws.std() == pytest.approx(sigma, rel=0.02)


def test_mixture_generation_and_oracle():
    n, m, d = 8, 50_000, 8
    ds = cp.sample_mixture(n, m, seed=11, gamma=8.0, beta=0.01, out_beta=0.02)
    x, y, w = ds["x"], ds["y"], ds["w"]
    assert x.shape == (m, n)
    assert set(np.unique(y)) == {-1, 1}
    assert np.linalg.norm(w) == pytest.approx(1.0, abs=1e-12)

    oracle = cp.build_oracle(w, gamma=8.0, out_beta=0.02, d=d)
    assert oracle.degree == 4 * d
    assert len(oracle.roots) == 4 * d
    pred = oracle.classify(x)
    err = float(np.mean(pred != y))
    exact = cp.oracle_error_exact(n, gamma=8.0, out_beta=0.02, d=d)
    assert exact == pytest.approx(0.0064462123491, rel=1e-9)
    sigma = math.sqrt(exact * (1 - exact) / m)
    assert abs(err - exact) < 4 * sigma


def test_null_dataset_has_no_signal():
    ds = cp.sample_null(4, 50_000, seed=5)
    x, y = ds["x"], ds["y"]
    assert abs(float(np.mean(y))) < 0.02
    # per-coordinate variance 1/(2 pi)
    assert np.allclose(x.var(axis=0), 1.0 / (2 * math.pi), rtol=0.05)


def test_dataset_roundtrip(tmp_path):
    ds = cp.sample_mixture(4, 1000, seed=42)
    path = tmp_path / "ds.clwf"
    cp.write_dataset(ds, path)
    back = cp.read_dataset(path)
    assert np.array_equal(back["x"], ds["x"])
    assert np.array_equal(back["y"], ds["y"])
    man = cp.read_manifest(path)
    assert man["m"] == 1000
    assert man["mode"] == "planted"


def test_determinism():
    a = cp.sample_mixture(4, 2000, seed=9, threads=1)
    b = cp.sample_mixture(4, 2000, seed=9, threads=4)
    assert np.array_equal(a["x"], b["x"])
    assert np.array_equal(a["y"], b["y"])


def test_embedding_matches_numpy():
    x = np.array([0.5, -1.25])
    phi = cp.embed_monomials(x, degree=2)
    expected = np.array([1.0, x[0], x[1], x[0] ** 2, x[0] * x[1], x[1] ** 2])
    assert np.allclose(phi, expected, rtol=1e-15)


def test_density_normalization():
    t = np.linspace(-2.0, 2.0, 20001)
    p = cp.pancake_density_1d(8.0, 0.04, c=0.0, t=t)
    mass = np.trapz(p, t)
    assert mass == pytest.approx(1.0, abs=5e-3)


def test_verify_identity_criterion():
    report = cp.verify(criteria=[1], seed=7)
    assert report["all_pass"]
    names = {c["name"] for c in report["checks"]}
    assert "poisson_residual_grid" in names
    # report is valid JSON-serializable structure
    json.dumps(report)
