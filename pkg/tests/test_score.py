import numpy as np
import pytest

from diffusion_regimes import (Dataset, GmSpec, RngPolicy, delta,
                               gm_population_score, log_density_batch,
                               log_density_empirical, sample_gaussian_mixture,
                               score_batch, score_empirical)
from diffusion_regimes.gm import gamma


def fd_gradient(dataset, x, t, h=1e-5):
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        up = log_density_empirical(dataset, x + e, t).log_density
        dn = log_density_empirical(dataset, x - e, t).log_density
        g[i] = (up - dn) / (2 * h)
    return g


def test_single_atom_standard_normal():
    ds = Dataset(np.zeros((1, 6)))
    t = 20.0  # delta ~ 1
    res = log_density_empirical(ds, np.zeros(6), t)
    assert res.log_density == pytest.approx(-3.0 * np.log(2 * np.pi), rel=1e-10)
    assert res.weights == pytest.approx([1.0])


def test_single_atom_score_exact():
    rng = np.random.default_rng(0)
    a = rng.standard_normal(5)
    ds = Dataset(a[None, :])
    x = rng.standard_normal(5)
    t = 0.8
    expected = (a * np.exp(-t) - x) / delta(t)
    assert score_empirical(ds, x, t) == pytest.approx(expected, rel=1e-12)


def test_row_permutation_invariance():
    rng = np.random.default_rng(1)
    rows = rng.standard_normal((12, 4))
    x = rng.standard_normal(4)
    perm = rng.permutation(12)
    r1 = log_density_empirical(Dataset(rows), x, 0.5)
    r2 = log_density_empirical(Dataset(rows[perm]), x, 0.5)
    assert r1.log_density == pytest.approx(r2.log_density, rel=1e-13)
    assert r1.weights[perm] == pytest.approx(r2.weights, abs=1e-13)


def test_symmetric_pair_equal_weights():
    ds = Dataset(np.array([[-1.0], [1.0]]))
    for t in (0.05, 0.5, 3.0):
        res = log_density_empirical(ds, np.zeros(1), t)
        assert res.weights == pytest.approx([0.5, 0.5], abs=1e-14)


def test_weight_normalization():
    rng = np.random.default_rng(2)
    ds = Dataset(rng.standard_normal((40, 7)))
    _, w, _, _ = log_density_batch(ds, rng.standard_normal((20, 7)), 0.03)
    assert np.max(np.abs(w.sum(axis=1) - 1.0)) < 1e-12
    assert np.all(w >= 0)


def test_gradient_check_random_instances():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        d = rng.integers(1, 9)
        n = rng.integers(1, 51)
        t = rng.uniform(0.01, 5.0)
        ds = Dataset(rng.standard_normal((n, d)))
        x = rng.standard_normal(d)
        analytic = score_empirical(ds, x, t)
        fd = fd_gradient(ds, x, t)
        err = np.linalg.norm(analytic - fd) / max(np.linalg.norm(analytic), 1e-12)
        worst = max(worst, err)
    assert worst < 1e-6


def test_score_vanishes_at_lump_center():
    rng = np.random.default_rng(4)
    ds = Dataset(10.0 * rng.standard_normal((5, 8)))  # far-separated atoms
    t = 0.05
    x = ds.rows[1] * np.exp(-t)
    F = score_empirical(ds, x, t)
    assert np.linalg.norm(F) < 1e-6


def test_relabeling_identity():
    # shifting atoms by u and the query by u e^-t leaves the score unchanged
    rng = np.random.default_rng(5)
    rows = rng.standard_normal((9, 3))
    x = rng.standard_normal(3)
    u = rng.standard_normal(3)
    t = 0.6
    f0 = score_empirical(Dataset(rows), x, t)
    f1 = score_empirical(Dataset(rows + u), x + u * np.exp(-t), t)
    assert f1 == pytest.approx(f0, abs=1e-10)


def test_gm_population_score_limits():
    spec = GmSpec(1.0, 1.0, 6)
    t = 0.4
    g = gamma(t, spec.sigma)
    m = spec.center_vector()
    # x orthogonal to m: tanh term vanishes
    x = np.array([1.0, -1.0, 0.0, 0.0, 1.0, -1.0])
    assert gm_population_score(spec, x, t) == pytest.approx(-x / g, rel=1e-12)
    # x.m large: regime-II single-Gaussian score
    x = 50.0 * np.ones(6)
    expected = (-x + m * np.exp(-t)) / g
    assert gm_population_score(spec, x, t) == pytest.approx(expected, rel=1e-10)


def test_empirical_matches_population_score_on_gm():
    spec = GmSpec(1.0, 1.0, 8)
    policy = RngPolicy(11)
    ds = sample_gaussian_mixture(spec, 100_000, policy.stream("data"))
    t = 1.2  # above t_C for this n, d
    rng = policy.stream("query")
    X = np.sqrt(gamma(t, 1.0)) * rng.standard_normal((20, 8))
    emp = score_batch(ds, X, t)
    pop = gm_population_score(spec, X, t)
    rel = np.linalg.norm(emp - pop, axis=1) / np.linalg.norm(pop, axis=1)
    assert np.median(rel) < 0.05


def test_low_time_rejected():
    ds = Dataset(np.zeros((1, 2)))
    with pytest.raises(ValueError):
        log_density_empirical(ds, np.zeros(2), 1e-9)
