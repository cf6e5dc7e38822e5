import numpy as np
import pytest

from diffusion_regimes import (Dataset, DiscreteSchedule, GmSpec, RngPolicy,
                               TimeSchedule, alpha_param, center,
                               ddpm_time_map, delta, sample_gaussian_mixture)


def test_delta_closed_form_points():
    assert delta(0.0) == 0.0
    assert delta(50.0) == pytest.approx(1.0, abs=1e-15)
    assert delta(0.5 * np.log(2.0)) == pytest.approx(0.5, rel=1e-14)


def test_delta_rejects_negative_time():
    with pytest.raises(ValueError):
        delta(-0.1)


def test_delta_monotone_and_bounded():
    ts = np.linspace(0, 15, 500)
    vals = delta(ts)
    assert np.all(np.diff(vals) >= 0)
    # strictly below 1 until 1 - e^-2t underflows to 1 in float64
    assert np.all((vals >= 0) & (vals < 1))


def test_alpha_param():
    assert alpha_param(1, 10) == 0.0
    assert alpha_param(20000, 32) == pytest.approx(np.log(20000) / 32, rel=1e-15)
    assert alpha_param(20000, 32) == pytest.approx(0.30948, abs=5e-6)
    d = 7
    assert alpha_param(int(np.round(np.e ** d)), d) == pytest.approx(1.0, abs=1e-3)


def test_time_schedule_grids():
    lin = TimeSchedule(0.1, 1.0, 10, "linear").grid()
    geo = TimeSchedule(0.1, 1.0, 10, "geometric").grid()
    for g in (lin, geo):
        assert g[0] == pytest.approx(0.1)
        assert g[-1] == pytest.approx(1.0)
        assert np.all(np.diff(g) > 0)
    with pytest.raises(ValueError):
        TimeSchedule(0.0, 1.0, 10)  # geometric cannot start at zero
    assert TimeSchedule(0.0, 1.0, 10, "linear").grid()[0] == 0.0
    with pytest.raises(ValueError):
        TimeSchedule(-0.1, 1.0, 10, "linear")
    with pytest.raises(ValueError):
        TimeSchedule(0.1, 1.0, 1)


def test_discrete_schedule_invariants():
    sched = DiscreteSchedule.linear()
    assert np.all(np.diff(sched.alphabar) < 0)
    recomputed = np.cumprod(1.0 - sched.betas)
    assert np.allclose(recomputed, sched.alphabar, rtol=1e-15)
    with pytest.raises(ValueError):
        DiscreteSchedule(np.array([0.5, 1.0]))


def test_ddpm_time_map():
    sched = DiscreteSchedule(np.full(10, 1e-12))
    assert ddpm_time_map(sched, 1) == pytest.approx(0.0, abs=1e-10)
    # alphabar = e^-2 gives t = 1
    beta = 1.0 - np.exp(-2.0)
    assert ddpm_time_map(DiscreteSchedule(np.array([beta])), 1) == pytest.approx(1.0)


def test_ddpm_paper_horizon():
    # linear 1e-4 .. 2e-2 over 1000 steps ends at OU time ~ 5.05
    sched = DiscreteSchedule.linear(1e-4, 2e-2, 1000)
    t_end = ddpm_time_map(sched, 1000)
    assert t_end == pytest.approx(5.05, abs=0.01)
    ts = [ddpm_time_map(sched, k) for k in range(1, 1001)]
    assert np.all(np.diff(ts) > 0)


def test_center():
    ds = Dataset(np.array([[2.0, 2.0], [0.0, 0.0]]))
    centered, mean = center(ds)
    assert np.allclose(centered.rows, [[1.0, 1.0], [-1.0, -1.0]])
    assert np.allclose(mean, [1.0, 1.0])

    single = Dataset(np.array([[3.0, -1.0]]))
    c, m = center(single)
    assert np.allclose(c.rows, 0.0)
    assert np.allclose(m, [3.0, -1.0])

    already = Dataset(np.array([[1.0, 0.0], [-1.0, 0.0]]))
    c, _ = center(already)
    assert np.allclose(c.rows, already.rows)
    assert np.max(np.abs(c.rows.mean(axis=0))) <= 1e-12 * np.max(np.abs(c.rows))


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.array([[np.inf, 0.0]]))
    with pytest.raises(ValueError):
        Dataset(np.zeros((2, 2)), labels=np.array([1]))


def test_gm_sampler_sigma_zero_limit():
    spec = GmSpec(mu_tilde=2.0, sigma=1e-12, d=3)
    ds = sample_gaussian_mixture(spec, 4, RngPolicy(0).stream("gm"))
    for row, lab in zip(ds.rows, ds.labels):
        assert np.allclose(row, lab * 2.0, atol=1e-9)


def test_gm_sampler_moments():
    spec = GmSpec(mu_tilde=1.0, sigma=1.0, d=8)
    n = 100_000
    ds = sample_gaussian_mixture(spec, n, RngPolicy(3).stream("gm"))
    # CLT bound on the mean: per-coordinate std is sqrt(sigma^2 + mu^2) = sqrt(2)
    assert np.all(np.abs(ds.rows.mean(axis=0)) < 4 * np.sqrt(2.0 / n))
    cov = np.cov(ds.rows.T)
    top = np.linalg.eigvalsh(cov)[-1]
    assert top == pytest.approx(1.0 + 8 * 1.0, rel=0.05)


def test_gm_sampler_bit_reproducible():
    spec = GmSpec(1.0, 1.0, 5)
    a = sample_gaussian_mixture(spec, 50, RngPolicy(9).stream("tag", 4))
    b = sample_gaussian_mixture(spec, 50, RngPolicy(9).stream("tag", 4))
    assert np.array_equal(a.rows, b.rows)
    assert np.array_equal(a.labels, b.labels)


def test_rng_streams_differ():
    p = RngPolicy(1)
    x = p.stream("a", 0).standard_normal(4)
    y = p.stream("a", 1).standard_normal(4)
    z = p.stream("b", 0).standard_normal(4)
    assert not np.allclose(x, y)
    assert not np.allclose(x, z)
