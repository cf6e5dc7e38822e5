import numpy as np
import pytest

from diffusion_regimes import (BackwardConfig, Dataset, EntropyCurve, GmSpec,
                               RngPolicy, TimeSchedule, alpha_param,
                               collapse_time_from_curve, default_backward_grid,
                               delta, entropy_mc, excess_entropy_curve,
                               gm_excess_entropy_analytic, phi_collapse_mc,
                               s_sep, sample_gaussian_mixture, t_hat_histogram,
                               tc_closed_form)
from diffusion_regimes.gm import gamma


def test_s_sep_values():
    # n=1, delta -> 1: entropy per variable of a unit Gaussian
    assert s_sep(30.0, 1, 5) == pytest.approx(0.5 + 0.5 * np.log(2 * np.pi),
                                              rel=1e-12)
    # n = e^d adds exactly alpha = 1
    d = 4
    assert s_sep(30.0, int(np.round(np.e ** d)), d) == pytest.approx(
        0.5 + 0.5 * np.log(2 * np.pi) + alpha_param(int(np.round(np.e ** d)), d),
        rel=1e-12)
    # alpha + 1/2 + (1/2) log(2 pi (1 - e^-2)) evaluated directly
    expected = (alpha_param(20000, 32) + 0.5
                + 0.5 * np.log(2 * np.pi * delta(1.0)))
    assert s_sep(1.0, 20000, 32) == pytest.approx(expected, rel=1e-14)
    assert s_sep(1.0, 20000, 32) == pytest.approx(1.6557, abs=2e-4)
    with pytest.raises(ValueError):
        s_sep(0.0, 10, 2)


def test_s_sep_monotone():
    ts = np.linspace(0.05, 5.0, 50)
    vals = [s_sep(t, 100, 8) for t in ts]
    assert np.all(np.diff(vals) > 0)


def test_entropy_mc_single_gaussian_oracle():
    # n=1, a=0: the empirical density is exactly N(0, delta I); the entropy
    # per variable is 1/2 + 1/2 log(2 pi delta)
    ds = Dataset(np.zeros((1, 6)))
    for t in (0.3, 1.0, 3.0):
        m, se = entropy_mc(ds, t, 20000, RngPolicy(0).stream("e", int(t * 10)))
        exact = 0.5 + 0.5 * np.log(2 * np.pi * delta(t))
        assert abs(m - exact) < 3 * se


def test_entropy_mc_two_far_lumps():
    # two distant atoms in d=1: mixture entropy = Gaussian entropy + ln 2
    ds = Dataset(np.array([[-500.0], [500.0]]))
    t = 0.05
    m, se = entropy_mc(ds, t, 20000, RngPolicy(1).stream("e"))
    exact = np.log(2.0) + 0.5 + 0.5 * np.log(2 * np.pi * delta(t))
    assert abs(m - exact) < 3 * se


def test_entropy_mc_seed_consistency_and_validation():
    ds = Dataset(np.random.default_rng(2).standard_normal((50, 4)))
    m1, se1 = entropy_mc(ds, 0.7, 5000, RngPolicy(3).stream("a"))
    m2, se2 = entropy_mc(ds, 0.7, 5000, RngPolicy(4).stream("b"))
    assert abs(m1 - m2) < 3 * np.hypot(se1, se2)
    with pytest.raises(ValueError):
        entropy_mc(ds, 0.7, 50, RngPolicy(0).stream("x"))


def test_entropy_mc_worker_independence():
    ds = Dataset(np.random.default_rng(5).standard_normal((200, 4)))
    r1 = entropy_mc(ds, 0.5, 2000, RngPolicy(6).stream("w"), workers=1)
    r4 = entropy_mc(ds, 0.5, 2000, RngPolicy(6).stream("w"), workers=4)
    assert r1 == r4


def test_excess_entropy_plateau_alpha():
    spec = GmSpec(1.0, 1.0, 8)
    ds = sample_gaussian_mixture(spec, 200, RngPolicy(7).stream("ds"))
    curve = excess_entropy_curve(ds, np.array([6.0]), 20000, RngPolicy(7))
    alpha = ds.alpha
    assert abs(curve.f_excess[0] - alpha) < 3 * curve.stderr[0]
    # consistency of the stored pieces
    assert np.allclose(curve.f_excess, curve.s_sep - curve.s_emp)


def test_collapse_time_on_analytic_curve():
    # noise-free closed-form GM curve: crossing must equal the closed form
    n, d, sigma = 20000, 32, 1.0
    sched = TimeSchedule(0.05, 2.0, 2000, "linear")
    times = sched.grid()
    f = np.array([gm_excess_entropy_analytic(t, n, d, sigma) for t in times])
    curve = EntropyCurve(times=times, s_emp=-f, stderr=np.zeros_like(f),
                         n_prime=1000, s_sep=np.zeros_like(f), f_excess=f)
    t_c = collapse_time_from_curve(curve)
    assert t_c == pytest.approx(tc_closed_form(n, d, sigma), abs=1e-3)


def test_collapse_time_errors():
    times = np.linspace(0.1, 1.0, 10)
    pos = EntropyCurve(times, np.zeros(10), np.zeros(10), 1000, np.zeros(10),
                       np.full(10, 0.5))
    with pytest.raises(ValueError, match="positive everywhere"):
        collapse_time_from_curve(pos)
    neg = EntropyCurve(times, np.zeros(10), np.zeros(10), 1000, np.zeros(10),
                       np.full(10, -0.5))
    with pytest.raises(ValueError, match="never leaves"):
        collapse_time_from_curve(neg)


def test_collapse_time_dead_band_ignores_noise_blips():
    # a noisy zero plateau followed by a clean rise; the early blip above
    # zero but inside the band must not be declared a crossing
    times = np.linspace(0.1, 1.0, 10)
    f = np.array([0.001, -0.002, 0.003, 0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6])
    se = np.full(10, 0.01)
    curve = EntropyCurve(times, -f, se, 1000, np.zeros(10), f)
    t_c = collapse_time_from_curve(curve)
    assert 0.4 <= t_c <= 0.5


def test_phi_collapse_trivial_floor():
    spec = GmSpec(1.0, 1.0, 6)
    ds = sample_gaussian_mixture(spec, 25, RngPolicy(8).stream("ds"))
    cfg = BackwardConfig(default_backward_grid(t_max=4.0, steps=200), dataset=ds)
    curve = phi_collapse_mc(cfg, ds, [0.0], 40, RngPolicy(8))
    assert curve.phi[0] == 1.0
    assert curve.stderr[0] == 0.0


def test_phi_collapse_decreases_past_tc():
    spec = GmSpec(1.0, 1.0, 6)
    ds = sample_gaussian_mixture(spec, 25, RngPolicy(9).stream("ds"))
    cfg = BackwardConfig(default_backward_grid(t_max=4.0, steps=200), dataset=ds)
    curve = phi_collapse_mc(cfg, ds, [0.05, 3.0], 60, RngPolicy(9), workers=2)
    assert curve.phi[0] > curve.phi[1]
    # early cloning: branches nearly independent, phi_c ~ sum p_mu^2 << 1
    assert curve.phi[1] < 0.5


def test_t_hat_histogram():
    grid = np.linspace(0.0, 4.0, 401)
    t_hats = np.concatenate([np.full(150, 0.52), np.full(50, 1.0)])
    hist = t_hat_histogram(t_hats, grid)
    assert hist.counts.sum() == 200
    assert hist.mean == pytest.approx(0.64)
    assert hist.bin_times[np.argmax(hist.counts)] == pytest.approx(0.52)
    with pytest.raises(ValueError):
        t_hat_histogram(np.full(10, 1.0), grid)


def test_t_hat_histogram_degenerate():
    grid = np.linspace(0.0, 4.0, 11)
    hist = t_hat_histogram(np.full(120, 4.0), grid)
    assert hist.counts[-1] == 120
    assert hist.stderr == 0.0
