"""Collapse-time measurement: entropy estimator, excess entropy, clone and
nearest-neighbor diagnostics.

The Monte-Carlo entropy s^e(t) averages -log P_t^e over forward samples of
the dataset itself; the separated-mixture entropy s^sep(t) is closed form.
Their difference f^e = s^sep - s^e sits at zero below the collapse time and
climbs to alpha = log(n)/d at large times; its last exit from zero is t_C.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Dataset, TimeSchedule, alpha_param, delta
from .rng import RngPolicy, chunk_indices, run_tasks
from .score import log_density_only
from .sde import BackwardConfig, clone_endpoints_batch, nearest_indices
from .speciation import PhiCurve

ENTROPY_CHUNK = 512  # fixed chunk size so reductions are worker-independent


def s_sep(t: float, n: int, d: int) -> float:
    """Entropy per variable of n well-separated Gaussian lumps of variance delta."""
    dt = delta(t)
    if dt <= 0:
        raise ValueError("need t above the schedule floor (delta > 0)")
    return alpha_param(n, d) + 0.5 + 0.5 * np.log(2.0 * np.pi * dt)


def entropy_mc(dataset: Dataset, t: float, n_prime: int,
               rng: np.random.Generator, workers: int = 1):
    """Monte-Carlo estimate (mean, stderr) of the entropy per variable s^e(t).

    Draws n_prime forward samples x = a_mu e^-t + sqrt(delta) xi with mu
    uniform, and averages -log P_t^e(x) / d.  All randomness is drawn up
    front from `rng`; workers only parallelize the density evaluation over
    fixed-size chunks, so results are independent of the worker count.
    """
    if n_prime < 100:
        raise ValueError("need n_prime >= 100")
    emt = np.exp(-t)
    sq = np.sqrt(delta(t))
    mu = rng.integers(dataset.n, size=n_prime)
    X = dataset.rows[mu] * emt + sq * rng.standard_normal((n_prime, dataset.d))
    chunks = chunk_indices(n_prime, ENTROPY_CHUNK)

    def one(i: int) -> np.ndarray:
        lo, hi = chunks[i]
        return log_density_only(dataset, X[lo:hi], t)

    log_dens = np.concatenate(run_tasks(one, len(chunks), workers))
    vals = -log_dens / dataset.d
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(n_prime))


@dataclass(frozen=True)
class EntropyCurve:
    times: np.ndarray
    s_emp: np.ndarray
    stderr: np.ndarray
    n_prime: int
    s_sep: np.ndarray
    f_excess: np.ndarray         # s_sep - s_emp


def excess_entropy_curve(dataset: Dataset, schedule, n_prime: int,
                         policy: RngPolicy, workers: int = 1,
                         stream_tag: str = "entropy") -> EntropyCurve:
    """Per-time s^e, s^sep and their difference with standard errors.

    `schedule` is a TimeSchedule or an explicit increasing array of times.
    """
    times = schedule.grid() if isinstance(schedule, TimeSchedule) \
        else np.asarray(schedule, dtype=float)
    results = [entropy_mc(dataset, t, n_prime, policy.stream(stream_tag, i),
                          workers=workers)
               for i, t in enumerate(times)]
    s_emp = np.array([r[0] for r in results])
    se = np.array([r[1] for r in results])
    ssep = np.array([s_sep(t, dataset.n, dataset.d) for t in times])
    return EntropyCurve(times=times, s_emp=s_emp, stderr=se, n_prime=n_prime,
                        s_sep=ssep, f_excess=ssep - s_emp)


def collapse_time_from_curve(curve: EntropyCurve, band_frac: float = 0.15) -> float:
    """Largest time at which f^e leaves zero, read off the curve.

    A dead-band keeps noise and finite-size leakage from faking an early
    crossing.  Per point the band is 2*SE; for Monte-Carlo curves (SE > 0)
    it is floored at band_frac times the curve's plateau, because below the
    transition f^e is not exactly zero at finite n - close atom pairs leak a
    small positive foot that would otherwise trip the 2*SE test far too
    early.  We take the last grid interval whose left point is inside the
    band and whose right point is above it and linearly interpolate
    f_excess - band to zero inside it.  Noise-free closed-form curves have
    SE = 0 and a genuine sign change, so the crossing is exact there.
    """
    f = curve.f_excess
    band = 2.0 * curve.stderr
    if np.any(curve.stderr > 0):
        band = np.maximum(band, band_frac * float(np.max(f)))
    inside = f <= band
    above = f > band
    candidates = np.nonzero(inside[:-1] & above[1:])[0]
    if not candidates.size:
        if np.all(above):
            raise ValueError("excess entropy positive everywhere: no crossing on grid")
        raise ValueError("excess entropy never leaves zero: no crossing on grid")
    k = int(candidates[-1])
    t0, t1 = curve.times[k], curve.times[k + 1]
    g0, g1 = f[k] - band[k], f[k + 1] - band[k + 1]
    if g1 == g0:
        return float(t1)
    t_c = t0 + (0.0 - g0) / (g1 - g0) * (t1 - t0)
    return float(np.clip(t_c, t0, t1))


def phi_collapse_mc(cfg: BackwardConfig, dataset: Dataset,
                    times: Sequence[float], n_clones: int,
                    policy: RngPolicy, workers: int = 1,
                    stream_tag: str = "phi-collapse") -> PhiCurve:
    """Fraction of clone pairs whose final nearest training atoms coincide."""
    times = np.asarray(times, dtype=float)

    def one(i: int) -> float:
        rng = policy.stream(stream_tag, i)
        Xa, Xb = clone_endpoints_batch(cfg, times[i], n_clones, rng)
        ia, _ = nearest_indices(dataset, Xa)
        ib, _ = nearest_indices(dataset, Xb)
        return float(np.mean(ia == ib))

    phi = np.array(run_tasks(one, len(times), workers))
    se = np.sqrt(phi * (1.0 - phi) / n_clones)
    return PhiCurve(times=times, phi=phi, stderr=se, n_clones=n_clones)


@dataclass(frozen=True)
class THatHistogram:
    bin_times: np.ndarray
    counts: np.ndarray
    mean: float
    stderr: float


def t_hat_histogram(t_hats: np.ndarray, grid_times: np.ndarray) -> THatHistogram:
    """Histogram of per-trajectory collapse times over the integration grid."""
    t_hats = np.asarray(t_hats, dtype=float)
    if t_hats.size < 100:
        raise ValueError("need at least 100 traces")
    grid = np.sort(np.asarray(grid_times, dtype=float))
    idx = np.clip(np.searchsorted(grid, t_hats), 0, grid.size - 1)
    counts = np.bincount(idx, minlength=grid.size)
    return THatHistogram(
        bin_times=grid,
        counts=counts,
        mean=float(t_hats.mean()),
        stderr=float(t_hats.std(ddof=1) / np.sqrt(t_hats.size)),
    )


@dataclass(frozen=True)
class CollapseReport:
    t_c: float | None            # from the f^e zero crossing (None if no crossing)
    t_c_status: str
    t_hat_mean: float | None
    phi_c: PhiCurve | None
    histogram: THatHistogram | None
