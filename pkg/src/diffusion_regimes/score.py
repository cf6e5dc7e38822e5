"""Stable evaluation of the noised empirical density and its score.

The noised empirical density at OU time t is a mixture of n Gaussians of
variance delta(t) centered on the scaled atoms a_mu * exp(-t).  For small t
the exponent spread across atoms is of order d, so everything is computed
through log-sum-exp with a max shift.  Squared distances are expanded as
|x|^2 - 2 x.(a e^-t) + |a|^2 e^-2t so that batch evaluation is a single
matrix product against the dataset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, delta

# delta(t) at the smallest supported time; below this the density is singular.
T_FLOOR = 1e-6


@dataclass(frozen=True)
class LogDensityResult:
    log_density: float
    weights: np.ndarray          # posterior responsibility of each atom
    log_sum_shift: float         # max exponent used for stabilization
    log_terms: np.ndarray        # per-atom log kernel values (diagnostic)


def _log_kernels(dataset: Dataset, X: np.ndarray, t: float) -> np.ndarray:
    """(B, n) matrix of -|x - a e^-t|^2 / (2 delta) via one matmul."""
    if t < T_FLOOR:
        raise ValueError(f"t={t} below the supported floor {T_FLOOR}")
    dt = delta(t)
    emt = np.exp(-t)
    A = dataset.rows
    x_sq = np.einsum("bi,bi->b", X, X)
    a_sq = np.einsum("ni,ni->n", A, A) * emt * emt
    cross = (X @ A.T) * emt
    sq = x_sq[:, None] - 2.0 * cross + a_sq[None, :]
    np.maximum(sq, 0.0, out=sq)  # clip tiny negative round-off
    return -0.5 * sq / dt


def log_density_batch(dataset: Dataset, X: np.ndarray, t: float):
    """log P_t^e at each query row, plus normalized per-atom weights.

    Returns (log_density (B,), weights (B, n), shifts (B,), log_kernels (B, n)).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if not np.all(np.isfinite(X)):
        raise ValueError("query points must be finite")
    logk = _log_kernels(dataset, X, t)
    shift = logk.max(axis=1)
    w = np.exp(logk - shift[:, None])
    norm = w.sum(axis=1)
    w /= norm[:, None]
    dt = delta(t)
    d = dataset.d
    log_density = shift + np.log(norm) - np.log(dataset.n) - 0.5 * d * np.log(2.0 * np.pi * dt)
    return log_density, w, shift, logk


def log_density_only(dataset: Dataset, X: np.ndarray, t: float) -> np.ndarray:
    """log P_t^e at each query row, skipping the per-atom weight matrix.

    Same value as log_density_batch but without materializing normalized
    responsibilities; used by the entropy estimator where only the density
    is needed and the (B, n) weight matrix would dominate the cost.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if not np.all(np.isfinite(X)):
        raise ValueError("query points must be finite")
    logk = _log_kernels(dataset, X, t)
    shift = logk.max(axis=1)
    logk -= shift[:, None]
    np.exp(logk, out=logk)
    norm = logk.sum(axis=1)
    dt = delta(t)
    return (shift + np.log(norm) - np.log(dataset.n)
            - 0.5 * dataset.d * np.log(2.0 * np.pi * dt))


def log_density_empirical(dataset: Dataset, x: np.ndarray, t: float) -> LogDensityResult:
    """Single-point log P_t^e(x) with per-atom responsibilities."""
    ld, w, shift, logk = log_density_batch(dataset, np.asarray(x, dtype=float)[None, :], t)
    return LogDensityResult(float(ld[0]), w[0], float(shift[0]), logk[0])


def score_batch(dataset: Dataset, X: np.ndarray, t: float) -> np.ndarray:
    """Exact empirical score F(x, t) = (sum_mu w_mu a_mu e^-t - x) / delta."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    _, w, _, _ = log_density_batch(dataset, X, t)
    emt = np.exp(-t)
    return ((w @ dataset.rows) * emt - X) / delta(t)


def score_empirical(dataset: Dataset, x: np.ndarray, t: float) -> np.ndarray:
    """Gradient of log P_t^e at a single point."""
    return score_batch(dataset, np.asarray(x, dtype=float)[None, :], t)[0]


def gm_population_score(spec, X: np.ndarray, t: float) -> np.ndarray:
    """Closed-form score of the two-Gaussian population law.

    S(x) = -x / Gamma_t + m (e^-t / Gamma_t) tanh(x.m e^-t / Gamma_t)
    with Gamma_t = delta(t) + sigma^2 e^-2t.
    """
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    emt = np.exp(-t)
    gamma_t = delta(t) + spec.sigma ** 2 * emt * emt
    m_vec = spec.center_vector()
    overlap = (X @ m_vec) * (emt / gamma_t)
    out = -X / gamma_t + np.tanh(overlap)[:, None] * (emt / gamma_t) * m_vec[None, :]
    return out[0] if single else out
