"""Forward noising sampler and backward Euler-Maruyama generative integrator.

The backward update follows the explicit discretization
    x <- x + eta * [x + 2 F(x, t)] + xi * sqrt(2 eta)
with per-step noise variance 2*eta (the driving noise is sqrt(2) times a
standard Wiener process).  Trajectories are integrated on a decreasing time
grid from t_max to t_min; batch variants vectorize over trajectories and can
track the nearest training atom along the way.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Dataset, GmSpec, TimeSchedule, delta
from .score import gm_population_score, score_batch


def default_backward_grid(t_max: float = 10.0, steps: int = 1000,
                          t_min: float = 0.0) -> TimeSchedule:
    """Uniform integration grid down to t=0; eta = t_max/steps.

    The step landing on t=0 is integrated without noise (DDPM convention:
    noise is added only while the destination time is positive), so the grid
    may safely include zero; the score is never evaluated below one step.
    """
    return TimeSchedule(t_min=t_min, t_max=t_max, count=steps + 1, spacing="linear")


@dataclass(frozen=True)
class BackwardConfig:
    """Score source plus integration grid for the backward process."""

    schedule: TimeSchedule
    score: str = "empirical"            # "empirical" | "gm_population"
    dataset: Dataset | None = None
    spec: GmSpec | None = None

    def __post_init__(self):
        if self.score == "empirical":
            if self.dataset is None:
                raise ValueError("empirical score needs a dataset")
        elif self.score == "gm_population":
            if self.spec is None:
                raise ValueError("gm_population score needs a GmSpec")
        else:
            raise ValueError(f"unknown score source {self.score!r}")

    @property
    def dim(self) -> int:
        return self.dataset.d if self.score == "empirical" else self.spec.d

    def score_fn(self, X: np.ndarray, t: float) -> np.ndarray:
        if self.score == "empirical":
            return score_batch(self.dataset, X, t)
        return gm_population_score(self.spec, X, t)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray            # decreasing
    states: np.ndarray           # (len(times), d)
    stream_id: str = ""


@dataclass(frozen=True)
class ClonePair:
    shared_prefix: Trajectory
    branch_a: Trajectory
    branch_b: Trajectory


@dataclass(frozen=True)
class NearestNeighborTrace:
    times: np.ndarray            # decreasing
    mu_star: np.ndarray          # training-set index per time
    t_hat_c: float               # grid time below which mu_star never changes
    final_distance: float


def forward_sample(a: np.ndarray, t: float, rng: np.random.Generator) -> np.ndarray:
    """One draw of the forward process: a e^-t + sqrt(delta) z."""
    a = np.asarray(a, dtype=float)
    if t < 0:
        raise ValueError("OU time must be non-negative")
    return a * np.exp(-t) + np.sqrt(delta(t)) * rng.standard_normal(a.shape)


def _check_finite(X: np.ndarray, t: float):
    if not np.all(np.isfinite(X)):
        raise FloatingPointError(f"backward state diverged at t={t}")


def backward_steps(cfg: BackwardConfig, X: np.ndarray, times: np.ndarray,
                   rng: np.random.Generator, record: bool = False):
    """Advance a (B, d) batch down the decreasing `times`; mutates a copy.

    Returns (final states, recorded states or None).  One (B, d) noise draw
    per step keeps the sequence independent of any internal chunking.  Noise
    is added only for steps whose destination time is positive, so a grid
    ending at t=0 finishes with a pure denoising step (DDPM convention).
    """
    X = np.array(X, dtype=float)
    rec = [X.copy()] if record else None
    for k in range(len(times) - 1):
        t = times[k]
        eta = t - times[k + 1]
        F = cfg.score_fn(X, t)
        X += eta * (X + 2.0 * F)
        if times[k + 1] > 0.0:
            X += np.sqrt(2.0 * eta) * rng.standard_normal(X.shape)
        _check_finite(X, times[k + 1])
        if record:
            rec.append(X.copy())
    return X, (np.array(rec) if record else None)


def backward_integrate(cfg: BackwardConfig, x_init: np.ndarray,
                       rng: np.random.Generator, stream_id: str = "") -> Trajectory:
    """Full backward path of a single trajectory from t_max to t_min."""
    x_init = np.asarray(x_init, dtype=float)
    if not np.all(np.isfinite(x_init)):
        raise ValueError("initial state must be finite")
    times = cfg.schedule.grid()[::-1].copy()
    _, rec = backward_steps(cfg, x_init[None, :], times, rng, record=True)
    return Trajectory(times=times, states=rec[:, 0, :], stream_id=stream_id)


def clone_at(cfg: BackwardConfig, t_clone: float, rng_prefix: np.random.Generator,
             rng_a: np.random.Generator, rng_b: np.random.Generator) -> ClonePair:
    """Shared prefix from t_max to t_clone, then two independent branches.

    t_clone is snapped to the nearest grid point; it must lie strictly inside
    the grid.  Initial condition is standard normal, drawn from the prefix
    stream.
    """
    times = cfg.schedule.grid()[::-1].copy()
    if not (times[-1] <= t_clone <= times[0]):
        raise ValueError("t_clone outside the integration grid")
    split = int(np.argmin(np.abs(times - t_clone)))
    x0 = rng_prefix.standard_normal(cfg.dim)
    _, rec = backward_steps(cfg, x0[None, :], times[:split + 1], rng_prefix, record=True)
    prefix = Trajectory(times=times[:split + 1], states=rec[:, 0, :], stream_id="prefix")
    y = prefix.states[-1]
    _, rec_a = backward_steps(cfg, y[None, :], times[split:], rng_a, record=True)
    _, rec_b = backward_steps(cfg, y[None, :], times[split:], rng_b, record=True)
    return ClonePair(
        shared_prefix=prefix,
        branch_a=Trajectory(times=times[split:], states=rec_a[:, 0, :], stream_id="a"),
        branch_b=Trajectory(times=times[split:], states=rec_b[:, 0, :], stream_id="b"),
    )


def clone_endpoints_batch(cfg: BackwardConfig, t_clone: float, n_clones: int,
                          rng: np.random.Generator):
    """Final states (X_a, X_b), each (n_clones, d), of a batch of clone pairs.

    All pairs of one batch share a single stream; the partition of work into
    batches (not the worker count) defines the random numbers used.
    """
    times = cfg.schedule.grid()[::-1].copy()
    split = int(np.argmin(np.abs(times - t_clone)))
    X0 = rng.standard_normal((n_clones, cfg.dim))
    Y, _ = backward_steps(cfg, X0, times[:split + 1], rng)
    Xa, _ = backward_steps(cfg, Y, times[split:], rng)
    Xb, _ = backward_steps(cfg, Y, times[split:], rng)
    return Xa, Xb


def nearest_indices(dataset: Dataset, X: np.ndarray):
    """Argmin_mu |x - a_mu| per row (ties -> lowest index) and the distances."""
    A = dataset.rows
    a_sq = np.einsum("ni,ni->n", A, A)
    x_sq = np.einsum("bi,bi->b", X, X)
    sq = x_sq[:, None] - 2.0 * (X @ A.T) + a_sq[None, :]
    np.maximum(sq, 0.0, out=sq)
    idx = np.argmin(sq, axis=1)
    dist = np.sqrt(sq[np.arange(X.shape[0]), idx])
    return idx, dist


def _t_hat_from_indices(times: np.ndarray, mu: np.ndarray) -> float:
    """Largest grid time at which the nearest index last changed."""
    changes = np.nonzero(mu[1:] != mu[:-1])[0]
    if changes.size == 0:
        return float(times[0])
    # times is decreasing; the last change happens at the latest k, and the
    # index is settled from the time it was adopted.
    return float(times[changes[-1] + 1])


def track_nearest(traj: Trajectory, dataset: Dataset) -> NearestNeighborTrace:
    """Nearest-training-atom index along a trajectory and its settling time."""
    idx, dist = nearest_indices(dataset, traj.states)
    return NearestNeighborTrace(
        times=traj.times,
        mu_star=idx,
        t_hat_c=_t_hat_from_indices(traj.times, idx),
        final_distance=float(dist[-1]),
    )


@dataclass(frozen=True)
class BatchNearestResult:
    times: np.ndarray
    mu_star: np.ndarray          # (B, len(times))
    t_hat_c: np.ndarray          # (B,)
    final_states: np.ndarray     # (B, d)
    final_distance: np.ndarray   # (B,)


def backward_with_nearest(cfg: BackwardConfig, n_traj: int, dataset: Dataset,
                          rng: np.random.Generator) -> BatchNearestResult:
    """Integrate a batch from Gaussian initial conditions, tracking mu_star."""
    times = cfg.schedule.grid()[::-1].copy()
    X = rng.standard_normal((n_traj, cfg.dim))
    mu = np.empty((n_traj, len(times)), dtype=np.int64)
    mu[:, 0], _ = nearest_indices(dataset, X)
    for k in range(len(times) - 1):
        t = times[k]
        eta = t - times[k + 1]
        F = cfg.score_fn(X, t)
        X += eta * (X + 2.0 * F)
        if times[k + 1] > 0.0:
            X += np.sqrt(2.0 * eta) * rng.standard_normal(X.shape)
        _check_finite(X, times[k + 1])
        mu[:, k + 1], dist = nearest_indices(dataset, X)
    t_hat = np.array([_t_hat_from_indices(times, mu[b]) for b in range(n_traj)])
    return BatchNearestResult(times=times, mu_star=mu, t_hat_c=t_hat,
                              final_states=X, final_distance=dist)


def reduced_q_integrate(spec: GmSpec, schedule: TimeSchedule,
                        rng: np.random.Generator, n_paths: int = 1) -> np.ndarray:
    """Backward paths of the scalar overlap q(t) in the reduced potential.

    Returns an (n_paths, len(grid)) array following the decreasing grid;
    drift is -dV/dq with V(q,t) = q^2/2 - 2 mu_tilde^2 logcosh(q e^-t sqrt(d)).
    """
    from .gm import potential_v

    times = schedule.grid()[::-1]
    # q(t_max) = m.x/sqrt(d) with x ~ N(0, I) has variance |m|^2/d = mu_tilde^2
    q = rng.standard_normal(n_paths) * spec.mu_tilde
    out = np.empty((n_paths, len(times)))
    out[:, 0] = q
    for k in range(len(times) - 1):
        eta = times[k] - times[k + 1]
        _, dv = potential_v(q, times[k], spec)
        q = q - eta * dv
        if times[k + 1] > 0.0:
            q = q + np.sqrt(2.0 * eta) * rng.standard_normal(n_paths)
        if not np.all(np.isfinite(q)):
            raise FloatingPointError(f"reduced process diverged at t={times[k + 1]}")
        out[:, k + 1] = q
    return out
