"""Time conventions, noise schedules, and the dataset model.

The forward process is the Ornstein-Uhlenbeck diffusion dx = -x dt + sqrt(2) dW,
so a point noised up to time t is a * exp(-t) plus Gaussian noise of variance
``delta(t) = 1 - exp(-2t)``.  Everything downstream (scores, entropies, SDE
integration) is expressed in this OU time; discrete DDPM-style schedules are
mapped onto it through :func:`ddpm_time_map`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def delta(t):
    """Accumulated noise variance 1 - exp(-2t) of the forward process.

    Accepts scalars or arrays; monotone increasing, in [0, 1).
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("OU time must be non-negative")
    out = -np.expm1(-2.0 * t)
    return float(out) if out.ndim == 0 else out


def alpha_param(n: int, d: int) -> float:
    """Entropy ratio log(n)/d controlling the collapse time."""
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    return np.log(n) / d


@dataclass(frozen=True)
class TimeSchedule:
    """Strictly increasing grid of OU times on [t_min, t_max]."""

    t_min: float
    t_max: float
    count: int
    spacing: str = "geometric"  # "linear" or "geometric"

    def __post_init__(self):
        if not (0 <= self.t_min < self.t_max):
            raise ValueError("need 0 <= t_min < t_max")
        if self.spacing == "geometric" and self.t_min <= 0:
            raise ValueError("geometric spacing needs t_min > 0")
        if self.count < 2:
            raise ValueError("need count >= 2")
        if self.spacing not in ("linear", "geometric"):
            raise ValueError(f"unknown spacing {self.spacing!r}")

    def grid(self) -> np.ndarray:
        if self.spacing == "linear":
            return np.linspace(self.t_min, self.t_max, self.count)
        return np.geomspace(self.t_min, self.t_max, self.count)


# Default grid: geometric, 200 points, horizon T=10.  The t -> 0 end is cut
# at t_min because the empirical log-density degenerates into delta atoms.
DEFAULT_SCHEDULE = TimeSchedule(t_min=1e-3, t_max=10.0, count=200, spacing="geometric")


@dataclass(frozen=True)
class DiscreteSchedule:
    """DDPM-style per-step variance schedule beta_1..beta_L."""

    betas: np.ndarray
    alphabar: np.ndarray = field(init=False)

    def __post_init__(self):
        betas = np.asarray(self.betas, dtype=float)
        if betas.ndim != 1 or betas.size == 0:
            raise ValueError("betas must be a non-empty 1-d sequence")
        if np.any(betas <= 0) or np.any(betas >= 1):
            raise ValueError("need 0 < beta < 1 for every step")
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "alphabar", np.cumprod(1.0 - betas))

    @classmethod
    def linear(cls, beta_start: float = 1e-4, beta_end: float = 2e-2,
               steps: int = 1000) -> "DiscreteSchedule":
        return cls(np.linspace(beta_start, beta_end, steps))


def ddpm_time_map(schedule: DiscreteSchedule, step: int) -> float:
    """OU time t = -0.5 * log(alphabar(step)) of discrete step `step` (1-based)."""
    if not 1 <= step <= schedule.betas.size:
        raise ValueError("step out of range")
    return -0.5 * np.log(schedule.alphabar[step - 1])


@dataclass(frozen=True)
class Dataset:
    """n training vectors in R^d, the atoms of the empirical measure."""

    rows: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        if rows.size == 0:
            raise ValueError("dataset must be non-empty")
        if not np.all(np.isfinite(rows)):
            raise ValueError("dataset entries must be finite")
        object.__setattr__(self, "rows", rows)
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (rows.shape[0],):
                raise ValueError("labels must be one per row")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]

    @property
    def alpha(self) -> float:
        return alpha_param(self.n, self.d)


def center(dataset: Dataset) -> tuple[Dataset, np.ndarray]:
    """Subtract column means; returns the shifted copy and the mean vector."""
    mean = dataset.rows.mean(axis=0)
    return Dataset(dataset.rows - mean, dataset.labels), mean


@dataclass(frozen=True)
class GmSpec:
    """Two-cluster Gaussian mixture: centers +-m with m_i = mu_tilde, std sigma."""

    mu_tilde: float
    sigma: float
    d: int

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.mu_tilde < 0:
            raise ValueError("mu_tilde must be non-negative")
        if self.d < 1:
            raise ValueError("d must be at least 1")

    @property
    def m(self) -> float:
        """Norm of the center vector, mu_tilde * sqrt(d)."""
        return self.mu_tilde * np.sqrt(self.d)

    def center_vector(self) -> np.ndarray:
        return np.full(self.d, self.mu_tilde)


def sample_gaussian_mixture(spec: GmSpec, n: int, rng: np.random.Generator) -> Dataset:
    """Draw n rows as sign * m + sigma * z with a fair coin sign per row."""
    if n < 1:
        raise ValueError("need n >= 1")
    signs = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    z = rng.standard_normal((n, spec.d))
    rows = signs[:, None] * spec.center_vector()[None, :] + spec.sigma * z
    return Dataset(rows, labels=signs.astype(int))
