"""Speciation-time prediction from data spectra and its clone-experiment measurement.

The spectral route: top covariance eigenvalue Lambda gives t_S = 0.5 log Lambda,
the time at which the forward noise blurs the principal component.  The
dynamical route: clone backward trajectories at time t and measure the
probability phi(t) that both branches end in the same class.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .core import Dataset, GmSpec, delta
from .rng import RngPolicy, run_tasks
from .sde import BackwardConfig, clone_endpoints_batch


class NoSpeciationError(ValueError):
    """Raised when the spectrum carries no speciation scale (Lambda <= 1)."""


def covariance(dataset: Dataset) -> np.ndarray:
    """Biased sample covariance (1/n) sum (a - abar)(a - abar)^T."""
    if dataset.n < 2:
        raise ValueError("need at least two rows for a covariance")
    X = dataset.rows - dataset.rows.mean(axis=0)
    return (X.T @ X) / dataset.n


def principal_eigenvalue(C: np.ndarray, tol: float = 1e-10,
                         max_iters: int = 100_000, seed: int = 7):
    """Top eigenpair of a symmetric PSD matrix by power iteration.

    Fixed seeded start vector for determinism; convergence test is the
    residual |Cv - lam v| < tol * max(lam, tiny).
    """
    C = np.asarray(C, dtype=float)
    d = C.shape[0]
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(d)
    v /= np.linalg.norm(v)
    lam = 0.0
    for it in range(max_iters):
        w = C @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0, v, 0.0, it  # zero matrix: any unit vector works
        v_new = w / norm
        lam = float(v_new @ (C @ v_new))
        residual = np.linalg.norm(C @ v_new - lam * v_new)
        v = v_new
        if residual <= tol * max(abs(lam), 1e-300):
            return lam, v, residual, it + 1
    raise RuntimeError(
        f"power iteration did not converge in {max_iters} iterations "
        f"(residual {residual:.3e})")


def speciation_time(lam: float) -> float:
    """Solve Lambda e^{-2 t_S} = 1 for the speciation time."""
    if lam <= 1.0:
        raise NoSpeciationError(f"no speciation scale for Lambda={lam}")
    return 0.5 * np.log(lam)


@dataclass(frozen=True)
class SpectralReport:
    eigenvalue: float
    direction: np.ndarray
    t_s: float | None
    residual: float
    iterations: int


def spectral_report(dataset: Dataset, tol: float = 1e-10) -> SpectralReport:
    lam, v, res, iters = principal_eigenvalue(covariance(dataset), tol=tol)
    t_s = 0.5 * np.log(lam) if lam > 1.0 else None
    return SpectralReport(lam, v, t_s, res, iters)


def noised_covariance(C0: np.ndarray, t: float) -> np.ndarray:
    """Covariance of the noised data: C0 e^{-2t} + delta(t) I."""
    C0 = np.asarray(C0, dtype=float)
    return C0 * np.exp(-2.0 * t) + delta(t) * np.eye(C0.shape[0])


def landau_instability_time(C0: np.ndarray) -> float:
    """Largest t where 1 - Lambda e^{-2t} crosses zero (curvature instability).

    Separate entry point from speciation_time so callers may feed an
    effective correlation matrix instead of the raw covariance.
    """
    lam, _, _, _ = principal_eigenvalue(np.asarray(C0, dtype=float))
    return speciation_time(lam)


@dataclass(frozen=True)
class PhiCurve:
    times: np.ndarray
    phi: np.ndarray
    stderr: np.ndarray
    n_clones: int


def gm_sign_classifier(spec: GmSpec) -> Callable[[np.ndarray], np.ndarray]:
    """Class = sign of the projection onto the mixture center vector."""
    m = spec.center_vector()

    def classify(X: np.ndarray) -> np.ndarray:
        return np.where(X @ m >= 0.0, 1, -1)

    return classify


def centroid_classifier(dataset: Dataset) -> Callable[[np.ndarray], np.ndarray]:
    """Nearest-class-centroid rule trained from the dataset labels."""
    if dataset.labels is None:
        raise ValueError("centroid classifier needs a labeled dataset")
    classes = np.unique(dataset.labels)
    centroids = np.stack([dataset.rows[dataset.labels == c].mean(axis=0)
                          for c in classes])

    def classify(X: np.ndarray) -> np.ndarray:
        sq = (np.einsum("bi,bi->b", X, X)[:, None]
              - 2.0 * (X @ centroids.T)
              + np.einsum("ci,ci->c", centroids, centroids)[None, :])
        return classes[np.argmin(sq, axis=1)]

    return classify


def phi_speciation_mc(cfg: BackwardConfig, classifier: Callable,
                      times: Sequence[float], n_clones: int,
                      policy: RngPolicy, workers: int = 1,
                      stream_tag: str = "phi-speciation") -> PhiCurve:
    """Fraction of clone pairs ending in the same class, per clone time."""
    times = np.asarray(times, dtype=float)

    def one(i: int) -> float:
        rng = policy.stream(stream_tag, i)
        Xa, Xb = clone_endpoints_batch(cfg, times[i], n_clones, rng)
        ca, cb = classifier(Xa), classifier(Xb)
        if ca.shape != (n_clones,) or cb.shape != (n_clones,):
            raise RuntimeError("classifier must return one label per endpoint")
        return float(np.mean(ca == cb))

    phi = np.array(run_tasks(one, len(times), workers))
    se = np.sqrt(phi * (1.0 - phi) / n_clones)
    return PhiCurve(times=times, phi=phi, stderr=se, n_clones=n_clones)


def _interp_crossing(times, values, level):
    """First t (scanning increasing t) where the curve crosses `level`."""
    v = np.asarray(values, dtype=float) - level
    exact = np.nonzero(v == 0.0)[0]
    sign_change = np.nonzero(v[:-1] * v[1:] < 0.0)[0]
    if exact.size and (not sign_change.size or exact[0] <= sign_change[0]):
        return float(times[exact[0]])
    if not sign_change.size:
        raise ValueError("level not bracketed by the curve")
    k = sign_change[0]
    frac = v[k] / (v[k] - v[k + 1])
    return float(times[k] + frac * (times[k + 1] - times[k]))


def crossing_time(curves: PhiCurve | Sequence[PhiCurve],
                  level: float = 0.775) -> float:
    """Clone-experiment speciation time.

    Single curve: linear interpolation of phi(t) = level.  Several curves
    (different d): median of the pairwise crossing points of the curves.
    """
    if isinstance(curves, PhiCurve):
        return _interp_crossing(curves.times, curves.phi, level)
    curves = list(curves)
    if len(curves) == 1:
        return _interp_crossing(curves[0].times, curves[0].phi, level)
    crossings = []
    for ca, cb in combinations(curves, 2):
        if not np.array_equal(ca.times, cb.times):
            raise ValueError("pairwise crossings need a common time grid")
        crossings.append(_interp_crossing(ca.times, ca.phi - cb.phi + level, level))
    return float(np.median(crossings))
