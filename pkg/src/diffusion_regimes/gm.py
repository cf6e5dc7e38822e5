"""Closed-form theory for the two-cluster Gaussian mixture.

Contains the clone-probability quadrature phi(t), the closed-form collapse
time, the random-energy free energies psi_+/psi_- with their condensation
branch, the Legendre machinery (g, f, lambda*, eps*) behind them, the
analytic excess entropy, and a brute-force sampler of the partition function
for cross-checks.

Throughout, sigma_t^2 = sigma^2 e^{-2t}, Gamma_t = delta(t) + sigma_t^2 and
M_t = 4 mu_tilde^2 e^{-2t}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .core import GmSpec, alpha_param, delta


def gamma(t: float, sigma: float) -> float:
    """Gamma_t = delta(t) + sigma^2 e^{-2t}; interpolates sigma^2 -> 1."""
    return delta(t) + sigma * sigma * np.exp(-2.0 * t)


def _sigma_t2(t: float, spec: GmSpec) -> float:
    return spec.sigma ** 2 * np.exp(-2.0 * t)


def _m_t(t: float, spec: GmSpec) -> float:
    # 4 (m^2/d) e^{-2t} with m^2/d = mu_tilde^2
    return 4.0 * spec.mu_tilde ** 2 * np.exp(-2.0 * t)


def phi_analytic(t: float, spec: GmSpec, epsabs: float = 1e-10) -> float:
    """Probability that two clones split at time t land in the same cluster.

    One-dimensional integral of [G_+^2 + G_-^2] / [2 (G_+ + G_-)] where G_+-
    are Gaussian densities with means +-m e^{-t} and variance Gamma_t.
    """
    a = spec.m * np.exp(-t)
    v = gamma(t, spec.sigma)
    if v <= 0:
        raise ValueError("Gamma_t must be positive")
    log_norm = -0.5 * np.log(2.0 * np.pi * v)

    def integrand(y):
        lp = log_norm - 0.5 * (y - a) ** 2 / v
        lm = log_norm - 0.5 * (y + a) ** 2 / v
        num = np.logaddexp(2.0 * lp, 2.0 * lm)
        den = np.logaddexp(lp, lm)
        return np.exp(num - den)

    w = a + 12.0 * np.sqrt(v)
    val, err = integrate.quad(integrand, -w, w, points=[-a, a],
                              limit=400, epsabs=epsabs, epsrel=1e-12)
    if err > 1e-8:
        raise RuntimeError(f"phi quadrature did not converge (err={err})")
    return 0.5 * val


def tc_closed_form(n: int, d: int, sigma: float) -> float:
    """Collapse time t_C = 0.5 log(1 + sigma^2 / (n^{2/d} - 1))."""
    if n < 2:
        raise ValueError("need n >= 2")
    return _t_cond(alpha_param(n, d), sigma)


def _t_cond(alpha: float, sigma: float) -> float:
    return 0.5 * np.log1p(sigma * sigma / np.expm1(2.0 * alpha))


def g_lambda(t: float, lam: float, spec: GmSpec, branch: str = "plus") -> float:
    """Exponential rate of E exp(-lam |x - a e^-t|^2 / (2 delta)) per coordinate."""
    dt = delta(t)
    s2 = _sigma_t2(t, spec)
    den = dt + lam * s2
    if den <= 0:
        raise ValueError("pole crossed: delta + lambda sigma_t^2 <= 0")
    num = dt + s2
    if branch == "minus":
        num += _m_t(t, spec)
    elif branch != "plus":
        raise ValueError(f"unknown branch {branch!r}")
    return 0.5 * np.log(dt / den) - 0.5 * lam * num / den


def eps_star(t: float, lam: float, spec: GmSpec, branch: str = "plus") -> float:
    """Energy density -dg/dlambda conjugate to lambda."""
    dt = delta(t)
    s2 = _sigma_t2(t, spec)
    den = dt + lam * s2
    if den <= 0:
        raise ValueError("pole crossed: delta + lambda sigma_t^2 <= 0")
    # algebraically equal to dt^2 + 2 dt s2 + lam s2^2; this grouping makes
    # eps*(lambda=1) = 1/2 exact in floating point (num == den^2 there)
    num = den * (dt + s2) + dt * s2 * (1.0 - lam)
    if branch == "minus":
        num += _m_t(t, spec) * dt
    return num / (2.0 * den * den)


def lambda_star(t: float, eps: float, spec: GmSpec, branch: str = "plus") -> float:
    """Closed-form inverse of eps_star: the conjugate parameter of an energy."""
    if eps <= 0:
        raise ValueError("energy density must be positive")
    dt = delta(t)
    s2 = _sigma_t2(t, spec)
    disc = s2 * s2 + 8.0 * eps * dt * (dt + s2)
    if branch == "minus":
        disc += 8.0 * dt * _m_t(t, spec) * eps
    a_root = np.sqrt(disc)
    lam = (s2 - 4.0 * dt * eps + a_root) / (4.0 * s2 * eps)
    # Guard against ill-conditioning right at the attainable-range edge.
    if dt + lam * s2 <= 0:
        raise ValueError("energy outside the attainable range")
    return lam


def f_eps(t: float, eps: float, spec: GmSpec, branch: str = "plus") -> float:
    """Large-deviation rate function of the reduced energies.

    Evaluated through the Legendre pair: f(eps) = -g(lambda*(eps)) - lambda* eps.
    """
    lam = lambda_star(t, eps, spec, branch)
    return -g_lambda(t, lam, spec, branch) - lam * eps


def psi_plus_annealed(t: float, alpha: float, spec: GmSpec) -> float:
    dt = delta(t)
    s2 = _sigma_t2(t, spec)
    return alpha + 0.5 * np.log(dt / (dt + s2)) - 0.5


def psi_plus(t: float, alpha: float, spec: GmSpec) -> float:
    """Concentrated free energy (1/d) log Z_+ of the same-cluster atoms.

    Annealed for t > t_cond; frozen at -1/2 in the condensed (memorization)
    phase t < t_cond.  Continuous at t_cond by construction.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if t < _t_cond(alpha, spec.sigma):
        return -0.5
    return psi_plus_annealed(t, alpha, spec)


def psi_minus(t: float, alpha: float, spec: GmSpec) -> float:
    """Free energy of the opposite-cluster atoms; strictly below psi_plus."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    dt = delta(t)
    s2 = _sigma_t2(t, spec)
    mt = _m_t(t, spec)
    if t < _t_cond(alpha, spec.sigma):
        return -0.5 * (1.0 + dt * mt / (dt + s2) ** 2)
    return psi_plus_annealed(t, alpha, spec) - 0.5 * mt / (dt + s2)


@dataclass(frozen=True)
class RemEvaluation:
    t: float
    alpha: float
    branch: str          # "annealed" or "condensed"
    psi_plus: float
    psi_minus: float
    t_cond: float


def rem_evaluate(t: float, alpha: float, spec: GmSpec) -> RemEvaluation:
    t_cond = _t_cond(alpha, spec.sigma)
    return RemEvaluation(
        t=t,
        alpha=alpha,
        branch="condensed" if t < t_cond else "annealed",
        psi_plus=psi_plus(t, alpha, spec),
        psi_minus=psi_minus(t, alpha, spec),
        t_cond=t_cond,
    )


def psi_plus_root(alpha: float, spec: GmSpec, tol: float = 1e-12) -> float:
    """Time where the annealed psi_+ crosses -1/2, located by bisection.

    Must agree with the closed-form collapse time; exposed for cross-checks.
    """
    def h(t):
        return psi_plus_annealed(t, alpha, spec) + 0.5

    lo, hi = 1e-12, 1.0
    while h(hi) <= 0:
        hi *= 2.0
        if hi > 1e6:
            raise RuntimeError("no sign change found for psi_+ + 1/2")
    return optimize.bisect(h, lo, hi, xtol=tol)


def rem_brute_force(t: float, spec: GmSpec, n: int, d: int,
                    rng: np.random.Generator, reps: int = 32):
    """Sampled free energy (1/d) log sum_{mu>=2} exp(-E_mu) over fresh disorder.

    E_mu = |(a_1 - a_mu) e^{-t} + z sqrt(delta)|^2 / (2 delta), with all atoms
    drawn from the +m cluster.  Returns (mean, standard error) over reps.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    dt = delta(t)
    emt = np.exp(-t)
    vals = np.empty(reps)
    for r in range(reps):
        a1 = spec.mu_tilde + spec.sigma * rng.standard_normal(d)
        others = spec.mu_tilde + spec.sigma * rng.standard_normal((n - 1, d))
        z = rng.standard_normal(d)
        disp = (a1[None, :] - others) * emt + np.sqrt(dt) * z[None, :]
        energies = 0.5 * np.einsum("mi,mi->m", disp, disp) / dt
        shift = (-energies).max()
        vals[r] = (shift + np.log(np.exp(-energies - shift).sum())) / d
    se = vals.std(ddof=1) / np.sqrt(reps) if reps > 1 else 0.0
    return float(vals.mean()), float(se)


def gm_excess_entropy_analytic(t: float, n: int, d: int, sigma: float) -> float:
    """f(t) = alpha + 0.5 log(delta / Gamma); its root is the collapse time."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return alpha_param(n, d) + 0.5 * np.log(delta(t) / gamma(t, sigma))


def landau_tstar(d: int, mu_tilde: float) -> float:
    """Time where the curvature of the reduced potential vanishes at q=0."""
    arg = 2.0 * d * mu_tilde ** 2
    if arg <= 1:
        raise ValueError("2 d mu_tilde^2 must exceed 1")
    return 0.5 * np.log(arg)


def potential_v(q, t: float, spec: GmSpec):
    """Reduced-overlap potential V(q, t) and its derivative.

    V = q^2/2 - 2 mu_tilde^2 logcosh(q e^-t sqrt(d)), with logcosh evaluated
    overflow-safely.
    """
    q = np.asarray(q, dtype=float)
    u = q * np.exp(-t) * np.sqrt(spec.d)
    au = np.abs(u)
    logcosh = au + np.log1p(np.exp(-2.0 * au)) - np.log(2.0)
    v = 0.5 * q * q - 2.0 * spec.mu_tilde ** 2 * logcosh
    dv = q - 2.0 * spec.mu_tilde ** 2 * np.sqrt(spec.d) * np.exp(-t) * np.tanh(u)
    if v.ndim == 0:
        return float(v), float(dv)
    return v, dv
