"""Batch experiment driver.

Subcommands: speciation | collapse | rem | gm | simulate | entropy.
Every run resolves its settings (config file, then flags on top), writes a
manifest echoing them, and stamps each CSV with the manifest hash so plots
can be traced back to the exact run that produced them.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .collapse import (collapse_time_from_curve, excess_entropy_curve,
                       phi_collapse_mc, s_sep, t_hat_histogram)
from .core import Dataset, GmSpec, TimeSchedule, center, sample_gaussian_mixture
from .gm import (gamma, landau_tstar, phi_analytic, rem_evaluate, tc_closed_form)
from .io import (manifest_hash, read_config, read_dataset, write_csv,
                 write_manifest)
from .rng import RngPolicy
from .sde import (BackwardConfig, backward_integrate, backward_with_nearest,
                  default_backward_grid, reduced_q_integrate, track_nearest)
from .speciation import (NoSpeciationError, centroid_classifier, covariance,
                         gm_sign_classifier, phi_speciation_mc,
                         principal_eigenvalue, spectral_report)

CONFIG_KEYS = {
    "seed": int, "d": int, "n": int, "n_prime": int, "mu_tilde": float,
    "sigma": float, "t_min": float, "t_max": float, "grid_points": int,
    "grid_spacing": str, "clones": int, "dataset": str, "labels": str,
    "out_dir": str, "eta_steps": int, "phi_level": float, "workers": int,
}

DEFAULTS = {
    "seed": 0, "d": 32, "n": 1000, "n_prime": 50_000, "mu_tilde": 1.0,
    "sigma": 1.0, "t_min": 1e-3, "t_max": 10.0, "grid_points": 200,
    "grid_spacing": "geometric", "clones": 1000, "dataset": None,
    "labels": None, "out_dir": ".", "eta_steps": 1000, "phi_level": 0.775,
    "workers": os.cpu_count() or 1,
}


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key = value settings file")
    for key, typ in CONFIG_KEYS.items():
        p.add_argument("--" + key.replace("_", "-"), dest=key, type=typ, default=None)


def resolve_settings(args: argparse.Namespace) -> dict:
    settings = dict(DEFAULTS)
    if args.config:
        for key, value in read_config(args.config).items():
            if key not in CONFIG_KEYS:
                raise UsageError(f"unknown config key {key!r}")
            settings[key] = CONFIG_KEYS[key](value)
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


class UsageError(Exception):
    pass


def load_or_sample_dataset(settings: dict, policy: RngPolicy) -> tuple[Dataset, GmSpec | None]:
    """Dataset from file (centered) if a path is given, else a fresh GM sample."""
    if settings["dataset"]:
        path = Path(settings["dataset"])
        if not path.exists():
            raise UsageError(f"dataset file not found: {path}")
        ds, _ = center(read_dataset(path))
        return ds, None
    spec = GmSpec(settings["mu_tilde"], settings["sigma"], settings["d"])
    ds = sample_gaussian_mixture(spec, settings["n"], policy.stream("dataset"))
    return ds, spec


def make_classifier(dataset: Dataset, spec: GmSpec | None):
    if spec is not None:
        return gm_sign_classifier(spec)
    if dataset.labels is not None:
        return centroid_classifier(dataset)
    # Unlabeled data: class = sign of the projection on the top principal axis.
    _, direction, _, _ = principal_eigenvalue(covariance(dataset))

    def classify(X):
        return np.where(X @ direction >= 0.0, 1, -1)

    return classify


def backward_config(settings: dict, dataset: Dataset, spec: GmSpec | None) -> BackwardConfig:
    # integration always runs to t=0; the final step is noiseless, and the
    # analysis schedule (t_min > 0) is a separate grid
    grid = default_backward_grid(settings["t_max"], settings["eta_steps"])
    if spec is not None:
        return BackwardConfig(schedule=grid, score="gm_population", spec=spec)
    return BackwardConfig(schedule=grid, score="empirical", dataset=dataset)


def analysis_schedule(settings: dict) -> TimeSchedule:
    return TimeSchedule(settings["t_min"], settings["t_max"],
                        settings["grid_points"], settings["grid_spacing"])


def clone_times(settings: dict, t_s: float | None) -> np.ndarray:
    """A dozen clone times bracketing t_S when known, else spanning the grid."""
    if t_s is not None:
        return np.linspace(0.3 * t_s, 1.8 * t_s, 12)
    return np.geomspace(max(settings["t_min"], 1e-2), settings["t_max"], 12)


def cmd_speciation(settings: dict, out: Path, digest: str) -> dict:
    policy = RngPolicy(settings["seed"])
    dataset, spec = load_or_sample_dataset(settings, policy)
    report = spectral_report(dataset)
    write_csv(out / "spectral.csv", {
        "lambda": [report.eigenvalue],
        "t_s": [report.t_s if report.t_s is not None else float("nan")],
        "residual": [report.residual],
        "iters": [report.iterations],
    }, digest)
    cfg = backward_config(settings, dataset, spec)
    times = clone_times(settings, report.t_s)
    curve = phi_speciation_mc(cfg, make_classifier(dataset, spec), times,
                              settings["clones"], policy,
                              workers=settings["workers"])
    t_ref = report.t_s if report.t_s else 1.0
    write_csv(out / "speciation.csv", {
        "t": curve.times,
        "t_over_ts": curve.times / t_ref,
        "phi": curve.phi,
        "stderr": curve.stderr,
        "n_clones": np.full(len(times), curve.n_clones, dtype=int),
    }, digest)
    return {"lambda": report.eigenvalue, "t_s": report.t_s}


def cmd_collapse(settings: dict, out: Path, digest: str) -> dict:
    policy = RngPolicy(settings["seed"])
    dataset, spec = load_or_sample_dataset(settings, policy)
    curve = excess_entropy_curve(dataset, analysis_schedule(settings),
                                 settings["n_prime"], policy,
                                 workers=settings["workers"])
    alpha = dataset.alpha
    write_csv(out / "collapse.csv", {
        "t": curve.times, "s_emp": curve.s_emp, "s_emp_se": curve.stderr,
        "s_sep": curve.s_sep, "f_excess": curve.f_excess,
        "f_over_alpha": curve.f_excess / alpha if alpha > 0 else curve.f_excess,
    }, digest)
    try:
        t_c = collapse_time_from_curve(curve)
        status = "ok"
    except ValueError as exc:
        t_c, status = None, str(exc)
    # Clone and nearest-neighbor diagnostics run on the empirical score.
    cfg = BackwardConfig(schedule=default_backward_grid(
        settings["t_max"], settings["eta_steps"]),
        score="empirical", dataset=dataset)
    anchor = t_c if t_c is not None else 0.5
    times = np.linspace(0.25 * anchor, 3.0 * anchor, 10)
    phic = phi_collapse_mc(cfg, dataset, times, settings["clones"], policy,
                           workers=settings["workers"])
    write_csv(out / "phic.csv", {"t": phic.times, "phi_c": phic.phi,
                                 "stderr": phic.stderr}, digest)
    traces = backward_with_nearest(cfg, max(settings["clones"], 100), dataset,
                                   policy.stream("nn-traces"))
    hist = t_hat_histogram(traces.t_hat_c, cfg.schedule.grid())
    keep = hist.counts > 0
    write_csv(out / "that.csv", {"t_hat": hist.bin_times[keep],
                                 "count": hist.counts[keep]}, digest)
    return {"t_c": t_c, "t_c_status": status, "t_hat_mean": hist.mean,
            "t_hat_stderr": hist.stderr, "alpha": alpha}


def cmd_entropy(settings: dict, out: Path, digest: str) -> dict:
    policy = RngPolicy(settings["seed"])
    dataset, _ = load_or_sample_dataset(settings, policy)
    curve = excess_entropy_curve(dataset, analysis_schedule(settings),
                                 settings["n_prime"], policy,
                                 workers=settings["workers"])
    alpha = dataset.alpha
    write_csv(out / "collapse.csv", {
        "t": curve.times, "s_emp": curve.s_emp, "s_emp_se": curve.stderr,
        "s_sep": curve.s_sep, "f_excess": curve.f_excess,
        "f_over_alpha": curve.f_excess / alpha if alpha > 0 else curve.f_excess,
    }, digest)
    try:
        t_c = collapse_time_from_curve(curve)
        status = "ok"
    except ValueError as exc:
        t_c, status = None, str(exc)
    return {"t_c": t_c, "t_c_status": status, "alpha": alpha}


def cmd_rem(settings: dict, out: Path, digest: str) -> dict:
    spec = GmSpec(settings["mu_tilde"], settings["sigma"], settings["d"])
    alpha = np.log(settings["n"]) / settings["d"]
    times = analysis_schedule(settings).grid()
    evals = [rem_evaluate(t, alpha, spec) for t in times]
    write_csv(out / "rem.csv", {
        "t": times,
        "psi_plus": [e.psi_plus for e in evals],
        "psi_minus": [e.psi_minus for e in evals],
        "branch": [e.branch for e in evals],
        "t_cond": [e.t_cond for e in evals],
    }, digest)
    return {"alpha": alpha, "t_cond": evals[0].t_cond}


def cmd_gm(settings: dict, out: Path, digest: str) -> dict:
    spec = GmSpec(settings["mu_tilde"], settings["sigma"], settings["d"])
    times = analysis_schedule(settings).grid()
    phi = [phi_analytic(t, spec) for t in times]
    write_csv(out / "gm_phi.csv", {"t": times, "phi_quadrature": phi}, digest)
    report = {
        "t_s_spectral": 0.5 * np.log(spec.d * spec.mu_tilde ** 2)
        if spec.d * spec.mu_tilde ** 2 > 1 else None,
        "t_c": tc_closed_form(settings["n"], settings["d"], settings["sigma"]),
        "gamma_at_tmin": gamma(settings["t_min"], settings["sigma"]),
    }
    if 2 * spec.d * spec.mu_tilde ** 2 > 1:
        report["landau_tstar"] = landau_tstar(spec.d, spec.mu_tilde)
    return report


def cmd_simulate(settings: dict, out: Path, digest: str, reduced: bool,
                 dump_trajectory: bool) -> dict:
    policy = RngPolicy(settings["seed"])
    if reduced:
        spec = GmSpec(settings["mu_tilde"], settings["sigma"], settings["d"])
        grid = default_backward_grid(settings["t_max"], settings["eta_steps"])
        paths = reduced_q_integrate(spec, grid, policy.stream("simulate"),
                                    n_paths=settings["clones"])
        if dump_trajectory:
            write_csv(out / "trajectory.csv",
                      {"t": grid.grid()[::-1], "q": paths[0]}, digest)
        frac_positive = float(np.mean(paths[:, -1] > 0))
        return {"paths": int(paths.shape[0]), "frac_positive": frac_positive}
    dataset, spec = load_or_sample_dataset(settings, policy)
    cfg = backward_config(settings, dataset, spec)
    rng = policy.stream("simulate")
    traj = backward_integrate(cfg, rng.standard_normal(cfg.dim), rng, "simulate/0")
    if dump_trajectory:
        cols = {"t": traj.times}
        for j in range(cfg.dim):
            cols[f"x_{j}"] = traj.states[:, j]
        write_csv(out / "trajectory.csv", cols, digest)
    trace = track_nearest(traj, dataset)
    dist = np.linalg.norm(traj.states - dataset.rows[trace.mu_star], axis=1)
    write_csv(out / "nntrace.csv", {"t": trace.times, "mu_star": trace.mu_star,
                                    "distance": dist}, digest)
    return {"t_hat_c": trace.t_hat_c, "final_distance": trace.final_distance}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diffregimes",
        description="Speciation/collapse analysis of generative diffusion "
                    "under the exact empirical score")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("speciation", "collapse", "rem", "gm", "entropy"):
        _add_common(sub.add_parser(name))
    sim = sub.add_parser("simulate")
    _add_common(sim)
    sim.add_argument("--reduced", action="store_true",
                     help="integrate the scalar overlap process instead")
    sim.add_argument("--dump-trajectory", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = resolve_settings(args)
        out = Path(settings["out_dir"])
        out.mkdir(parents=True, exist_ok=True)
        manifest = {"version": __version__, "command": args.command,
                    "settings": {k: settings[k] for k in CONFIG_KEYS}}
        # Hash only the experiment-defining configuration: results are
        # appended afterwards, and execution details (worker count, output
        # location) must not change the identity of a run.
        hashed = {k: v for k, v in manifest["settings"].items()
                  if k not in ("workers", "out_dir")}
        digest = manifest_hash({"version": __version__,
                                "command": args.command, "settings": hashed})
        manifest["hash"] = digest
        write_manifest(out, manifest)
        if args.command == "speciation":
            results = cmd_speciation(settings, out, digest)
        elif args.command == "collapse":
            results = cmd_collapse(settings, out, digest)
        elif args.command == "entropy":
            results = cmd_entropy(settings, out, digest)
        elif args.command == "rem":
            results = cmd_rem(settings, out, digest)
        elif args.command == "gm":
            results = cmd_gm(settings, out, digest)
        else:
            results = cmd_simulate(settings, out, digest, args.reduced,
                                   args.dump_trajectory)
        manifest["results"] = results
        write_manifest(out, manifest)
        return 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FloatingPointError, NoSpeciationError, RuntimeError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
