"""
Command-line front door: each stability mechanism as a named experiment.

Subcommands
-----------
multiplier-check   sample the multiplier bounds, report violation counts
linear-modes       evolve one nonzero-k mode, write energy vs envelope
zero-freq          lift-up cancellation: rotating vs reference dynamics
dispersion         sup-norm decay of the zero-frequency inertial waves
simulate           full nonlinear run with the energy ledger
threshold-scan     bisect the stability threshold over a viscosity sweep

Options may come from a flat INI config file (one section per subcommand);
explicit command-line flags override file values.  Runs are deterministic
under a fixed seed.  Exit codes: 0 success, 2 usage error, 3 numerical
failure.  NSCR_THREADS bounds the scan worker pool.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dispersion import dispersion_experiment, gaussian_profile
from .fitting import fit_decay, fit_threshold_exponent
from .linear import (
    PhysicsParams,
    ZeroModeState,
    evolve_qk_modes,
    liftup_comparison,
)
from .multipliers import bounds_report, m_array
from .solver import SimulationConfig, run, save_checkpoint
from .spectral import Grid  # noqa: F401  (re-exported for config builders)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


@dataclass
class ExperimentSpec:
    """A named experiment with its resolved parameter map."""

    name: str
    params: dict = field(default_factory=dict)


# option name -> (converter, default, help); shared flags repeat per command
OPTION_SPECS: dict[str, dict[str, tuple]] = {
    "multiplier-check": {
        "samples": (int, 10_000, "number of random (t, k, eta, l, nu) samples"),
        "seed": (int, 0, "sample seed"),
    },
    "linear-modes": {
        "nu": (float, 1e-2, "viscosity"),
        "beta": (float, 2.0, "rotation strength"),
        "k": (int, 1, "streamwise frequency (nonzero)"),
        "l": (int, 1, "spanwise frequency"),
        "eta": (float, 0.0, "wall-normal frequency"),
        "T": (float, 20.0, "final time"),
        "points": (int, 81, "output rows"),
    },
    "zero-freq": {
        "nu": (float, 1e-2, "viscosity"),
        "beta": (float, 2.0, "rotation strength"),
        "eta": (float, 0.0, "wall-normal frequency"),
        "l": (int, 1, "spanwise frequency (nonzero)"),
        "points": (int, 2001, "output rows"),
        "T": (float, 0.0, "final time (0 means 10 / nu)"),
    },
    "dispersion": {
        "nu": (float, 1e-6, "viscosity"),
        "beta": (float, 2.0, "rotation strength"),
        "Ly": (float, 2048.0, "wall-normal period"),
        "eta-max": (float, 6.0, "wall-normal band half-width"),
        "l": (int, 1, "spanwise line"),
        "width": (float, 1.0, "Gaussian profile width in eta"),
        "tmin": (float, 1e2, "fit window start"),
        "tmax": (float, 1e4, "fit window end"),
        "points": (int, 24, "time samples"),
    },
    "simulate": {
        "nu": (float, 1e-2, "viscosity"),
        "beta": (float, 2.0, "rotation strength"),
        "grid": (str, "32,64,32", "NX,NY,NZ mode counts"),
        "Ly": (float, 8.0, "wall-normal period"),
        "eps": (float, 1e-3, "initial H^sigma amplitude"),
        "sigma": (float, 5.0, "regularity index (> 4.5)"),
        "T": (float, 100.0, "final time"),
        "seed": (int, 0, "initial-data seed"),
        "dt": (float, 0.0, "fixed step (0 means adaptive)"),
        "ledger-stride": (int, 1, "record every n-th step"),
    },
    "threshold-scan": {
        "nus": (str, "1e-2,5e-3,2.5e-3", "comma-separated viscosities"),
        "beta": (float, 2.0, "rotation strength"),
        "grid": (str, "32,64,32", "NX,NY,NZ mode counts"),
        "Ly": (float, 8.0, "wall-normal period"),
        "sigma": (float, 5.0, "regularity index"),
        "seed": (int, 0, "seed family"),
        "tol": (float, 0.25, "bisection relative width"),
        "t-factor": (float, 2.0, "run horizon T = t-factor / nu"),
        "eps-start-factor": (float, 100.0, "first bracket probe at eps = factor * nu"),
        "eps-max-factor": (float, 4096.0, "give up above eps = factor * nu"),
        "profile": (str, "tilde_pair", "initial-data profile for the scan runs"),
    },
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nscr",
        description="rotating Couette-flow stability experiments",
    )
    parser.add_argument("--config", help="INI file with one section per subcommand")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, opts in OPTION_SPECS.items():
        p = sub.add_parser(name)
        for opt, (conv, default, help_text) in opts.items():
            p.add_argument(f"--{opt}", type=conv, default=None,
                           help=f"{help_text} (default {default})")
        p.add_argument("--out", default=".", help="output directory")
    return parser


def resolve_spec(args: argparse.Namespace) -> ExperimentSpec:
    """Merge defaults, config-file values and explicit flags."""
    name = args.command
    opts = OPTION_SPECS[name]
    params: dict = {}
    file_vals: dict[str, str] = {}
    if args.config:
        ini = configparser.ConfigParser()
        ini.optionxform = str  # option names are case-sensitive (T vs t)
        if not ini.read(args.config):
            raise ValueError(f"cannot read config file {args.config}")
        if ini.has_section(name):
            file_vals = dict(ini.items(name))
    for opt, (conv, default, _) in opts.items():
        cli_val = getattr(args, opt.replace("-", "_"))
        if cli_val is not None:
            params[opt] = cli_val
        elif opt in file_vals:
            params[opt] = conv(file_vals[opt])
        else:
            params[opt] = default
    params["out"] = args.out
    return ExperimentSpec(name=name, params=params)


def _parse_grid(text: str, L_y: float) -> Grid:
    parts = [int(v) for v in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"grid must be NX,NY,NZ, got {text!r}")
    return Grid(parts[0], parts[1], parts[2], L_y=L_y)


def _write_csv(path: Path, notes: list[str], header: list[str], rows) -> None:
    with open(path, "w") as fh:
        for note in notes:
            fh.write(f"# {note}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.12e}" if isinstance(v, float) else str(v) for v in row) + "\n")


# ---------------------------------------------------------------------------
# subcommand bodies

def _cmd_multiplier_check(params: dict, out: Path) -> int:
    report = bounds_report(n=params["samples"], seed=params["seed"])
    _write_csv(
        out / "multiplier_check.csv",
        ["violation counts over random samples of the multiplier bounds",
         "bounds: 1 >= m >= nu^(1/3)/2000, 1 >= M >= exp(-pi), m >= ratio/sqrt(2),",
         "M nonincreasing, ghost-dissipation lower inequality (constant 5)"],
        ["bound", "violations"],
        [(k, v) for k, v in sorted(report.items())],
    )
    # profile curves of both multipliers on a representative mode family
    from .multipliers import M_array, MultiplierParams

    t = np.linspace(0.0, 60.0, 601)
    cols: dict[str, np.ndarray] = {}
    for nu in (1e-1, 1e-2, 1e-3):
        prm = MultiplierParams(nu=nu)
        cols[f"m_k1_eta10_nu{nu:g}"] = m_array(t, 1.0, 10.0, 1.0, prm)
        cols[f"M_k1_eta10_nu{nu:g}"] = M_array(t, 1.0, 10.0, 1.0, prm)
    _write_csv(
        out / "multiplier_profiles.csv",
        ["stretching compensator m and ghost weight M on the mode",
         "(k, eta, l) = (1, 10, 1) for several viscosities"],
        ["t", *cols.keys()],
        zip(t.tolist(), *[c.tolist() for c in cols.values()]),
    )
    total = sum(report.values())
    print(f"multiplier-check: {total} violations over {params['samples']} samples")
    return EXIT_OK if total == 0 else EXIT_NUMERICAL


def _cmd_linear_modes(params: dict, out: Path) -> int:
    prm = PhysicsParams(nu=params["nu"], beta=params["beta"])
    k, l, eta = params["k"], params["l"], params["eta"]
    if k == 0:
        raise ValueError("linear-modes requires k != 0")
    t_grid = np.linspace(0.0, params["T"], params["points"])
    q0, k0 = 1.0 + 0.0j, 1.0 + 0.0j
    qt, kt = evolve_qk_modes(
        np.array([k], dtype=float), np.array([eta]), np.array([l], dtype=float),
        np.array([q0]), np.array([k0]), prm, t_grid, rtol=1e-11, atol=1e-13,
    )
    m = m_array(t_grid, float(k), eta, float(l), prm.multipliers())
    energy = m**2 * (np.abs(qt[:, 0]) ** 2 + np.abs(kt[:, 0]) ** 2)
    e0 = abs(q0) ** 2 + abs(k0) ** 2
    envelope = np.exp(-prm.nu * k**2 * t_grid**3 / 12.0) * e0
    _write_csv(
        out / "linear_modes.csv",
        [f"mode k={k} eta={eta} l={l}, nu={prm.nu}, beta={prm.beta}",
         "energy: m(t)^2 (|Q2|^2 + |K2|^2) of the good-unknown pair",
         "envelope: exp(-nu k^2 t^3 / 12) times the initial energy"],
        ["t", "energy", "envelope"],
        zip(t_grid.tolist(), energy.tolist(), envelope.tolist()),
    )
    ok = bool(np.all(energy <= envelope * (1.0 + 1e-8)))
    fit_sel = (t_grid > 0) & (energy > 0)  # viscous underflow -> exact zeros
    line = f"linear-modes: envelope {'holds' if ok else 'VIOLATED'}"
    if fit_sel.sum() >= 5:
        fit = fit_decay(t_grid[fit_sel], energy[fit_sel], "cubic_exponential")
        line += f"; fitted cubic rate {fit.exponent:.4e} (nu/12 = {prm.nu / 12:.4e})"
    print(line)
    return EXIT_OK if ok else EXIT_NUMERICAL


def _cmd_zero_freq(params: dict, out: Path) -> int:
    prm = PhysicsParams(nu=params["nu"], beta=params["beta"])
    eta, l = params["eta"], params["l"]
    if l == 0:
        raise ValueError("zero-freq requires l != 0")
    T = params["T"] if params["T"] > 0 else 10.0 / prm.nu
    t_grid = np.linspace(0.0, T, params["points"])
    data = [ZeroModeState(0.0, 1.0, -eta / l)]
    rot, ref = liftup_comparison(prm, [(eta, l)], data, t_grid)
    _write_csv(
        out / "zero_freq.csv",
        [f"simple-zero-frequency mode eta={eta} l={l}, nu={prm.nu}, beta={prm.beta}",
         "rotating_norm: velocity norm under the rotating zero-frequency dynamics",
         "liftup_norm: same data under the rotation-free reference (lift-up)"],
        ["t", "rotating_norm", "liftup_norm"],
        zip(t_grid.tolist(), rot.tolist(), ref.tolist()),
    )
    print(f"zero-freq: rotating sup {rot.max():.4f} (initial {rot[0]:.4f}); "
          f"reference sup {ref.max():.4f} ~ {ref.max() * prm.nu:.3f}/nu")
    return EXIT_OK


def _cmd_dispersion(params: dict, out: Path) -> int:
    prm = PhysicsParams(nu=params["nu"], beta=params["beta"])
    profile = gaussian_profile(
        L_y=params["Ly"], eta_max=params["eta-max"], l0=params["l"], width=params["width"],
    )
    t_grid = np.geomspace(params["tmin"], params["tmax"], params["points"])
    fit, raw, corrected = dispersion_experiment(profile, prm, t_grid)
    _write_csv(
        out / "dispersion.csv",
        [f"sup-norm decay of the inertial-wave semigroup, nu={prm.nu}, beta={prm.beta}",
         "amplitude: max physical amplitude of the evolved profile",
         "heat_corrected_amplitude: amplitude times exp(nu t)"],
        ["t", "amplitude", "heat_corrected_amplitude"],
        zip(t_grid.tolist(), raw.tolist(), corrected.tolist()),
    )
    print(f"dispersion: fitted exponent {fit.exponent:.4f} "
          f"(reference -1/3), residual {fit.residual:.3e}")
    return EXIT_OK


def _cmd_simulate(params: dict, out: Path) -> int:
    grid = _parse_grid(params["grid"], params["Ly"])
    cfg = SimulationConfig(
        grid=grid,
        prm=PhysicsParams(nu=params["nu"], beta=params["beta"]),
        epsilon=params["eps"],
        sigma=params["sigma"],
        dt=params["dt"] if params["dt"] > 0 else None,
        T_end=params["T"],
        seed=params["seed"],
        ledger_stride=params["ledger-stride"],
    )
    ledger, verdict = run(cfg)
    with open(out / "ledger.csv", "w") as fh:
        ledger.write_csv(fh)
    if ledger.final_state is not None:
        save_checkpoint(str(out / "state.nscr"), ledger.final_state, cfg)
    bootstrap = ledger.bootstrap()
    rows = [(name, val, val / (10.0 * cfg.epsilon) if cfg.epsilon else 0.0)
            for name, val in sorted(bootstrap.items())]
    _write_csv(
        out / "bootstrap.csv",
        ["combined sup norm + time-integrated terms of each a priori bound",
         "ratio: value / (10 epsilon); stable verdict requires ratio <= 1"],
        ["bound", "value", "ratio"],
        rows,
    )
    print(f"simulate: verdict {verdict.kind} ({verdict.detail}); "
          f"max bound ratio {max((r[2] for r in rows), default=0.0):.3f}")
    return EXIT_NUMERICAL if verdict.kind == "blowup" else EXIT_OK


def _scan_one(job: tuple) -> dict:
    (nu, beta, grid_text, L_y, sigma, seed, tol, t_factor,
     eps_start_factor, eps_max_factor, profile) = job
    grid = _parse_grid(grid_text, L_y)
    prm = PhysicsParams(nu=nu, beta=beta)
    eps_floor = 1e-3 * nu
    eps_cap = eps_max_factor * nu

    def is_stable(eps: float) -> tuple[bool, str]:
        cfg = SimulationConfig(
            grid=grid, prm=prm, epsilon=eps, sigma=sigma,
            T_end=t_factor / nu, seed=seed, early_exit=True, ledger_stride=10,
            dt_max=0.15, cfl_safety=0.45, init_profile=profile,
        )
        _, verdict = run(cfg)
        return verdict.kind == "stable", verdict.kind

    # bracket the transition geometrically, starting near the expected scale
    n_runs = 0
    eps = min(eps_start_factor * nu, eps_cap / 2.0)
    eps_lo = eps_hi = None
    verdict_kind = "stable"
    while True:
        ok, verdict_kind = is_stable(eps)
        n_runs += 1
        if ok:
            eps_lo = eps
            if eps_hi is not None:
                break
            eps *= 2.0
            if eps > eps_cap:
                return {"nu": nu, "eps_critical": eps_lo, "flagged": "lower_bound_only",
                        "eps_stable": eps_lo, "eps_unstable": np.nan, "n_runs": n_runs,
                        "last_verdict": "stable_up_to_cap"}
        else:
            eps_hi = eps
            if eps_lo is not None:
                break
            eps /= 2.0
            if eps < eps_floor:
                return {"nu": nu, "eps_critical": eps_hi, "flagged": "no_stable_floor",
                        "eps_stable": np.nan, "eps_unstable": eps_hi, "n_runs": n_runs,
                        "last_verdict": verdict_kind}

    while eps_hi / eps_lo > 1.0 + tol:
        mid = float(np.sqrt(eps_lo * eps_hi))
        ok, verdict_kind = is_stable(mid)
        n_runs += 1
        if ok:
            eps_lo = mid
        else:
            eps_hi = mid
    return {"nu": nu, "eps_critical": float(np.sqrt(eps_lo * eps_hi)), "flagged": "",
            "eps_stable": eps_lo, "eps_unstable": eps_hi, "n_runs": n_runs,
            "last_verdict": verdict_kind}


def threshold_scan(
    nus: list[float],
    beta: float,
    grid_text: str,
    L_y: float,
    sigma: float,
    seed: int,
    bisection_tol: float,
    t_factor: float = 2.0,
    eps_start_factor: float = 100.0,
    eps_max_factor: float = 4096.0,
    profile: str = "tilde_pair",
    workers: int | None = None,
) -> tuple[list[dict], float, float]:
    """Bisect the critical amplitude for each viscosity; fit the exponent."""
    if len(set(nus)) != len(nus) or any(nu <= 0 for nu in nus):
        raise ValueError("viscosities must be distinct and positive")
    jobs = [(nu, beta, grid_text, L_y, sigma, seed, bisection_tol, t_factor,
             eps_start_factor, eps_max_factor, profile)
            for nu in nus]
    if workers is None:
        workers = int(os.environ.get("NSCR_THREADS", "0")) or min(len(jobs), os.cpu_count() or 1)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_scan_one, jobs))
    else:
        rows = [_scan_one(job) for job in jobs]
    rows.sort(key=lambda r: r["nu"])
    usable = [r for r in rows if not r["flagged"]]
    if len(usable) >= 2:
        gamma, resid = fit_threshold_exponent(
            np.array([r["nu"] for r in usable]),
            np.array([r["eps_critical"] for r in usable]),
        )
    else:
        gamma, resid = float("nan"), float("nan")
    return rows, gamma, resid


def _cmd_threshold_scan(params: dict, out: Path) -> int:
    nus = [float(v) for v in params["nus"].split(",")]
    rows, gamma, resid = threshold_scan(
        nus, params["beta"], params["grid"], params["Ly"], params["sigma"],
        params["seed"], params["tol"], params["t-factor"],
        params["eps-start-factor"], params["eps-max-factor"], params["profile"],
    )
    _write_csv(
        out / "threshold_scan.csv",
        ["critical initial amplitude versus viscosity (bisection on the",
         "bootstrap-bound verdict); eps_critical is a lower bound where flagged",
         f"fitted scaling exponent gamma = {gamma:.6f} (rms residual {resid:.3e})"],
        ["nu", "eps_critical", "eps_stable", "eps_unstable", "n_runs", "flagged", "last_verdict"],
        [(r["nu"], r["eps_critical"], r["eps_stable"], r["eps_unstable"],
          r["n_runs"], r["flagged"] or "ok", r["last_verdict"]) for r in rows],
    )
    monotone = all(rows[i]["eps_critical"] <= rows[i + 1]["eps_critical"] + 1e-300
                   for i in range(len(rows) - 1))
    if not monotone:
        print("threshold-scan: note: eps_critical not monotone in nu")
    print(f"threshold-scan: fitted gamma = {gamma:.4f} (residual {resid:.3e})")
    return EXIT_OK


COMMANDS = {
    "multiplier-check": _cmd_multiplier_check,
    "linear-modes": _cmd_linear_modes,
    "zero-freq": _cmd_zero_freq,
    "dispersion": _cmd_dispersion,
    "simulate": _cmd_simulate,
    "threshold-scan": _cmd_threshold_scan,
}


def run_experiment(spec: ExperimentSpec) -> int:
    """Dispatch one resolved experiment; returns the process exit code."""
    if spec.name not in COMMANDS:
        raise ValueError(f"unknown experiment {spec.name!r}")
    out = Path(spec.params.get("out", "."))
    out.mkdir(parents=True, exist_ok=True)
    return COMMANDS[spec.name](spec.params, out)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        spec = resolve_spec(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return run_experiment(spec)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
