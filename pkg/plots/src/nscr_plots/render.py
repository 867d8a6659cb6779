"""
Figure generation from the experiment CSV outputs.

Reads only CSV files (never the simulation code), so figures can be rebuilt
from committed artifacts alone.  A figure-spec JSON file selects one of four
kinds:

decay       log-log curves with power-law reference slopes
envelope    semilog energy curve against its decay envelope
multiplier  multiplier profiles over time
threshold   critical amplitude versus viscosity with the fitted exponent

Invoke as a script with the spec file as the positional argument:

    nscr-plots figure.json [--out image.png]
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

KINDS = ("decay", "envelope", "multiplier", "threshold")


class SchemaError(ValueError):
    """A required CSV column is missing."""


@dataclass
class FigureSpec:
    kind: str
    inputs: list[str]
    output: str
    reference_slopes: list[float] = field(default_factory=list)
    nu: float | None = None
    title: str = ""

    @classmethod
    def load(cls, path: str | Path) -> "FigureSpec":
        path = Path(path)
        raw = json.loads(path.read_text())
        kind = raw.get("kind", "")
        if kind not in KINDS:
            raise ValueError(f"unknown figure kind {kind!r}; expected one of {KINDS}")
        inputs = raw.get("inputs", [])
        if not inputs:
            raise ValueError("figure spec needs at least one input CSV")
        base = path.parent
        resolved = [str((base / p)) if not Path(p).is_absolute() else p for p in inputs]
        for p in resolved:
            if not Path(p).exists():
                raise ValueError(f"input CSV does not exist: {p}")
        output = raw.get("output", path.with_suffix(".png").name)
        if not Path(output).is_absolute():
            output = str(base / output)
        return cls(
            kind=kind,
            inputs=resolved,
            output=output,
            reference_slopes=[float(s) for s in raw.get("reference_slopes", [])],
            nu=raw.get("nu"),
            title=raw.get("title", ""),
        )


def read_columns(path: str) -> dict[str, np.ndarray]:
    """CSV -> named float columns; leading '#' lines are comments."""
    with open(path) as fh:
        rows = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(rows)
    header = next(reader)
    data = list(reader)
    out: dict[str, np.ndarray] = {}
    for idx, name in enumerate(header):
        col = [r[idx] for r in data]
        try:
            out[name] = np.array([float(v) for v in col])
        except ValueError:
            out[name] = np.array(col)  # non-numeric column (labels, flags)
    return out


def require(cols: dict[str, np.ndarray], *names: str) -> None:
    for name in names:
        if name not in cols:
            raise SchemaError(f"missing column {name!r}; found {sorted(cols)}")


def _style() -> None:
    plt.rcParams.update({
        "figure.figsize": (6.0, 4.2),
        "figure.dpi": 120,
        "savefig.dpi": 120,
        "font.size": 9,
        "axes.grid": True,
        "grid.alpha": 0.3,
    })


def _save(fig, output: str) -> None:
    Path(output).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(output, metadata={"Software": None})
    plt.close(fig)


def _render_decay(spec: FigureSpec) -> None:
    _style()
    fig, ax = plt.subplots()
    for path in spec.inputs:
        cols = read_columns(path)
        require(cols, "t")
        t = cols["t"]
        sel = t > 0
        for name, vals in cols.items():
            if name == "t" or vals.dtype.kind not in "fi":
                continue
            pos = sel & (vals > 0)
            ax.loglog(t[pos], vals[pos], label=f"{Path(path).stem}:{name}")
        for slope in spec.reference_slopes:
            pos = sel
            anchor_t, anchor_v = t[pos][0], None
            for name, vals in cols.items():
                if name != "t" and vals.dtype.kind in "fi" and np.any(vals[pos] > 0):
                    anchor_v = vals[pos][vals[pos] > 0][0]
                    break
            if anchor_v is not None:
                ax.loglog(t[pos], anchor_v * (t[pos] / anchor_t) ** slope,
                          "k--", lw=0.8, label=f"slope {slope:g}")
    ax.set_xlabel("t")
    ax.set_ylabel("amplitude")
    ax.set_title(spec.title or "decay")
    ax.legend(fontsize=7)
    _save(fig, spec.output)


def _render_envelope(spec: FigureSpec) -> None:
    _style()
    fig, ax = plt.subplots()
    for path in spec.inputs:
        cols = read_columns(path)
        require(cols, "t", "energy", "envelope")
        t, energy, envelope = cols["t"], cols["energy"], cols["envelope"]
        pos = energy > 0
        ax.semilogy(t[pos], energy[pos], label="measured energy")
        ax.semilogy(t, np.maximum(envelope, 1e-300), "r-", lw=1.0, label="envelope")
        if spec.nu:
            guide = energy[0] * np.exp(-spec.nu * t**3 / 24.0)
            ax.semilogy(t, np.maximum(guide, 1e-300), "k--", lw=0.8,
                        label="cubic-exponential guide")
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    ax.set_ylim(bottom=max(ax.get_ylim()[0], 1e-20))
    ax.set_title(spec.title or "enhanced-dissipation envelope")
    ax.legend(fontsize=7)
    _save(fig, spec.output)


def _render_multiplier(spec: FigureSpec) -> None:
    _style()
    fig, ax = plt.subplots()
    for path in spec.inputs:
        cols = read_columns(path)
        require(cols, "t")
        t = cols["t"]
        for name, vals in cols.items():
            if name == "t" or vals.dtype.kind not in "fi":
                continue
            ax.semilogy(t, vals, label=name)
    ax.set_xlabel("t")
    ax.set_ylabel("multiplier value")
    ax.set_title(spec.title or "time-dependent multipliers")
    ax.legend(fontsize=7)
    _save(fig, spec.output)


def _render_threshold(spec: FigureSpec) -> None:
    _style()
    fig, ax = plt.subplots()
    for path in spec.inputs:
        cols = read_columns(path)
        require(cols, "nu", "eps_critical")
        nu, eps = cols["nu"], cols["eps_critical"]
        ax.loglog(nu, eps, "o-", label=Path(path).stem)
        gamma, intercept = np.polyfit(np.log(nu), np.log(eps), 1)
        ax.loglog(nu, np.exp(intercept) * nu**gamma, "k--", lw=0.8)
        ax.annotate(f"gamma={gamma:.3f}", xy=(nu[len(nu) // 2], eps[len(eps) // 2]),
                    textcoords="offset points", xytext=(8, -12), fontsize=9)
        for slope in spec.reference_slopes or [1.0]:
            ax.loglog(nu, eps[0] * (nu / nu[0]) ** slope, "b:",
                      lw=0.8, label=f"slope {slope:g}")
    ax.set_xlabel("nu")
    ax.set_ylabel("critical amplitude")
    ax.set_title(spec.title or "stability threshold scaling")
    ax.legend(fontsize=7)
    _save(fig, spec.output)


RENDERERS = {
    "decay": _render_decay,
    "envelope": _render_envelope,
    "multiplier": _render_multiplier,
    "threshold": _render_threshold,
}


def render(spec: FigureSpec) -> str:
    """Render one figure; returns the output image path."""
    RENDERERS[spec.kind](spec)
    return spec.output


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="nscr-plots", description=__doc__)
    parser.add_argument("spec", help="figure-spec JSON file")
    parser.add_argument("--out", help="override the output image path")
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec.load(args.spec)
        if args.out:
            spec.output = args.out
        out = render(spec)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
