"""Least-squares decay-rate fits shared by the experiments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DecayFit:
    """Fitted decay law with the RMS residual of the log-space fit."""

    exponent: float
    amplitude: float
    residual: float
    window: tuple[float, float]
    model: str = "powerlaw"

    def __post_init__(self) -> None:
        if self.residual < 0:
            raise ValueError("residual must be nonnegative")
        if self.window[1] <= self.window[0]:
            raise ValueError("fit window must be nonempty")


def fit_decay(t: np.ndarray, values: np.ndarray, model: str = "powerlaw") -> DecayFit:
    """
    Fit a decay law to (t, value) rows in log space.

    ``powerlaw`` fits log v = log A + gamma log t and reports gamma as the
    exponent.  ``cubic_exponential`` fits log v = log A - b t^3 and reports b
    (sign-flipped slope) as the exponent, for comparison against cubic-in-time
    dissipation rates.
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if t.size < 5:
        raise ValueError("need at least 5 rows to fit")
    if np.any(values <= 0.0):
        raise ValueError("values must be positive for a log-space fit")
    if model == "powerlaw":
        x = np.log(t)
    elif model == "cubic_exponential":
        x = t**3
    else:
        raise ValueError(f"unknown model {model!r}")
    y = np.log(values)
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    exponent = float(slope) if model == "powerlaw" else float(-slope)
    return DecayFit(
        exponent=exponent,
        amplitude=float(np.exp(intercept)),
        residual=resid,
        window=(float(t.min()), float(t.max())),
        model=model,
    )


def fit_threshold_exponent(nu: np.ndarray, eps_critical: np.ndarray) -> tuple[float, float]:
    """Slope gamma and RMS residual of log eps_c = gamma log nu + c."""
    nu = np.asarray(nu, dtype=float)
    eps_critical = np.asarray(eps_critical, dtype=float)
    if nu.size < 2:
        raise ValueError("need at least two scan points")
    gamma, c = np.polyfit(np.log(nu), np.log(eps_critical), 1)
    resid = float(np.sqrt(np.mean((np.log(eps_critical) - (gamma * np.log(nu) + c)) ** 2)))
    return float(gamma), resid
