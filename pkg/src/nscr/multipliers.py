"""
Time-dependent Fourier multipliers for the sheared frame.

Two weights per mode (k, eta, l):

* ``m`` compensates the transient stretching near the critical time
  t = eta/k.  It equals 1 before the stretching window, follows
  sqrt(p(start)) / sqrt(p(t)) inside the window
  [max(0, eta/k), eta/k + cutoff * nu^(-1/3)], and freezes afterwards.
* ``M`` is a ghost weight, exp of an arctan in nu^(1/3)(t - eta/k); it is
  nonincreasing and pinched between exp(-pi) and 1.

Both are defined by ODEs with cadlag rates; at a window seam the rate takes
its right-limit value.  All functions accept numpy arrays for (k, eta, l)
and broadcast.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import Wavevector

M_LOWER_BOUND = float(np.exp(-np.pi))


@dataclass(frozen=True)
class MultiplierParams:
    """Viscosity and the stretching-window constant (default 1000)."""

    nu: float
    cutoff: float = 1000.0

    def __post_init__(self) -> None:
        if not 0.0 < self.nu <= 1.0:
            raise ValueError(f"nu must lie in (0, 1], got {self.nu}")
        if self.cutoff <= 0:
            raise ValueError("cutoff must be positive")

    @property
    def window_length(self) -> float:
        return self.cutoff * self.nu ** (-1.0 / 3.0)


def m_array(t, k, eta, l, prm: MultiplierParams):
    """Closed form of the stretching compensator m(t, k, eta, l)."""
    t = np.asarray(t, dtype=float)
    k = np.asarray(k, dtype=float)
    eta = np.asarray(eta, dtype=float)
    l = np.asarray(l, dtype=float)
    t, k, eta, l = np.broadcast_arrays(t, k, eta, l)

    out = np.ones(t.shape, dtype=float)
    nz = k != 0.0
    if not np.any(nz):
        return out if out.shape else float(out)

    kk, ee, ll, tt = k[nz], eta[nz], l[nz], t[nz]
    ratio = ee / kk
    win_end = ratio + prm.window_length
    xi = ee - kk * tt
    p_now = kk**2 + xi**2 + ll**2
    p_frozen = kk**2 + (prm.cutoff * kk * prm.nu ** (-1.0 / 3.0)) ** 2 + ll**2

    vals = np.ones_like(tt)

    # window begins after t = 0: quiescent, decaying, frozen
    pos = ratio > 0.0
    num = np.sqrt(kk**2 + ll**2)
    inside = pos & (tt >= ratio) & (tt <= win_end)
    after = pos & (tt > win_end)
    vals[inside] = num[inside] / np.sqrt(p_now[inside])
    vals[after] = num[after] / np.sqrt(p_frozen[after])

    # window straddles t = 0: decay starts immediately from p(0)
    strad = (~pos) & (win_end > 0.0)
    num0 = np.sqrt(kk**2 + ee**2 + ll**2)
    inside0 = strad & (tt <= win_end)
    after0 = strad & (tt > win_end)
    vals[inside0] = num0[inside0] / np.sqrt(p_now[inside0])
    vals[after0] = num0[after0] / np.sqrt(p_frozen[after0])

    # window entirely before t = 0 (win_end < 0): m stays 1
    out[nz] = vals
    return out if out.shape else float(out)


def m_rate_array(t, k, eta, l, prm: MultiplierParams):
    """ODE rate m_dot / m: k (eta - k t) / p inside the window, else 0."""
    t = np.asarray(t, dtype=float)
    k = np.asarray(k, dtype=float)
    eta = np.asarray(eta, dtype=float)
    l = np.asarray(l, dtype=float)
    t, k, eta, l = np.broadcast_arrays(t, k, eta, l)

    out = np.zeros(t.shape, dtype=float)
    nz = k != 0.0
    if np.any(nz):
        kk, ee, ll, tt = k[nz], eta[nz], l[nz], t[nz]
        ratio = ee / kk
        # right-limit convention: active on [start, end)
        active = (tt >= ratio) & (tt < ratio + prm.window_length)
        xi = ee - kk * tt
        p = kk**2 + xi**2 + ll**2
        vals = np.where(active, kk * xi / p, 0.0)
        out[nz] = vals
    return out if out.shape else float(out)


def M_array(t, k, eta, l, prm: MultiplierParams):
    """Closed form of the ghost weight M(t, k, eta, l) in [exp(-pi), 1]."""
    t = np.asarray(t, dtype=float)
    k = np.asarray(k, dtype=float)
    eta = np.asarray(eta, dtype=float)
    l = np.asarray(l, dtype=float)
    t, k, eta, l = np.broadcast_arrays(t, k, eta, l)

    out = np.ones(t.shape, dtype=float)
    nz = k != 0.0
    if np.any(nz):
        nu13 = prm.nu ** (1.0 / 3.0)
        ratio = eta[nz] / k[nz]
        out[nz] = np.exp(np.arctan(-nu13 * ratio) - np.arctan(nu13 * (t[nz] - ratio)))
    return out if out.shape else float(out)


def M_rate_array(t, k, eta, l, prm: MultiplierParams):
    """ODE rate M_dot / M: -nu^(1/3) / ((nu^(1/3)(t - eta/k))^2 + 1) for k != 0."""
    t = np.asarray(t, dtype=float)
    k = np.asarray(k, dtype=float)
    eta = np.asarray(eta, dtype=float)
    l = np.asarray(l, dtype=float)
    t, k, eta, l = np.broadcast_arrays(t, k, eta, l)

    out = np.zeros(t.shape, dtype=float)
    nz = k != 0.0
    if np.any(nz):
        nu13 = prm.nu ** (1.0 / 3.0)
        s = nu13 * (t[nz] - eta[nz] / k[nz])
        out[nz] = -nu13 / (s**2 + 1.0)
    return out if out.shape else float(out)


def m_value(t: float, w: Wavevector, prm: MultiplierParams) -> float:
    if t < 0:
        raise ValueError("t must be nonnegative")
    return float(m_array(t, w.k, w.eta, w.l, prm))


def m_rate(t: float, w: Wavevector, prm: MultiplierParams) -> float:
    if t < 0:
        raise ValueError("t must be nonnegative")
    return float(m_rate_array(t, w.k, w.eta, w.l, prm))


def M_value(t: float, w: Wavevector, prm: MultiplierParams) -> float:
    if t < 0:
        raise ValueError("t must be nonnegative")
    return float(M_array(t, w.k, w.eta, w.l, prm))


def M_rate(t: float, w: Wavevector, prm: MultiplierParams) -> float:
    if t < 0:
        raise ValueError("t must be nonnegative")
    return float(M_rate_array(t, w.k, w.eta, w.l, prm))


def m_window(w: Wavevector, prm: MultiplierParams) -> tuple[float, float]:
    """Active stretching window [start, end) of m for one mode (empty if k = 0)."""
    if w.k == 0:
        return (0.0, 0.0)
    start = w.eta / w.k
    return (start, start + prm.window_length)


# Constants pinned for the property checks below.  The lower-bound ratio
# for m holds with constant 1 on every branch; 1/sqrt(2) leaves seam margin.
# The ghost inequality's sharp constant is exp(pi/2) ~ 4.81 (attained in the
# limit t -> eta/k with eta/k -> +inf and nu^(1/3)|k,l| -> 0), so 5 is the
# smallest round number that can hold for all samples.
M_LOWER_RATIO_CONST = 1.0 / np.sqrt(2.0)
GHOST_INEQ_CONST = 5.0


def sample_modes(n: int, seed: int, nonzero_k_only: bool = False):
    """Random (t, k, eta, l, nu) samples used by the bound checks."""
    rng = np.random.default_rng(seed)
    k = rng.integers(1, 9, size=n) * rng.choice([-1, 1], size=n)
    if not nonzero_k_only:
        k[rng.random(n) < 0.05] = 0
    eta = rng.uniform(-20.0, 20.0, size=n)
    l = rng.integers(-8, 9, size=n).astype(float)
    nu = 10.0 ** rng.uniform(-4.0, 0.0, size=n)
    t = rng.uniform(0.0, 100.0, size=n)
    # bias a quarter of the samples toward the stretching window
    win = rng.random(n) < 0.25
    kk = np.where(k == 0, 1, k)
    t[win] = np.abs(eta[win] / kk[win] + rng.uniform(-2.0, 2.0, size=win.sum()) * nu[win] ** (-1.0 / 3.0))
    return t, k.astype(float), eta, l, nu


def bounds_report(n: int = 10_000, seed: int = 0) -> dict[str, int]:
    """
    Sample n random (t, k, eta, l, nu) tuples and count violations of the
    multiplier bounds.  All counts are zero when the implementation is
    correct; the dict is consumed by the CLI `multiplier-check` subcommand.
    """
    t, k, eta, l, nu = sample_modes(n, seed)
    violations = {
        "m_upper": 0,
        "m_lower": 0,
        "m_ratio_lower": 0,
        "M_upper": 0,
        "M_lower": 0,
        "M_monotone": 0,
        "ghost_inequality": 0,
    }
    for nu_val in np.unique(nu):
        sel = nu == nu_val
        prm = MultiplierParams(nu=float(nu_val))
        tt, kk, ee, ll = t[sel], k[sel], eta[sel], l[sel]
        m = m_array(tt, kk, ee, ll, prm)
        M = M_array(tt, kk, ee, ll, prm)
        violations["m_upper"] += int(np.sum(m > 1.0))
        violations["m_lower"] += int(np.sum(m < nu_val ** (1.0 / 3.0) / 2000.0))
        xi = ee - kk * tt
        p = kk**2 + xi**2 + ll**2
        ratio = np.sqrt(kk**2 + ll**2) / np.sqrt(p)
        violations["m_ratio_lower"] += int(np.sum(m < M_LOWER_RATIO_CONST * ratio - 1e-12))
        violations["M_upper"] += int(np.sum(M > 1.0))
        violations["M_lower"] += int(np.sum(M < M_LOWER_BOUND))
        M_later = M_array(tt + 1.0, kk, ee, ll, prm)
        violations["M_monotone"] += int(np.sum(M_later > M + 1e-14))
        nz = kk != 0.0
        Mdot = M_rate_array(tt[nz], kk[nz], ee[nz], ll[nz], prm) * M[nz]
        lhs = nu_val ** (-1.0 / 6.0) * np.sqrt(-Mdot * M[nz]) + nu_val ** (1.0 / 3.0) * np.sqrt(p[nz])
        violations["ghost_inequality"] += int(np.sum(GHOST_INEQ_CONST * lhs < 1.0))
    return violations
