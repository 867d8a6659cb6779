"""
Fourier-space scaffolding for the sheared moving frame.

Everything lives on a triply periodic box: unit tori in x and z (integer
frequencies k, l) and a periodized wall-normal interval of length ``L_y``
(frequencies eta = j / L_y).  Fields are stored as Fourier-series
coefficients, i.e. ``f(x) = sum c(k, eta, l) * exp(2*pi*i*(k x + eta y + l z))``,
so a unit coefficient is a unit-amplitude wave.  Norms use the
volume-normalized measure dV / L_y, under which Plancherel reads
``||f||_L2^2 = sum |c|^2``; the 1/L_y quadrature weight on eta is absorbed
into that normalization.

Differential operators carry the 2*pi-free symbols ``grad_L = (ik, i(eta - k t), il)``
and ``-lap_L = p = k^2 + (eta - k t)^2 + l^2``; the 2*pi of the transform
convention is absorbed into the nondimensional viscosity (see README).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class Wavevector:
    """One discrete Fourier mode (k, eta, l)."""

    k: int
    eta: float
    l: int

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.k**2 + self.eta**2 + self.l**2))

    @property
    def is_mean(self) -> bool:
        return self.k == 0 and self.eta == 0.0 and self.l == 0


@dataclass(frozen=True)
class Grid:
    """
    Spectral grid for the periodic box T x [0, L_y) x T.

    Parameters
    ----------
    Nx, Ny, Nz : int
        Mode counts per direction; even and >= 4.
    L_y : float
        Wall-normal period used to truncate the real line; eta = j / L_y.
    dealias_fraction : float
        Fraction of the Nyquist band kept for quadratic products (2/3 rule).
    """

    Nx: int
    Ny: int
    Nz: int
    L_y: float = 8.0
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self) -> None:
        for name, n in (("Nx", self.Nx), ("Ny", self.Ny), ("Nz", self.Nz)):
            if n < 4 or n % 2 != 0:
                raise ValueError(f"{name} must be an even integer >= 4, got {n}")
        if self.L_y <= 0:
            raise ValueError("L_y must be positive")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ValueError("dealias_fraction must lie in (0, 1]")

    # integer mode indices in FFT storage order
    @property
    def kx_int(self) -> np.ndarray:
        return np.rint(np.fft.fftfreq(self.Nx) * self.Nx).astype(np.int64)

    @property
    def jy_int(self) -> np.ndarray:
        return np.rint(np.fft.fftfreq(self.Ny) * self.Ny).astype(np.int64)

    @property
    def lz_int(self) -> np.ndarray:
        return np.rint(np.fft.fftfreq(self.Nz) * self.Nz).astype(np.int64)

    @property
    def kx(self) -> np.ndarray:
        """Streamwise frequencies, broadcast shape (Nx, 1, 1)."""
        return self.kx_int.astype(float)[:, None, None]

    @property
    def eta(self) -> np.ndarray:
        """Wall-normal frequencies j / L_y, broadcast shape (1, Ny, 1)."""
        return (self.jy_int / self.L_y)[None, :, None]

    @property
    def lz(self) -> np.ndarray:
        """Spanwise frequencies, broadcast shape (1, 1, Nz)."""
        return self.lz_int.astype(float)[None, None, :]

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.Nx, self.Ny, self.Nz)

    def dealias_mask(self) -> np.ndarray:
        """Boolean keep-mask implementing the 2/3 rule in all three directions."""
        cx = int(np.floor(self.Nx / 2 * self.dealias_fraction))
        cy = int(np.floor(self.Ny / 2 * self.dealias_fraction))
        cz = int(np.floor(self.Nz / 2 * self.dealias_fraction))
        mx = np.abs(self.kx_int) <= cx
        my = np.abs(self.jy_int) <= cy
        mz = np.abs(self.lz_int) <= cz
        return mx[:, None, None] & my[None, :, None] & mz[None, None, :]

    def freq_norm_sq(self) -> np.ndarray:
        """k^2 + eta^2 + l^2 over the full grid."""
        return self.kx**2 + self.eta**2 + self.lz**2


def symbol_p(t: float, w: Wavevector) -> float:
    """Symbol of -lap_L at moving-frame time t: k^2 + (eta - k t)^2 + l^2."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return float(w.k**2 + (w.eta - w.k * t) ** 2 + w.l**2)


def symbol_p_dot(t: float, w: Wavevector) -> float:
    """Time derivative of symbol_p: -2 k (eta - k t)."""
    return float(-2.0 * w.k * (w.eta - w.k * t))


def symbol_p_integral(t0: float, t1: float, w: Wavevector) -> float:
    """Closed-form integral of symbol_p over [t0, t1]."""
    k, eta, l = w.k, w.eta, w.l
    if k == 0:
        return (eta**2 + l**2) * (t1 - t0)
    cubic = ((eta - k * t0) ** 3 - (eta - k * t1) ** 3) / (3.0 * k)
    return (k**2 + l**2) * (t1 - t0) + cubic


def p_integral_array(t0: float, t1: float, k, eta, l):
    """Vectorized closed-form integral of symbol_p over [t0, t1]."""
    k = np.asarray(k, dtype=float)
    eta = np.asarray(eta, dtype=float)
    l = np.asarray(l, dtype=float)
    base = (k**2 + l**2) * (t1 - t0)
    k_safe = np.where(k == 0.0, 1.0, k)
    cubic = ((eta - k * t0) ** 3 - (eta - k * t1) ** 3) / (3.0 * k_safe)
    cubic = np.where(k == 0.0, eta**2 * (t1 - t0), cubic)
    return base + cubic


@dataclass(frozen=True)
class SheredSymbols:
    """The sheared symbols (p, p_dot, grad_L) of one mode at one time."""

    p: float
    p_dot: float
    gradL: tuple[complex, complex, complex]

    @classmethod
    def at(cls, t: float, w: Wavevector) -> "SheredSymbols":
        xi = w.eta - w.k * t
        return cls(
            p=symbol_p(t, w),
            p_dot=symbol_p_dot(t, w),
            gradL=(1j * w.k, 1j * xi, 1j * w.l),
        )


@dataclass
class SpectralField:
    """
    Fourier coefficients of a 3-component velocity field in the moving frame.

    ``u`` has shape (3, Nx, Ny, Nz), complex128, FFT storage order.
    ``frame_time`` is the moving-frame time at which sheared symbols are
    evaluated for this snapshot.
    """

    grid: Grid
    u: np.ndarray
    frame_time: float = 0.0

    def __post_init__(self) -> None:
        expected = (3, *self.grid.shape)
        if self.u.shape != expected:
            raise ValueError(f"coefficient array must have shape {expected}, got {self.u.shape}")
        if self.u.dtype != np.complex128:
            self.u = self.u.astype(np.complex128)

    @classmethod
    def zeros(cls, grid: Grid, frame_time: float = 0.0) -> "SpectralField":
        return cls(grid, np.zeros((3, *grid.shape), dtype=np.complex128), frame_time)

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.u.copy(), self.frame_time)

    def with_coeffs(self, u: np.ndarray) -> "SpectralField":
        return SpectralField(self.grid, u, self.frame_time)

    def at_time(self, t: float) -> "SpectralField":
        return replace(self, frame_time=t)


def to_physical(c: np.ndarray) -> np.ndarray:
    """Series coefficients -> grid values (last three axes)."""
    return np.fft.ifftn(c, axes=(-3, -2, -1), norm="forward")


def to_spectral(f: np.ndarray) -> np.ndarray:
    """Grid values -> series coefficients (last three axes)."""
    return np.fft.fftn(f, axes=(-3, -2, -1), norm="forward")


def hermitianize(c: np.ndarray) -> np.ndarray:
    """
    Project onto Hermitian-symmetric coefficients (real physical field).

    The Nyquist planes are zeroed: the mode -N/2 is its own conjugate partner
    and its symbol sign is ambiguous, so band-limited fields never carry it.
    """
    flipped = np.conj(c[..., ::-1, ::-1, ::-1])
    flipped = np.roll(flipped, shift=(1, 1, 1), axis=(-3, -2, -1))
    out = 0.5 * (c + flipped)
    for axis in (-3, -2, -1):
        n = c.shape[axis]
        sl = [slice(None)] * c.ndim
        sl[axis] = n // 2
        out[tuple(sl)] = 0.0
    return out


def hermitian_defect(c: np.ndarray) -> float:
    """Max deviation from Hermitian symmetry, relative to the field size."""
    d = np.abs(c - hermitianize(c)).max()
    scale = np.abs(c).max()
    return float(d / scale) if scale > 0 else float(d)


def project_x_zero(f: SpectralField) -> SpectralField:
    """Keep only the k = 0 modes."""
    out = np.zeros_like(f.u)
    zero = f.grid.kx_int == 0
    out[:, zero, :, :] = f.u[:, zero, :, :]
    return f.with_coeffs(out)


def project_x_nonzero(f: SpectralField) -> SpectralField:
    """Keep only the k != 0 modes."""
    out = f.u.copy()
    out[:, f.grid.kx_int == 0, :, :] = 0.0
    return f.with_coeffs(out)


def project_z_zero(f: SpectralField) -> SpectralField:
    """Keep only the l = 0 modes (the bar part)."""
    out = np.zeros_like(f.u)
    zero = f.grid.lz_int == 0
    out[:, :, :, zero] = f.u[:, :, :, zero]
    return f.with_coeffs(out)


def project_z_nonzero(f: SpectralField) -> SpectralField:
    """Keep only the l != 0 modes (the tilde part)."""
    out = f.u.copy()
    out[:, :, :, f.grid.lz_int == 0] = 0.0
    return f.with_coeffs(out)


def sobolev_norm(f: SpectralField, s: float) -> float:
    """
    H^s norm: sqrt( sum (1 + k^2 + eta^2 + l^2)^s |c|^2 ) over modes and
    components, with the volume-normalized measure (see module docstring).
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    w = (1.0 + f.grid.freq_norm_sq()) ** s
    return float(np.sqrt(np.sum(w[None] * np.abs(f.u) ** 2)))


def sobolev_norm_coeffs(c: np.ndarray, grid: Grid, s: float) -> float:
    """H^s norm of a raw coefficient array (any leading component axes)."""
    w = (1.0 + grid.freq_norm_sq()) ** s
    return float(np.sqrt(np.sum(w * np.abs(c) ** 2)))


def l2_norm(f: SpectralField) -> float:
    return sobolev_norm(f, 0.0)


def divergence_moving(f: SpectralField) -> np.ndarray:
    """Moving-frame divergence coefficients i k u1 + i (eta - k t) u2 + i l u3."""
    g = f.grid
    xi = g.eta - g.kx * f.frame_time
    return 1j * (g.kx * f.u[0] + xi * f.u[1] + g.lz * f.u[2])


def divergence_defect(f: SpectralField) -> float:
    """Max moving-frame divergence relative to the field norm."""
    d = np.abs(divergence_moving(f)).max()
    scale = np.sqrt(np.sum(np.abs(f.u) ** 2))
    return float(d / scale) if scale > 0 else float(d)


def leray_project_moving(t: float, f: SpectralField) -> SpectralField:
    """
    Divergence-free projection in the moving frame at time t.

    Applies I - grad_L lap_L^{-1} grad_L . mode-wise; the mean mode passes
    through unchanged (p = 0 there only, on any valid grid).
    """
    if f.frame_time != t:
        raise ValueError(f"frame_time mismatch: field at {f.frame_time}, projector at {t}")
    g = f.grid
    xi = g.eta - g.kx * t
    p = g.kx**2 + xi**2 + g.lz**2
    p_safe = p.copy()
    p_safe[p == 0.0] = 1.0  # mean mode only
    dot = g.kx * f.u[0] + xi * f.u[1] + g.lz * f.u[2]
    out = f.u.copy()
    out[0] -= g.kx * dot / p_safe
    out[1] -= xi * dot / p_safe
    out[2] -= g.lz * dot / p_safe
    return f.with_coeffs(out)


def single_mode_field(
    grid: Grid,
    w: Wavevector,
    amplitudes: tuple[complex, complex, complex],
    frame_time: float = 0.0,
    hermitian: bool = True,
) -> SpectralField:
    """Field carrying one mode (plus its Hermitian partner when requested)."""
    ix = int(np.where(grid.kx_int == w.k)[0][0])
    jy = np.rint(w.eta * grid.L_y).astype(int)
    iy = int(np.where(grid.jy_int == jy)[0][0])
    iz = int(np.where(grid.lz_int == w.l)[0][0])
    f = SpectralField.zeros(grid, frame_time)
    for comp, amp in enumerate(amplitudes):
        f.u[comp, ix, iy, iz] = amp
    if hermitian:
        f.u[:] = 2.0 * hermitianize(f.u)
    return f
