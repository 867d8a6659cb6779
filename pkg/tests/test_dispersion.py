import numpy as np
import pytest

from nscr.dispersion import (
    ZeroFreqField,
    apply_dispersive_semigroup,
    cross_validate_modes,
    dispersion_experiment,
    evolve_simple_zero_field,
    gaussian_profile,
    linf_amplitude,
)
from nscr.linear import PhysicsParams

RNG = np.random.default_rng(2024)


def random_zero_freq_field(Ny=16, Nz=8, L_y=4.0) -> ZeroFreqField:
    c = RNG.standard_normal((Ny, Nz)) + 1j * RNG.standard_normal((Ny, Nz))
    c[:, 0] = 0.0
    return ZeroFreqField(c, L_y)


class TestZeroFreqField:
    def test_l_zero_content_rejected(self):
        c = np.ones((8, 4), dtype=complex)
        with pytest.raises(ValueError):
            ZeroFreqField(c, 4.0)

    def test_eta_values(self):
        f = random_zero_freq_field(Ny=8, L_y=2.0)
        assert sorted(f.eta.ravel()) == [-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5]


class TestSemigroup:
    def setup_method(self):
        self.prm = PhysicsParams(nu=0.01, beta=2.0)

    def test_identity_at_t0(self):
        f = random_zero_freq_field()
        g = apply_dispersive_semigroup(f, 0.0, self.prm, +1)
        assert np.allclose(g.coeffs, f.coeffs, atol=0)

    def test_modulus_is_heat_decay(self):
        f = random_zero_freq_field()
        t = 3.0
        g = apply_dispersive_semigroup(f, t, self.prm, +1)
        esq = f.eta**2 + f.lz**2
        expected = np.abs(f.coeffs) * np.exp(-self.prm.nu * esq * t)
        assert np.allclose(np.abs(g.coeffs), expected, rtol=1e-13)

    def test_semigroup_composition(self):
        f = random_zero_freq_field()
        for sign in (+1, -1):
            g12 = apply_dispersive_semigroup(
                apply_dispersive_semigroup(f, 1.3, self.prm, sign), 2.4, self.prm, sign
            )
            g3 = apply_dispersive_semigroup(f, 3.7, self.prm, sign)
            assert np.allclose(g12.coeffs, g3.coeffs, atol=1e-12 * np.abs(f.coeffs).max())

    def test_parseval_inviscid(self):
        prm = PhysicsParams(nu=0.0, beta=2.0)
        f = random_zero_freq_field()
        g = apply_dispersive_semigroup(f, 17.3, prm, -1)
        assert g.l2_norm() == pytest.approx(f.l2_norm(), rel=1e-13)

    def test_invalid_sign(self):
        with pytest.raises(ValueError):
            apply_dispersive_semigroup(random_zero_freq_field(), 1.0, self.prm, 2)


class TestEvolveSimpleZeroField:
    def test_t0_recovers_inputs(self):
        prm = PhysicsParams(nu=0.01, beta=2.0)
        f1, f2 = random_zero_freq_field(), random_zero_freq_field()
        g1, g2, _ = evolve_simple_zero_field((f1, f2), 0.0, prm)
        assert np.allclose(g1.coeffs, f1.coeffs)
        assert np.allclose(g2.coeffs, f2.coeffs)

    def test_cross_validation_with_closed_form(self):
        for prm, seed in (
            (PhysicsParams(nu=1e-3, beta=2.0), 0),
            (PhysicsParams(nu=1e-2, beta=-2.0), 1),
            (PhysicsParams(nu=0.0, beta=5.0), 2),
        ):
            assert cross_validate_modes(prm, n=100, seed=seed) <= 1e-10

    def test_inviscid_energy_invariant(self):
        # same quadratic invariant as the closed-form route
        prm = PhysicsParams(nu=0.0, beta=2.0)
        f1, f2 = random_zero_freq_field(), random_zero_freq_field()
        esq = f1.eta**2 + f1.lz**2
        lsq = f1.lz**2
        weight1 = np.where(esq > 0, prm.beta * lsq / np.where(esq == 0, 1, esq), 0.0)
        e0 = np.sum(weight1 * np.abs(f1.coeffs) ** 2 + (prm.beta - 1) * np.abs(f2.coeffs) ** 2)
        g1, g2, _ = evolve_simple_zero_field((f1, f2), 11.0, prm)
        e1 = np.sum(weight1 * np.abs(g1.coeffs) ** 2 + (prm.beta - 1) * np.abs(g2.coeffs) ** 2)
        assert e1 == pytest.approx(e0, rel=1e-12)

    def test_mismatched_grids_rejected(self):
        prm = PhysicsParams(nu=0.01, beta=2.0)
        with pytest.raises(ValueError):
            evolve_simple_zero_field(
                (random_zero_freq_field(Ny=16), random_zero_freq_field(Ny=32)), 1.0, prm
            )


class TestLinfAmplitude:
    def test_single_unit_mode(self):
        c = np.zeros((16, 8), dtype=complex)
        c[3, 2] = 1.0
        assert linf_amplitude(ZeroFreqField(c, 4.0)) == pytest.approx(1.0, rel=1e-12)

    def test_scalar_homogeneity(self):
        f = random_zero_freq_field()
        a = linf_amplitude(f)
        g = ZeroFreqField(3.5j * f.coeffs, f.L_y)
        assert linf_amplitude(g) == pytest.approx(3.5 * a, rel=1e-12)

    def test_oversampling_catches_intermode_maxima(self):
        # two beating modes peak between collocation points
        c = np.zeros((16, 8), dtype=complex)
        c[1, 1] = 1.0
        c[2, 1] = 1.0
        f = ZeroFreqField(c, 4.0)
        coarse = linf_amplitude(f, oversample=1)
        fine = linf_amplitude(f, oversample=8)
        assert fine >= coarse
        assert fine == pytest.approx(2.0, rel=1e-2)

    def test_direct_summation_oracle(self):
        # Gaussian-in-eta profile against a brute-force evaluation of the sum
        f = gaussian_profile(L_y=4.0, eta_max=2.0, l0=1, Nz=4)
        got = linf_amplitude(f, oversample=8)
        ys = np.linspace(0.0, 4.0, 2048, endpoint=False)
        zs = np.linspace(0.0, 1.0, 32, endpoint=False)
        eta = f.eta.ravel()
        lz = f.lz.ravel()
        vals = np.zeros((ys.size, zs.size), dtype=complex)
        for iy, e in enumerate(eta):
            for iz, l in enumerate(lz):
                if f.coeffs[iy, iz] != 0:
                    vals += f.coeffs[iy, iz] * np.exp(
                        2j * np.pi * (e * ys[:, None] + l * zs[None, :])
                    )
        assert got == pytest.approx(np.abs(vals).max(), rel=1e-6)


class TestDispersionExperiment:
    def test_fitted_exponent_near_minus_third(self):
        prm = PhysicsParams(nu=1e-6, beta=2.0)
        prof = gaussian_profile(L_y=1024.0, eta_max=6.0, l0=1)
        fit, raw, corr = dispersion_experiment(prof, prm, np.geomspace(1e2, 1e3, 10))
        assert -0.43 <= fit.exponent <= -0.23
        assert np.all(raw <= corr + 1e-15)

    def test_beta_independent_rate(self):
        prof = gaussian_profile(L_y=1024.0, eta_max=6.0, l0=1)
        t_grid = np.geomspace(1e2, 1e3, 10)
        f2, _, _ = dispersion_experiment(prof, PhysicsParams(nu=1e-6, beta=2.0), t_grid)
        f6, _, _ = dispersion_experiment(prof, PhysicsParams(nu=1e-6, beta=6.0), t_grid)
        assert abs(f2.exponent - f6.exponent) <= 0.05

    def test_no_phase_no_decay(self):
        prm = PhysicsParams(nu=1e-6, beta=2.0)
        prof = gaussian_profile(L_y=256.0, eta_max=4.0, l0=1)
        fit, _, _ = dispersion_experiment(prof, prm, np.geomspace(1e2, 1e3, 8), oscillation=False)
        assert abs(fit.exponent) <= 0.05

    def test_short_grid_rejected(self):
        prm = PhysicsParams(nu=1e-6, beta=2.0)
        prof = gaussian_profile(L_y=64.0, eta_max=2.0)
        with pytest.raises(ValueError):
            dispersion_experiment(prof, prm, np.array([1.0, 2.0, 3.0, 4.0]))
