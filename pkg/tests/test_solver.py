import numpy as np
import pytest

from nscr.linear import NonzeroModeState, PhysicsParams, evolve_qk_mode, reconstruct_velocity
from nscr.solver import (
    AliasingError,
    EnergyLedger,
    SimulationConfig,
    choose_dt,
    diagnostics,
    energy_balance,
    load_checkpoint,
    make_initial_data,
    nonlinear_rhs,
    run,
    save_checkpoint,
    step,
)
from nscr.spectral import (
    Grid,
    SpectralField,
    divergence_defect,
    hermitian_defect,
    sobolev_norm,
)


def small_cfg(**kw) -> SimulationConfig:
    defaults = dict(
        grid=Grid(8, 8, 8, L_y=2.0),
        prm=PhysicsParams(nu=0.01, beta=2.0),
        epsilon=1e-3,
        sigma=5.0,
        seed=7,
    )
    defaults.update(kw)
    return SimulationConfig(**defaults)


def mode_indices(grid: Grid, k: int, j: int, l: int) -> tuple[int, int, int]:
    ix = int(np.where(grid.kx_int == k)[0][0])
    iy = int(np.where(grid.jy_int == j)[0][0])
    iz = int(np.where(grid.lz_int == l)[0][0])
    return ix, iy, iz


def hermitian_pair_field(grid: Grid, k, j, l, amps, t=0.0) -> SpectralField:
    """Field with one mode and its conjugate partner (real physical field)."""
    f = SpectralField.zeros(grid, frame_time=t)
    ix, iy, iz = mode_indices(grid, k, j, l)
    jx, jy, jz = mode_indices(grid, -k, -j, -l)
    for comp, amp in enumerate(amps):
        f.u[comp, ix, iy, iz] = amp
        f.u[comp, jx, jy, jz] = np.conj(amp)
    return f


class TestConfigValidation:
    def test_sigma_must_exceed_nine_halves(self):
        with pytest.raises(ValueError):
            small_cfg(sigma=4.0)
        small_cfg(sigma=4.6)  # allowed

    def test_negative_epsilon_rejected(self):
        with pytest.raises(ValueError):
            small_cfg(epsilon=-1.0)

    def test_unknown_profile_rejected(self):
        with pytest.raises(ValueError):
            small_cfg(init_profile="vortex")


class TestInitialData:
    def test_divergence_free_and_normalized(self):
        cfg = small_cfg()
        f = make_initial_data(cfg)
        assert divergence_defect(f) < 1e-10
        assert sobolev_norm(f, cfg.sigma) == pytest.approx(cfg.epsilon, rel=1e-10)
        assert hermitian_defect(f.u) < 1e-13

    def test_seed_determinism_bitwise(self):
        cfg = small_cfg()
        a = make_initial_data(cfg)
        b = make_initial_data(small_cfg())
        assert np.array_equal(a.u, b.u)

    def test_band_limited(self):
        cfg = small_cfg()
        f = make_initial_data(cfg)
        outside = f.u * ~cfg.grid.dealias_mask()
        assert np.abs(outside).max() == 0.0

    def test_mean_mode_zero(self):
        f = make_initial_data(small_cfg())
        assert np.all(f.u[:, 0, 0, 0] == 0.0)

    def test_single_mode_profile(self):
        cfg = small_cfg(init_profile="single_mode", init_mode=(1, 1, 1))
        f = make_initial_data(cfg)
        assert sobolev_norm(f, cfg.sigma) == pytest.approx(cfg.epsilon, rel=1e-12)
        assert divergence_defect(f) < 1e-12

    def test_tilde_pair_profile(self):
        cfg = small_cfg(init_profile="tilde_pair")
        f = make_initial_data(cfg)
        assert sobolev_norm(f, cfg.sigma) == pytest.approx(cfg.epsilon, rel=1e-12)
        assert divergence_defect(f) < 1e-12
        assert hermitian_defect(f.u) < 1e-13
        # content only at k = 0, l != 0 (plus Hermitian partners)
        assert np.abs(f.u[:, cfg.grid.kx_int != 0, :, :]).max() == 0.0
        assert np.abs(f.u[:, :, :, cfg.grid.lz_int == 0]).max() == 0.0
        again = make_initial_data(small_cfg(init_profile="tilde_pair"))
        assert np.array_equal(f.u, again.u)


class TestNonlinearRhsOracle:
    def brute_force_rhs(self, U: SpectralField, t: float, cfg: SimulationConfig) -> np.ndarray:
        from oracles import brute_force_rhs

        return brute_force_rhs(U, t, cfg)

    def test_zero_field(self):
        cfg = small_cfg()
        f = SpectralField.zeros(cfg.grid)
        out = nonlinear_rhs(0.0, f, cfg)
        assert np.all(out.u == 0.0)

    def test_matches_brute_force_on_random_field(self):
        from nscr.spectral import leray_project_moving

        cfg = small_cfg()
        f = make_initial_data(cfg)
        f.u *= 1.0 / cfg.epsilon  # order-one amplitudes stress the quadratic terms
        for t in (0.0, 0.7):
            # the contract requires divergence-free input at the frame time
            ft = leray_project_moving(t, f.at_time(t))
            got = nonlinear_rhs(t, ft, cfg).u
            want = self.brute_force_rhs(ft, t, cfg)
            scale = np.abs(want).max()
            assert np.abs(got - want).max() <= 1e-10 * scale

    def test_matches_brute_force_single_mode(self):
        cfg = small_cfg()
        f = hermitian_pair_field(cfg.grid, 1, 1, 0, (0.2j, 0.1, -0.3))
        f = __import__("nscr.spectral", fromlist=["leray_project_moving"]).leray_project_moving(0.0, f)
        got = nonlinear_rhs(0.0, f, cfg).u
        want = self.brute_force_rhs(f, 0.0, cfg)
        assert np.abs(got - want).max() <= 1e-10 * max(np.abs(want).max(), 1e-30)

    def test_zero_mode_rows_reduce_to_coupled_system(self):
        # with the nonlinearity off, a k=0 mode obeys the rotating zero-frequency system
        cfg = small_cfg(nonlinear=False)
        eta_j, l = 1, 1
        f = hermitian_pair_field(cfg.grid, 0, eta_j, l, (0.5, 0.25j, 0.0))
        # enforce incompressibility eta u2 + l u3 = 0
        eta = eta_j / cfg.grid.L_y
        ix, iy, iz = mode_indices(cfg.grid, 0, eta_j, l)
        f.u[2, ix, iy, iz] = -eta / l * f.u[1, ix, iy, iz]
        jx, jy, jz = mode_indices(cfg.grid, 0, -eta_j, -l)
        f.u[2, jx, jy, jz] = np.conj(f.u[2, ix, iy, iz])
        out = nonlinear_rhs(0.0, f, cfg).u
        beta = cfg.prm.beta
        u1, u2 = f.u[0, ix, iy, iz], f.u[1, ix, iy, iz]
        esq = eta**2 + l**2
        assert out[0, ix, iy, iz] == pytest.approx(-(1 - beta) * u2)
        assert out[1, ix, iy, iz] == pytest.approx(-beta * l**2 / esq * u1)
        assert out[2, ix, iy, iz] == pytest.approx(beta * eta * l / esq * u1)

    def test_band_violation_rejected(self):
        cfg = small_cfg()
        f = SpectralField.zeros(cfg.grid)
        f.u[0, cfg.grid.Nx // 2 - 1, 0, 0] = 1.0  # |k| = 3 > cutoff 2
        with pytest.raises(AliasingError):
            nonlinear_rhs(0.0, f, cfg)


class TestStep:
    def test_zero_fixed_point(self):
        cfg = small_cfg()
        f = SpectralField.zeros(cfg.grid)
        out = step(f, 0.0, 0.1, cfg)
        assert np.all(out.u == 0.0)

    def test_divergence_and_hermitian_preserved(self):
        cfg = small_cfg()
        f = make_initial_data(cfg)
        t = 0.0
        for _ in range(20):
            f = step(f, t, 0.05, cfg)
            t += 0.05
            assert divergence_defect(f) < 1e-10
            assert hermitian_defect(f.u) < 1e-10

    def test_rhs_preserves_divergence_without_projection(self):
        # the tilt of the moving-frame divergence cancels the pressure-term
        # divergence, so even unprojected stepping keeps the constraint
        cfg = small_cfg(reproject=False)
        f = make_initial_data(cfg)
        t = 0.0
        for _ in range(50):
            f = step(f, t, 0.02, cfg)
            t += 0.02
        assert divergence_defect(f) < 1e-8

    def test_third_order_convergence(self):
        cfg = small_cfg(nonlinear=False)
        f0 = make_initial_data(cfg)

        def advance(dt):
            f = f0.copy()
            t = 0.0
            while t < 1.0 - 1e-12:
                f = step(f, t, dt, cfg)
                t += dt
            return f.u

        ref = advance(1.0 / 512)
        errs = [np.abs(advance(dt) - ref).max() for dt in (1.0 / 16, 1.0 / 32, 1.0 / 64)]
        order1 = np.log2(errs[0] / errs[1])
        order2 = np.log2(errs[1] / errs[2])
        assert 2.6 <= order1 <= 3.5
        assert 2.6 <= order2 <= 3.5

    def test_linear_only_matches_mode_engine(self):
        # cross-module oracle: the pde stepper against the per-mode integrator
        cfg = small_cfg(nonlinear=False, prm=PhysicsParams(nu=0.01, beta=2.0))
        g = cfg.grid
        k, j, l = 1, 1, 1
        eta = j / g.L_y
        from nscr.spectral import Wavevector

        w = Wavevector(k, eta, l)
        q0, w0 = 0.4 - 0.2j, 0.3 + 0.1j
        u1, u2, u3 = reconstruct_velocity(w, 0.0, q0, w0)
        f = hermitian_pair_field(g, k, j, l, (u1, u2, u3))
        t, dt = 0.0, 2e-3
        while t < 5.0 - 1e-12:
            f = step(f, t, dt, cfg)
            t += dt
        s0 = NonzeroModeState.from_qw(w, 0.0, cfg.prm, q0, w0)
        s5 = evolve_qk_mode(w, s0, cfg.prm, 5.0, dt_ctrl=1e-12)
        want = np.array(reconstruct_velocity(w, 5.0, s5.q_hat, s5.w_hat))
        ix, iy, iz = mode_indices(g, k, j, l)
        got = f.u[:, ix, iy, iz]
        scale = max(np.abs(want).max(), np.abs(got).max())
        assert np.abs(got - want).max() <= 1e-6 * scale


class TestEnergyBalance:
    def test_instantaneous_balance(self):
        cfg = small_cfg(prm=PhysicsParams(nu=0.02, beta=2.0))
        f = make_initial_data(cfg)
        f.u *= 100.0  # push quadratic terms above roundoff
        dt = 1e-3
        e0, p0, d0 = energy_balance(f, cfg)
        f1 = step(f, 0.0, dt, cfg)
        e1, p1, d1 = energy_balance(f1, cfg)
        measured = (e1 - e0) / dt
        expected = 0.5 * (p0 + d0 + p1 + d1)
        assert abs(measured - expected) <= 1e-8 * max(e0, 1e-300) / dt * dt + 1e-6 * abs(expected) + 1e-9 * e0

    def test_inviscid_energy_accounting_over_unit_time(self):
        cfg = small_cfg(prm=PhysicsParams(nu=0.0, beta=2.0), epsilon=1e-2)
        f = make_initial_data(cfg)
        dt = 5e-4
        t = 0.0
        e0 = energy_balance(f, cfg)[0]
        work = 0.0
        _, p_prev, _ = energy_balance(f, cfg)
        while t < 1.0 - 1e-12:
            f = step(f, t, dt, cfg)
            t += dt
            _, p_now, _ = energy_balance(f, cfg)
            work += 0.5 * dt * (p_prev + p_now)
            p_prev = p_now
        e1 = energy_balance(f, cfg)[0]
        assert abs(e1 - e0 - work) <= 1e-6 * e0


class TestDiagnostics:
    def test_zero_state_row(self):
        cfg = small_cfg()
        row = diagnostics(SpectralField.zeros(cfg.grid), 0.0, cfg)
        for key, val in row.items():
            if key != "t":
                assert val == 0.0

    def test_single_mode_hand_computed(self):
        cfg = small_cfg()
        g = cfg.grid
        k, j, l = 1, 1, 1
        eta = j / g.L_y
        amp = 0.25
        f = hermitian_pair_field(g, k, j, l, (0.0, amp, 0.0))
        row = diagnostics(f, 0.0, cfg)
        p0 = k**2 + eta**2 + l**2
        wN = (1.0 + p0) ** cfg.N
        # two Hermitian partner modes, each |Q| = p |u2|, m = M = 1 at t = 0
        expected = np.sqrt(2 * wN * (p0 * amp) ** 2)
        assert row["mMQ_neq_HN"] == pytest.approx(expected, rel=1e-12)
        assert row["Q0_HN"] == 0.0
        assert row["Uneq_2_HN"] == pytest.approx(np.sqrt(2 * wN * amp**2), rel=1e-12)

    def test_pointwise_bounds_on_initial_data(self):
        cfg = small_cfg()
        f = make_initial_data(cfg)
        row = diagnostics(f, 0.0, cfg)
        assert row["pointwise_violations"] == 0.0

    def test_ledger_accumulation_and_csv(self, tmp_path):
        cfg = small_cfg()
        ledger = EnergyLedger(cfg)
        f = make_initial_data(cfg)
        t = 0.0
        ledger.record(diagnostics(f, t, cfg))
        acc_history = []
        for _ in range(5):
            f = step(f, t, 0.05, cfg)
            t += 0.05
            ledger.record(diagnostics(f, t, cfg))
            acc_history.append(dict(ledger.acc))
        assert all(v >= 0.0 for v in ledger.acc.values())
        # accumulators are nondecreasing in time
        for earlier, later in zip(acc_history, acc_history[1:]):
            assert all(later[c] >= earlier[c] for c in earlier)
        bs = ledger.bootstrap()
        assert set(bs) == {
            "Q_neq", "K_neq", "Q0", "K0",
            "tildeU0_1", "tildeU0_2", "tildeU0_3", "barU0_1", "barU0_3",
        }
        out = tmp_path / "ledger.csv"
        with open(out, "w") as fh:
            ledger.write_csv(fh)
        text = out.read_text()
        assert text.count("\n") >= 6 + len(ledger.columns())
        assert "mMQ_neq_HN" in text


class TestRun:
    def test_zero_epsilon_stable(self):
        cfg = small_cfg(epsilon=0.0, T_end=0.5)
        ledger, verdict = run(cfg)
        assert verdict.kind == "stable"
        assert ledger.max_sup() == 0.0

    def test_small_run_is_stable(self):
        cfg = small_cfg(epsilon=1e-4, T_end=2.0, dt=0.05)
        ledger, verdict = run(cfg)
        assert verdict.kind == "stable"
        assert ledger.max_bootstrap() <= 10 * cfg.epsilon

    def test_resolution_horizon_flagged(self):
        cfg = small_cfg(T_end=50.0, dt=0.5, epsilon=1e-6)
        assert cfg.resolution_horizon() < 50.0
        _, verdict = run(cfg)
        assert "resolution horizon" in verdict.detail

    def test_early_exit_on_bootstrap_violation(self, tmp_path):
        # a checkpointed field much larger than the declared epsilon violates
        # the bootstrap bound immediately; the run must stop early
        cfg = small_cfg(epsilon=1e-3, T_end=50.0, dt=0.05)
        f = make_initial_data(cfg)
        path = tmp_path / "big.nscr"
        save_checkpoint(str(path), f, cfg)
        cfg2 = small_cfg(
            epsilon=cfg.epsilon / 200.0, T_end=50.0, dt=0.05,
            init_profile="file", init_file=str(path), early_exit=True,
        )
        ledger, verdict = run(cfg2)
        assert verdict.kind == "maxtime"
        assert "bootstrap" in verdict.detail
        assert ledger.rows[-1]["t"] < 50.0


class TestCheckpoint:
    def test_roundtrip(self, tmp_path):
        cfg = small_cfg()
        f = make_initial_data(cfg)
        f = step(f, 0.0, 0.1, cfg)
        path = tmp_path / "state.nscr"
        save_checkpoint(str(path), f, cfg)
        g, meta = load_checkpoint(str(path))
        assert np.array_equal(g.u, f.u)
        assert g.frame_time == f.frame_time
        assert meta["nu"] == cfg.prm.nu
        assert meta["seed"] == cfg.seed
        raw = path.read_bytes()
        assert raw.startswith(b"NSCR1")

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.nscr"
        path.write_bytes(b"NOPE!" + b"\x00" * 64)
        with pytest.raises(ValueError):
            load_checkpoint(str(path))

    def test_file_init_profile(self, tmp_path):
        cfg = small_cfg()
        f = make_initial_data(cfg)
        path = tmp_path / "init.nscr"
        save_checkpoint(str(path), f, cfg)
        cfg2 = small_cfg(init_profile="file", init_file=str(path))
        g = make_initial_data(cfg2)
        assert np.array_equal(g.u, f.u)


class TestChooseDt:
    def test_respects_dt_max_and_cfl(self):
        cfg = small_cfg()
        f = make_initial_data(cfg)
        dt = choose_dt(f, 0.0, cfg)
        assert 0 < dt <= cfg.dt_max

    def test_fixed_dt_passthrough(self):
        cfg = small_cfg(dt=0.025)
        f = make_initial_data(cfg)
        assert choose_dt(f, 0.0, cfg) == 0.025

    def test_large_time_does_not_collapse_dt(self):
        # viscously dead high-shear modes must not choke the step size
        cfg = small_cfg(prm=PhysicsParams(nu=0.01, beta=2.0))
        f = make_initial_data(cfg)
        dt_late = choose_dt(f.at_time(500.0), 500.0, cfg)
        assert dt_late > 0.01
