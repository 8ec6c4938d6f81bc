import math

import numpy as np
import pytest
from scipy.integrate import quad

from pdwave.core import Branch, ConvergenceError, RegionError, make_free_state
from pdwave import freewave as fw
from pdwave import potential as pot


def constant_spec(v=1.0, R=1.0, omega=0.375, x1=5.0, n=201):
    xs = np.linspace(0.0, x1, n)
    return pot.PotentialSpec(
        x_samples=xs, V=np.zeros_like(xs), kx=np.full_like(xs, v), R=R, omega=omega
    )


def linear_spec(x1=1.0, n=201, R=1.0, omega=0.375):
    xs = np.linspace(0.0, x1, n)
    return pot.PotentialSpec(
        x_samples=xs, V=np.zeros_like(xs), kx=1.0 + xs, R=R, omega=omega
    )


class TestArrivalTime:
    def test_constant_speed(self):
        assert pot.arrival_time(constant_spec(), 2.0) == pytest.approx(2.0, abs=1e-10)

    def test_linear_speed_closed_form(self):
        spec = linear_spec()
        assert pot.arrival_time(spec, 1.0) == pytest.approx(math.log(2.0), abs=1e-8)

    def test_double_speed(self):
        spec = constant_spec(v=2.0)
        assert pot.arrival_time(spec, 3.0) == pytest.approx(1.5, abs=1e-10)

    def test_quadrature_matches_scipy(self):
        spec = linear_spec()
        oracle, _ = quad(lambda u: 1.0 / (1.0 + u), 0.0, 0.8)
        assert pot.arrival_time(spec, 0.8) == pytest.approx(oracle, rel=1e-8)

    def test_outside_domain(self):
        with pytest.raises(ValueError):
            pot.arrival_time(constant_spec(), 9.0)

    def test_nonpositive_speed_rejected(self):
        xs = np.linspace(0.0, 1.0, 16)
        with pytest.raises(ValueError):
            pot.PotentialSpec(
                x_samples=xs, V=np.zeros_like(xs), kx=xs - 0.5, R=1.0, omega=0.5
            )


class TestWaves:
    def test_constant_k_degenerates_to_free_wave(self):
        spec = constant_spec()
        state = make_free_state(1.0, 1.0)
        xs = np.linspace(1.0, 4.0, 23)
        free = fw.psi_free(state, xs, 0.5)
        here = pot.psi_potential(spec, Branch.INCOMING, xs, 0.5, x_mp=0.0)
        assert np.max(np.abs(free - here)) < 1e-10
        free_d = fw.prob_density_free(state, xs, 0.5)
        here_d = pot.prob_density_potential(spec, Branch.INCOMING, xs, 0.5, x_mp=0.0)
        assert np.max(np.abs(free_d - here_d)) < 1e-12

    def test_unit_modulus_on_arrival(self):
        spec = linear_spec()
        t_arr = pot.arrival_time(spec, 0.7)
        psi = pot.psi_potential(spec, Branch.INCOMING, 0.7, t_arr)
        assert abs(psi) == pytest.approx(1.0, abs=1e-10)

    def test_phase_integral(self):
        spec = linear_spec()
        t_arr = pot.arrival_time(spec, 1.0)
        psi = pot.psi_potential(spec, Branch.INCOMING, 1.0, t_arr, x_mp=1.0)
        expected = np.exp(1j * (1.5 - spec.omega * t_arr))
        assert psi == pytest.approx(expected, abs=1e-10)

    def test_density_prefactor(self):
        # k doubles between the measurement point and the probe.
        xs = np.linspace(0.0, 1.0, 101)
        spec = pot.PotentialSpec(
            x_samples=xs, V=np.zeros_like(xs), kx=1.0 + xs, R=1.0, omega=0.375
        )
        t_arr = pot.arrival_time(spec, 1.0)
        d = pot.prob_density_potential(spec, Branch.INCOMING, 1.0, t_arr, x_mp=0.0)
        assert d == pytest.approx(0.5, abs=1e-10)

    def test_density_one_on_arrival(self):
        spec = linear_spec()
        t_arr = pot.arrival_time(spec, 0.4)
        assert pot.prob_density_potential(
            spec, Branch.INCOMING, 0.4, t_arr
        ) == pytest.approx(1.0, abs=1e-12)

    def test_region_mismatch(self):
        spec = constant_spec()
        with pytest.raises(RegionError):
            pot.psi_potential(spec, Branch.INCOMING, 1.0, 2.0)
        with pytest.raises(RegionError):
            pot.prob_density_potential(spec, Branch.OUTGOING, 3.0, 1.0)


class TestContinuity:
    def test_constant_speed(self):
        spec = constant_spec()
        grid = fw.Grid1D(2.0, 3.0, 21, 1.0)
        assert pot.continuity_residual(spec, Branch.INCOMING, grid) < 1e-6

    def test_linear_speed(self):
        xs = np.linspace(0.0, 5.0, 401)
        spec = pot.PotentialSpec(
            x_samples=xs, V=np.zeros_like(xs), kx=1.0 + xs, R=1.0, omega=0.375
        )
        grid = fw.Grid1D(2.0, 3.0, 21, 0.5)
        assert pot.continuity_residual(spec, Branch.INCOMING, grid) < 1e-6

    def test_detects_corrupted_rate(self):
        spec = constant_spec()
        grid = fw.Grid1D(2.0, 2.5, 11, 1.0)

        def corrupted_density(x, t):
            # Envelope rate doubled in the time factor only.
            tau = pot.arrival_time(spec, x)
            return np.exp(2.0 * spec.R * t) * np.exp(-spec.R * tau)

        res = pot.continuity_residual(
            spec, Branch.INCOMING, grid, density=corrupted_density
        )
        # The d/dt term contributes 2R*P while the flux term removes only R*P.
        floor = spec.R * float(np.min(corrupted_density(grid.xs(), grid.t)))
        assert res >= 0.9 * floor
        assert res > 0.05

    def test_grid_straddling_seam(self):
        spec = constant_spec()
        grid = fw.Grid1D(0.9, 2.0, 11, 1.0)
        with pytest.raises(RegionError):
            pot.continuity_residual(spec, Branch.INCOMING, grid)


class TestMpLimit:
    def test_constant_k_all_pass(self):
        report = pot.mp_limit_check(constant_spec(), 2.0)
        assert report.D_equals_k_mp
        assert report.R_zero_consistent
        assert report.plane_wave_residual < 1e-12

    def test_linear_k(self):
        report = pot.mp_limit_check(linear_spec(), 1.0)
        assert report.D_equals_k_mp
        assert report.plane_wave_residual < 1e-10

    def test_nonzero_rate_flagged(self):
        report = pot.mp_limit_check(linear_spec(), 1.0, mp_rate=1.0)
        assert not report.R_zero_consistent


class TestSturmLiouville:
    def box(self, n_eigen=6, x1=1.0, k0=0.0, n=64):
        return pot.SLProblem(
            x0=0.0, x_end=x1, kx=np.full(n, k0), V=np.zeros(n), n_eigen=n_eigen
        )

    def test_box_closed_form(self):
        sol = pot.solve_sturm_liouville(self.box(), backend="shooting")
        exact = ((np.arange(6) + 0.5) * np.pi) ** 2 / 2.0
        assert np.max(np.abs(sol.eigenvalues - exact) / exact) < 1e-6
        assert sol.eigenvalues[0] == pytest.approx(1.2337005501361697, rel=1e-6)

    def test_backends_agree(self):
        shoot = pot.solve_sturm_liouville(self.box(), backend="shooting")
        dense = pot.solve_sturm_liouville(self.box(), backend="matrix")
        rel = np.abs(shoot.eigenvalues - dense.eigenvalues) / np.abs(dense.eigenvalues)
        assert np.max(rel) < 1e-6

    def test_constant_k_shifts_spectrum(self):
        base = pot.solve_sturm_liouville(self.box(n_eigen=3), backend="shooting")
        shifted = pot.solve_sturm_liouville(self.box(n_eigen=3, k0=2.0), backend="shooting")
        # hbar^2 k0^2 / 2m = 2 exactly.
        assert np.max(np.abs(shifted.eigenvalues - base.eigenvalues - 2.0)) < 1e-6

    def test_half_line_harmonic(self):
        xs = np.linspace(0.0, 8.0, 128)
        prob = pot.SLProblem(
            x0=0.0, x_end=8.0, kx=np.zeros(128), V=0.5 * xs**2, n_eigen=2
        )
        sol = pot.solve_sturm_liouville(prob, backend="shooting")
        assert sol.eigenvalues[0] == pytest.approx(0.5, abs=1e-3)
        assert sol.eigenvalues[1] == pytest.approx(2.5, abs=1e-3)
        dense = pot.solve_sturm_liouville(prob, backend="matrix")
        assert np.max(np.abs(sol.eigenvalues - dense.eigenvalues)) < 1e-6

    def test_eigenfunctions_orthonormal(self):
        sol = pot.solve_sturm_liouville(self.box(), backend="matrix")
        gram = sol.gram_matrix()
        assert np.max(np.abs(gram - np.eye(6))) < 1e-8

    def test_box_eigenfunction_shape(self):
        sol = pot.solve_sturm_liouville(self.box(n_eigen=1), backend="matrix")
        exact = np.sqrt(2.0) * np.cos(0.5 * np.pi * sol.x)
        overlap = np.trapezoid(sol.eigenfunctions[0] * exact, sol.x)
        assert abs(abs(overlap) - 1.0) < 1e-6

    def test_domain_growth_monotonicity(self):
        eigs = []
        for x1 in (1.0, 1.5, 2.0):
            sol = pot.solve_sturm_liouville(
                self.box(n_eigen=4, x1=x1), backend="matrix", n_grid=1001
            )
            eigs.append(sol.eigenvalues)
        for smaller, larger in zip(eigs[1:], eigs[:-1]):
            assert np.all(smaller <= larger + 1e-12)

    def test_too_many_eigenvalues(self):
        with pytest.raises(ConvergenceError):
            pot.solve_sturm_liouville(self.box(n_eigen=50), backend="matrix", n_grid=26)

    def test_solution_validation(self):
        sol = pot.solve_sturm_liouville(self.box(n_eigen=2), backend="matrix")
        with pytest.raises(ValueError):
            pot.SLSolution(
                eigenvalues=sol.eigenvalues[::-1],
                eigenfunctions=sol.eigenfunctions,
                x=sol.x,
            )

    def test_mode_arrival_times_distinct(self):
        sol = pot.solve_sturm_liouville(self.box(), backend="matrix")
        times = pot.mode_arrival_times(sol.eigenvalues, 1.0)
        assert times.size == np.unique(times).size
        assert np.all(np.diff(times) < 0)  # faster modes arrive sooner


def test_load_potential_tables(tmp_path):
    xs = np.linspace(0.0, 2.0, 51)
    v_path = tmp_path / "v.txt"
    k_path = tmp_path / "k.txt"
    v_lines = ["# x V"] + [f"{float(x)!r} {float(0.5 * x * x)!r}" for x in xs]
    k_lines = ["# x k"] + [f"{float(x)!r} {float(1.0 + x)!r}" for x in xs]
    v_path.write_text("\n".join(v_lines) + "\n")
    k_path.write_text("\n".join(k_lines) + "\n")
    spec = pot.load_potential_tables(v_path, k_path, R=1.0, omega=0.375)
    assert spec.x_samples.size == 51
    assert spec.kx[0] == pytest.approx(1.0)
    assert spec.V[-1] == pytest.approx(2.0)
    assert pot.arrival_time(spec, 2.0) == pytest.approx(math.log(3.0), abs=1e-6)
