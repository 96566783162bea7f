"""Unit tests for the continuation/Newton solver and patch minimization."""

import numpy as np
import pytest

from otl import fem, mesh as meshmod, oracle, orlicz, solve
from otl.errors import DomainError, SolverError

POWER3 = orlicz.Nonlinearity("power", 3.0, 2.0, 2.0)


@pytest.fixture(scope="module")
def mesh16():
    return meshmod.build_disk_mesh(1.0, 0.5, 1.0 / 16.0)


@pytest.fixture(scope="module")
def solved16(mesh16):
    f = fem.InterfaceData("constant", 1.0)
    u, trace = solve.minimize(mesh16, POWER3, f)
    return f, u, trace


class TestConfig:
    def test_validation(self):
        with pytest.raises(DomainError):
            solve.SolverConfig(delta0=1e-8, delta_min=1e-6)
        with pytest.raises(DomainError):
            solve.SolverConfig(delta_shrink=1.5)
        with pytest.raises(DomainError):
            solve.SolverConfig(armijo_c=0.7)


class TestCG:
    def test_identity(self):
        b = np.arange(1.0, 6.0)
        x = solve.cg_solve(np.eye(5), b, 1e-12)
        assert np.allclose(x, b)

    def test_diagonal(self):
        n = 20
        H = np.diag(np.arange(1.0, n + 1))
        b = np.ones(n)
        x = solve.cg_solve(H, b, 1e-12)
        assert np.allclose(x, 1.0 / np.arange(1.0, n + 1), atol=1e-10)

    def test_random_spd_vs_dense_oracle(self):
        rng = np.random.default_rng(8)
        A = rng.normal(size=(40, 40))
        H = A @ A.T + np.eye(40)
        b = rng.normal(size=40)
        x = solve.cg_solve(H, b, 1e-12, precond_diag=np.diag(H))
        ref = np.linalg.solve(H, b)
        assert np.linalg.norm(x - ref) <= 1e-8 * np.linalg.norm(ref)

    def test_raises_on_indefinite(self):
        H = np.diag([1.0, -1.0])
        with pytest.raises(SolverError):
            solve.cg_solve(H, np.array([0.0, 1.0]), 1e-14)


class TestMinimize:
    def test_zero_load_zero_solution(self, mesh16):
        f0 = fem.InterfaceData("constant", 0.0)
        u, _ = solve.minimize(mesh16, POWER3, f0)
        assert np.abs(u.coeffs).max() <= 1e-9

    def test_residual_postcondition(self, mesh16, solved16):
        f, u, _ = solved16
        cfg = solve.SolverConfig()
        load_norm = np.linalg.norm(fem.interface_load(mesh16, f))
        tol = 1e-9 * max(load_norm, 1.0)
        res = fem.weak_residual(mesh16, POWER3, f, u, cfg.delta_min)
        assert res <= tol

    def test_energy_decreases_within_stages(self, solved16):
        _, _, trace = solved16
        by_stage = {}
        for rec in trace:
            by_stage.setdefault(rec["stage_delta"], []).append(rec["energy"])
        assert by_stage
        for energies in by_stage.values():
            e = np.asarray(energies)
            # strict decrease up to floating-point resolution of the energy
            assert np.all(np.diff(e) <= 4 * np.finfo(float).eps * np.abs(e[:-1]))

    def test_matches_closed_form(self, mesh16, solved16):
        _, u, _ = solved16
        sol = oracle.radial_solution(2, 3.0, 0.5, 1.0, 1.0)
        exact = sol.field(mesh16.vertices[:, 0], mesh16.vertices[:, 1])
        assert np.abs(u.coeffs - exact).max() <= 5e-3

    def test_initial_guess_independence(self, mesh16, solved16):
        f, u, _ = solved16
        rng = np.random.default_rng(7)
        u0 = fem.DiscreteField(mesh16, rng.normal(size=mesh16.n_vertices))
        u2, _ = solve.minimize(mesh16, POWER3, f, u0=u0)
        assert np.abs(u.coeffs - u2.coeffs).max() <= 1e-7

    def test_delta_continuation_stability(self, mesh16, solved16):
        f, _, _ = solved16
        e = []
        for dmin in (1e-6, 1e-7):
            cfg = solve.SolverConfig(delta_min=dmin)
            u, _ = solve.minimize(mesh16, POWER3, f, cfg)
            e.append(fem.assemble_energy(mesh16, POWER3, f, u, 0.0))
        assert abs(e[0] - e[1]) <= 1e-6 * abs(e[0])

    def test_rejects_invalid_model_claim(self, mesh16):
        bad = orlicz.Nonlinearity("power", 3.0, 1.0, 1.5)
        with pytest.raises(DomainError):
            solve.minimize(mesh16, bad, fem.InterfaceData("constant", 1.0))


class TestPatchReplacement:
    def test_affine_data_unchanged(self, mesh16):
        # affine functions have constant gradient, hence minimize the
        # patch energy among fields with the same patch boundary values
        u_bc = fem.interpolate(mesh16, lambda x, y: 0.3 * x + 0.1 * y)
        h, _ = solve.p_harmonic_replacement(mesh16, POWER3, u_bc,
                                            ([0.0, 0.3], 0.2))
        inner = np.abs(h.coeffs - u_bc.coeffs)
        assert inner.max() <= 1e-8

    def test_energy_not_increased(self, mesh16):
        rng = np.random.default_rng(4)
        u_bc = fem.DiscreteField(mesh16, 0.1 * rng.normal(size=mesh16.n_vertices))
        ball = ([0.5, 0.0], 0.2)
        h, _ = solve.p_harmonic_replacement(mesh16, POWER3, u_bc, ball)
        patch = meshmod.ball_patch(mesh16, *ball)
        delta = solve.SolverConfig().delta_min

        def patch_energy(field):
            Du = fem.gradient_field(mesh16, field)[patch]
            m = np.sqrt(np.sum(Du * Du, axis=1) + delta ** 2)
            return float(np.dot(mesh16.areas[patch], orlicz.eval_G(POWER3, m)))

        assert patch_energy(h) <= patch_energy(u_bc) + 1e-12
        # untouched outside the patch
        outside = np.ones(mesh16.n_vertices, dtype=bool)
        outside[np.unique(mesh16.triangles[patch])] = False
        assert np.array_equal(h.coeffs[outside], u_bc.coeffs[outside])
