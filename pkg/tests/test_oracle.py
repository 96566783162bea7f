"""Unit tests for the closed-form radial solution and its independent check."""

import numpy as np
import pytest

from otl import oracle
from otl.errors import DomainError


class TestClosedForm:
    def test_reference_case(self):
        sol = oracle.radial_solution(2, 3.0, 0.5, 1.0, 1.0)
        assert sol.kappa == pytest.approx(0.5)
        assert sol.A == pytest.approx(-np.sqrt(2.0))
        assert sol.u_inner == pytest.approx(np.sqrt(2.0) - 1.0, rel=1e-14)
        # u(r) = sqrt(2) (1 - sqrt(r)) on the annulus
        r = np.linspace(0.5, 1.0, 11)
        assert np.allclose(sol.u(r), np.sqrt(2.0) * (1.0 - np.sqrt(r)))
        # imposed flux-jump condition
        assert sol.du(0.5 + 1e-12) == pytest.approx(-1.0, rel=1e-5)

    def test_vanishing_datum(self):
        sol = oracle.radial_solution(2, 3.0, 0.5, 1.0, 1e-30)
        r = np.linspace(0.0, 1.0, 20)
        assert np.allclose(sol.u(r), 0.0, atol=1e-14)

    def test_zero_at_outer_boundary(self):
        sol = oracle.radial_solution(2, 3.0, 0.5, 1.0, 2.0)
        assert sol.u(1.0) == 0.0

    def test_constant_inside(self):
        sol = oracle.radial_solution(2, 3.0, 0.5, 1.0, 1.0)
        r = np.linspace(0.0, 0.5, 7)
        assert np.allclose(sol.u(r), sol.u_inner)
        assert np.allclose(sol.du(r), 0.0)

    def test_preconditions(self):
        with pytest.raises(DomainError):
            oracle.radial_solution(1, 3.0, 0.5, 1.0, 1.0)
        with pytest.raises(DomainError):
            oracle.radial_solution(2, 2.0, 0.5, 1.0, 1.0)
        with pytest.raises(DomainError):
            oracle.radial_solution(3, 3.0, 0.5, 1.0, 1.0)  # p = d
        with pytest.raises(DomainError):
            oracle.radial_solution(2, 3.0, 1.5, 1.0, 1.0)
        with pytest.raises(DomainError):
            oracle.radial_solution(2, 3.0, 0.5, 1.0, 0.0)


class TestShooting:
    def test_agrees_with_closed_form(self):
        sol = oracle.radial_solution(2, 3.0, 0.5, 1.0, 1.0)
        r, u, du = oracle.shoot_radial(2, 3.0, 0.5, 1.0, 1.0)
        assert np.abs(u - sol.u(r)).max() <= 1e-8
        # at r = rho the closed form takes the inner branch (du = 0), so
        # compare derivatives strictly outside
        assert np.abs(du[1:] - sol.du(r[1:])).max() <= 1e-8

    def test_3d_profile_monotone(self):
        r, u, du = oracle.shoot_radial(3, 2.5, 0.5, 1.0, 1.0)
        assert np.all(np.diff(u) < 0)
        assert np.all(du < 0)

    def test_flux_jump_recovered(self):
        p, f = 2.5, 3.0
        _, _, du = oracle.shoot_radial(2, p, 0.5, 1.0, f)
        assert du[0] == pytest.approx(-f ** (1.0 / (p - 1.0)), abs=1e-8)

    def test_rejects_coarse_grid(self):
        with pytest.raises(DomainError):
            oracle.shoot_radial(2, 3.0, 0.5, 1.0, 1.0, n_grid=100)
