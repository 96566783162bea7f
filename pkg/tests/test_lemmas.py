"""Unit tests for the explicit-constant inequalities and their searches."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from otl import lemmas
from otl.errors import DomainError


class TestSerrinBound:
    def test_single_term_tight(self):
        # z^2 <= 3z  =>  z <= 3; the bound is exactly 3
        assert lemmas.serrin_bound(2.0, [(3.0, 1.0)]) == pytest.approx(3.0)

    def test_two_terms_covers_golden_ratio(self):
        # z^2 <= 1 + z  =>  z <= golden ratio; bound 2^1 * (1 + 1) = 4
        bound = lemmas.serrin_bound(2.0, [(1.0, 0.0), (1.0, 1.0)])
        golden = (1.0 + np.sqrt(5.0)) / 2.0
        assert bound == pytest.approx(4.0)
        assert bound >= golden

    def test_scaling_homogeneity(self):
        # all q_i = 0: doubling every a_i scales the bound by 2^(1/p)
        terms = [(1.0, 0.0), (2.0, 0.0)]
        doubled = [(2.0, 0.0), (4.0, 0.0)]
        b1 = lemmas.serrin_bound(3.0, terms)
        b2 = lemmas.serrin_bound(3.0, doubled)
        assert b2 == pytest.approx(2.0 ** (1.0 / 3.0) * b1, rel=1e-12)

    def test_degenerate_equality_case(self):
        # z^p <= a  <=>  z <= a^(1/p); N = 1 so the prefactor is 1
        assert lemmas.serrin_bound(4.0, [(16.0, 0.0)]) == pytest.approx(2.0)

    def test_preconditions(self):
        with pytest.raises(DomainError):
            lemmas.serrin_bound(2.0, [(1.0, 2.0)])  # q = p
        with pytest.raises(DomainError):
            lemmas.serrin_bound(2.0, [(-1.0, 0.0)])
        with pytest.raises(DomainError):
            lemmas.serrin_bound(0.0, [(1.0, 0.0)])

    @given(st.floats(min_value=0.1, max_value=10.0),
           st.floats(min_value=0.0, max_value=0.9))
    @settings(max_examples=50, deadline=None)
    def test_constraint_root_below_bound(self, a, q_frac):
        p = 2.5
        q = q_frac * p
        y = lemmas.constraint_log_root(p, np.log([a]), [q])
        assert y <= np.log(lemmas.serrin_bound(p, [(a, q)])) + 1e-9


class TestSerrinSearch:
    def test_no_violations_p3(self):
        rep = lemmas.check_serrin(3.0, n_trials=20_000, seed=1)
        assert rep["violations"] == []
        assert rep["worst_log_margin"] > -1e-7

    def test_rejects_tiny_trial_count(self):
        with pytest.raises(DomainError):
            lemmas.check_serrin(3.0, n_trials=100)


class TestIterationLemma:
    def test_power_phi_passes(self):
        inst = lemmas.IterationInstance(C1=1.0, alpha=1.0, beta=0.5, C2=1.0,
                                        mu=0.0, R0=1.0,
                                        phi=lambda r: r ** 0.5)
        res = lemmas.iterate_phi(inst)
        assert res["pass"]
        assert 0 < res["theta"] < 1
        assert res["mu0"] == pytest.approx(res["theta"] ** inst.alpha / 2.0)

    def test_extremal_recursion_passes_with_slack(self):
        inst = lemmas.IterationInstance(C1=2.0, alpha=1.2, beta=0.4, C2=0.7,
                                        mu=0.0, R0=1.0)
        c1 = max(inst.C1, 1.0)
        delta = 0.5 * (inst.alpha + inst.beta)
        theta = (2 * c1) ** (-1.0 / (inst.alpha - delta))
        inst.phi = lemmas.extremal_phi(inst, theta, delta)
        res = lemmas.iterate_phi(inst, check_hyp=False)
        assert res["pass"]
        # measured growth constant stays at most 10% above the proof value
        rs = 1.0 * np.logspace(-5, 0, 60)
        ratio = max(inst.phi(r) / (res["C4"] * r ** inst.beta) for r in rs)
        assert ratio <= 1.1

    def test_mu_above_threshold_rejected(self):
        inst = lemmas.IterationInstance(C1=1.0, alpha=1.0, beta=0.5, C2=1.0,
                                        mu=0.0, R0=1.0, phi=lambda r: r ** 0.5)
        mu0 = lemmas.iterate_phi(inst)["mu0"]
        inst_bad = lemmas.IterationInstance(C1=1.0, alpha=1.0, beta=0.5, C2=1.0,
                                            mu=1.5 * mu0, R0=1.0,
                                            phi=lambda r: r ** 0.5)
        with pytest.raises(DomainError):
            lemmas.iterate_phi(inst_bad)

    def test_parameter_validation(self):
        with pytest.raises(DomainError):
            lemmas.IterationInstance(C1=1.0, alpha=0.5, beta=0.5)  # beta >= alpha
        with pytest.raises(DomainError):
            lemmas.IterationInstance(C1=-1.0, alpha=1.0, beta=0.5)
        with pytest.raises(DomainError):
            lemmas.IterationInstance(C1=1.0, alpha=1.0, beta=0.5, sigma=0.9)

    def test_hypothesis_check_detects_violation(self):
        # phi jumping at small r cannot satisfy the growth hypothesis
        inst = lemmas.IterationInstance(C1=1.0, alpha=1.0, beta=0.5, C2=0.0,
                                        mu=0.0, R0=1.0,
                                        phi=lambda r: 1.0 if r < 0.5 else 2.0)
        assert not lemmas.check_hypothesis(inst)
