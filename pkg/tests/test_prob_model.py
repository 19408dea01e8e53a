import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cogmac.errors import DomainError
from cogmac.prob_model import (
    STATES,
    ModelParams,
    TableMode,
    build_joint,
    conditional_entropies,
    dp_dmu,
    dp_drho,
    event_probs,
    p_mu_rho,
    pairwise_correlation,
)

unit = st.floats(0.0, 1.0, allow_nan=False)
interior = st.floats(0.01, 0.99, allow_nan=False)


def cell(joint, n_on):
    # cell value for any state with n_on switches on (law is exchangeable)
    return joint[next(s for s in STATES if sum(s) == n_on)]


def direct_entropy(probs):
    return -sum(p * math.log2(p) for p in probs if p > 0)


class TestBuildJoint:
    def test_mu_zero_forces_all_on(self):
        j = build_joint(0.0, 0.3)
        assert j[1, 1, 1] == 1.0
        assert np.sum(j.cells) - j[1, 1, 1] == 0.0

    def test_independent_fair_coins(self):
        j = build_joint(0.5, 0.0, "verbatim")
        np.testing.assert_allclose(j.cells, 0.125, atol=1e-15)

    def test_verbatim_half_half(self):
        j = build_joint(0.5, 0.5, TableMode.VERBATIM)
        assert [cell(j, k) for k in range(4)] == pytest.approx([0.3125, 0.09375, 0.09375, 0.28125], abs=1e-15)
        assert j.normalization_defect == pytest.approx(0.15625, abs=1e-15)

    def test_consistent_half_half(self):
        j = build_joint(0.5, 0.5)
        assert [cell(j, k) for k in range(4)] == pytest.approx([0.34375, 0.03125, 0.09375, 0.28125], abs=1e-15)
        assert abs(j.normalization_defect) < 1e-15

    @pytest.mark.parametrize("mu,rho", [(-0.1, 0.0), (1.1, 0.0), (0.5, -1e-3), (0.5, 1.5), (math.nan, 0.2)])
    def test_out_of_range(self, mu, rho):
        with pytest.raises(DomainError):
            build_joint(mu, rho)

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            build_joint(0.5, 0.5, "approximate")

    @settings(max_examples=200, deadline=None)
    @given(mu=unit, rho=unit)
    def test_consistent_is_a_distribution(self, mu, rho):
        j = build_joint(mu, rho)
        assert np.all(j.cells >= 0)
        assert abs(np.sum(j.cells) - 1.0) <= 1e-12
        for axis in range(3):
            assert j.marginal_on(axis) == pytest.approx(1.0 - mu, abs=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(mu=interior, rho=unit)
    def test_consistent_correlations(self, mu, rho):
        j = build_joint(mu, rho)
        for pair in [("t1", "t2"), ("t1", "r"), ("t2", "r")]:
            corr = pairwise_correlation(j, pair)
            assert not corr.degenerate
            assert corr.value == pytest.approx(rho, abs=1e-9)

    @pytest.mark.parametrize("rho", [0.0, 1.0])
    @pytest.mark.parametrize("mu", np.linspace(0, 1, 11))
    def test_modes_agree_at_rho_extremes(self, mu, rho):
        a = build_joint(mu, rho, "verbatim").cells
        b = build_joint(mu, rho, "consistent").cells
        np.testing.assert_allclose(a, b, atol=1e-12, rtol=0)

    def test_defect_is_recorded_not_hidden(self):
        j = build_joint(0.3, 0.4, "verbatim")
        assert j.normalization_defect == pytest.approx(np.sum(j.cells) - 1.0, abs=1e-15)
        assert np.sum(j.normalized()) == pytest.approx(1.0, abs=1e-15)


class TestModelParams:
    def test_defaults(self):
        p = ModelParams(0.1, 0.9)
        assert (p.p1_avg, p.p2_avg, p.dwell_n, p.i_sq) == (1.0, 1.0, 100, 10.0)
        assert p.table_mode is TableMode.CONSISTENT

    @pytest.mark.parametrize(
        "kwargs,field",
        [
            (dict(mu=2.0, rho=0), "mu"),
            (dict(mu=0.5, rho=-1), "rho"),
            (dict(mu=0.5, rho=0, p1_avg=-1), "p1_avg"),
            (dict(mu=0.5, rho=0, p2_avg=-1), "p2_avg"),
            (dict(mu=0.5, rho=0, dwell_n=0.5), "dwell_n"),
            (dict(mu=0.5, rho=0, i_sq=0.9), "i_sq"),
        ],
    )
    def test_validation_names_field(self, kwargs, field):
        with pytest.raises(DomainError) as err:
            ModelParams(**kwargs)
        assert err.value.field == field


class TestEvents:
    def test_uniform(self):
        ev = event_probs(build_joint(0.5, 0.0))
        assert (ev.pa, ev.pb, ev.pc) == pytest.approx((0.125,) * 3)
        assert (ev.pd, ev.pe, ev.pf) == pytest.approx((0.25,) * 3)

    def test_all_on(self):
        ev = event_probs(build_joint(0.0, 0.0))
        assert (ev.pa, ev.pb, ev.pc, ev.pd, ev.pe, ev.pf) == (0, 0, 1, 0, 0, 1)

    def test_consistent_half_half(self):
        ev = event_probs(build_joint(0.5, 0.5))
        expected = (0.09375, 0.09375, 0.28125, 0.125, 0.125, 0.375)
        assert (ev.pa, ev.pb, ev.pc, ev.pd, ev.pe, ev.pf) == pytest.approx(expected, abs=1e-15)

    @settings(max_examples=150, deadline=None)
    @given(mu=unit, rho=unit)
    def test_event_invariants(self, mu, rho):
        j = build_joint(mu, rho)
        ev = event_probs(j)
        assert ev.pa == ev.pb and ev.pd == ev.pe
        assert ev.pc <= ev.pf + 1e-15 and ev.pa <= ev.pd + 1e-15
        assert ev.pf == pytest.approx(ev.pc + j[1, 1, 0], abs=1e-15)
        assert ev.pd == pytest.approx(ev.pa + j[1, 0, 0], abs=1e-15)
        others = j[0, 0, 1] + float(np.sum(j.cells[:, :, 0]))
        assert ev.pa + ev.pb + ev.pc + others == pytest.approx(1.0, abs=1e-12)
        assert ev.effective == pytest.approx(p_mu_rho(mu, rho), abs=1e-12)


class TestEffectiveProbability:
    @pytest.mark.parametrize("rho", [0.0, 0.4, 1.0])
    def test_endpoints(self, rho):
        assert p_mu_rho(0.0, rho) == 1.0
        assert p_mu_rho(1.0, rho) == 0.0

    def test_half_independent(self):
        assert p_mu_rho(0.5, 0.0) == pytest.approx(0.375, abs=1e-15)

    @settings(max_examples=200, deadline=None)
    @given(mu=unit, rho=unit)
    def test_simplified_form(self, mu, rho):
        assert p_mu_rho(mu, rho) == pytest.approx((1 - (1 - rho) ** 2 * mu**2) * (1 - mu), abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(mu=st.floats(0.001, 0.999), rho=st.floats(0.001, 0.999))
    def test_derivatives_by_central_differences(self, mu, rho):
        h = 1e-4
        fd_mu = (p_mu_rho(min(mu + h, 1), rho) - p_mu_rho(max(mu - h, 0), rho)) / (min(mu + h, 1) - max(mu - h, 0))
        fd_rho = (p_mu_rho(mu, min(rho + h, 1)) - p_mu_rho(mu, max(rho - h, 0))) / (min(rho + h, 1) - max(rho - h, 0))
        assert fd_mu == pytest.approx(dp_dmu(mu, rho), abs=1e-6)
        assert fd_rho == pytest.approx(dp_drho(mu, rho), abs=1e-6)


class TestEntropies:
    @pytest.mark.parametrize("mu", [0.0, 0.3, 0.5, 1.0])
    def test_full_correlation(self, mu):
        h = conditional_entropies(build_joint(mu, 1.0))
        assert h[:3] == (0.0, 0.0, 0.0)

    def test_independent_fair(self):
        h = conditional_entropies(build_joint(0.5, 0.0))
        assert h.h_t1_given_r == pytest.approx(1.0, abs=1e-12)
        assert h.h_t2_given_r == pytest.approx(1.0, abs=1e-12)
        assert h.h_t12_given_r == pytest.approx(2.0, abs=1e-12)
        assert not h.renormalized

    def test_direct_summation_oracle(self):
        j = build_joint(0.5, 0.5)
        c = j.cells
        h1 = h12 = 0.0
        for r in (0, 1):
            pr = c[:, :, r].sum()
            h1 += pr * direct_entropy([c[t, :, r].sum() / pr for t in (0, 1)])
            h12 += pr * direct_entropy([c[a, b, r] / pr for a, b in itertools.product((0, 1), repeat=2)])
        got = conditional_entropies(j)
        assert got.h_t1_given_r == pytest.approx(h1, abs=1e-12)
        assert got.h_t2_given_r == pytest.approx(h1, abs=1e-12)
        assert got.h_t12_given_r == pytest.approx(h12, abs=1e-12)

    def test_verbatim_defect_flags_renormalization(self):
        assert conditional_entropies(build_joint(0.5, 0.5, "verbatim")).renormalized


class TestCorrelation:
    def test_uniform_is_uncorrelated(self):
        assert pairwise_correlation(build_joint(0.5, 0.0)).value == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("pair", [("t1", "t2"), ("r", "t1"), ("t2", "r")])
    def test_full_correlation(self, pair):
        assert pairwise_correlation(build_joint(0.4, 1.0), pair).value == pytest.approx(1.0, abs=1e-12)

    def test_direct_moments(self):
        j = build_joint(0.3, 0.6)
        c = j.cells
        e1 = c[1].sum()
        e2 = c[:, 1].sum()
        e12 = c[1, 1].sum()
        direct = (e12 - e1 * e2) / math.sqrt(e1 * (1 - e1) * e2 * (1 - e2))
        assert direct == pytest.approx(0.6, abs=1e-9)
        assert pairwise_correlation(j).value == pytest.approx(direct, abs=1e-12)

    @pytest.mark.parametrize("mu", [0.0, 1.0])
    def test_degenerate_marginal(self, mu):
        corr = pairwise_correlation(build_joint(mu, 0.5))
        assert corr == (0.0, True)

    def test_unknown_pair(self):
        with pytest.raises(DomainError):
            pairwise_correlation(build_joint(0.5, 0.5), ("t1", "t3"))
