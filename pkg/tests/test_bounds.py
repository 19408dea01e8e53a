import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cogmac.bounds import (
    PowerAllocation,
    gap_spec,
    inner_region,
    max_sum_rate,
    optimal_allocation,
    oracle_max_sum_rate,
    outer1_constraints,
    outer1_region,
    outer2_constraints,
    outer2_region,
    sum_rate_objective,
)
from cogmac.errors import DomainError, NoTransmissionError
from cogmac.geometry import PentagonConstraints, RatePair, contains, hausdorff, pentagon, support
from cogmac.prob_model import EventProbs, ModelParams

LOG3 = math.log2(3)
# 0.375 * log2(1 + 2 / 0.375), evaluated independently of the library
SUM_HALF_ZERO = 0.375 * math.log2(1 + 2 / 0.375)
BOUNDARY_EVENTS = EventProbs(pa=0.4, pb=0.05, pc=0.05, pd=0.4, pe=0.05, pf=0.05)


def mac_pentagon(p1=1.0, p2=1.0):
    return pentagon(PentagonConstraints(math.log2(1 + p1), math.log2(1 + p2), math.log2(1 + p1 + p2)))


class TestOuter1:
    def test_all_on_is_classical_mac(self):
        region = outer1_region(ModelParams(0.0, 0.0), 51)
        assert hausdorff(region, mac_pentagon()) <= 1e-12

    def test_all_off_is_origin(self):
        assert outer1_region(ModelParams(1.0, 0.3)).vertices == (RatePair(0.0, 0.0),)

    def test_sum_rate_vertex(self):
        region = outer1_region(ModelParams(0.5, 0.0))
        assert SUM_HALF_ZERO == pytest.approx(0.9986118797709109, abs=1e-15)
        assert support(region, (1, 1)) == pytest.approx(SUM_HALF_ZERO, abs=1e-4)

    def test_constraints_match_manual(self):
        ev = ModelParams(0.5, 0.0).events()
        alloc = PowerAllocation(p1a=4, p2b=2, p1c=4, p2c=6)
        c = outer1_constraints(ev, alloc)
        assert c.c1 == pytest.approx(0.125 * (math.log2(5) + math.log2(5)))
        assert c.c2 == pytest.approx(0.125 * (math.log2(3) + math.log2(7)))
        assert c.c12 == pytest.approx(0.125 * (math.log2(5) + math.log2(3) + math.log2(11)))

    def test_low_resolution_rejected(self):
        with pytest.raises(DomainError):
            outer1_region(ModelParams(0.5, 0.0), 1)


class TestOuter2:
    def test_max_power_individual_bound(self):
        region = outer2_region(ModelParams(0.5, 0.0))
        assert region.r1_max == pytest.approx(0.25 * math.log2(1 + 1 / 0.5), abs=1e-12)
        assert region.r1_max == pytest.approx(0.396240625, abs=1e-9)

    def test_hull_is_max_power_pentagon(self):
        ev = ModelParams(0.3, 0.4).events()
        region = outer2_region(ModelParams(0.3, 0.4), 21)
        c = outer2_constraints(ev, 1 / (ev.pd + ev.pf), 1 / (ev.pe + ev.pf))
        assert hausdorff(region, pentagon(c)) <= 1e-12

    def test_all_on(self):
        assert hausdorff(outer2_region(ModelParams(0.0, 0.7), 11), mac_pentagon()) <= 1e-12

    @pytest.mark.parametrize("mu", [0.1, 0.5, 0.9])
    def test_full_correlation_matches_outer1(self, mu):
        params = ModelParams(mu, 1.0)
        assert hausdorff(outer1_region(params), outer2_region(params)) <= 1e-6


class TestInner:
    @pytest.mark.parametrize("mu", [0.2, 0.6])
    def test_full_correlation_equals_outer2(self, mu):
        params = ModelParams(mu, 1.0)
        assert inner_region(params).vertices == outer2_region(params).vertices

    def test_unit_dwell_gap(self):
        gap = gap_spec(ModelParams(0.5, 0.0, dwell_n=1))
        assert gap.d_r1 == pytest.approx(0.125, abs=1e-15)
        assert gap.d_r2 == pytest.approx(0.125, abs=1e-15)
        assert gap.d_sum == pytest.approx(0.125 * 2, abs=1e-15)
        inner = inner_region(ModelParams(0.5, 0.0, dwell_n=1))
        assert inner.r1_max == pytest.approx(0.396240625 - 0.125, abs=1e-9)

    def test_long_dwell_closes_gap(self):
        params = ModelParams(0.5, 0.0, dwell_n=1e6)
        d = hausdorff(inner_region(params), outer2_region(params))
        assert d <= 3e-6
        assert d <= (0.125 + 0.125 + 2 * 0.125) / 1e6 + 1e-12

    def test_entropy_cap_binds_for_short_dwell(self):
        params = ModelParams(0.5, 0.5, dwell_n=1)
        gap = gap_spec(params)
        ev = params.events()
        assert gap.d_r1 < ev.pa  # conditional entropy below 1 bit wins over 1/N = 1


class TestAllocation:
    def test_symmetric_half(self):
        a = optimal_allocation(ModelParams(0.5, 0.0))
        assert (a.p1a, a.p2b) == pytest.approx((16 / 3, 16 / 3), abs=1e-12)
        assert (a.p1c, a.p2c) == pytest.approx((8 / 3, 8 / 3), abs=1e-12)
        assert not a.fallback
        assert 0.125 * a.p1a + 0.125 * a.p1c == pytest.approx(1.0, abs=1e-12)

    def test_all_on(self):
        a = optimal_allocation(ModelParams(0.0, 0.0))
        assert (a.p1c, a.p2c) == (1.0, 1.0)

    def test_no_transmission(self):
        with pytest.raises(NoTransmissionError):
            optimal_allocation(ModelParams(1.0, 0.0))

    def test_boundary_fallback_matches_oracle(self):
        params = ModelParams(0.5, 0.0, p1_avg=0.1, p2_avg=1.0)
        a = optimal_allocation(params, events=BOUNDARY_EVENTS)
        assert a.fallback
        assert a.p1c == 0.0 and a.p1a == pytest.approx(0.25)
        assert a.outer1_feasible(BOUNDARY_EVENTS, 0.1, 1.0)
        value = sum_rate_objective(BOUNDARY_EVENTS, a)
        oracle = oracle_max_sum_rate(params, events=BOUNDARY_EVENTS)
        assert value == pytest.approx(oracle.value, abs=1e-6)
        # the interior closed form overstates the optimum when a component clamps
        assert max_sum_rate(params, events=BOUNDARY_EVENTS) > value

    @settings(max_examples=60, deadline=None)
    @given(
        mu=st.floats(0.0, 0.99),
        rho=st.floats(0.0, 1.0),
        p1=st.floats(0.01, 10.0),
        p2=st.floats(0.01, 10.0),
    )
    def test_feasible_and_saturating(self, mu, rho, p1, p2):
        params = ModelParams(mu, rho, p1, p2)
        ev = params.events()
        a = optimal_allocation(params)
        assert min(a.p1a, a.p2b, a.p1c, a.p2c) >= 0
        assert a.outer1_feasible(ev, p1, p2)
        if ev.pa > 0 or ev.pc > 0:
            assert ev.pa * a.p1a + ev.pc * a.p1c == pytest.approx(p1, abs=1e-9)
        if ev.pb > 0 or ev.pc > 0:
            assert ev.pb * a.p2b + ev.pc * a.p2c == pytest.approx(p2, abs=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(
        mu=st.floats(0.05, 0.95),
        rho=st.floats(0.0, 1.0),
        t1=st.floats(0.0, 1.0),
        t2=st.floats(0.0, 1.0),
    )
    def test_dominates_sampled_feasible_allocations(self, mu, rho, t1, t2):
        params = ModelParams(mu, rho)
        ev = params.events()
        sampled = PowerAllocation(
            p1a=t1 / ev.pa if ev.pa else 0,
            p2b=t2 / ev.pb if ev.pb else 0,
            p1c=(1 - t1) / ev.pc if ev.pc else 0,
            p2c=(1 - t2) / ev.pc if ev.pc else 0,
        )
        assert max_sum_rate(params) >= sum_rate_objective(ev, sampled) - 1e-12


class TestMaxSumRate:
    def test_endpoints(self):
        assert max_sum_rate(ModelParams(0.0, 0.0)) == pytest.approx(LOG3, abs=1e-15)
        assert max_sum_rate(ModelParams(1.0, 0.5)) == 0.0

    def test_full_correlation(self):
        assert max_sum_rate(ModelParams(0.5, 1.0)) == pytest.approx(0.5 * math.log2(5), abs=1e-15)

    @pytest.mark.parametrize("rho", [0.0, 0.5, 0.9])
    def test_non_increasing_in_mu(self, rho):
        values = [max_sum_rate(ModelParams(mu, rho)) for mu in np.linspace(0, 1, 21)]
        assert all(b <= a + 1e-15 for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("mu", [0.1, 0.5, 0.9])
    def test_non_decreasing_in_rho(self, mu):
        values = [max_sum_rate(ModelParams(mu, rho)) for rho in np.linspace(0, 1, 21)]
        assert all(b >= a - 1e-15 for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("mu,rho", [(0.1, 0.0), (0.5, 0.0), (0.3, 0.6), (0.8, 0.2)])
    def test_outer1_support_below_closed_form(self, mu, rho):
        params = ModelParams(mu, rho)
        s = support(outer1_region(params), (1, 1))
        assert max_sum_rate(params) >= s - 1e-4
        assert s == pytest.approx(max_sum_rate(params), abs=1e-4)


class TestOracle:
    def test_half_zero(self):
        res = oracle_max_sum_rate(ModelParams(0.5, 0.0))
        assert res.value == pytest.approx(SUM_HALF_ZERO, abs=1e-6)
        best = optimal_allocation(ModelParams(0.5, 0.0))
        for field in ("p1a", "p2b", "p1c", "p2c"):
            assert getattr(res.allocation, field) == pytest.approx(getattr(best, field), abs=1e-4)

    def test_all_on(self):
        assert oracle_max_sum_rate(ModelParams(0.0, 0.0)).value == pytest.approx(LOG3, abs=1e-9)

    def test_asymmetric_budgets(self):
        params = ModelParams(0.3, 0.6, p1_avg=2.0, p2_avg=0.5)
        assert oracle_max_sum_rate(params).value == pytest.approx(max_sum_rate(params), abs=1e-6)

    def test_small_grid_rejected(self):
        with pytest.raises(DomainError):
            oracle_max_sum_rate(ModelParams(0.5, 0.0), grid=5)


@pytest.mark.parametrize("mu,rho", list(itertools.product([0.05, 0.3, 0.7, 0.95], [0.0, 0.4, 0.9])))
def test_containment_chain(mu, rho):
    params = ModelParams(mu, rho)
    o1, o2, inner = outer1_region(params, 61), outer2_region(params, 61), inner_region(params)
    assert contains(o1, o2, 1e-9).holds
    assert contains(o2, inner, 1e-9).holds


def test_verbatim_mode_runs_with_defect():
    params = ModelParams(0.5, 0.5, table_mode="verbatim")
    assert params.joint().normalization_defect == pytest.approx(0.15625)
    assert outer2_region(params, 11).r1_max > 0
