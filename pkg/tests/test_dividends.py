import math

import pytest

from dualrisk.dividends import (
    DividendQuery,
    dividend_count_pmf,
    dividend_stats,
    expected_single_dividend,
    hitting_probability,
    total_dividends_laplace,
)
from dualrisk.errors import DomainError, ModelError
from dualrisk.functions import Affine, Constant, HyperbolicShift, SqrtShift
from dualrisk.model import DualRiskModel
from dualrisk.ruin import ruin_probability

CLASSIC = DualRiskModel(eta=Constant(1.0), lam=Constant(2.0), gamma=1.0)

# lam = 2*eta, gamma = 1: f(u) = 2(1 - e^{-u}), denominator 2 - e^{-b};
# frozen closed-form substitutions
PHI_12 = 2.0 * (1.0 - math.exp(-1.0)) / (2.0 - math.exp(-2.0))
PHI_22 = 2.0 * (1.0 - math.exp(-2.0)) / (2.0 - math.exp(-2.0))


def q(u=1.0, b=2.0, model=CLASSIC):
    return DividendQuery(model=model, u=u, b=b)


def test_query_validation():
    with pytest.raises(DomainError):
        DividendQuery(model=CLASSIC, u=2.0, b=1.0)
    with pytest.raises(DomainError):
        DividendQuery(model=CLASSIC, u=-1.0, b=1.0)
    with pytest.raises(DomainError):
        DividendQuery(model=CLASSIC, u=1.0, b=1.0)


def test_hitting_probability_classic():
    assert hitting_probability(q()) == pytest.approx(PHI_12, abs=1e-10)
    assert hitting_probability(q()) == pytest.approx(0.67799916322304643, abs=1e-10)


def test_hitting_probability_zero_wealth():
    assert hitting_probability(q(u=0.0)) == 0.0


def test_hitting_probability_far_barrier_is_survival():
    for m in (
        CLASSIC,
        DualRiskModel(eta=Constant(1.0), lam=Affine(0.5, 1.0), gamma=1.0),
        DualRiskModel(eta=Constant(1.0), lam=SqrtShift(2.0, 1.0), gamma=1.0),
    ):
        phi = hitting_probability(DividendQuery(model=m, u=1.0, b=60.0))
        assert phi == pytest.approx(1.0 - ruin_probability(m, 1.0).psi, abs=1e-6)


def test_hitting_probability_monotone():
    us = (0.25, 0.5, 1.0, 1.5)
    vals = [hitting_probability(q(u=u)) for u in us]
    assert vals == sorted(vals)
    bs = (1.5, 2.0, 3.0, 5.0)
    vals = [hitting_probability(q(b=b)) for b in bs]
    assert vals == sorted(vals, reverse=True)


def test_expected_single_dividend():
    assert expected_single_dividend(q()) == pytest.approx(PHI_12, abs=1e-10)
    assert expected_single_dividend(q(u=0.0)) == 0.0
    half = DualRiskModel(eta=Constant(1.0), lam=Constant(3.0), gamma=2.0)
    # doubling gamma halves the mean overshoot
    qq = DividendQuery(model=half, u=1.0, b=2.0)
    assert expected_single_dividend(qq) == pytest.approx(hitting_probability(qq) / 2.0, rel=1e-12)


def test_count_pmf():
    assert dividend_count_pmf(q(u=0.5, b=2.0), 0) == pytest.approx(
        1.0 - hitting_probability(q(u=0.5, b=2.0)), rel=1e-12
    )
    got = dividend_count_pmf(q(), 1)
    assert got == pytest.approx(PHI_12 * (1.0 - PHI_22), abs=1e-9)
    with pytest.raises(DomainError):
        dividend_count_pmf(q(), -1)
    with pytest.raises(DomainError):
        dividend_count_pmf(q(), 1.5)


def test_count_pmf_sums_to_one_and_matches_mean():
    query = q()
    # the geometric factor is ~0.927 here, so 800 terms leave a tail < 1e-25
    pmf = [dividend_count_pmf(query, n) for n in range(800)]
    assert math.fsum(pmf) == pytest.approx(1.0, abs=1e-12)
    stats = dividend_stats(query)
    mean_from_pmf = math.fsum(n * p for n, p in enumerate(pmf))
    assert mean_from_pmf == pytest.approx(stats.expected_count, rel=1e-9)
    assert stats.expected_count == pytest.approx(
        stats.phi_ub / (1.0 - stats.phi_bb), rel=1e-14
    )


def test_stats_frozen_values():
    stats = dividend_stats(q())
    assert stats.phi_ub == pytest.approx(0.67799916322304643, abs=1e-10)
    assert stats.phi_bb == pytest.approx(0.9274211165042463, abs=1e-10)
    assert stats.expected_count == pytest.approx(9.3415485409432275, rel=1e-8)
    assert stats.expected_total == pytest.approx(9.3415485409432275, rel=1e-8)
    assert stats.expected_single == pytest.approx(stats.phi_ub, rel=1e-14)


def test_laplace_trivial_and_limits():
    query = q()
    assert total_dividends_laplace(query, 0.0) == 1.0
    phi = hitting_probability(query)
    assert total_dividends_laplace(query, 1e9) == pytest.approx(1.0 - phi, abs=1e-6)
    with pytest.raises(DomainError):
        total_dividends_laplace(query, -0.1)


def test_laplace_exact_identity():
    # lam = 2*eta, gamma = 1, theta = gamma: the transform telescopes to e^{-u}
    assert total_dividends_laplace(q(u=1.0, b=2.0), 1.0) == pytest.approx(
        math.exp(-1.0), abs=1e-9
    )
    assert total_dividends_laplace(q(u=0.5, b=4.0), 1.0) == pytest.approx(
        math.exp(-0.5), abs=1e-9
    )


def test_laplace_derivative_is_expected_total():
    query = q()
    step = 1e-5
    fd = -(total_dividends_laplace(query, step) - total_dividends_laplace(query, 0.0)) / step
    assert fd == pytest.approx(dividend_stats(query).expected_total, rel=1e-3)


def test_non_integrable_rejected():
    m = DualRiskModel(eta=Constant(1.0), lam=Constant(0.5), gamma=1.0)
    with pytest.raises(ModelError):
        hitting_probability(DividendQuery(model=m, u=1.0, b=2.0))


def test_algebraic_tail_model():
    # ratio gamma + beta/(1+v): far-barrier limit still matches survival
    m = DualRiskModel(eta=Constant(1.0), lam=HyperbolicShift(1.0, 3.0, 1), gamma=1.0)
    phi = hitting_probability(DividendQuery(model=m, u=1.0, b=2.0))
    assert 0.0 < phi < 1.0
    far = hitting_probability(DividendQuery(model=m, u=1.0, b=400.0))
    assert far == pytest.approx(1.0 - ruin_probability(m, 1.0).psi, abs=1e-4)
