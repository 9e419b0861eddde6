import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shielded_euler.eos import ShieldedEOS, nonpolytropic, polytropic, shipped_laws
from shielded_euler.errors import ConfigError, DomainError
from shielded_euler.invariants import (InvariantRegion, RiemannCoords, from_invariants,
                                       generator_H, generator_H_cumulative, h0_polytropic,
                                       h_gap_study, h_table, jacobian_det, region_membership,
                                       to_invariants)

G2 = ShieldedEOS(polytropic(1.0, 2.0), 0.5)

# values from 40-digit mpmath quadrature of c~(s)/(s - delta)
ORACLE = [
    (G2, 1.0, 3.105195509998022056),
    (G2, 2.0, 4.891221158584380468),
    (G2, 0.75, 2.294012083429934191),
    (ShieldedEOS(polytropic(1.0, 1.4), 0.01), 1.0, 4.864078623800476058),
    (ShieldedEOS(nonpolytropic(1.0, 1.6, 0.2), 0.1), 1.0, 4.024625931835671006),
]


@pytest.mark.parametrize("eos,rho,expected", ORACLE)
def test_generator_against_oracle(eos, rho, expected):
    assert generator_H(eos, rho) == pytest.approx(expected, rel=1e-12)
    assert generator_H(eos, rho, method="table") == pytest.approx(expected, rel=1e-8)


def test_generator_zero_at_shield():
    assert generator_H(G2, 0.5) == 0.0


def test_unshielded_closed_form():
    law = polytropic(1 / 3, 3.0)
    assert h0_polytropic(law, 0.8) == pytest.approx(0.8, rel=1e-15)
    eos = ShieldedEOS(law, 0.0)
    assert generator_H(eos, 0.8) == pytest.approx(0.8, rel=1e-12)


def test_invariants_round_trip_example():
    eos = ShieldedEOS(polytropic(1 / 3, 3.0), 0.0)
    c = to_invariants(eos, 0.8, 1.0)
    assert (float(c.z), float(c.w)) == pytest.approx((0.2, 1.8), rel=1e-12)
    rho, u = from_invariants(eos, c)
    assert rho == pytest.approx(0.8, rel=1e-12)
    assert u == pytest.approx(1.0, rel=1e-14)


def test_table_matches_quadrature_everywhere():
    for law in shipped_laws():
        for d in (0.0, 1e-6, 1e-3, 0.5):
            eos = ShieldedEOS(law, d)
            rho = d + np.geomspace(1e-6, 1e3, 60)
            ref = generator_H_cumulative(eos, rho)
            tab = generator_H(eos, rho, method="table")
            assert np.max(np.abs(tab - ref) / ref) < 1e-8


def test_doubling_nodes_changes_little():
    # composite Gauss-Legendre in the regularising variable, N vs 2N panels
    eos = ShieldedEOS(polytropic(1.0, 1.4), 0.01)
    from shielded_euler.invariants import _dH_dt
    f = _dH_dt(eos)
    top = np.sqrt(1.0 - 0.01)
    x, w = np.polynomial.legendre.leggauss(16)

    def composite(n):
        edges = np.linspace(0, top, n + 1)
        a, b = edges[:-1, None], edges[1:, None]
        s = 0.5 * (a + b) + 0.5 * (b - a) * x
        return float(np.sum(0.5 * (b - a) * w * f(s)))

    assert abs(composite(64) - composite(32)) / composite(64) < 1e-10


def test_jacobian_determinant():
    assert jacobian_det(G2, 1.0) == pytest.approx(-2 * np.sqrt(1.75) / 0.5, rel=1e-14)
    with pytest.raises(DomainError):
        jacobian_det(G2, 0.5)


def test_inverse_rejects_crossed_invariants():
    with pytest.raises(DomainError):
        from_invariants(G2, RiemannCoords(1.0, 0.0))


def test_region_membership():
    region = InvariantRegion(-4.0, 4.0, 5.0)
    out = region_membership(region, G2, np.array([1.0, 0.6, 6.0]), np.array([0.0, 3.9, 0.0]))
    assert out["inside"].tolist() == [True, False, False]
    with pytest.raises(ConfigError):
        InvariantRegion(1.0, 0.0, 1.0)


def test_gap_study_ladder_validation():
    with pytest.raises(ConfigError):
        h_gap_study(polytropic(1.0, 2.0), [1e-3, 1e-2], np.geomspace(1e-4, 1, 10))
    with pytest.raises(ConfigError):
        h_gap_study(polytropic(1.0, 2.0), [1e-2, 0.0, 1e-3], np.geomspace(1e-4, 1, 10))


def test_gap_study_trailing_zero_level():
    study = h_gap_study(polytropic(1.0, 2.0), [1e-2, 1e-3, 0.0], np.geomspace(1e-4, 2, 40))
    assert study.sup_gaps[-1] == 0.0
    assert study.sup_gaps[0] > study.sup_gaps[1] > 0


@settings(max_examples=40, deadline=None)
@given(law_idx=st.integers(0, 3), delta=st.sampled_from([0.0, 1e-4, 0.01, 0.3]),
       x=st.floats(1e-5, 50.0), u=st.floats(-5, 5))
def test_round_trip_property(law_idx, delta, x, u):
    eos = ShieldedEOS(shipped_laws()[law_idx], delta)
    rho = delta + x
    coords = to_invariants(eos, rho, u)
    r, v = from_invariants(eos, coords)
    assert r == pytest.approx(rho, rel=1e-10)
    assert v == pytest.approx(u, rel=1e-12, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(law_idx=st.integers(0, 3), delta=st.floats(1e-4, 1.0))
def test_generator_increasing(law_idx, delta):
    eos = ShieldedEOS(shipped_laws()[law_idx], delta)
    rho = delta + np.geomspace(1e-6, 10, 30)
    h = generator_H(eos, rho, method="table")
    assert np.all(np.diff(h) > 0)
    assert h_table(eos) is h_table(eos)
