import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shielded_euler.eos import (PressureLaw, ShieldedEOS, check_assumptions, convexity_residual,
                                epd_lambda_eff, epd_lambda_physical, internal_energy_hat,
                                lu_pressure_and_pollution, nonpolytropic, polytropic,
                                shielded_c2, shielded_pressure, shipped_laws, stiffness,
                                vacuum_derivative_ratio)
from shielded_euler.errors import AssumptionError, DomainError

G2 = ShieldedEOS(polytropic(1.0, 2.0), 0.5)


def test_stiffness_value():
    assert stiffness(polytropic(1.0, 2.0), 0.5) == pytest.approx(0.25, rel=1e-15)


def test_pressure_closed_form_values():
    assert shielded_pressure(G2, 1.0) == pytest.approx(0.5, rel=1e-14)
    assert shielded_pressure(G2, 1.0, method="quad") == pytest.approx(0.5, rel=1e-12)
    assert shielded_pressure(G2, 0.5) == 0.0


def test_sound_speed_values():
    assert shielded_c2(G2, 1.0) == pytest.approx(1.75, rel=1e-15)
    assert shielded_c2(G2, 0.5) == 0.0


def test_unshielded_limit_reproduces_base_law():
    eos = ShieldedEOS(polytropic(1.0, 1.4), 0.0)
    rho = np.geomspace(1e-3, 10, 7)
    np.testing.assert_allclose(eos.pressure(rho), rho**1.4, rtol=1e-15)
    np.testing.assert_allclose(eos.c2(rho), 1.4 * rho**0.4, rtol=1e-15)


def test_nonpolytropic_values_against_high_precision_oracle():
    eos = ShieldedEOS(nonpolytropic(1.0, 1.6, 0.2), 0.1)
    assert eos.pressure(1.0) == pytest.approx(1.037221937852896768, rel=1e-13)
    assert eos.c2(1.0) == pytest.approx(1.805866389865767045, rel=1e-13)


def test_domain_errors():
    with pytest.raises(DomainError):
        G2.pressure(0.4)
    with pytest.raises(DomainError):
        ShieldedEOS(polytropic(), -1.0)
    with pytest.raises(DomainError):
        epd_lambda_eff(G2, 0.5)


def test_assumption_validation():
    with pytest.raises(AssumptionError):
        polytropic(1.0, 0.9)
    with pytest.raises(AssumptionError):
        polytropic(-1.0, 1.4)
    rep = check_assumptions(polytropic(1.0, 2.0))
    assert rep["hyperbolic"] and rep["genuinely_nonlinear"] and rep["polytropic_asymptotics"]


def test_convexity_residual_vanishes_on_shipped_laws():
    for law in shipped_laws():
        for d in (1e-3, 0.1, 0.5):
            rho = d * (1 + np.geomspace(1e-6, 1e4, 64))
            res = convexity_residual(ShieldedEOS(law, d), rho)
            assert np.all(np.abs(res) <= 1e-12 * law.nonlinearity(rho))


def test_epd_index_values():
    assert epd_lambda_eff(G2, 1.0) == pytest.approx(5 / 14, rel=1e-14)
    assert epd_lambda_eff(G2, 0.5 * (1 + 1e-6)) == pytest.approx(0.5, abs=1e-6)
    # the physical-density variant blows up at the shield
    assert epd_lambda_physical(G2, 0.5 * (1 + 1e-9)) > 1e8


def test_internal_energy_closed_form_gamma2():
    # for kappa=1, gamma=2 the energy is rho_hat + 2 delta log(1 + rho_hat/delta)
    for r in (1e-6, 0.5, 3.0):
        exact = r + 2 * 0.5 * math.log1p(r / 0.5)
        assert internal_energy_hat(G2, r) == pytest.approx(exact, rel=1e-11)


def test_internal_energy_unshielded():
    eos = ShieldedEOS(polytropic(1.0, 2.0), 0.0)
    assert internal_energy_hat(eos, 1.0) == pytest.approx(1.0, rel=1e-12)


def test_internal_energy_nonpolytropic_oracle():
    eos = ShieldedEOS(nonpolytropic(1.0, 1.6, 0.2), 0.1)
    assert internal_energy_hat(eos, 0.5) == pytest.approx(1.286339002547725451, rel=1e-11)


def test_lu_pollution_closed_form():
    law = polytropic(1.0, 2.0)
    rho = np.array([0.4])
    p1, g = lu_pressure_and_pollution(law, 0.1, rho)
    assert g[0] == pytest.approx(6 * 0.4 - 20 * 0.1, rel=1e-13)
    assert p1[0] == pytest.approx(0.04, rel=1e-12)


def test_vacuum_ratio_nan_for_linear_law():
    lin = PressureLaw("polytropic", 1.0, 1.0)
    assert np.isnan(vacuum_derivative_ratio(lin, np.array([0.5]))).all()


@settings(max_examples=60, deadline=None)
@given(law_idx=st.integers(0, 3), delta=st.floats(1e-4, 1.0),
       logh=st.floats(-14, 2))
def test_offset_forms_match_closed_forms(law_idx, delta, logh):
    eos = ShieldedEOS(shipped_laws()[law_idx], delta)
    h = delta * 10.0**logh
    c2 = float(eos.c2_offset(h))
    assert c2 >= 0
    if logh > -1:
        rho = delta + h
        assert c2 == pytest.approx(float(eos.c2(rho)), rel=1e-9)
        assert float(eos.pressure_offset(h)) == pytest.approx(
            float(eos.pressure(rho, method="antiderivative")), rel=1e-9, abs=1e-300)


@settings(max_examples=40, deadline=None)
@given(law_idx=st.integers(0, 3), delta=st.floats(1e-3, 0.5), a=st.floats(1e-6, 50),
       b=st.floats(1e-6, 50))
def test_shielded_pressure_is_increasing(law_idx, delta, a, b):
    eos = ShieldedEOS(shipped_laws()[law_idx], delta)
    lo, hi = sorted((a, b))
    if hi - lo < 1e-9 * hi:
        return
    assert eos.pressure_offset(hi * delta) > eos.pressure_offset(lo * delta)


@settings(max_examples=30, deadline=None)
@given(law_idx=st.integers(0, 3), delta=st.floats(1e-3, 0.5), x=st.floats(0.3, 100))
def test_quadrature_agrees_with_closed_form(law_idx, delta, x):
    eos = ShieldedEOS(shipped_laws()[law_idx], delta)
    rho = delta * (1 + x)
    assert float(eos.pressure(rho, method="quad")) == pytest.approx(float(eos.pressure(rho)),
                                                                    rel=1e-10)
