import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdwave.core import (
    Branch,
    EigenRecord,
    FreeWaveParams,
    PhysicalConstants,
    dispersion_omega,
    make_free_state,
)


def test_canonical_state():
    s = make_free_state(1.0, 1.0)
    assert s.k == 1.0
    assert s.omega == pytest.approx(0.375, abs=1e-15)
    assert s.branch is Branch.INCOMING


def test_plane_wave_limit():
    s = make_free_state(1.0, 0.0)
    assert s.k == 1.0
    assert s.omega == pytest.approx(0.5, abs=1e-15)


def test_fast_state():
    s = make_free_state(2.0, 2.0)
    assert s.k == 2.0
    assert s.omega == pytest.approx(1.875, abs=1e-15)


def test_explicit_constants():
    c = PhysicalConstants(hbar=2.0, mass=3.0)
    s = make_free_state(4.0, 1.0, constants=c)
    assert s.k == pytest.approx(3.0 * 4.0 / 2.0)
    assert s.satisfies_dispersion()


def test_deterministic_construction():
    assert make_free_state(1.5, 0.7) == make_free_state(1.5, 0.7)


@given(
    v=st.floats(min_value=0.1, max_value=10.0),
    R=st.floats(min_value=0.0, max_value=10.0),
)
def test_dispersion_identity_holds(v, R):
    s = make_free_state(v, R)
    hbar, m = s.constants.hbar, s.constants.mass
    gap = (
        hbar * s.omega
        + hbar**2 * s.R**2 / (8.0 * m * s.v**2)
        - hbar**2 * s.k**2 / (2.0 * m)
    )
    assert abs(gap) <= 1e-12 * max(1.0, abs(hbar * s.omega))
    assert s.satisfies_dispersion()


@pytest.mark.parametrize("v", [0.0, -1.0, math.nan, math.inf])
def test_rejects_bad_speed(v):
    with pytest.raises(ValueError):
        make_free_state(v, 1.0)


def test_rejects_negative_or_nonfinite_rate():
    with pytest.raises(ValueError):
        make_free_state(1.0, -0.5)
    with pytest.raises(ValueError):
        make_free_state(1.0, math.nan)


def test_constants_must_be_positive():
    with pytest.raises(ValueError):
        PhysicalConstants(hbar=0.0)
    with pytest.raises(ValueError):
        PhysicalConstants(mass=-1.0)
    with pytest.raises(ValueError):
        PhysicalConstants(kB=math.inf)


def test_dispersion_omega_rejects_nonfinite():
    with pytest.raises(ValueError):
        dispersion_omega(math.nan, 1.0, 1.0)
    with pytest.raises(ValueError):
        dispersion_omega(1.0, 1.0, 0.0)


def test_eigen_record_validation():
    EigenRecord(observable="H", value=1 + 2j)
    EigenRecord(observable="P", value=1.0 + 0j, at_mp=True)
    with pytest.raises(ValueError):
        EigenRecord(observable="H", value=1 + 2j, at_mp=True)
    with pytest.raises(ValueError):
        EigenRecord(observable="Q", value=1 + 0j)


def test_off_shell_construction_allowed_for_diagnostics():
    s = FreeWaveParams(k=1.0, omega=0.5, R=1.0, v=1.0, branch=Branch.INCOMING)
    assert not s.satisfies_dispersion()


def test_normalized_flag():
    assert make_free_state(2.0, 2.0).is_normalized
    assert not make_free_state(2.0, 1.0).is_normalized
