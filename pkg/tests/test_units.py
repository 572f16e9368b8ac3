import math

import pytest
from hypothesis import given, strategies as st

from qdphonons.units import (
    HBAR,
    K_B,
    Dimension,
    DimensionError,
    Quantity,
    ZeroTemperatureError,
    hertz,
    kelvin,
    rad_per_s,
    thermal_ratio,
    to_angular,
    to_ordinary,
)

# frozen from 40-digit mpmath evaluations
OMEGA_F1 = 57176.98629533423694  # 2 pi * 9100
X_F1_4K = 1.091828060220392728e-7  # hbar * 5.7177e4 / (k_B * 4 K)
X_140MHZ_4K = 1.679735074648971520e-3


def test_constants_are_the_exact_si_values():
    assert HBAR == 1.054571817e-34
    assert K_B == 1.380649e-23


@pytest.mark.parametrize(
    "f, expected",
    [(0.0, 0.0), (9100.0, OMEGA_F1), (1e9, 6.283185307179586e9)],
)
def test_to_angular(f, expected):
    w = to_angular(hertz(f))
    assert w.dimension is Dimension.ANGULAR_FREQUENCY
    assert w.value == pytest.approx(expected, rel=1e-15, abs=0)


def test_to_angular_rejects_wrong_dimension_and_negatives():
    with pytest.raises(DimensionError):
        to_angular(kelvin(1.0))
    with pytest.raises(ValueError):
        to_angular(-1.0)


@given(st.floats(min_value=0, max_value=1e15, allow_nan=False))
def test_round_trip(f):
    assert to_ordinary(to_angular(f)).value == pytest.approx(f, rel=1e-15, abs=0)


@pytest.mark.parametrize(
    "omega, T, expected",
    [
        (5.7177e4, 4.0, X_F1_4K),
        (K_B / HBAR, 1.0, 1.0),
        (2 * math.pi * 140e6, 4.0, X_140MHZ_4K),
    ],
)
def test_thermal_ratio(omega, T, expected):
    assert thermal_ratio(rad_per_s(omega), kelvin(T)) == pytest.approx(expected, rel=1e-14)


def test_thermal_ratio_zero_temperature():
    with pytest.raises(ZeroTemperatureError):
        thermal_ratio(1e6, 0.0)


def test_quantity_arithmetic():
    a = hertz(3.0) + hertz(4.0)
    assert a == hertz(7.0)
    assert (hertz(6.0) / hertz(2.0)).dimension is Dimension.DIMENSIONLESS
    assert (2 * kelvin(1.5)).value == 3.0
    with pytest.raises(DimensionError):
        hertz(1.0) + kelvin(1.0)
    with pytest.raises(DimensionError):
        hertz(1.0) * kelvin(1.0)
    with pytest.raises(DimensionError):
        hertz(1.0) < rad_per_s(2.0)


def test_quantity_must_be_finite():
    with pytest.raises(ValueError):
        Quantity(math.nan)
    with pytest.raises(ValueError):
        Quantity(math.inf, Dimension.TEMPERATURE)
