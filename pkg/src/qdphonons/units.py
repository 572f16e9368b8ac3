"""SI constants and a small dimension-checked scalar type.

Everything downstream works in plain SI floats with angular frequencies
in rad/s. :class:`Quantity` exists for API boundaries where a caller may
hand over a value in the wrong dimension (a frequency in Hz where rad/s is
expected is the classic mistake with mode tables).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class DimensionError(TypeError):
    """Raised when values of incompatible dimensions are combined."""


class Dimension(enum.Enum):
    ANGULAR_FREQUENCY = "rad/s"
    FREQUENCY = "Hz"
    MASS = "kg"
    LENGTH = "m"
    ENERGY = "J"
    TEMPERATURE = "K"
    TIME = "s"
    RATE = "1/s"
    DIMENSIONLESS = ""


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.054571817e-34  # J s
    k_B: float = 1.380649e-23  # J/K
    eV: float = 1.602176634e-19  # J


CONSTANTS = PhysicalConstants()
HBAR = CONSTANTS.hbar
K_B = CONSTANTS.k_B
EV = CONSTANTS.eV

TWO_PI = 2.0 * math.pi

# table unit -> SI factors
MHZ = 1e6
KHZ = 1e3
PICOGRAM = 1e-15
FEMTOMETRE = 1e-15
GHZ = 1e9


@dataclass(frozen=True)
class Quantity:
    """A finite real value tagged with one of the supported dimensions."""

    value: float
    dimension: Dimension = Dimension.DIMENSIONLESS

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v):
            raise ValueError(f"non-finite quantity: {self.value!r}")
        object.__setattr__(self, "value", v)

    def _same(self, other: Quantity) -> None:
        if not isinstance(other, Quantity):
            raise DimensionError(f"cannot combine Quantity with {type(other).__name__}")
        if other.dimension is not self.dimension:
            raise DimensionError(
                f"incompatible dimensions: [{self.dimension.value}] and [{other.dimension.value}]"
            )

    def __add__(self, other):
        self._same(other)
        return Quantity(self.value + other.value, self.dimension)

    def __sub__(self, other):
        self._same(other)
        return Quantity(self.value - other.value, self.dimension)

    def __neg__(self):
        return Quantity(-self.value, self.dimension)

    def __mul__(self, other):
        if isinstance(other, Quantity):
            if other.dimension is Dimension.DIMENSIONLESS:
                return Quantity(self.value * other.value, self.dimension)
            if self.dimension is Dimension.DIMENSIONLESS:
                return Quantity(self.value * other.value, other.dimension)
            raise DimensionError(
                f"product [{self.dimension.value}]*[{other.dimension.value}] is not supported"
            )
        return Quantity(self.value * float(other), self.dimension)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Quantity):
            if other.dimension is self.dimension:
                return Quantity(self.value / other.value)
            if other.dimension is Dimension.DIMENSIONLESS:
                return Quantity(self.value / other.value, self.dimension)
            raise DimensionError(
                f"quotient [{self.dimension.value}]/[{other.dimension.value}] is not supported"
            )
        return Quantity(self.value / float(other), self.dimension)

    def __lt__(self, other):
        self._same(other)
        return self.value < other.value

    def __le__(self, other):
        self._same(other)
        return self.value <= other.value

    def __float__(self):
        return self.value

    def __repr__(self):
        unit = f" {self.dimension.value}" if self.dimension.value else ""
        return f"Quantity({self.value!r}{unit})"


def hertz(x: float) -> Quantity:
    return Quantity(x, Dimension.FREQUENCY)


def rad_per_s(x: float) -> Quantity:
    return Quantity(x, Dimension.ANGULAR_FREQUENCY)


def kelvin(x: float) -> Quantity:
    return Quantity(x, Dimension.TEMPERATURE)


def magnitude(x, expected: Dimension) -> float:
    """Strip a :class:`Quantity` after checking its dimension.

    Plain numbers are taken to already be in the SI unit of ``expected``.
    """
    if isinstance(x, Quantity):
        if x.dimension is not expected:
            raise DimensionError(f"expected [{expected.value}], got [{x.dimension.value}]")
        return x.value
    return float(x)


def to_angular(f) -> Quantity:
    """Ordinary frequency (Hz) to angular frequency (rad/s)."""
    v = magnitude(f, Dimension.FREQUENCY)
    if v < 0:
        raise ValueError(f"frequency must be non-negative, got {v}")
    return Quantity(TWO_PI * v, Dimension.ANGULAR_FREQUENCY)


def to_ordinary(omega) -> Quantity:
    """Angular frequency (rad/s) to ordinary frequency (Hz)."""
    v = magnitude(omega, Dimension.ANGULAR_FREQUENCY)
    if v < 0:
        raise ValueError(f"frequency must be non-negative, got {v}")
    return Quantity(v / TWO_PI, Dimension.FREQUENCY)


class ZeroTemperatureError(ValueError):
    """The T -> 0 limit was requested where only T > 0 is defined."""


def thermal_ratio(omega, temperature) -> float:
    """Return ``hbar * omega / (k_B * T)``."""
    w = magnitude(omega, Dimension.ANGULAR_FREQUENCY)
    T = magnitude(temperature, Dimension.TEMPERATURE)
    if T <= 0:
        raise ZeroTemperatureError(
            "zero-temperature limit requested; use the T = 0 branch of the occupation"
        )
    if w <= 0:
        raise ValueError(f"angular frequency must be positive, got {w}")
    return HBAR * w / (K_B * T)
