"""Fourier analysis of periodic binary switching codes and their cyclic shifts.

A code is a repeating sequence of L on/off bits, each held for a fixed bit
duration.  Expanding the resulting periodic pulse train in a Fourier series
gives one complex coefficient per harmonic of the repetition rate; cyclically
shifting the code rotates every coefficient by a known per-bit phase.  These
two facts are the kernel the array, channel and receiver layers build on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import SampleRateError

__all__ = [
    "BinaryCode",
    "HarmonicCoefficient",
    "CodeSchedule",
    "harmonic_coefficient",
    "harmonic_value",
    "harmonic_values",
    "mapped_harmonic_value",
    "shift_code",
    "phase_shift_per_bit",
    "sample_switching_waveform",
]


@dataclass(frozen=True)
class BinaryCode:
    """A length-L sequence of {0,1} bits, each held for ``bit_duration`` seconds."""

    bits: tuple[int, ...]
    bit_duration: float

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if len(bits) < 1:
            raise ValueError("code must have at least one bit")
        if any(b not in (0, 1) for b in bits):
            raise ValueError("code bits must all be 0 or 1")
        if not self.bit_duration > 0:
            raise ValueError("bit_duration must be positive")
        object.__setattr__(self, "bits", bits)

    @property
    def length(self) -> int:
        return len(self.bits)

    @property
    def period(self) -> float:
        """Repetition period: L times the bit duration."""
        return self.length * self.bit_duration

    @property
    def modulation_frequency(self) -> float:
        """Fundamental switching rate, the reciprocal of the period."""
        return 1.0 / self.period

    def is_single_bit(self) -> bool:
        """True when exactly one bit is on."""
        return sum(self.bits) == 1

    def shifted(self, k: int) -> "BinaryCode":
        """Cyclic right shift by ``k`` positions (negative k shifts left)."""
        L = self.length
        k = k % L
        return BinaryCode(self.bits[-k:] + self.bits[:-k] if k else self.bits,
                          self.bit_duration)

    @classmethod
    def single_bit(cls, length: int, position: int = 0,
                   bit_duration: float = 1.0) -> "BinaryCode":
        bits = [0] * length
        bits[position % length] = 1
        return cls(tuple(bits), bit_duration)

    @classmethod
    def from_string(cls, text: str, bit_duration: float) -> "BinaryCode":
        """Parse a compact bitstring such as ``"0010"``."""
        if not text or any(ch not in "01" for ch in text):
            raise ValueError(f"not a bitstring: {text!r}")
        return cls(tuple(int(ch) for ch in text), bit_duration)

    def to_string(self) -> str:
        return "".join(str(b) for b in self.bits)


@dataclass(frozen=True)
class HarmonicCoefficient:
    """Polar form of one Fourier coefficient of a switching code."""

    order: int
    magnitude: float
    phase: float

    def __post_init__(self):
        if self.magnitude < 0:
            raise ValueError("magnitude must be non-negative")
        if not (-np.pi < self.phase <= np.pi):
            raise ValueError("phase must lie in (-pi, pi]")

    @property
    def value(self) -> complex:
        return self.magnitude * np.exp(1j * self.phase)

    @classmethod
    def from_complex(cls, order: int, value: complex) -> "HarmonicCoefficient":
        mag = float(abs(value))
        # arg of zero is undefined; report 0 by convention
        phase = float(np.angle(value)) if mag > 0.0 else 0.0
        if phase == -np.pi:
            phase = np.pi
        return cls(order=order, magnitude=mag, phase=phase)


def _sinc(x: np.ndarray | float):
    """Unnormalized sinc, sin(x)/x with value 1 at x = 0."""
    return np.sinc(np.asarray(x) / np.pi)


def harmonic_value(code: BinaryCode, n: int) -> complex:
    """Complex Fourier coefficient of the code's pulse train at harmonic ``n``.

    The pulse train is 1 during every on bit and 0 otherwise, repeating with
    the code period.  The coefficient of exp(+j*2*pi*n*t/period) is

        sum_m (bit_m / L) * sinc(pi*n/L) * exp(-j*pi*n*(2m - 1)/L)

    with m running over bit positions 1..L and sinc(x) = sin(x)/x.
    """
    bits = np.asarray(code.bits, dtype=float)
    L = code.length
    m = np.arange(1, L + 1)
    kernel = np.exp(-1j * np.pi * n * (2 * m - 1) / L)
    return complex(float(_sinc(np.pi * n / L)) / L * np.dot(bits, kernel))


def harmonic_values(code: BinaryCode, orders: Sequence[int]) -> np.ndarray:
    """Vectorized :func:`harmonic_value` over several harmonic orders."""
    bits = np.asarray(code.bits, dtype=float)
    L = code.length
    m = np.arange(1, L + 1)
    ns = np.asarray(orders, dtype=float)
    kernel = np.exp(-1j * np.pi * np.outer(ns, 2 * m - 1) / L)
    return _sinc(np.pi * ns / L) / L * (kernel @ bits)


def harmonic_coefficient(code: BinaryCode, n: int) -> HarmonicCoefficient:
    """Magnitude and phase of the code's harmonic ``n`` (total function)."""
    return HarmonicCoefficient.from_complex(n, harmonic_value(code, n))


def mapped_harmonic_value(code: BinaryCode, n: int,
                          reflection_map: Mapping[int, complex]) -> complex:
    """Harmonic coefficient after mapping bit states to reflection values.

    The waveform off_value*(1 - s(t)) + on_value*s(t), where s is the 0/1
    pulse train, has coefficients on*c_n + off*(delta_n0 - c_n).
    """
    off = complex(reflection_map[0])
    on = complex(reflection_map[1])
    c = harmonic_value(code, n)
    return on * c + off * ((1.0 if n == 0 else 0.0) - c)


def shift_code(code: BinaryCode, k: int) -> BinaryCode:
    """Cyclic right shift of the bit sequence by ``k`` (mod L)."""
    return code.shifted(k)


def phase_shift_per_bit(n: int, length: int) -> float:
    """Phase advance of harmonic ``n`` caused by a one-bit cyclic shift.

    Returns 2*n*pi/L in radians, unwrapped.  A right shift by k bits rotates
    harmonic n by -k times this value.
    """
    if length < 1:
        raise ValueError("code length must be at least 1")
    return 2.0 * n * np.pi / length


def sample_switching_waveform(code: BinaryCode, samples_per_period: int,
                              reflection_map: Mapping[int, complex]) -> np.ndarray:
    """One period of the piecewise-constant switching waveform.

    Sample i takes the reflection value of the bit active at time
    i*period/samples_per_period; bit intervals are half-open, left-inclusive,
    so a sample landing exactly on a boundary reads the newly started bit.

    Requires at least two samples per bit.
    """
    L = code.length
    if samples_per_period < 2 * L:
        raise SampleRateError(
            f"samples_per_period={samples_per_period} must be >= 2L = {2 * L}")
    i = np.arange(samples_per_period)
    # floor(t_i / tau) in exact integer arithmetic
    bit_index = (i * L) // samples_per_period
    bits = np.asarray(code.bits)[bit_index]
    off = complex(reflection_map[0])
    on = complex(reflection_map[1])
    return np.where(bits == 1, on, off).astype(complex)


@dataclass(frozen=True)
class CodeSchedule:
    """A base code plus one cyclic shift per array column.

    The default assignment gives column q a shift of q bits, so adjacent
    columns fire one bit apart.
    """

    base_code: BinaryCode
    column_shifts: tuple[int, ...]

    def __post_init__(self):
        L = self.base_code.length
        shifts = tuple(int(s) % L for s in self.column_shifts)
        if len(shifts) < 1:
            raise ValueError("schedule needs at least one column")
        object.__setattr__(self, "column_shifts", shifts)

    @property
    def num_columns(self) -> int:
        return len(self.column_shifts)

    def column_code(self, q: int) -> BinaryCode:
        return self.base_code.shifted(self.column_shifts[q])

    def column_harmonics(self, orders: Sequence[int],
                         reflection_map: Mapping[int, complex] | None = None
                         ) -> np.ndarray:
        """Per-column mapped harmonic coefficients, shape (orders, columns)."""
        if reflection_map is None:
            reflection_map = {0: 0.0, 1: 1.0}
        off = complex(reflection_map[0])
        on = complex(reflection_map[1])
        delta0 = np.asarray([1.0 if n == 0 else 0.0 for n in orders])
        cols = np.empty((len(orders), self.num_columns), dtype=complex)
        for q in range(self.num_columns):
            c = harmonic_values(self.column_code(q), orders)
            cols[:, q] = on * c + off * (delta0 - c)
        return cols

    @classmethod
    def with_unit_shifts(cls, base_code: BinaryCode, num_columns: int) -> "CodeSchedule":
        return cls(base_code, tuple(range(num_columns)))
