"""Far-field harmonic radiation patterns of a column-coded surface.

Each column of the surface runs the same binary code with a per-column cyclic
shift, so harmonic n picks up a linear phase progression across columns and
forms a beam whose direction follows a uniform-linear-array steering law.
This module evaluates those beams on an azimuth grid and aggregates them into
a pattern library the receiver matches measurements against.

Model: far field, plane waves, azimuth cut only, incidence normal to the
surface.  Rows contribute a scalar multiplicity.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .codes import CodeSchedule
from .errors import GeometryMismatchError, NonRadiatingHarmonicError

__all__ = [
    "SPEED_OF_LIGHT",
    "RisConfig",
    "PatternLibrary",
    "steering_angle",
    "max_harmonic_order",
    "array_response",
    "harmonic_pattern",
    "build_pattern_library",
]

SPEED_OF_LIGHT = 299_792_458.0  # m/s

_TAPERS = ("none", "cosine")


@dataclass(frozen=True)
class RisConfig:
    """Geometry and element behaviour of the reflecting surface.

    The wavelength is always derived from the carrier frequency, never stored.
    Element spacings above half a wavelength trigger a grating-lobe warning
    but are accepted.
    """

    num_columns: int
    num_rows: int
    spacing: float              # metres between adjacent columns
    carrier_frequency: float    # Hz
    reflection_map: Mapping[int, complex] = field(
        default_factory=lambda: {0: 0.0, 1: 1.0})

    def __post_init__(self):
        if self.num_columns < 1 or self.num_rows < 1:
            raise ValueError("array must have at least one row and one column")
        if not self.spacing > 0:
            raise ValueError("element spacing must be positive")
        if not self.carrier_frequency > 0:
            raise ValueError("carrier frequency must be positive")
        rmap = {int(k): complex(v) for k, v in self.reflection_map.items()}
        if set(rmap) != {0, 1}:
            raise ValueError("reflection_map needs exactly the keys 0 and 1")
        if any(abs(v) > 1.0 + 1e-12 for v in rmap.values()):
            raise ValueError("reflection coefficients must have magnitude <= 1")
        object.__setattr__(self, "reflection_map", rmap)
        if self.spacing_over_wavelength > 0.5:
            warnings.warn(
                f"column spacing {self.spacing_over_wavelength:.3f} wavelengths "
                "exceeds 0.5; expect grating lobes", stacklevel=2)

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def spacing_over_wavelength(self) -> float:
        return self.spacing / self.wavelength

    @classmethod
    def half_wavelength(cls, num_columns: int, num_rows: int,
                        carrier_frequency: float,
                        reflection_map: Mapping[int, complex] | None = None
                        ) -> "RisConfig":
        wavelength = SPEED_OF_LIGHT / carrier_frequency
        return cls(num_columns, num_rows, 0.5 * wavelength, carrier_frequency,
                   reflection_map or {0: 0.0, 1: 1.0})


def steering_angle(n: int, length: int, d_over_lambda: float) -> float:
    """Main-lobe direction of harmonic ``n`` in degrees.

    asin(n / (L * d/lambda)); raises when the argument exceeds 1 in magnitude,
    i.e. the harmonic does not radiate.
    """
    if length < 1:
        raise ValueError("code length must be at least 1")
    if not d_over_lambda > 0:
        raise ValueError("d_over_lambda must be positive")
    ratio = n / (length * d_over_lambda)
    if abs(ratio) > 1.0:
        raise NonRadiatingHarmonicError(
            f"harmonic {n} does not radiate for L={length}, "
            f"d/lambda={d_over_lambda}")
    return float(np.degrees(np.arcsin(ratio)))


def max_harmonic_order(length: int, d_over_lambda: float) -> int:
    """Largest harmonic order with a real steering angle: floor(L * d/lambda)."""
    if length < 1:
        raise ValueError("code length must be at least 1")
    if not d_over_lambda > 0:
        raise ValueError("d_over_lambda must be positive")
    return int(np.floor(length * d_over_lambda))


def _taper(angles_deg: np.ndarray, element_taper: str) -> np.ndarray:
    if element_taper == "none":
        return np.ones_like(angles_deg, dtype=float)
    if element_taper == "cosine":
        return np.cos(np.deg2rad(angles_deg))
    raise ValueError(f"unknown element taper {element_taper!r}; "
                     f"choose from {_TAPERS}")


def array_response(ris: RisConfig, schedule: CodeSchedule, n: int,
                   angles_deg: Sequence[float] | np.ndarray,
                   element_taper: str = "none") -> np.ndarray:
    """Complex far-field response of harmonic ``n`` at the given azimuths.

    Sums the mapped harmonic coefficient of every column against the spatial
    phase progression toward each angle, scaled by the row count and the
    optional element taper.
    """
    if schedule.num_columns != ris.num_columns:
        raise GeometryMismatchError(
            f"schedule has {schedule.num_columns} columns, "
            f"array has {ris.num_columns}")
    angles = np.atleast_1d(np.asarray(angles_deg, dtype=float))
    coeffs = schedule.column_harmonics([n], ris.reflection_map)[0]
    q = np.arange(ris.num_columns)
    spatial = np.exp(2j * np.pi * ris.spacing_over_wavelength
                     * np.outer(np.sin(np.deg2rad(angles)), q))
    return (spatial @ coeffs) * ris.num_rows * _taper(angles, element_taper)


def harmonic_pattern(ris: RisConfig, schedule: CodeSchedule, n: int,
                     angles_deg: Sequence[float] | np.ndarray,
                     element_taper: str = "none") -> np.ndarray:
    """Field magnitude of harmonic ``n`` over an azimuth grid.

    Orders a little beyond the radiating limit may be inspected (their main
    lobe is evanescent but the visible-region skirt is still defined); anything
    farther out is rejected.
    """
    n_max = max_harmonic_order(schedule.base_code.length,
                               ris.spacing_over_wavelength)
    if abs(n) > n_max + 2:
        raise ValueError(
            f"harmonic order {n} beyond inspectable range |n| <= {n_max + 2}")
    return np.abs(array_response(ris, schedule, n, angles_deg, element_taper))


@dataclass(frozen=True)
class PatternLibrary:
    """Per-harmonic field magnitudes on a shared ascending azimuth grid."""

    angles_deg: np.ndarray
    orders: tuple[int, ...]
    magnitudes: np.ndarray          # shape (len(orders), len(angles_deg))
    grid_step: float
    element_taper: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.magnitudes.shape != (len(self.orders), len(self.angles_deg)):
            raise ValueError("magnitude matrix does not match orders x grid")
        if np.any(np.diff(self.angles_deg) <= 0):
            raise ValueError("angle grid must be strictly ascending")
        if np.any(self.magnitudes < 0):
            raise ValueError("pattern magnitudes must be non-negative")

    def magnitude(self, n: int) -> np.ndarray:
        return self.magnitudes[self.orders.index(n)]

    def peak_angle(self, n: int) -> float:
        """Grid angle at which harmonic ``n`` attains its maximum.

        The endfire order (|n| = L * d/lambda) peaks at both grid edges;
        such ties resolve toward the side the order steers to, and order 0
        ties resolve toward broadside.
        """
        mags = self.magnitude(n)
        top = float(np.max(mags))
        ties = np.flatnonzero(mags >= top * (1.0 - 1e-12))
        angles = self.angles_deg[ties]
        if n == 0:
            return float(angles[int(np.argmin(np.abs(angles)))])
        return float(angles[int(np.argmax(n * angles))])

    @property
    def n_max(self) -> int:
        return max(self.orders)


def build_pattern_library(ris: RisConfig, schedule: CodeSchedule,
                          grid_step: float = 0.1,
                          element_taper: str = "none") -> PatternLibrary:
    """Patterns for every radiating order on a [-90, 90] degree grid."""
    if not 0 < grid_step <= 5:
        raise ValueError("grid_step must lie in (0, 5] degrees")
    n_max = max_harmonic_order(schedule.base_code.length,
                               ris.spacing_over_wavelength)
    num = int(round(180.0 / grid_step)) + 1
    angles = np.linspace(-90.0, 90.0, num)
    orders = tuple(range(-n_max, n_max + 1))
    coeffs = schedule.column_harmonics(orders, ris.reflection_map)
    q = np.arange(ris.num_columns)
    spatial = np.exp(2j * np.pi * ris.spacing_over_wavelength
                     * np.outer(np.sin(np.deg2rad(angles)), q))
    taper = _taper(angles, element_taper)
    magnitudes = np.abs(coeffs @ spatial.T) * ris.num_rows * taper
    meta = {
        "num_columns": ris.num_columns,
        "num_rows": ris.num_rows,
        "spacing_m": ris.spacing,
        "carrier_frequency_hz": ris.carrier_frequency,
        "code_length": schedule.base_code.length,
        "modulation_frequency_hz": schedule.base_code.modulation_frequency,
        "peak_angles_deg": {},
    }
    lib = PatternLibrary(angles_deg=angles, orders=orders,
                         magnitudes=magnitudes, grid_step=grid_step,
                         element_taper=element_taper, metadata=meta)
    meta["peak_angles_deg"] = {n: lib.peak_angle(n) for n in orders}
    return lib
