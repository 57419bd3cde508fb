"""Receive-side estimation chain: spectrum averaging, harmonic-line
measurement, and pattern-matched angle-of-arrival estimation.

The capture is cut into windows that each span a whole number of code
periods, so every harmonic line lands exactly on an FFT bin; magnitude
spectra are averaged across windows to suppress noise and channel
fluctuation.  Line magnitudes are then read off (with a known fundamental,
or after a blind comb search) and matched against the pattern library: each
measured magnitude multiplies its harmonic's pattern and the weighted
patterns are summed, leaving one dominant peak at the arrival angle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .channel import Waveform
from .errors import (DurationError, EmptyMeasurementError, NoCombFoundError,
                     SpectrumResolutionError)
from .patterns import PatternLibrary

__all__ = [
    "AveragedSpectrum",
    "HarmonicMeasurement",
    "AoaEstimate",
    "average_spectrum",
    "detect_harmonics",
    "estimate_aoa",
    "angular_resolution",
]

# line magnitudes below this fraction of the spectrum's strongest bin are
# treated as absent (numerical crumbs at pattern nulls, not signal)
_MAGNITUDE_FLOOR = 1e-9

_WINDOW_KINDS = ("rect", "hann")


@dataclass(frozen=True)
class AveragedSpectrum:
    """Two-sided magnitude spectrum averaged over overlapping time windows."""

    frequencies: np.ndarray      # Hz, ascending, two-sided
    magnitudes: np.ndarray       # linear field units, >= 0
    window_length: int           # samples per window
    hop: int                     # samples between window starts
    num_windows: int
    window_periods: int          # code periods covered by one window

    @property
    def bin_spacing(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0])

    def nearest_bin(self, frequency: float) -> int:
        return int(round((frequency - self.frequencies[0]) / self.bin_spacing))

    def fundamental_prior(self) -> float:
        """Fundamental implied by the windowing: one window covers
        ``window_periods`` code periods, so the fundamental sits
        ``window_periods`` bins above zero."""
        return self.window_periods * self.bin_spacing


@dataclass(frozen=True)
class HarmonicMeasurement:
    """Measured magnitude of each harmonic line around a detected fundamental."""

    orders: tuple[int, ...]
    magnitudes: np.ndarray
    fundamental: float
    confidence: float
    excluded_orders: frozenset[int] = frozenset({0})

    def magnitude(self, n: int) -> float:
        return float(self.magnitudes[self.orders.index(n)])

    @property
    def n_max(self) -> int:
        return max(self.orders)


@dataclass(frozen=True)
class AoaEstimate:
    """Arrival-angle estimate with the combined profile that produced it."""

    angle_deg: float
    profile_angles_deg: np.ndarray
    profile: np.ndarray
    peak_to_second_peak_ratio: float
    excluded_orders: frozenset[int]
    fundamental: float


def average_spectrum(waveform: Waveform, window_periods: int,
                     overlap_fraction: float = 0.0,
                     window: str = "rect") -> AveragedSpectrum:
    """Mean magnitude spectrum over all full windows of the capture.

    Windows span ``window_periods`` whole code periods so the harmonic comb
    is bin-aligned; ``overlap_fraction`` moves successive windows closer
    together.  The rectangular window is exact for aligned captures; ``hann``
    is available for externally recorded, misaligned data.
    """
    if window_periods < 1:
        raise ValueError("window_periods must be at least 1")
    if not 0.0 <= overlap_fraction < 1.0:
        raise ValueError("overlap_fraction must lie in [0, 1)")
    if window not in _WINDOW_KINDS:
        raise ValueError(f"window must be one of {_WINDOW_KINDS}")
    length = window_periods * waveform.samples_per_period
    n = len(waveform.samples)
    if n < length:
        raise DurationError(
            f"waveform has {n} samples but one window needs {length}")
    hop = max(1, int(round(length * (1.0 - overlap_fraction))))
    starts = range(0, n - length + 1, hop)
    if window == "rect":
        taper = None
        gain = float(length)
    else:
        taper = np.hanning(length)
        gain = float(np.sum(taper))
    acc = np.zeros(length)
    count = 0
    for s in starts:
        seg = waveform.samples[s:s + length]
        if taper is not None:
            seg = seg * taper
        acc += np.abs(np.fft.fft(seg))
        count += 1
    magnitudes = np.fft.fftshift(acc / (count * gain))
    freqs = np.fft.fftshift(np.fft.fftfreq(length, d=1.0 / waveform.sample_rate))
    return AveragedSpectrum(frequencies=freqs, magnitudes=magnitudes,
                            window_length=length, hop=hop, num_windows=count,
                            window_periods=window_periods)


def _interpolated_magnitude(mags: np.ndarray, idx: int) -> float:
    """Three-bin quadratic peak interpolation around bin ``idx``."""
    if idx <= 0 or idx >= len(mags) - 1:
        return float(mags[idx]) if 0 <= idx < len(mags) else 0.0
    left, mid, right = mags[idx - 1], mags[idx], mags[idx + 1]
    curvature = left - 2.0 * mid + right
    if curvature >= 0.0:
        return float(mid)
    offset = 0.5 * (left - right) / curvature
    if abs(offset) > 0.5:
        return float(mid)
    return float(mid - 0.25 * (left - right) * offset)


def _comb_score(spec: AveragedSpectrum, candidate: float, n_max: int) -> float:
    teeth = np.concatenate([np.arange(1, n_max + 1), -np.arange(1, n_max + 1)])
    idx = np.round((teeth * candidate - spec.frequencies[0])
                   / spec.bin_spacing).astype(int)
    idx = idx[(idx >= 0) & (idx < len(spec.magnitudes))]
    return float(np.sum(spec.magnitudes[idx]))


def detect_harmonics(spec: AveragedSpectrum, f0_hint: float | None,
                     n_max: int,
                     confidence_threshold: float = 0.2) -> HarmonicMeasurement:
    """Read the magnitude of every harmonic line in an averaged spectrum.

    With ``f0_hint`` the lines are read at the nearest bins to n*f0 with
    three-bin quadratic interpolation.  Without a hint, a comb of candidate
    fundamentals spanning 0.5x to 1.5x the bin-spacing-implied prior
    (window_periods bins) is scored by the summed tooth magnitudes; the best
    candidate must stand out from the median score by ``confidence_threshold``
    or the search fails.
    """
    reference = float(f0_hint) if f0_hint is not None else spec.fundamental_prior()
    if spec.bin_spacing >= reference / 4.0:
        raise SpectrumResolutionError(
            "spectrum resolution must be finer than a quarter of the "
            "fundamental; use windows of at least five code periods")
    confidence = 1.0
    if f0_hint is None:
        prior = spec.fundamental_prior()
        step = spec.bin_spacing / 8.0
        candidates = np.arange(0.5 * prior, 1.5 * prior + step / 2.0, step)
        scores = np.array([_comb_score(spec, c, n_max) for c in candidates])
        best = int(np.argmax(scores))
        top = scores[best]
        confidence = float(1.0 - np.median(scores) / top) if top > 0 else 0.0
        confidence = min(max(confidence, 0.0), 1.0)
        if confidence < confidence_threshold:
            raise NoCombFoundError(
                f"no harmonic comb stands out (confidence {confidence:.3f} "
                f"< {confidence_threshold})")
        f0 = float(candidates[best])
    else:
        f0 = float(f0_hint)
    orders = tuple(range(-n_max, n_max + 1))
    mags = np.empty(len(orders))
    for k, n in enumerate(orders):
        idx = spec.nearest_bin(n * f0)
        if idx < 0 or idx >= len(spec.magnitudes):
            mags[k] = 0.0
        else:
            mags[k] = _interpolated_magnitude(spec.magnitudes, idx)
    floor = _MAGNITUDE_FLOOR * float(np.max(spec.magnitudes, initial=0.0))
    mags[mags < floor] = 0.0
    return HarmonicMeasurement(orders=orders, magnitudes=mags,
                               fundamental=f0, confidence=confidence)


def _second_peak(profile: np.ndarray, peak_idx: int) -> float:
    """Highest local maximum outside the main lobe around ``peak_idx``."""
    lo = peak_idx
    while lo > 0 and profile[lo - 1] <= profile[lo]:
        lo -= 1
    hi = peak_idx
    while hi < len(profile) - 1 and profile[hi + 1] <= profile[hi]:
        hi += 1
    rest = np.concatenate([profile[:lo], profile[hi + 1:]])
    return float(np.max(rest)) if len(rest) else 0.0


def estimate_aoa(measurement: HarmonicMeasurement, library: PatternLibrary,
                 exclude_orders: Iterable[int] | None = None,
                 power_domain: bool = False,
                 normalize_patterns: bool = False) -> AoaEstimate:
    """Arrival angle from harmonic magnitudes matched against the library.

    Each measured magnitude (max-normalized) multiplies its harmonic's
    library pattern and the weighted patterns are summed; the estimate is the
    argmax of that combined profile, with exact ties broken toward the
    smaller absolute angle.  Order 0 is excluded by default because carrier
    leak sits at the same offset.

    ``power_domain`` squares both factors for comparison studies;
    ``normalize_patterns`` additionally scales every pattern to unit peak,
    discarding the library's relative per-harmonic gains.
    """
    if exclude_orders is None:
        excluded = frozenset(measurement.excluded_orders)
    else:
        excluded = frozenset(int(n) for n in exclude_orders)
    orders = [n for n in measurement.orders
              if n not in excluded and n in library.orders]
    if not orders:
        raise EmptyMeasurementError("no harmonic orders left after exclusion")
    mags = np.array([measurement.magnitude(n) for n in orders])
    patterns = np.stack([library.magnitude(n) for n in orders])
    if normalize_patterns:
        peaks = np.max(patterns, axis=1, keepdims=True)
        peaks[peaks <= 0] = 1.0
        patterns = patterns / peaks
    top = float(np.max(mags))
    weights = mags / top if top > 0.0 else np.zeros_like(mags)
    if power_domain:
        profile = (weights ** 2) @ (patterns ** 2)
    else:
        profile = weights @ patterns
    peak = float(np.max(profile))
    if peak > 0.0:
        candidates = np.flatnonzero(profile >= peak * (1.0 - 1e-9))
    else:
        candidates = np.arange(len(profile))
    angles = library.angles_deg
    best = int(candidates[np.argmin(np.abs(angles[candidates]))])
    second = _second_peak(profile, best)
    if peak > 0.0 and second > 0.0:
        ratio = max(peak / second, 1.0)
    else:
        ratio = 1.0 if peak <= 0.0 else float("inf")
    return AoaEstimate(angle_deg=float(angles[best]),
                       profile_angles_deg=angles,
                       profile=profile,
                       peak_to_second_peak_ratio=ratio,
                       excluded_orders=excluded,
                       fundamental=measurement.fundamental)


def angular_resolution(length: int) -> float:
    """Width of one distinguishable azimuth cell, 180/(3L) degrees.

    A length-L code forms L beams over the field of view and neighbouring
    harmonic magnitudes split each beam into roughly three partitions.
    """
    if length < 1:
        raise ValueError("code length must be at least 1")
    return 180.0 / (3.0 * length)
