"""Localization scenarios: single-surface direction finding and multi-surface
position fixes by bearing intersection.

The world is two-dimensional (the physics core is an azimuth cut).  World
bearings are measured counter-clockwise from the +x axis in [0, 360); a
surface's boresight bearing points along its normal, and a local arrival
angle adds directly onto it.  When several surfaces operate at once each runs
a distinct switching rate, so their harmonic combs interleave without
overlapping and one capture serves every surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import ChannelConfig, Waveform, synthesize_received
from .codes import BinaryCode, CodeSchedule
from .errors import (BehindRayError, IllConditionedError, MissingEntityError)
from .patterns import (PatternLibrary, RisConfig, build_pattern_library,
                       max_harmonic_order)
from .receiver import average_spectrum, detect_harmonics, estimate_aoa

__all__ = [
    "RisPose",
    "PositionFix",
    "ScenarioWorld",
    "ReceiverSettings",
    "world_bearing",
    "local_angle",
    "intersect_bearings",
    "run_scenario",
    "SCENARIOS",
]

SCENARIOS = ("network_side", "user_side", "ris_discovery", "multi_ris_fix")


@dataclass(frozen=True)
class RisPose:
    """Placement of one surface: position, facing direction, switching rate."""

    position: tuple[float, float]
    boresight_deg: float
    modulation_frequency: float

    def __post_init__(self):
        if not 0.0 <= self.boresight_deg < 360.0:
            raise ValueError("boresight bearing must lie in [0, 360)")
        if not self.modulation_frequency > 0:
            raise ValueError("modulation frequency must be positive")
        object.__setattr__(self, "position",
                           (float(self.position[0]), float(self.position[1])))


@dataclass(frozen=True)
class PositionFix:
    """Least-squares crossing point of two or more bearing rays."""

    position: tuple[float, float]
    residual: float              # RMS perpendicular distance, metres
    geometry_conditioning: float  # smallest pairwise |sin(bearing difference)|

    def __post_init__(self):
        if self.residual < 0:
            raise ValueError("residual must be non-negative")
        if not 0.0 < self.geometry_conditioning <= 1.0:
            raise ValueError("conditioning must lie in (0, 1]")


def _wrap360(angle_deg: float) -> float:
    return float(angle_deg % 360.0)


def _wrap180(angle_deg: float) -> float:
    return float((angle_deg + 180.0) % 360.0 - 180.0)


def world_bearing(pose: RisPose, local_aoa_deg: float) -> float:
    """World-frame bearing of a ray leaving the surface at a local angle."""
    if not -90.0 <= local_aoa_deg <= 90.0:
        raise ValueError("local arrival angle must lie in [-90, 90]")
    return _wrap360(pose.boresight_deg + local_aoa_deg)


def local_angle(pose: RisPose, point: Sequence[float]) -> float:
    """Signed boresight-relative azimuth of a world point as seen by a surface."""
    dx = float(point[0]) - pose.position[0]
    dy = float(point[1]) - pose.position[1]
    bearing = math.degrees(math.atan2(dy, dx))
    local = _wrap180(bearing - pose.boresight_deg)
    if abs(local) > 90.0:
        raise MissingEntityError(
            f"point {tuple(point)} lies behind the surface at {pose.position} "
            f"(local angle {local:.1f} degrees)")
    return local


def intersect_bearings(poses_and_aoas: Sequence[tuple[RisPose, float]],
                       min_conditioning: float = 0.05) -> PositionFix:
    """Point minimizing the summed squared perpendicular distance to all rays.

    Each entry pairs a surface pose with a local arrival angle; the ray
    leaves the surface position along the corresponding world bearing.
    Near-parallel bearings are rejected, as are solutions that fall behind
    any ray's origin.
    """
    if len(poses_and_aoas) < 2:
        raise ValueError("need at least two bearings to intersect")
    bearings = [world_bearing(pose, aoa) for pose, aoa in poses_and_aoas]
    origins = np.array([pose.position for pose, _ in poses_and_aoas])
    conditioning = 1.0
    for i in range(len(bearings)):
        for j in range(i + 1, len(bearings)):
            crossing = abs(math.sin(math.radians(bearings[i] - bearings[j])))
            conditioning = min(conditioning, crossing)
    if conditioning < min_conditioning:
        raise IllConditionedError(
            f"bearing geometry conditioning {conditioning:.4f} below "
            f"{min_conditioning}")
    directions = np.array([[math.cos(math.radians(b)),
                            math.sin(math.radians(b))] for b in bearings])
    # sum of projectors onto each ray's perpendicular
    normal_mat = np.zeros((2, 2))
    rhs = np.zeros(2)
    eye = np.eye(2)
    for origin, u in zip(origins, directions):
        projector = eye - np.outer(u, u)
        normal_mat += projector
        rhs += projector @ origin
    point = np.linalg.solve(normal_mat, rhs)
    perp = []
    for origin, u in zip(origins, directions):
        rel = point - origin
        if float(rel @ u) < 0.0:
            raise BehindRayError(
                f"solution {tuple(point)} lies behind the ray from "
                f"{tuple(origin)}")
        perp.append(float(rel @ np.array([-u[1], u[0]])))
    residual = float(np.sqrt(np.mean(np.square(perp))))
    return PositionFix(position=(float(point[0]), float(point[1])),
                       residual=residual,
                       geometry_conditioning=conditioning)


@dataclass(frozen=True)
class ScenarioWorld:
    """Entities taking part in a localization scenario."""

    poses: tuple[RisPose, ...]
    user_position: tuple[float, float] | None = None
    base_position: tuple[float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "poses", tuple(self.poses))
        freqs = [p.modulation_frequency for p in self.poses]
        if len(set(freqs)) != len(freqs):
            raise ValueError("surfaces sharing a scenario need distinct "
                             "modulation frequencies")


@dataclass(frozen=True)
class ReceiverSettings:
    """Estimation-stage knobs used by scenario runs."""

    window_periods: int = 8
    overlap_fraction: float = 0.0
    exclude_orders: frozenset[int] = frozenset({0})
    grid_step_deg: float = 0.1
    duration_periods: float = 16.0
    samples_per_period: int | None = None
    use_f0_hint: bool = True


def _scenario_receiver_point(scenario: str, world: ScenarioWorld) -> tuple[float, float]:
    """Which world point captures the waveform in each scenario."""
    if scenario in ("network_side", "user_side", "multi_ris_fix"):
        if world.user_position is None:
            raise MissingEntityError(f"scenario {scenario!r} needs a user position")
        return world.user_position
    if scenario == "ris_discovery":
        if world.base_position is None:
            raise MissingEntityError("scenario 'ris_discovery' needs a base position")
        return world.base_position
    raise ValueError(f"unknown scenario {scenario!r}; choose from {SCENARIOS}")


def _estimate_from_spectrum(spectrum, pose: RisPose, true_local: float,
                            settings: ReceiverSettings,
                            library: PatternLibrary) -> dict:
    """Detect the pose's comb in an averaged spectrum and estimate the angle."""
    hint = pose.modulation_frequency if settings.use_f0_hint else None
    measurement = detect_harmonics(spectrum, hint, library.n_max)
    estimate = estimate_aoa(measurement, library,
                            exclude_orders=settings.exclude_orders)
    return {
        "true_local_aoa_deg": true_local,
        "estimated_local_aoa_deg": estimate.angle_deg,
        "aoa_error_deg": _wrap180(estimate.angle_deg - true_local),
        "true_world_bearing_deg": world_bearing(pose, true_local),
        "estimated_world_bearing_deg": world_bearing(pose, estimate.angle_deg),
        "peak_to_second_peak_ratio": estimate.peak_to_second_peak_ratio,
        "fundamental_hz": measurement.fundamental,
    }


def _single_surface_estimate(ris: RisConfig, pose: RisPose, point, channel,
                             settings: ReceiverSettings,
                             library: PatternLibrary) -> dict:
    """Forward-simulate one surface alone and estimate the receiver's angle."""
    code_length = library.metadata["code_length"]
    true_local = local_angle(pose, point)
    bit_duration = 1.0 / (code_length * pose.modulation_frequency)
    code = BinaryCode.single_bit(code_length, 0, bit_duration)
    schedule = CodeSchedule.with_unit_shifts(code, ris.num_columns)
    n_sp = settings.samples_per_period or 4 * code_length
    waveform = synthesize_received(
        ris, schedule, true_local, channel,
        duration=settings.duration_periods * code.period,
        sample_rate=n_sp * pose.modulation_frequency)
    spectrum = average_spectrum(waveform, settings.window_periods,
                                settings.overlap_fraction)
    return _estimate_from_spectrum(spectrum, pose, true_local, settings, library)


def run_scenario(scenario: str, world: ScenarioWorld, ris: RisConfig,
                 channel: ChannelConfig,
                 settings: ReceiverSettings | None = None,
                 min_conditioning: float = 0.05) -> dict:
    """Full forward simulation plus estimation for one Table-style scenario.

    The three direction-finding scenarios differ only in which node runs the
    estimator and how the answer is labelled; they all reduce to a single
    surface's arrival-angle estimate.  The multi-surface fix superposes every
    surface's harmonic comb in one capture at the user, estimates each local
    angle from its own comb, and intersects the implied bearing rays.
    """
    settings = settings or ReceiverSettings()
    if not world.poses:
        raise MissingEntityError("scenario world contains no surfaces")
    point = _scenario_receiver_point(scenario, world)
    code_length = ris.num_columns
    library = build_pattern_library(
        ris,
        CodeSchedule.with_unit_shifts(
            BinaryCode.single_bit(code_length, 0,
                                  1.0 / (code_length
                                         * world.poses[0].modulation_frequency)),
            ris.num_columns),
        grid_step=settings.grid_step_deg)
    report: dict = {
        "scenario": scenario,
        "entities": {
            "surfaces": [
                {"position_m": list(p.position),
                 "boresight_deg": p.boresight_deg,
                 "modulation_frequency_hz": p.modulation_frequency}
                for p in world.poses],
            "user_position_m": (list(world.user_position)
                                if world.user_position else None),
            "base_position_m": (list(world.base_position)
                                if world.base_position else None),
        },
        "channel": {
            "snr_db": channel.snr_db,
            "carrier_leak": channel.carrier_leak,
            "num_multipath_taps": len(channel.multipath_taps),
            "rng_seed": channel.rng_seed,
        },
        "per_surface": [],
    }

    if scenario == "multi_ris_fix":
        if len(world.poses) < 2:
            raise MissingEntityError("a position fix needs at least two surfaces")
        waveform = _superposed_capture(ris, world, point, channel, settings)
        # one spectrum, windowed on the slowest comb, serves every surface:
        # the window spans whole periods of each faster comb as well
        spectrum = average_spectrum(waveform, settings.window_periods,
                                    settings.overlap_fraction)
        entries = []
        for pose in world.poses:
            result = _estimate_from_spectrum(
                spectrum, pose, local_angle(pose, point), settings, library)
            report["per_surface"].append(result)
            entries.append((pose, result["estimated_local_aoa_deg"]))
        fix = intersect_bearings(entries, min_conditioning)
        truth = np.asarray(point, dtype=float)
        est = np.asarray(fix.position)
        report["position_fix"] = {
            "true_position_m": list(map(float, truth)),
            "estimated_position_m": list(est.astype(float)),
            "position_error_m": float(np.linalg.norm(est - truth)),
            "residual_m": fix.residual,
            "geometry_conditioning": fix.geometry_conditioning,
        }
        return report

    for pose in world.poses:
        result = _single_surface_estimate(ris, pose, point, channel,
                                          settings, library)
        if scenario == "ris_discovery":
            # the base hears its own angle relative to the surface; the
            # direction of the surface from the base is the reverse ray
            result["true_surface_bearing_from_base_deg"] = _wrap360(
                math.degrees(math.atan2(pose.position[1] - point[1],
                                        pose.position[0] - point[0])))
            result["estimated_surface_bearing_from_base_deg"] = _wrap360(
                result["estimated_world_bearing_deg"] + 180.0)
        report["per_surface"].append(result)
    return report


def _superposed_capture(ris: RisConfig, world: ScenarioWorld, point,
                        channel: ChannelConfig,
                        settings: ReceiverSettings) -> Waveform:
    """One capture containing every surface's comb, plus shared noise."""
    base = min(p.modulation_frequency for p in world.poses)
    ratios = [p.modulation_frequency / base for p in world.poses]
    int_ratios = [int(round(r)) for r in ratios]
    if any(abs(r - ir) > 1e-9 for r, ir in zip(ratios, int_ratios)):
        raise ValueError("multi-surface operation needs integer-ratio "
                         "modulation frequencies for aligned analysis windows")
    code_length = ris.num_columns
    n_max = max_harmonic_order(code_length, ris.spacing_over_wavelength)
    # samples per base period: a multiple of every frequency ratio, with the
    # fastest comb still oversampled past its Nyquist requirement
    lcm = 1
    for r in int_ratios:
        lcm = math.lcm(lcm, r)
    per_base = settings.samples_per_period or 4 * code_length
    need = max(per_base, 4 * n_max * max(int_ratios) + 1)
    n_sp = math.ceil(need / lcm) * lcm
    fs = n_sp * base
    duration = settings.duration_periods / base
    clean_parts = []
    total_power = 0.0
    for pose in world.poses:
        bit_duration = 1.0 / (code_length * pose.modulation_frequency)
        code = BinaryCode.single_bit(code_length, 0, bit_duration)
        schedule = CodeSchedule.with_unit_shifts(code, ris.num_columns)
        quiet = ChannelConfig(snr_db=None, carrier_leak=0.0,
                              rng_seed=channel.rng_seed)
        w = synthesize_received(ris, schedule, local_angle(pose, point),
                                quiet, duration, fs)
        clean_parts.append(w)
        total_power += w.harmonic_power
    samples = np.sum([w.samples for w in clean_parts], axis=0)
    samples = samples + channel.carrier_leak
    if channel.snr_db is not None and total_power > 0:
        rng = np.random.default_rng(channel.rng_seed)
        sigma = np.sqrt(total_power / 10.0 ** (channel.snr_db / 10.0))
        samples = samples + (rng.standard_normal(len(samples))
                             + 1j * rng.standard_normal(len(samples))
                             ) * (sigma / np.sqrt(2.0))
    return Waveform(
        samples=samples, sample_rate=fs, modulation_frequency=base,
        samples_per_period=n_sp, code_length=code_length,
        harmonic_order_limit=clean_parts[0].harmonic_order_limit,
        piecewise_constant=False, rx_angle_deg=None,
        harmonic_power=total_power,
        extras={"mode": "harmonic", "snr_db": channel.snr_db,
                "carrier_leak": channel.carrier_leak,
                "num_multipath_taps": 0, "rng_seed": channel.rng_seed,
                "num_surfaces": len(world.poses)})
