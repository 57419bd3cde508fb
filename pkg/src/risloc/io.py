"""CSV and JSON emission for every exportable artifact.

All writers are deterministic: fixed column orders, sorted JSON keys, no
timestamps, and a fixed float format, so rerunning a seeded experiment
overwrites byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .channel import Waveform
from .patterns import PatternLibrary
from .receiver import AoaEstimate, AveragedSpectrum, HarmonicMeasurement

__all__ = [
    "write_pattern_csv",
    "write_json",
    "write_waveform_csv",
    "read_waveform_csv",
    "write_spectrum_csv",
    "write_harmonics_csv",
    "write_estimate_json",
    "write_rows_csv",
]

_FLOAT_FMT = "{:.12g}"


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return _FLOAT_FMT.format(float(value))
    return str(value)


def write_rows_csv(path: Path | str, header: Sequence[str],
                   rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def write_json(path: Path | str, payload: Mapping) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    def _default(obj):
        if isinstance(obj, (np.floating, np.integer)):
            return obj.item()
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, frozenset):
            return sorted(obj)
        raise TypeError(f"not JSON serializable: {type(obj)}")

    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_default)
        fh.write("\n")
    return path


def write_pattern_csv(library: PatternLibrary, path: Path | str) -> Path:
    """Angle grid in the first column, one ``h{n}`` column per harmonic."""
    header = ["angle_deg"] + [f"h{n}" for n in library.orders]
    rows = ([angle] + list(library.magnitudes[:, i])
            for i, angle in enumerate(library.angles_deg))
    return write_rows_csv(path, header, rows)


def pattern_sidecar(library: PatternLibrary) -> dict:
    meta = dict(library.metadata)
    meta["peak_angles_deg"] = {str(k): v
                               for k, v in meta.get("peak_angles_deg", {}).items()}
    meta["grid_step_deg"] = library.grid_step
    meta["element_taper"] = library.element_taper
    meta["orders"] = list(library.orders)
    return meta


def write_waveform_csv(waveform: Waveform, path: Path | str) -> Path:
    """Samples as ``t,re,im`` rows, times in seconds."""
    t = np.arange(len(waveform.samples)) / waveform.sample_rate
    rows = zip(t, waveform.samples.real, waveform.samples.imag)
    return write_rows_csv(path, ["t", "re", "im"], rows)


def read_waveform_csv(csv_path: Path | str, sidecar_path: Path | str) -> Waveform:
    """Rebuild a waveform from its sample file and JSON sidecar."""
    with open(sidecar_path) as fh:
        meta = json.load(fh)
    data = np.genfromtxt(csv_path, delimiter=",", names=True)
    samples = np.asarray(data["re"]) + 1j * np.asarray(data["im"])
    known = {"sample_rate_hz", "modulation_frequency_hz", "code_length",
             "samples_per_period", "duration_s", "num_samples",
             "harmonic_order_limit", "piecewise_constant", "rx_angle_deg"}
    return Waveform(
        samples=samples,
        sample_rate=float(meta["sample_rate_hz"]),
        modulation_frequency=float(meta["modulation_frequency_hz"]),
        samples_per_period=int(meta["samples_per_period"]),
        code_length=int(meta["code_length"]),
        harmonic_order_limit=int(meta["harmonic_order_limit"]),
        piecewise_constant=bool(meta.get("piecewise_constant", False)),
        rx_angle_deg=meta.get("rx_angle_deg"),
        extras={k: v for k, v in meta.items() if k not in known},
    )


def write_spectrum_csv(spectrum: AveragedSpectrum, path: Path | str) -> Path:
    rows = zip(spectrum.frequencies, spectrum.magnitudes)
    return write_rows_csv(path, ["freq_hz", "magnitude"], rows)


def write_harmonics_csv(measurement: HarmonicMeasurement, path: Path | str) -> Path:
    """Detected line markers: order, line frequency, measured magnitude."""
    rows = ((n, n * measurement.fundamental, measurement.magnitude(n))
            for n in measurement.orders)
    return write_rows_csv(path, ["order", "freq_hz", "magnitude"], rows)


def write_estimate_json(estimate: AoaEstimate, path: Path | str) -> Path:
    psr = estimate.peak_to_second_peak_ratio
    payload = {
        "angle_deg": estimate.angle_deg,
        "profile": [[float(a), float(v)] for a, v in
                    zip(estimate.profile_angles_deg, estimate.profile)],
        "psr": None if np.isinf(psr) else psr,
        "excluded_orders": sorted(estimate.excluded_orders),
        "f0_used": estimate.fundamental,
    }
    return write_json(path, payload)
