"""Command-line experiment runner.

Subcommands::

    risloc pattern   --config cfg.json --out DIR     # harmonic patterns + table
    risloc simulate  --config cfg.json --out DIR     # waveform + spectrum
    risloc estimate  WAVEFORM.csv --config cfg.json  # receiver on a recording
    risloc sweep     --config cfg.json --out DIR     # angle x seed Monte Carlo
    risloc scenario  --config cfg.json --out DIR     # localization scenarios

Exit codes: 0 success, 2 configuration error, 3 runtime/estimation error.
Errors are also emitted as one-line JSON on stderr.  The sweep worker pool
size comes from the ``RISLOC_WORKERS`` environment variable (default 1).
"""

from __future__ import annotations

import argparse
import functools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .channel import synthesize_received
from .config import (build_channel, build_receiver_settings, build_ris,
                     build_schedule, build_world, load_config)
from .errors import ConfigError, NonRadiatingHarmonicError, RislocError
from .patterns import build_pattern_library, max_harmonic_order, steering_angle
from .receiver import average_spectrum, detect_harmonics, estimate_aoa
from .scenarios import run_scenario

__all__ = ["main"]


@functools.lru_cache(maxsize=8)
def _context(doc_json: str):
    """Heavy per-configuration objects, cached per worker process."""
    doc = json.loads(doc_json)
    ris = build_ris(doc)
    schedule = build_schedule(doc)
    library = build_pattern_library(ris, schedule,
                                    grid_step=doc["pattern"]["grid_step_deg"],
                                    element_taper=doc["pattern"]["element_taper"])
    return doc, ris, schedule, library


def _run_pipeline(doc, ris, schedule, library, rx_angle: float, seed: int):
    """Synthesize one capture and push it through the estimation chain."""
    channel = build_channel(doc, seed_override=seed)
    code = schedule.base_code
    n_sp = doc["simulate"]["samples_per_period"] or 4 * code.length
    waveform = synthesize_received(
        ris, schedule, rx_angle, channel,
        duration=doc["simulate"]["duration_periods"] * code.period,
        sample_rate=n_sp * code.modulation_frequency,
        mode=doc["simulate"]["mode"],
        element_taper=doc["pattern"]["element_taper"])
    rx = doc["receiver"]
    spectrum = average_spectrum(waveform, rx["window_periods"],
                                rx["overlap_fraction"], rx["window"])
    hint = code.modulation_frequency if rx["use_f0_hint"] else None
    n_max = max_harmonic_order(code.length, ris.spacing_over_wavelength)
    measurement = detect_harmonics(spectrum, hint, n_max,
                                   rx["confidence_threshold"])
    estimate = estimate_aoa(measurement, library,
                            exclude_orders=frozenset(rx["exclude_orders"]),
                            power_domain=rx["power_domain"],
                            normalize_patterns=rx["normalize_patterns"])
    return waveform, spectrum, measurement, estimate


def _sweep_point(doc_json: str, angle: float, seed: int) -> tuple[float, float, int]:
    doc, ris, schedule, library = _context(doc_json)
    _, _, _, estimate = _run_pipeline(doc, ris, schedule, library, angle, seed)
    return angle, estimate.angle_deg, seed


def cmd_pattern(doc: dict, out: Path) -> int:
    _, ris, schedule, library = _context(json.dumps(doc, sort_keys=True))
    io.write_pattern_csv(library, out / "pattern.csv")
    io.write_json(out / "pattern.json", io.pattern_sidecar(library))
    L = schedule.base_code.length
    d_over_lambda = ris.spacing_over_wavelength
    print(f"{'order':>6s} {'steering_deg':>13s} {'library_peak_deg':>17s}")
    for n in library.orders:
        try:
            formula = f"{steering_angle(n, L, d_over_lambda):13.2f}"
        except NonRadiatingHarmonicError:
            formula = f"{'-':>13s}"
        print(f"{n:>6d} {formula} {library.peak_angle(n):17.2f}")
    print(f"wrote {out / 'pattern.csv'}")
    return 0


def cmd_simulate(doc: dict, out: Path) -> int:
    key = json.dumps(doc, sort_keys=True)
    _, ris, schedule, library = _context(key)
    waveform, spectrum, measurement, _ = _run_pipeline(
        doc, ris, schedule, library,
        doc["simulate"]["rx_angle_deg"], doc["channel"]["seed"])
    io.write_waveform_csv(waveform, out / "waveform.csv")
    io.write_json(out / "waveform.json", waveform.sidecar())
    io.write_spectrum_csv(spectrum, out / "spectrum.csv")
    io.write_harmonics_csv(measurement, out / "harmonics.csv")
    strongest = max((n for n in measurement.orders if n != 0),
                    key=measurement.magnitude)
    print(f"strongest non-zero harmonic line: {strongest:+d} "
          f"at {strongest * measurement.fundamental:.3f} Hz")
    print(f"wrote {out / 'waveform.csv'}")
    return 0


def cmd_estimate(doc: dict, out: Path, waveform_path: str,
                 sidecar_path: str | None) -> int:
    _, ris, schedule, library = _context(json.dumps(doc, sort_keys=True))
    csv_path = Path(waveform_path)
    sidecar = Path(sidecar_path) if sidecar_path else csv_path.with_suffix(".json")
    waveform = io.read_waveform_csv(csv_path, sidecar)
    rx = doc["receiver"]
    spectrum = average_spectrum(waveform, rx["window_periods"],
                                rx["overlap_fraction"], rx["window"])
    hint = waveform.modulation_frequency if rx["use_f0_hint"] else None
    n_max = max_harmonic_order(schedule.base_code.length,
                               ris.spacing_over_wavelength)
    measurement = detect_harmonics(spectrum, hint, n_max,
                                   rx["confidence_threshold"])
    estimate = estimate_aoa(measurement, library,
                            exclude_orders=frozenset(rx["exclude_orders"]),
                            power_domain=rx["power_domain"],
                            normalize_patterns=rx["normalize_patterns"])
    io.write_spectrum_csv(spectrum, out / "spectrum.csv")
    io.write_harmonics_csv(measurement, out / "harmonics.csv")
    io.write_estimate_json(estimate, out / "estimate.json")
    print(f"estimated arrival angle: {estimate.angle_deg:.2f} deg "
          f"(f0 {measurement.fundamental:.4f} Hz, "
          f"confidence {measurement.confidence:.2f})")
    return 0


def cmd_sweep(doc: dict, out: Path) -> int:
    sweep = doc["sweep"]
    angles = np.arange(sweep["angle_start_deg"],
                       sweep["angle_stop_deg"] + sweep["angle_step_deg"] / 2,
                       sweep["angle_step_deg"])
    if len(angles) == 0:
        raise ConfigError("sweep: empty angle axis")
    points = [(float(a), sweep["base_seed"] + k)
              for a in angles for k in range(sweep["num_seeds"])]
    doc_json = json.dumps(doc, sort_keys=True)
    workers = int(os.environ.get("RISLOC_WORKERS", "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, [doc_json] * len(points),
                                    [p[0] for p in points],
                                    [p[1] for p in points], chunksize=8))
    else:
        results = [_sweep_point(doc_json, a, s) for a, s in points]
    rows = [(true, est, est - true, seed) for true, est, seed in results]
    io.write_rows_csv(out / "sweep.csv",
                      ["true_deg", "est_deg", "err_deg", "seed"], rows)
    errors = np.array([r[2] for r in rows])
    summary = {
        "num_points": len(rows),
        "rms_error_deg": float(np.sqrt(np.mean(errors ** 2))),
        "p90_abs_error_deg": float(np.percentile(np.abs(errors), 90)),
        "fraction_within_5deg": float(np.mean(np.abs(errors) <= 5.0)),
        "max_abs_error_deg": float(np.max(np.abs(errors))),
        "channel": doc["channel"],
        "receiver": doc["receiver"],
        "sweep": doc["sweep"],
    }
    io.write_json(out / "summary.json", summary)
    print(f"sweep over {len(angles)} angles x {sweep['num_seeds']} seeds: "
          f"RMS {summary['rms_error_deg']:.2f} deg, "
          f"P90 {summary['p90_abs_error_deg']:.2f} deg, "
          f"{100 * summary['fraction_within_5deg']:.1f}% within 5 deg")
    return 0


def cmd_scenario(doc: dict, out: Path) -> int:
    ris = build_ris(doc)
    world = build_world(doc)
    channel = build_channel(doc)
    settings = build_receiver_settings(doc)
    report = run_scenario(doc["scenario"]["name"], world, ris, channel,
                          settings, doc["scenario"]["min_conditioning"])
    io.write_json(out / "scenario.json", report)
    rows = []
    for k, surf in enumerate(report["per_surface"]):
        rows.append(("aoa", k, surf["true_local_aoa_deg"],
                     surf["estimated_local_aoa_deg"], surf["aoa_error_deg"],
                     "", "", "", "", ""))
    if "position_fix" in report:
        fix = report["position_fix"]
        rows.append(("fix", "", "", "", "",
                     fix["true_position_m"][0], fix["true_position_m"][1],
                     fix["estimated_position_m"][0],
                     fix["estimated_position_m"][1],
                     fix["position_error_m"]))
    io.write_rows_csv(out / "scenario.csv",
                      ["record", "surface", "true_deg", "est_deg", "err_deg",
                       "x_true", "y_true", "x_est", "y_est", "pos_err_m"],
                      rows)
    for k, surf in enumerate(report["per_surface"]):
        print(f"surface {k}: true {surf['true_local_aoa_deg']:.2f} deg, "
              f"estimated {surf['estimated_local_aoa_deg']:.2f} deg")
    if "position_fix" in report:
        print(f"position fix error: "
              f"{report['position_fix']['position_error_m']:.3f} m")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risloc",
        description="Harmonic-beam simulation and arrival-angle estimation "
                    "for column-coded switching surfaces.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment configuration")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--seed", type=int, default=None,
                        help="override channel.seed")
    sub.add_parser("pattern", parents=[common],
                   help="emit harmonic patterns and the steering-angle table")
    sub.add_parser("simulate", parents=[common],
                   help="synthesize a capture and its averaged spectrum")
    est = sub.add_parser("estimate", parents=[common],
                         help="run the receiver on an existing waveform file")
    est.add_argument("waveform", help="waveform CSV (t,re,im)")
    est.add_argument("--sidecar", default=None,
                     help="waveform sidecar JSON (default: <waveform>.json)")
    sub.add_parser("sweep", parents=[common],
                   help="sweep true angle x seeds and summarize errors")
    sub.add_parser("scenario", parents=[common],
                   help="run a localization scenario")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        doc = load_config(args.config)
        if args.seed is not None:
            doc["channel"]["seed"] = args.seed
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "pattern":
            return cmd_pattern(doc, out)
        if args.command == "simulate":
            return cmd_simulate(doc, out)
        if args.command == "estimate":
            return cmd_estimate(doc, out, args.waveform, args.sidecar)
        if args.command == "sweep":
            return cmd_sweep(doc, out)
        if args.command == "scenario":
            return cmd_scenario(doc, out)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(json.dumps({"error": "config", "message": str(exc)}),
              file=sys.stderr)
        return 2
    except RislocError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 3
    except Exception as exc:  # pragma: no cover - safety net
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
