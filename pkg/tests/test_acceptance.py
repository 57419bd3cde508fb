"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with ``pytest -v -s tests/test_acceptance.py``).

Criteria 4-6 and 8-9 write their result files through the package's
deterministic writers; criterion 10 reruns them and checks byte identity.
"""

import hashlib
import time
from pathlib import Path

import numpy as np
import pytest

from risloc import (BinaryCode, ChannelConfig, CodeSchedule, RisConfig,
                    angular_resolution, average_spectrum,
                    build_pattern_library, detect_harmonics, estimate_aoa,
                    harmonic_line_amplitudes, harmonic_value,
                    intersect_bearings, local_angle, max_harmonic_order,
                    phase_shift_per_bit, shift_code, steering_angle,
                    synthesize_received)
from risloc.errors import (BehindRayError, IllConditionedError,
                           MissingEntityError, NonRadiatingHarmonicError)
from risloc import RisPose
from risloc.io import write_json, write_rows_csv

from tests.oracles import (dft_fourier_coefficients, relative_errors,
                           sample_code_waveform, two_ray_error_bound)

TAU = 1.87e-3
FC = 5.385e9

# digests of the first run of each file-producing criterion, for the
# determinism check
_DIGESTS: dict[str, dict[str, str]] = {}

STEERING_REFERENCE_16 = {1: 7.18, 2: 14.48, 3: 22.02, 4: 30.00,
                     5: 38.68, 6: 48.59, 7: 61.04, 8: 90.00}


def _report(number: int, description: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    print(f"[criterion {number:2d}] {status}  {description}{suffix}")


def _digest_dir(outdir: Path) -> dict[str, str]:
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(outdir.iterdir())}


def _setup(length: int):
    code = BinaryCode.single_bit(length, 0, TAU)
    schedule = CodeSchedule.with_unit_shifts(code, length)
    ris = RisConfig.half_wavelength(length, length, FC)
    return ris, schedule, code


def _pipeline_estimate(ris, schedule, code, library, angle, channel,
                       periods, n_sp, window_periods):
    waveform = synthesize_received(
        ris, schedule, angle, channel,
        duration=periods * code.period,
        sample_rate=n_sp * code.modulation_frequency)
    spectrum = average_spectrum(waveform, window_periods)
    n_max = max_harmonic_order(code.length, ris.spacing_over_wavelength)
    measurement = detect_harmonics(spectrum, code.modulation_frequency, n_max)
    # the simulated channel carries no carrier leak, so order 0 is clean
    # information and stays in the combination
    estimate = estimate_aoa(measurement, library, exclude_orders=())
    return estimate.angle_deg


def test_criterion_1_steering_angle_table():
    """Steering angles for a 16-bit code at half-wavelength spacing."""
    worst = max(abs(steering_angle(n, 16, 0.5) - expected)
                for n, expected in STEERING_REFERENCE_16.items())
    ok = worst <= 0.01
    _report(1, "steering-angle table (L=16, d/lambda=0.5) within 0.01 deg",
            ok, f"worst {worst:.5f} deg")
    assert ok


def test_criterion_2_phase_shift_and_shift_law():
    """Per-bit phase shift exactness and the cyclic-shift rotation law."""
    exact = phase_shift_per_bit(1, 16) == np.pi / 8
    rng = np.random.default_rng(2024)
    worst_phase = 0.0
    trials = 0
    while trials < 500:
        length = int(rng.choice([8, 16, 32]))
        bits = rng.integers(0, 2, size=length)
        if not bits.any():
            bits[rng.integers(length)] = 1
        code = BinaryCode(tuple(int(b) for b in bits), TAU)
        n = int(rng.integers(-length, length + 1))
        k = int(rng.integers(-2 * length, 2 * length + 1))
        base = harmonic_value(code, n)
        if abs(base) < 1e-3:
            continue  # phase of a near-null coefficient is not well posed
        shifted = harmonic_value(shift_code(code, k), n)
        rotated = base * np.exp(-1j * k * phase_shift_per_bit(n, length))
        err = abs(np.angle(shifted * np.conj(rotated)))
        worst_phase = max(worst_phase, err)
        trials += 1
    ok = exact and worst_phase < 1e-12
    _report(2, "per-bit phase shift exact; shift law on 500 random triples",
            ok, f"worst phase error {worst_phase:.2e} rad")
    assert ok


def test_criterion_3_coefficients_vs_dft_oracle():
    """Closed-form coefficients against the dense-sampled DFT oracle."""
    start = time.perf_counter()
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(200):
        length = int(rng.choice([8, 16, 32]))
        bits = rng.integers(0, 2, size=length)
        if not bits.any():
            bits[rng.integers(length)] = 1
        code = BinaryCode(tuple(int(b) for b in bits), TAU)
        orders = range(-length // 2, length // 2 + 1)
        actual = {n: harmonic_value(code, n) for n in orders}
        oracle = dft_fourier_coefficients(
            sample_code_waveform(code.bits, 4096), orders)
        worst = max(worst, max(relative_errors(actual, oracle).values()))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-8 and elapsed < 10.0
    _report(3, "200 random codes match the DFT oracle within 1e-8",
            ok, f"worst {worst:.2e}, {elapsed:.1f} s")
    assert ok


def _run_criterion_4(outdir: Path) -> bool:
    rows = []
    worst = 0.0
    for length in (8, 16):
        ris, schedule, code = _setup(length)
        fs = 4 * length * code.modulation_frequency
        kwargs = dict(duration=4 * code.period, sample_rate=fs)
        channel = ChannelConfig(snr_db=None, rng_seed=0)
        w_h = synthesize_received(ris, schedule, 17.3, channel, **kwargs)
        w_t = synthesize_received(ris, schedule, 17.3, channel, mode="time",
                                  **kwargs)
        a_h = harmonic_line_amplitudes(w_h)
        a_t = harmonic_line_amplitudes(w_t)
        scale = max(abs(v) for v in a_h.values())
        for n in sorted(a_h):
            err = abs(a_h[n] - a_t[n]) / max(abs(a_h[n]), 1e-6 * scale)
            worst = max(worst, err)
            rows.append((length, n, a_h[n].real, a_h[n].imag,
                         a_t[n].real, a_t[n].imag, err))
    write_rows_csv(outdir / "mode_equivalence.csv",
                   ["code_length", "order", "tone_re", "tone_im",
                    "state_re", "state_im", "rel_err"], rows)
    return worst < 1e-6


def test_criterion_4_mode_equivalence(tmp_path):
    """Tone synthesis and per-sample state synthesis agree line by line."""
    start = time.perf_counter()
    ok = _run_criterion_4(tmp_path)
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 30.0
    _DIGESTS["criterion4"] = _digest_dir(tmp_path)
    _report(4, "harmonic/time synthesis agree within 1e-6 (L=8,16)",
            ok, f"{elapsed:.1f} s")
    assert ok


def _run_criterion_5(outdir: Path) -> bool:
    ris, schedule, code = _setup(16)
    library = build_pattern_library(ris, schedule, grid_step=0.1)
    channel = ChannelConfig(snr_db=None, rng_seed=0)
    rows = []
    worst = 0.0
    for angle in np.arange(-75.0, 75.5, 1.0):
        est = _pipeline_estimate(ris, schedule, code, library, float(angle),
                                 channel, periods=8, n_sp=64,
                                 window_periods=8)
        err = est - float(angle)
        worst = max(worst, abs(err))
        rows.append((float(angle), est, err))
    write_rows_csv(outdir / "roundtrip.csv",
                   ["true_deg", "est_deg", "err_deg"], rows)
    return worst <= angular_resolution(16)


def test_criterion_5_noiseless_round_trip(tmp_path):
    """End-to-end noiseless estimation across the field of view."""
    start = time.perf_counter()
    ok = _run_criterion_5(tmp_path)
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 120.0
    _DIGESTS["criterion5"] = _digest_dir(tmp_path)
    _report(5, "noiseless round trip |err| <= 3.75 deg on [-75, 75]",
            ok, f"{elapsed:.1f} s")
    assert ok


def _run_criterion_6(outdir: Path) -> bool:
    ris, schedule, code = _setup(8)
    library = build_pattern_library(ris, schedule, grid_step=0.1)
    angles = np.arange(-60.0, 60.5, 5.0)
    rows = []
    hits = 0
    total = 0
    for angle in angles:
        for seed in range(100):
            channel = ChannelConfig(snr_db=10.0, rng_seed=seed)
            est = _pipeline_estimate(ris, schedule, code, library,
                                     float(angle), channel, periods=64,
                                     n_sp=32, window_periods=8)
            err = est - float(angle)
            rows.append((float(angle), est, err, seed))
            hits += abs(err) <= 5.0
            total += 1
    fraction = hits / total
    write_rows_csv(outdir / "fig_analogue_sweep.csv",
                   ["true_deg", "est_deg", "err_deg", "seed"], rows)
    write_json(outdir / "fig_analogue_summary.json", {
        "fraction_within_5deg": fraction,
        "num_points": total,
        "channel": {"snr_db": 10.0, "carrier_leak": 0.0, "multipath": [],
                    "seeds": "0..99 per angle"},
        "receiver": {"window_periods": 8, "num_windows": 8,
                     "samples_per_period": 32, "excluded_orders": [],
                     "grid_step_deg": 0.1},
        "array": {"num_columns": 8, "num_rows": 8, "code_length": 8,
                  "spacing_over_wavelength": 0.5},
    })
    return fraction >= 0.80


def test_criterion_6_noisy_sweep_accuracy(tmp_path):
    """Noisy 8-column sweep: at least 80 percent within 5 degrees."""
    start = time.perf_counter()
    ok = _run_criterion_6(tmp_path)
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 600.0
    _DIGESTS["criterion6"] = _digest_dir(tmp_path)
    _report(6, "L=8 sweep at 10 dB: >= 80% of estimates within 5 deg",
            ok, f"{elapsed:.1f} s")
    assert ok


def test_criterion_7_radiating_order_limit():
    """Orders past L/2 raise; the radiating limit equals L/2 for even L."""
    ok = True
    for length in (8, 16, 32):
        ok = ok and max_harmonic_order(length, 0.5) == length // 2
        for n in (length // 2 + 1, -(length // 2 + 1), length):
            with pytest.raises(NonRadiatingHarmonicError):
                steering_angle(n, length, 0.5)
    _report(7, "non-radiating orders rejected; limit L/2 for L=8,16,32", ok)
    assert ok


def _run_criterion_8(outdir: Path) -> bool:
    ris, schedule, code = _setup(16)
    library = build_pattern_library(ris, schedule, grid_step=0.1)
    snrs = (-10.0, 0.0, 10.0, 20.0)
    medians = []
    for snr in snrs:
        errors = []
        for seed in range(200):
            channel = ChannelConfig(snr_db=snr, rng_seed=seed)
            est = _pipeline_estimate(ris, schedule, code, library, 22.0,
                                     channel, periods=5, n_sp=48,
                                     window_periods=5)
            errors.append(abs(est - 22.0))
        medians.append(float(np.median(errors)))
    write_rows_csv(outdir / "snr_medians.csv",
                   ["snr_db", "median_abs_err_deg"],
                   list(zip(snrs, medians)))
    return all(medians[i] >= medians[i + 1] - 1e-12
               for i in range(len(medians) - 1))


def test_criterion_8_monotone_degradation(tmp_path):
    """Median error does not grow as the SNR improves."""
    ok = _run_criterion_8(tmp_path)
    _DIGESTS["criterion8"] = _digest_dir(tmp_path)
    _report(8, "median error non-increasing over SNR {-10, 0, 10, 20} dB", ok)
    assert ok


def _run_criterion_9(outdir: Path) -> bool:
    f0 = 1.0 / (16 * TAU)
    p1 = RisPose(position=(0.0, 0.0), boresight_deg=90.0,
                 modulation_frequency=f0)
    p2 = RisPose(position=(10.0, 0.0), boresight_deg=90.0,
                 modulation_frequency=f0 * 18)
    # exact inversion
    fix = intersect_bearings([(p1, local_angle(p1, (5.0, 5.0))),
                              (p2, local_angle(p2, (5.0, 5.0)))])
    exact_err = float(np.hypot(fix.position[0] - 5.0, fix.position[1] - 5.0))
    ok = exact_err < 1e-6
    # quantized Monte Carlo against the geometric propagation bound
    rng = np.random.default_rng(99)
    step = angular_resolution(16)
    rows = []
    checked = 0
    while checked < 1000:
        user = (float(rng.uniform(-15.0, 25.0)), float(rng.uniform(2.0, 30.0)))
        try:
            a1, a2 = local_angle(p1, user), local_angle(p2, user)
            qfix = intersect_bearings(
                [(p1, round(a1 / step) * step), (p2, round(a2 / step) * step)],
                min_conditioning=0.2)
        except (MissingEntityError, IllConditionedError, BehindRayError):
            continue
        ranges = [np.hypot(user[0], user[1]),
                  np.hypot(user[0] - 10.0, user[1])]
        bound = two_ray_error_bound(ranges, qfix.geometry_conditioning, step)
        err = float(np.hypot(qfix.position[0] - user[0],
                             qfix.position[1] - user[1]))
        ok = ok and err <= bound
        rows.append((user[0], user[1], qfix.position[0], qfix.position[1],
                     err, bound, qfix.geometry_conditioning))
        checked += 1
    write_rows_csv(outdir / "bearing_fixes.csv",
                   ["x_true", "y_true", "x_est", "y_est", "err_m", "bound_m",
                    "conditioning"], rows)
    return ok


def test_criterion_9_bearing_intersection(tmp_path):
    """Exact inversion and quantized Monte Carlo within the geometric bound."""
    ok = _run_criterion_9(tmp_path)
    _DIGESTS["criterion9"] = _digest_dir(tmp_path)
    _report(9, "bearing intersection exact and bounded under quantization", ok)
    assert ok


def test_criterion_10_determinism(tmp_path):
    """Criteria 4-6 and 8-9 write byte-identical files across reruns."""
    payloads = {
        "criterion4": _run_criterion_4,
        "criterion5": _run_criterion_5,
        "criterion6": _run_criterion_6,
        "criterion8": _run_criterion_8,
        "criterion9": _run_criterion_9,
    }
    ok = True
    for name, payload in payloads.items():
        first = _DIGESTS.get(name)
        if first is None:  # criterion test filtered out; run it here
            ref_dir = tmp_path / f"{name}_ref"
            ref_dir.mkdir()
            payload(ref_dir)
            first = _digest_dir(ref_dir)
        rerun_dir = tmp_path / f"{name}_rerun"
        rerun_dir.mkdir()
        payload(rerun_dir)
        ok = ok and (first == _digest_dir(rerun_dir))
    _report(10, "criteria 4-6, 8-9 outputs byte-identical across reruns", ok)
    assert ok
